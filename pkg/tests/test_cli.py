from __future__ import annotations

import json

import pytest

from phi4flow.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, OUTPUT_ENV, build_parser, main, resolve


def _payload(path):
    return json.loads(path.read_text())["payload"]


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    out = tmp_path_factory.mktemp("solve")
    code = main(["solve", "--l-max", "1", "--output-dir", str(out), "--threads", "2"])
    return code, out


# ---------------------------------------------------------------- configuration

def test_config_precedence(tmp_path, monkeypatch):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("seed = 5\nthreads = 3\noutput_dir = from-file\nK = 2.5\n")
    monkeypatch.delenv(OUTPUT_ENV, raising=False)
    args = build_parser().parse_args(["verify-bounds", "--config", str(cfg_file)])
    cfg = resolve(args)
    assert (cfg.seed, cfg.threads, cfg.output_dir, cfg.params["K"]) == (5, 3, "from-file", 2.5)
    monkeypatch.setenv(OUTPUT_ENV, "from-env")
    assert resolve(args).output_dir == "from-env"
    args = build_parser().parse_args(["verify-bounds", "--config", str(cfg_file), "--seed", "7",
                                      "--output-dir", "from-flag", "--K", "9"])
    cfg = resolve(args)
    assert (cfg.seed, cfg.output_dir, cfg.params["K"]) == (7, "from-flag", 9.0)


def test_config_file_with_sections(tmp_path):
    cfg_file = tmp_path / "run.ini"
    cfg_file.write_text("[run]\nseed = 2\n[solver]\nlam0 = 400\n")
    cfg = resolve(build_parser().parse_args(["solve", "--config", str(cfg_file)]))
    assert cfg.seed == 2 and cfg.params["lam0"] == 400.0


@pytest.mark.parametrize("argv", [
    ["certify-lemmas", "--lemma", "9"],
    ["certify-lemmas", "--perturb", "K2=lots"],
    ["certify-lemmas", "--perturb", "nosuch=+10%"],
    ["certify-k", "--records", "nosuch"],
    ["certify-k", "--caps", "2"],
    ["certify-k", "--caps", "x"],
    ["solve", "--lam0", "5"],
    ["solve", "--family", "six-point"],
    ["verify-bounds", "--tables", "does-not-exist.json"],
    ["frobnicate"],
    ["solve", "--config", "missing.cfg"],
    ["certify-k", "--threads", "0"],
])
def test_usage_errors_exit_2(argv, tmp_path):
    assert main(argv + ["--output-dir", str(tmp_path)] if argv[0] != "frobnicate" else argv) == EXIT_USAGE


# ---------------------------------------------------------------- certification commands

def test_certify_lemmas_selection_and_outputs(tmp_path):
    assert main(["certify-lemmas", "--lemma", "8", "--lemma", "1", "--output-dir", str(tmp_path)]) == EXIT_OK
    doc = _payload(tmp_path / "lemmas.json")
    assert [r["lemma"] for r in doc["reports"]] == ["lemma1", "lemma8"]
    assert (tmp_path / "lemmas.csv").read_text().startswith("lemma,check")


def test_certify_lemmas_perturbation_fails(tmp_path):
    assert main(["certify-lemmas", "--lemma", "3", "--perturb", "c[3]=1", "--output-dir", str(tmp_path)]) == EXIT_FAIL


def test_outputs_are_byte_identical(tmp_path):
    args = ["certify-lemmas", "--lemma", "8", "--seed", "4", "--threads", "1", "--output-dir", str(tmp_path)]
    main(args)
    first = (tmp_path / "lemmas.json").read_bytes()
    main(args)
    assert (tmp_path / "lemmas.json").read_bytes() == first
    args = ["certify-k", "--threads", "1", "--output-dir", str(tmp_path)]
    main(args)
    first = (tmp_path / "k_chain.json").read_bytes()
    main(args)
    assert (tmp_path / "k_chain.json").read_bytes() == first


def test_certify_k_single_record_passes(tmp_path):
    assert main(["certify-k", "--records", "bdke", "--output-dir", str(tmp_path)]) == EXIT_OK
    doc = _payload(tmp_path / "k_chain.json")
    assert doc["binding"]["id"] == "bdke"
    assert 5.9e5 < doc["K_star"] < 6.2e5


def test_certify_k_perturbation_raises_k(tmp_path):
    main(["certify-k", "--records", "bdke", "--output-dir", str(tmp_path)])
    base = _payload(tmp_path / "k_chain.json")["K_star"]
    assert main(["certify-k", "--records", "bdke", "--perturb", "K2=+10%", "--output-dir", str(tmp_path)]) == EXIT_FAIL
    assert _payload(tmp_path / "k_chain.json")["K_star"] > base


def test_certify_k_claimed_threshold(tmp_path):
    assert main(["certify-k", "--records", "bdke", "--claimed-k", "1e5", "--output-dir", str(tmp_path)]) == EXIT_FAIL


# ---------------------------------------------------------------- solver commands

def test_solve_writes_tables(solved):
    code, out = solved
    assert code == EXIT_OK
    doc = _payload(out / "solve.json")
    assert doc["passed"]
    assert set(doc["tables"]) == {"L4,0", "L6,0", "L8,0", "L2,1", "L4,1"}
    assert (out / "table_L4_1.csv").exists()
    assert _payload(out / "tables.json")["g"] == 1.0


def test_verify_bounds_from_tables(solved, tmp_path):
    _, out = solved
    tables = str(out / "tables.json")
    assert main(["verify-bounds", "--tables", tables, "--K", "6.2e5", "--output-dir", str(tmp_path)]) == EXIT_OK
    assert main(["verify-bounds", "--tables", tables, "--K", "1e-3", "--output-dir", str(tmp_path)]) == EXIT_FAIL
    rep = _payload(tmp_path / "bounds.json")["report"]
    assert rep["checks"][0]["computed"] > 0


def test_verify_bounds_empty_tables(tmp_path):
    p = tmp_path / "tables.json"
    p.write_text(json.dumps({"payload": {"tables": {}}}))
    assert main(["verify-bounds", "--tables", str(p), "--output-dir", str(tmp_path)]) == EXIT_USAGE


def test_report_aggregates(solved, tmp_path):
    assert main(["report", "--output-dir", str(tmp_path)]) == EXIT_USAGE
    main(["certify-lemmas", "--lemma", "8", "--output-dir", str(tmp_path)])
    assert main(["report", "--output-dir", str(tmp_path)]) == EXIT_OK
    main(["certify-k", "--output-dir", str(tmp_path)])
    assert main(["report", "--output-dir", str(tmp_path)]) == EXIT_FAIL
    rows = (tmp_path / "summary.csv").read_text().splitlines()
    assert rows[0] == "file,kind,passed" and len(rows) == 3

