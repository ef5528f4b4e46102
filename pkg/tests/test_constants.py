from __future__ import annotations

import pytest

from phi4flow.constants import DEFAULT, ConstantRegistry


def test_defaults():
    assert DEFAULT.K0_prime == pytest.approx(27 / 64 * 5)
    assert DEFAULT.get("k_w[3]") == 37.0
    assert DEFAULT.get("K2") == 6.2


def test_replace_and_perturb_are_copies():
    r = DEFAULT.perturbed("K2=+10%")
    assert r.K2 == pytest.approx(6.82)
    assert DEFAULT.K2 == 6.2
    assert r.origin == "modified"
    assert DEFAULT.replace("k_w_half[2]", 1.0).k_w_half == (6.2, 9.2, 1.0, 407.0)
    assert DEFAULT.perturbed("K0=25").K0 == 25.0


@pytest.mark.parametrize("bad", ["K9=1", "K2", "c[7]=1", "K2=abc%"])
def test_bad_perturbations(bad):
    with pytest.raises((KeyError, ValueError, IndexError)):
        DEFAULT.perturbed(bad)


def test_registry_is_hashable_value_object():
    assert ConstantRegistry() == DEFAULT
    assert "K1_prime" in DEFAULT.as_dict()
