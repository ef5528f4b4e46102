"""Registry of the numerical constants used by the lemma checks and the K chain.

Both :mod:`phi4flow.lemmas` and :mod:`phi4flow.chain` read constants from a
:class:`ConstantRegistry` instance so there is exactly one place where a
claimed value lives.
"""
from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from fractions import Fraction


@dataclass(frozen=True)
class ConstantRegistry:
    """Claimed constants of the elementary bounds.

    ``k_w`` and ``k_w_half`` hold the derivative constants for the full-width
    (exp(-p^2/L^2)) and half-width (exp(-p^2/2L^2)) regulator, indexed by |w|.
    """

    K0: float = 20.0
    K0_prime: float = float(Fraction(27, 64) * 5)  # (3/4)^3 * 5 = 2.109375
    K0_second: float = 5.0
    c: tuple[float, float, float, float] = (1.0, 1.4, 2.5, 5.25)
    K2: float = 6.2
    K3: float = 1.0 / 3.0
    k_w: tuple[float, float, float, float] = (6.2, 4.6, 77.5, 37.0)
    k_w_half: tuple[float, float, float, float] = (6.2, 9.2, 135.0, 407.0)
    K1: float = 3.1
    K1_prime: float = 14.5
    origin: str = field(default="default", compare=False)

    def scalar_names(self) -> list[str]:
        return [f.name for f in dataclasses.fields(self)
                if f.name != "origin" and not isinstance(getattr(self, f.name), tuple)]

    def get(self, name: str) -> float:
        """Look up a constant; tuple entries are addressed as ``c[3]`` or ``k_w[2]``."""
        m = re.fullmatch(r"(\w+)\[(\d)\]", name)
        if m:
            return getattr(self, m.group(1))[int(m.group(2))]
        value = getattr(self, name, None)
        if value is None or isinstance(value, (tuple, str)):
            raise KeyError(f"unknown constant {name!r}")
        return value

    def replace(self, name: str, value: float) -> "ConstantRegistry":
        """Return a copy with one constant changed (tuple entries via ``k_w[1]``)."""
        m = re.fullmatch(r"(\w+)\[(\d)\]", name)
        if m:
            base, idx = m.group(1), int(m.group(2))
            old = getattr(self, base, None)
            if not isinstance(old, tuple):
                raise KeyError(f"unknown constant {name!r}")
            new = tuple(value if i == idx else v for i, v in enumerate(old))
            return dataclasses.replace(self, **{base: new}, origin="modified")
        self.get(name)
        return dataclasses.replace(self, **{name: float(value)}, origin="modified")

    def perturbed(self, text: str) -> "ConstantRegistry":
        """Apply a perturbation like ``K2=+10%`` or ``K0=25``."""
        m = re.fullmatch(r"\s*([\w\[\]]+)\s*=\s*([+-]?[\d.eE+-]+)\s*(%?)\s*", text)
        if not m:
            raise ValueError(f"malformed perturbation {text!r}; expected NAME=+10% or NAME=value")
        name, amount, pct = m.groups()
        current = self.get(name)
        if pct:
            return self.replace(name, current * (1.0 + float(amount) / 100.0))
        return self.replace(name, float(amount))

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}


DEFAULT = ConstantRegistry()
