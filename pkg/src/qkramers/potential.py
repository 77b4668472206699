"""Metastable cubic potential ``V(x) = -(A/3) x^3 + B x^2``.

The well sits at ``x0 = 0`` and the barrier top at ``xb = 2B/A``.
"""

import dataclasses
import json

import numpy as np

from .errors import DomainError


@dataclasses.dataclass(frozen=True)
class CubicPotential:
    a_bar: float
    b_bar: float

    def __post_init__(self):
        if not (self.a_bar > 0 and self.b_bar > 0):
            raise DomainError(f"a_bar and b_bar must be positive, got {self.a_bar}, {self.b_bar}")

    @classmethod
    def from_energy(cls, a_bar, e_act):
        """Build the potential whose barrier height is ``e_act``: ``B = (3/4 A^2 E)^(1/3)``."""
        if not (a_bar > 0 and e_act > 0):
            raise DomainError("from_energy requires a_bar > 0 and e_act > 0")
        return cls(a_bar, (0.75 * a_bar**2 * e_act) ** (1.0 / 3.0))

    @property
    def x0(self):
        return 0.0

    @property
    def xb(self):
        return 2.0 * self.b_bar / self.a_bar

    @property
    def omega0_sq(self):
        return self.derivative(self.x0, 2)

    @property
    def omegab_sq(self):
        return -self.derivative(self.xb, 2)

    @property
    def e_act(self):
        return self.derivative(self.xb, 0) - self.derivative(self.x0, 0)

    @property
    def e_act_closed(self):
        return 4.0 / 3.0 * self.b_bar**3 / self.a_bar**2

    def derivative(self, x, order=0):
        """Exact polynomial derivative of order 0..3."""
        a, b = self.a_bar, self.b_bar
        x = np.asarray(x, dtype=float)
        if order == 0:
            out = -a / 3.0 * x**3 + b * x**2
        elif order == 1:
            out = -a * x**2 + 2.0 * b * x
        elif order == 2:
            out = -2.0 * a * x + 2.0 * b
        elif order == 3:
            out = np.full_like(x, -2.0 * a)
        else:
            raise DomainError(f"derivative order must be 0..3, got {order}")
        return out if out.ndim else float(out)

    def __call__(self, x):
        return self.derivative(x, 0)

    def to_dict(self):
        return {"a_bar": self.a_bar, "b_bar": self.b_bar}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        has_e, has_b = "e_act" in d, "b_bar" in d
        if has_e == has_b:
            raise DomainError("potential config needs exactly one of 'e_act' or 'b_bar'")
        if "a_bar" not in d:
            raise DomainError("potential config needs 'a_bar'")
        extra = set(d) - {"a_bar", "e_act", "b_bar"}
        if extra:
            raise DomainError(f"unknown potential keys: {sorted(extra)}")
        if has_e:
            return cls.from_energy(float(d["a_bar"]), float(d["e_act"]))
        return cls(float(d["a_bar"]), float(d["b_bar"]))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))
