from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from ..errors import ConfigurationError


@dataclass(frozen=True)
class FormWeights:
    """Physical coefficients; every default is 1 (or 0 for the optional
    thin-wall terms).

    ``C1`` is added to ``c2`` as an extra membrane stiffness, ``C0`` is a
    spring term, ``D0``/``D1`` are thin-wall viscosities. ``C2``/``D2``
    (fourth-order bending terms) are not supported and must stay zero.
    """

    rho_f: float = 1.0
    mu: float = 1.0
    rho_s1h: float = 1.0
    c2: float = 1.0
    C0: float = 0.0
    C1: float = 0.0
    C2: float = 0.0
    D0: float = 0.0
    D1: float = 0.0
    D2: float = 0.0
    lam: float = 1.0
    mu_s: float = 1.0
    rho_s2: float = 1.0

    def validate(self) -> None:
        errors = []
        for f in fields(self):
            value = getattr(self, f.name)
            if not np.isfinite(value):
                errors.append(f"physics.{f.name} must be finite, got {value!r}")
        for name in ("rho_f", "mu", "rho_s1h", "c2", "mu_s", "rho_s2"):
            if getattr(self, name) <= 0:
                errors.append(f"physics.{name} must be positive, got {getattr(self, name)!r}")
        for name in ("C0", "C1", "D0", "D1"):
            if getattr(self, name) < 0:
                errors.append(f"physics.{name} must be non-negative, got {getattr(self, name)!r}")
        if self.lam < 0:
            errors.append(f"physics.lam must be non-negative, got {self.lam!r}")
        for name in ("C2", "D2"):
            if getattr(self, name) != 0:
                errors.append(f"physics.{name} (fourth-order bending term) is not supported; "
                              "it needs C1-continuous elements")
        if errors:
            raise ConfigurationError(errors)

    @property
    def membrane(self) -> float:
        return self.c2 + self.C1

    @property
    def has_wall_damping(self) -> bool:
        return self.D0 != 0 or self.D1 != 0
