"""Hyperparameter bundle and consistency checks on the schedule constants.

The training schedule couples six positive constants c1..c6, the first
layer scale exponent tau, the inverse step size L_n, and the step count
t_n = ceil(c6 * L_n * log n).  Three inequalities tie the constants
together:

    2*c3*c6 >= 1,   c4*c5 >= 1,   4*c4*c6 <= 1.

The commonly suggested defaults c4 = 1/c5, c6 = c5/4, c3 = 1/(8*c5)
satisfy the second and third but give 2*c3*c6 = 1/16, violating the
first.  Construction therefore never rejects a parameter set; instead
check_constants() evaluates all three inequalities literally and callers
decide what to do with reported violations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional


def ceil_stable(x: float) -> int:
    """ceil() that forgives float dust just above an integer.

    ceil(c6 * L_n * log n) is exact integer arithmetic in the theory; in
    floats the product can land at k + 1e-13 when the true value is k.
    """
    return math.ceil(x - 1e-9 * max(1.0, abs(x)))


@dataclass(frozen=True)
class DeskOverrides:
    """Feasible substitutes for the astronomically large schedule values.

    Any field left None falls back to the full-scale formula value.
    """

    K_cap: Optional[int] = None
    t_n_cap: Optional[int] = None
    L_n_cap: Optional[float] = None


@dataclass(frozen=True)
class HyperParams:
    n: int
    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    c6: float
    tau: float
    L_n: float
    t_n: int
    desk: Optional[DeskOverrides] = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"sample size n must be >= 2, got {self.n}")
        for name in ("c1", "c2", "c3", "c4", "c5", "c6", "tau", "L_n"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be a positive finite real, got {value}")
        if self.t_n < 0:
            raise ValueError(f"step count t_n must be >= 0, got {self.t_n}")

    @property
    def log_n(self) -> float:
        return math.log(self.n)

    @property
    def beta_n(self) -> float:
        """Truncation level c4 * log n."""
        return self.c4 * self.log_n

    @property
    def lambda_n(self) -> float:
        """Step size, exactly 1/L_n."""
        return 1.0 / self.L_n

    @classmethod
    def remark_defaults(
        cls,
        n: int,
        c5: float = 1.0,
        *,
        c1: float = 8.0,
        c2: float = 1.0,
        tau: Optional[float] = None,
        d: Optional[int] = None,
        L_n: Optional[float] = None,
        t_n: Optional[int] = None,
        desk: Optional[DeskOverrides] = None,
    ) -> "HyperParams":
        """Parameter set from the standard defaults c4=1/c5, c6=c5/4, c3=1/(8 c5).

        Exactly one of L_n / t_n must be given; the other is derived from
        t_n = ceil(c6 * L_n * log n).  tau defaults to 1/(1+d) when d is
        given.  Note these defaults intentionally leave 2*c3*c6 = 1/16 < 1;
        see check_constants().
        """
        if tau is None:
            if d is None:
                raise ValueError("give either tau or the input dimension d")
            tau = 1.0 / (1.0 + d)
        c3 = 1.0 / (8.0 * c5)
        c4 = 1.0 / c5
        c6 = c5 / 4.0
        log_n = math.log(n)
        if (L_n is None) == (t_n is None):
            raise ValueError("give exactly one of L_n, t_n")
        if L_n is None:
            L_n = t_n / (c6 * log_n)
        else:
            t_n = ceil_stable(c6 * L_n * log_n)
        return cls(
            n=n, c1=c1, c2=c2, c3=c3, c4=c4, c5=c5, c6=c6,
            tau=tau, L_n=L_n, t_n=t_n, desk=desk,
        )

    def with_steps(self, t_n: int) -> "HyperParams":
        """Same constants, t_n steps, L_n rescaled to keep t_n = ceil(c6 L_n log n)."""
        L_n = t_n / (self.c6 * self.log_n)
        return replace(self, t_n=t_n, L_n=L_n)

    def with_inverse_step(self, L_n: float) -> "HyperParams":
        """Same constants, inverse step size L_n, t_n rederived from the schedule."""
        return replace(self, L_n=L_n, t_n=ceil_stable(self.c6 * L_n * self.log_n))

    def check_constants(self) -> list["ConstraintCheck"]:
        """Evaluate the three schedule inequalities plus the step-count coupling.

        Violations are reported, never raised: parameter sets outside the
        inequalities are legitimate configurations whose guarantees simply
        do not apply.
        """
        checks = [
            ConstraintCheck(
                "2*c3*c6 >= 1", 2.0 * self.c3 * self.c6, 1.0, ">=",
            ),
            ConstraintCheck(
                "c4*c5 >= 1", self.c4 * self.c5, 1.0, ">=",
            ),
            ConstraintCheck(
                "4*c4*c6 <= 1", 4.0 * self.c4 * self.c6, 1.0, "<=",
            ),
            ConstraintCheck(
                "t_n = ceil(c6*L_n*log n)",
                float(self.t_n),
                float(ceil_stable(self.c6 * self.L_n * self.log_n)),
                "==",
            ),
        ]
        return checks

    def violations(self) -> list["ConstraintCheck"]:
        return [c for c in self.check_constants() if not c.holds]


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    lhs: float
    rhs: float
    relation: str

    @property
    def holds(self) -> bool:
        if self.relation == ">=":
            return self.lhs >= self.rhs
        if self.relation == "<=":
            return self.lhs <= self.rhs
        if self.relation == "==":
            return self.lhs == self.rhs
        raise ValueError(f"unknown relation {self.relation!r}")

    def __str__(self) -> str:
        mark = "ok" if self.holds else "VIOLATED"
        return f"{self.name}: lhs={self.lhs:.6g} rhs={self.rhs:.6g} [{mark}]"
