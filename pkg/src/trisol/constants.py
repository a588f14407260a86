"""Closed-form constants of the three-solutions machinery.

For a bounded domain of dimension N >= 3 with measure ``m`` and inradius
``D``, and an exponent ``q`` below the critical exponent 2* = 2N/(N-2),
the toolkit needs four derived constants:

* ``c_q``  -- explicit bound on the H^1_0 -> L^q embedding constant,
              m^((2*-q)/(2* q)) / sqrt(N (N-2) pi) * (N! / (2 Gamma(N/2+1)))^(1/N)
* ``kappa`` -- cone-geometry constant,
              D sqrt(2) / (2 pi^(N/4)) * sqrt(Gamma(N/2+1) / (D^N - (D/2)^N))
* ``K1``   -- 2 sqrt(2) c1 (2^N - 1) / D^2
* ``K2``   -- 2^((q+2)/2) c_q^q (2^N - 1) / (q D^2)

All Gamma evaluations go through log-gamma so large N cannot overflow;
N! is evaluated as Gamma(N+1).  Everything here is a pure function of its
arguments and is safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DimensionTooSmallError, ExponentOutOfRangeError, InvalidParameterError

__all__ = [
    "ConstantsReport",
    "embedding_bound",
    "kappa",
    "k1_k2",
    "two_star",
    "unit_ball_volume",
    "compute_report",
]


def two_star(n: int) -> float:
    """Critical Sobolev exponent 2N/(N-2); defined for N >= 3 only."""
    if n <= 2:
        raise DimensionTooSmallError(
            f"critical exponent 2N/(N-2) degenerates for N={n}; need N >= 3"
        )
    return 2.0 * n / (n - 2.0)


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n: pi^(n/2) / Gamma(n/2 + 1)."""
    return math.pi ** (n / 2.0) / math.exp(math.lgamma(n / 2.0 + 1.0))


def embedding_bound(q: float, n: int, measure: float) -> float:
    """Explicit bound on the H^1_0 -> L^q embedding constant.

    Valid for n >= 3, 1 <= q < 2n/(n-2) and measure >= 0.  The bound is
    increasing in the measure because the exponent (2*-q)/(2* q) is
    positive for q below the critical exponent.
    """
    if n <= 2:
        raise DimensionTooSmallError(
            f"embedding bound needs N >= 3 (got N={n}); "
            "supply c_q explicitly for low-dimensional runs"
        )
    ts = two_star(n)
    if not (1.0 <= q < ts):
        raise ExponentOutOfRangeError(f"q={q} outside [1, {ts}) for N={n}")
    if measure < 0:
        raise InvalidParameterError(f"measure must be non-negative, got {measure}")
    if measure == 0.0:
        return 0.0
    exponent = (ts - q) / (ts * q)
    # N! / (2 Gamma(N/2+1)) via log-gamma, then the 1/N-th root.
    log_ratio = math.lgamma(n + 1.0) - math.log(2.0) - math.lgamma(n / 2.0 + 1.0)
    return (
        measure**exponent
        / math.sqrt(n * (n - 2.0) * math.pi)
        * math.exp(log_ratio / n)
    )


def kappa(d: float, n: int) -> float:
    """Cone constant D sqrt(2)/(2 pi^(N/4)) * sqrt(Gamma(N/2+1)/(D^N - (D/2)^N)).

    Scales like D^(1 - N/2): the combination
    kappa * sqrt(D^N - (D/2)^N) / D is independent of D.
    """
    if d <= 0:
        raise InvalidParameterError(f"inradius must be positive, got {d}")
    if n < 1:
        raise InvalidParameterError(f"dimension must be >= 1, got {n}")
    shell = d**n - (d / 2.0) ** n
    return (
        d
        * math.sqrt(2.0)
        / (2.0 * math.pi ** (n / 4.0))
        * math.sqrt(math.exp(math.lgamma(n / 2.0 + 1.0)) / shell)
    )


def k1_k2(d: float, n: int, q: float, c1: float, cq: float) -> tuple[float, float]:
    """The pair (K1, K2) built from the embedding bounds c1 and c_q.

    K1 = 2 sqrt(2) c1 (2^N - 1) / D^2
    K2 = 2^((q+2)/2) c_q^q (2^N - 1) / (q D^2)

    Both decrease strictly in D and increase in their embedding constant.
    c1 = cq = 0 is allowed and yields (0, 0).
    """
    if d <= 0:
        raise InvalidParameterError(f"inradius must be positive, got {d}")
    if q <= 1:
        raise InvalidParameterError(f"q must exceed 1, got {q}")
    if c1 < 0 or cq < 0:
        raise InvalidParameterError("embedding constants must be non-negative")
    shells = 2.0**n - 1.0
    k1 = 2.0 * math.sqrt(2.0) * c1 * shells / d**2
    k2 = 2.0 ** ((q + 2.0) / 2.0) * cq**q * shells / (q * d**2)
    return k1, k2


@dataclass(frozen=True)
class ConstantsReport:
    """All closed-form constants for one (domain, q) configuration.

    ``d`` is the inradius of the domain, ``measure`` its volume.  The
    stored values satisfy the K1/K2 formulas exactly given (c1, cq, d, q, n).
    """

    n: int
    measure: float
    two_star: float
    d: float
    c1: float
    cq: float
    kappa: float
    k1: float
    k2: float
    q: float

    def __post_init__(self) -> None:
        if self.n < 3:
            raise DimensionTooSmallError(f"ConstantsReport requires N >= 3, got {self.n}")
        if not (1.0 < self.q < self.two_star):
            raise ExponentOutOfRangeError(
                f"q={self.q} outside (1, {self.two_star}) for N={self.n}"
            )
        for name in ("measure", "d", "c1", "cq", "kappa", "k1", "k2"):
            if getattr(self, name) <= 0:
                raise InvalidParameterError(f"{name} must be positive")

    def to_json(self) -> dict:
        """Flat JSON object with the wire field names."""
        return {
            "n": self.n,
            "measure": self.measure,
            "two_star": self.two_star,
            "d": self.d,
            "c1": self.c1,
            "cq": self.cq,
            "kappa": self.kappa,
            "k1": self.k1,
            "k2": self.k2,
            "q": self.q,
        }


def compute_report(n: int, measure: float, d: float, q: float) -> ConstantsReport:
    """Assemble the full constants report for one configuration."""
    c1 = embedding_bound(1.0, n, measure)
    cq = embedding_bound(q, n, measure)
    kap = kappa(d, n)
    k1, k2 = k1_k2(d, n, q, c1, cq)
    return ConstantsReport(
        n=n,
        measure=measure,
        two_star=two_star(n),
        d=d,
        c1=c1,
        cq=cq,
        kappa=kap,
        k1=k1,
        k2=k2,
        q=q,
    )
