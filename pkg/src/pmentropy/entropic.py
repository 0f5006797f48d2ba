"""Binary Shannon entropies and the entropic noncontextuality inequality."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation
from .pmsquare import ProductDistribution

# probabilities below this contribute exactly zero (0 log 0 = 0)
ZERO_CUTOFF = 1e-300

TERM_LABELS = ("H(A.a.alpha)", "H(B.b.beta)", "H(C.c.gamma)",
               "H(A.B.C)", "H(a.b.c)", "H(alpha.beta.gamma)")


def _h(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    safe = np.where(p > ZERO_CUTOFF, p, 1.0)
    return np.where(p > ZERO_CUTOFF, -p * np.log2(safe), 0.0)


def binary_entropy(p_minus) -> np.ndarray:
    """Vectorized entropy in bits of (1 - p, p)."""
    p_minus = np.asarray(p_minus, dtype=float)
    return _h(p_minus) + _h(1.0 - p_minus)


def h_binary(dist: ProductDistribution) -> float:
    if abs(dist.p_plus + dist.p_minus - 1) > 1e-8:
        raise ContractViolation("entropy of an unnormalized distribution")
    h = float(_h(dist.p_plus) + _h(dist.p_minus))
    return min(max(h, 0.0), 1.0)


def linear_entropy_sigma(p: float, n: int) -> float:
    """First-order error propagation of the binary entropy for a binomial estimate.

    Diverges at p in {0, 1}; only meaningful away from the boundary.
    """
    if not 0 < p < 1:
        return float("inf")
    return abs(np.log2((1 - p) / p)) * np.sqrt(p * (1 - p) / n)


@dataclass(frozen=True)
class EntropySextet:
    h1: float
    h2: float
    h3: float
    h4: float
    h5: float
    h6: float

    def __post_init__(self):
        for h in self.as_tuple():
            if not (-1e-12 <= h <= 1 + 1e-12):
                raise ContractViolation(f"entropy {h} outside [0, 1] bits")

    def as_tuple(self) -> tuple[float, ...]:
        return (self.h1, self.h2, self.h3, self.h4, self.h5, self.h6)


@dataclass(frozen=True)
class InequalityVerdict:
    lhs: float
    rhs: float
    margin: float
    violated: bool


def inequality_terms(dists) -> EntropySextet:
    """Entropies of six product distributions given in canonical context order.

    The canonical context order coincides with the report's column order
    (Aaα, Bbβ, Ccγ, ABC, abc, αβγ), so no permutation is needed.
    """
    dists = list(dists)
    if len(dists) != 6:
        raise ValueError(f"need 6 product distributions, got {len(dists)}")
    return EntropySextet(*(h_binary(d) for d in dists))


def evaluate(sextet: EntropySextet) -> InequalityVerdict:
    """H(αβγ) <= sum of the other five; a positive margin is a violation."""
    *rest, lhs = sextet.as_tuple()
    rhs = float(sum(rest))
    margin = lhs - rhs
    return InequalityVerdict(lhs, rhs, margin, margin > 0)
