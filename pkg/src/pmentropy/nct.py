"""Noncontextual realistic model built from four independent sign values."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation
from .pmsquare import CONTEXTS, OUTCOMES2, ProductDistribution, check_compatibility, observable
from .qcore import projector_pm

PAIRS = (("A", "a"), ("B", "b"), ("A", "B"), ("a", "b"))

# base assignments (A, a, B, b) in lexicographic +1-first order
BASE_ASSIGNMENTS = tuple(itertools.product((1, -1), repeat=4))


@dataclass(frozen=True)
class Assignment:
    A: int
    a: int
    B: int
    b: int

    def __post_init__(self):
        for v in (self.A, self.a, self.B, self.b):
            if v not in (1, -1):
                raise ValueError(f"assignment values must be +1 or -1, got {v!r}")

    @property
    def alpha(self) -> int:
        return self.A * self.a

    @property
    def beta(self) -> int:
        return self.B * self.b

    @property
    def C(self) -> int:
        return self.A * self.B

    @property
    def c(self) -> int:
        return self.a * self.b

    @property
    def gamma(self) -> int:
        return self.A * self.B * self.a * self.b

    def value(self, obs_id: str) -> int:
        return getattr(self, obs_id)

    def products(self) -> tuple[int, ...]:
        """Context products in canonical context order."""
        return tuple(
            self.value(x) * self.value(y) * self.value(z) for x, y, z in CONTEXTS
        )


def derive_assignment(A: int, a: int, B: int, b: int) -> Assignment:
    return Assignment(A, a, B, b)


# (16, 6) table of context products for every base assignment
_PRODUCT_SIGNS = np.array([derive_assignment(*v).products() for v in BASE_ASSIGNMENTS])


@dataclass(frozen=True, eq=False)
class PairDistribution:
    pair: tuple[str, str]
    probs: np.ndarray  # ordered as OUTCOMES2

    def __getitem__(self, outcome) -> float:
        return float(self.probs[OUTCOMES2.index(tuple(outcome))])

    def marginal(self, position: int) -> ProductDistribution:
        signs = np.array([o[position - 1] for o in OUTCOMES2])
        return ProductDistribution(
            float(self.probs[signs > 0].sum()), float(self.probs[signs < 0].sum())
        )


def pair_distribution(rho: np.ndarray, pair) -> PairDistribution:
    pair = tuple(pair)
    if pair not in PAIRS:
        raise ValueError(f"{pair!r} is not one of the classical pair measurements {PAIRS}")
    if not check_compatibility(pair):
        raise ValueError(f"{pair!r} do not commute")
    p, q = (observable(i) for i in pair)
    rho = np.asarray(rho, dtype=complex)
    probs = np.array([
        np.real(np.trace(rho @ projector_pm(p, s) @ projector_pm(q, t)))
        for s, t in OUTCOMES2
    ])
    probs = np.clip(probs, 0.0, None)
    return PairDistribution(pair, probs / probs.sum())


def base_distribution(aa: np.ndarray, bb: np.ndarray) -> np.ndarray:
    """Distribution over (A, a, B, b) as the product of the {A,a} and {B,b} pair statistics.

    Accepts batched inputs with trailing axis 4; returns trailing axis 16.
    """
    aa = np.asarray(aa, dtype=float)
    bb = np.asarray(bb, dtype=float)
    return (aa[..., :, None] * bb[..., None, :]).reshape(*aa.shape[:-1], 16)


def classical_parity_minus(base: np.ndarray) -> np.ndarray:
    """P(product = -1) for each of the six contexts under a base distribution."""
    return np.asarray(base) @ (_PRODUCT_SIGNS < 0).astype(float)


def classical_products_from_pairs(pairs: dict) -> tuple[ProductDistribution, ...]:
    """Six classical product distributions from measured pair distributions."""
    base = base_distribution(pairs[("A", "a")].probs, pairs[("B", "b")].probs)
    if abs(base.sum() - 1) > 1e-8:
        raise ContractViolation("pair distributions are not normalized")
    minus = classical_parity_minus(base / base.sum())
    return tuple(ProductDistribution(1.0 - m, float(m)) for m in minus)


def classical_products(rho: np.ndarray) -> tuple[ProductDistribution, ...]:
    pairs = {pair: pair_distribution(rho, pair) for pair in PAIRS}
    return classical_products_from_pairs(pairs)


def mix(q: ProductDistribution, q_prime: ProductDistribution) -> ProductDistribution:
    """Equal-weight mixture of a quantum and a classical product distribution."""
    return ProductDistribution(
        (q.p_plus + q_prime.p_plus) / 2, (q.p_minus + q_prime.p_minus) / 2
    )
