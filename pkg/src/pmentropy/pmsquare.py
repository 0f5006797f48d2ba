"""Peres-Mermin square: observables, contexts, joint and parity statistics."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation
from .qcore import ATOL, IDENTITY, pauli, projector_pm, tensor

OBSERVABLE_IDS = ("A", "a", "alpha", "B", "b", "beta", "C", "c", "gamma")

_FACTORS = {
    "A": ("X", "I"), "a": ("I", "X"), "alpha": ("X", "X"),
    "B": ("I", "Y"), "b": ("Y", "I"), "beta": ("Y", "Y"),
    "C": ("X", "Y"), "c": ("Y", "X"), "gamma": ("Z", "Z"),
}

_ALIASES = {"α": "alpha", "β": "beta", "γ": "gamma"}

CONTEXTS = (
    ("A", "a", "alpha"),
    ("B", "b", "beta"),
    ("C", "c", "gamma"),
    ("A", "B", "C"),
    ("a", "b", "c"),
    ("alpha", "beta", "gamma"),
)

# outcome order (1,1,1), (1,1,-1), ..., (-1,-1,-1)
OUTCOMES3 = tuple(itertools.product((1, -1), repeat=3))
OUTCOMES2 = tuple(itertools.product((1, -1), repeat=2))


def normalize_id(obs_id: str) -> str:
    name = _ALIASES.get(obs_id, obs_id)
    if name not in _FACTORS:
        raise ValueError(f"unknown observable {obs_id!r}")
    return name


def observable(obs_id: str) -> np.ndarray:
    left, right = _FACTORS[normalize_id(obs_id)]
    return tensor(pauli(left), pauli(right))


def contexts() -> list[tuple[str, str, str]]:
    return list(CONTEXTS)


def context_label(ctx) -> str:
    return "{" + ",".join(ctx) + "}"


def _as_context(ctx) -> tuple[str, ...]:
    ids = tuple(normalize_id(i) for i in ctx)
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate observables in {ctx!r}")
    return ids


def check_compatibility(ids) -> bool:
    """True iff all listed observables commute pairwise."""
    ids = _as_context(ids)
    if len(ids) not in (2, 3):
        raise ValueError("compatibility check takes a pair or a triple")
    ops = [observable(i) for i in ids]
    return all(
        np.allclose(p @ q, q @ p, atol=ATOL, rtol=0)
        for p, q in itertools.combinations(ops, 2)
    )


def _require_context(ctx) -> tuple[str, str, str]:
    ids = _as_context(ctx)
    if len(ids) != 3 or frozenset(ids) not in {frozenset(c) for c in CONTEXTS}:
        raise ValueError(f"{ctx!r} is not a Peres-Mermin context")
    return ids


def context_product_sign(ctx) -> int:
    """Sign s with O1 O2 O3 = s * identity."""
    o1, o2, o3 = (observable(i) for i in _require_context(ctx))
    prod = o1 @ o2 @ o3
    for sign in (1, -1):
        if np.allclose(prod, sign * IDENTITY, atol=ATOL, rtol=0):
            return sign
    raise ContractViolation(f"product over {ctx!r} is not proportional to identity")


@dataclass(frozen=True)
class ProductDistribution:
    """Binary distribution over a +/-1 valued quantity."""

    p_plus: float
    p_minus: float

    def __post_init__(self):
        for p in (self.p_plus, self.p_minus):
            if not (-1e-12 <= p <= 1 + 1e-12):
                raise ContractViolation(f"probability {p} outside [0, 1]")
        if abs(self.p_plus + self.p_minus - 1) > 1e-8:
            raise ContractViolation(
                f"binary distribution sums to {self.p_plus + self.p_minus}"
            )


@dataclass(frozen=True, eq=False)
class JointDistribution8:
    """Probabilities of the eight sign triples of a context, ordered as ``OUTCOMES3``."""

    context: tuple[str, str, str]
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (8,):
            raise ContractViolation("joint distribution needs 8 entries")
        if probs.min() < -1e-10 or abs(probs.sum() - 1) > 1e-10:
            raise ContractViolation("joint distribution is not normalized")
        probs = probs.copy()
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    def __getitem__(self, triple) -> float:
        return float(self.probs[OUTCOMES3.index(tuple(triple))])

    def as_dict(self) -> dict[tuple[int, int, int], float]:
        return {o: float(p) for o, p in zip(OUTCOMES3, self.probs)}


def _projector_table(ctx):
    return [{s: projector_pm(observable(i), s) for s in (1, -1)} for i in ctx]


def joint_distribution(rho: np.ndarray, ctx) -> JointDistribution8:
    """Born probabilities Tr(rho P1 P2 P3) for all eight outcome triples."""
    ids = _require_context(ctx)
    table = _projector_table(ids)
    rho = np.asarray(rho, dtype=complex)
    probs = []
    for s1, s2, s3 in OUTCOMES3:
        proj = table[0][s1] @ table[1][s2] @ table[2][s3]
        probs.append(np.real(np.trace(rho @ proj)))
    probs = np.clip(np.array(probs), 0.0, None)
    return JointDistribution8(ids, probs / probs.sum())


def _luders(rho, proj):
    post = proj @ rho @ proj
    weight = float(np.real(np.trace(post)))
    return weight, (post / weight if weight > 0 else post)


def sequential_sample(rho: np.ndarray, ctx, rng: np.random.Generator) -> tuple[int, int, int]:
    """One run of three sequential projective measurements with Lüders updates."""
    ids = _require_context(ctx)
    table = _projector_table(ids)
    state = np.asarray(rho, dtype=complex)
    outcome = []
    for projs in table:
        p_plus, post_plus = _luders(state, projs[1])
        if rng.random() < p_plus:
            outcome.append(1)
            state = post_plus
        else:
            outcome.append(-1)
            state = _luders(state, projs[-1])[1]
    return tuple(outcome)


def sequential_samples(rho: np.ndarray, ctx, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` sequential runs, vectorized over runs sharing the same measurement history.

    Returns an (n, 3) integer array of outcome signs.
    """
    ids = _require_context(ctx)
    table = _projector_table(ids)
    out = np.empty((n, 3), dtype=int)
    # (row indices, post-measurement state) for each history branch
    branches = [(np.arange(n), np.asarray(rho, dtype=complex))]
    for k, projs in enumerate(table):
        u = rng.random(n)
        next_branches = []
        for rows, state in branches:
            p_plus, post_plus = _luders(state, projs[1])
            plus = u[rows] < p_plus
            out[rows, k] = np.where(plus, 1, -1)
            if plus.any():
                next_branches.append((rows[plus], post_plus))
            if (~plus).any():
                next_branches.append((rows[~plus], _luders(state, projs[-1])[1]))
        branches = next_branches
    return out


def outcome_counts(samples: np.ndarray) -> np.ndarray:
    """Histogram of (n, 3) sign samples over ``OUTCOMES3``."""
    idx = ((1 - samples) // 2) @ np.array([4, 2, 1])
    return np.bincount(idx, minlength=8)


def product_distribution(joint: JointDistribution8) -> ProductDistribution:
    """Distribution of the outcome product s1*s2*s3."""
    parity = np.array([s1 * s2 * s3 for s1, s2, s3 in OUTCOMES3])
    p_minus = float(joint.probs[parity < 0].sum())
    p_plus = float(joint.probs[parity > 0].sum())
    if abs(p_plus + p_minus - 1) > 1e-8:
        raise ContractViolation("joint distribution lost normalization")
    return ProductDistribution(p_plus, p_minus)


def marginal(joint: JointDistribution8, position: int) -> ProductDistribution:
    """Outcome distribution of the observable at ``position`` (1, 2 or 3)."""
    if position not in (1, 2, 3):
        raise ValueError("position must be 1, 2 or 3")
    signs = np.array([o[position - 1] for o in OUTCOMES3])
    return ProductDistribution(
        float(joint.probs[signs > 0].sum()), float(joint.probs[signs < 0].sum())
    )
