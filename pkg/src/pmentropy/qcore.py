"""Linear algebra on the four-level system.

Basis ordering is |0>=|UH>, |1>=|UV>, |2>=|DH>, |3>=|DV>; the spatial qubit is
the left tensor factor, the polarization qubit the right one.
"""
from __future__ import annotations

import numpy as np

from .errors import ContractViolation

DIM = 4
ATOL = 1e-12
PSD_SLACK = 1e-10

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

IDENTITY = np.eye(DIM, dtype=complex)

# exchanges the spatial and polarization factors
SWAP = np.eye(DIM, dtype=complex)[[0, 2, 1, 3]]


def pauli(label: str) -> np.ndarray:
    try:
        return _PAULI[label.upper()].copy()
    except (KeyError, AttributeError):
        raise ValueError(f"unknown Pauli label {label!r}") from None


def tensor(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Kronecker product, ``left`` acting on the spatial qubit."""
    left = np.asarray(left, dtype=complex)
    right = np.asarray(right, dtype=complex)
    if left.shape != (2, 2) or right.shape != (2, 2):
        raise ValueError("tensor expects two 2x2 operators")
    return np.kron(left, right)


def is_hermitian(op: np.ndarray, atol: float = ATOL) -> bool:
    return bool(np.allclose(op, op.conj().T, atol=atol, rtol=0))


def is_involution(op: np.ndarray, atol: float = 1e-10) -> bool:
    return bool(np.allclose(op @ op, np.eye(op.shape[0]), atol=atol, rtol=0))


def projector_pm(obs: np.ndarray, sign: int) -> np.ndarray:
    """Eigenprojector of a +/-1 observable, (1 + sign*O)/2."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    obs = np.asarray(obs, dtype=complex)
    if not (is_hermitian(obs, 1e-10) and is_involution(obs)):
        raise ContractViolation("projector_pm needs a Hermitian observable with O^2 = 1")
    return (np.eye(obs.shape[0], dtype=complex) + sign * obs) / 2


def ket(*components: int) -> np.ndarray:
    """Normalized equal superposition of the given basis indices."""
    vec = np.zeros(DIM, dtype=complex)
    vec[list(components)] = 1.0
    return vec / np.linalg.norm(vec)


def pure(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    vec = vec / np.linalg.norm(vec)
    return np.outer(vec, vec.conj())


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def check_density(rho: np.ndarray) -> np.ndarray:
    """Validate a 4x4 density matrix and return it as a complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (DIM, DIM):
        raise ContractViolation(f"density matrix must be 4x4, got {rho.shape}")
    if not is_hermitian(rho):
        raise ContractViolation("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > ATOL:
        raise ContractViolation("density matrix trace differs from 1")
    if np.linalg.eigvalsh(rho).min() < -PSD_SLACK:
        raise ContractViolation("density matrix has a negative eigenvalue")
    return rho


def _catalog() -> dict[str, np.ndarray]:
    pure_components = [
        (0,), (1,), (2,), (3,),
        (0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3),
        (0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3),
        (0, 1, 2, 3),
    ]
    mixed_components = [
        (0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3),
        (0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3),
        (0, 1, 2, 3),
    ]
    states = {}
    for n, comps in enumerate(pure_components, start=1):
        states[f"Psi{n}"] = pure(ket(*comps))
    for n, comps in enumerate(mixed_components, start=16):
        diag = np.zeros(DIM)
        diag[list(comps)] = 1.0 / len(comps)
        states[f"rho{n}"] = np.diag(diag).astype(complex)
    return states


_CATALOG = _catalog()
STATE_LABELS: tuple[str, ...] = tuple(_CATALOG)
_LOOKUP = {label.lower(): label for label in STATE_LABELS}


def canonical_label(label: str) -> str:
    try:
        return _LOOKUP[label.lower()]
    except (KeyError, AttributeError):
        raise ValueError(f"unknown state label {label!r}") from None


def state_factory(label: str) -> np.ndarray:
    """Return one of the 26 tested states, e.g. ``"Psi5"`` or ``"rho26"`` (case-insensitive)."""
    return _CATALOG[canonical_label(label)].copy()


def state_index(label: str) -> int:
    """1-based catalog position of a label (Psi1 -> 1, rho26 -> 26)."""
    return STATE_LABELS.index(canonical_label(label)) + 1


def random_state(seed: int, kind: str = "pure") -> np.ndarray:
    """Haar-random pure state or Ginibre-ensemble mixed state, deterministic per seed."""
    rng = np.random.default_rng(seed)
    if kind == "pure":
        vec = rng.normal(size=DIM) + 1j * rng.normal(size=DIM)
        return pure(vec)
    if kind == "mixed":
        g = rng.normal(size=(DIM, DIM)) + 1j * rng.normal(size=(DIM, DIM))
        rho = g @ g.conj().T
        rho = (rho + rho.conj().T) / 2
        return rho / np.real(np.trace(rho))
    raise ValueError(f"kind must be 'pure' or 'mixed', got {kind!r}")


def expectation(rho: np.ndarray, obs: np.ndarray) -> float:
    obs = np.asarray(obs, dtype=complex)
    if not is_hermitian(obs, 1e-10):
        raise ContractViolation("expectation requires a Hermitian observable")
    value = np.trace(np.asarray(rho) @ obs)
    if abs(value.imag) > 1e-10:
        raise ContractViolation(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)
