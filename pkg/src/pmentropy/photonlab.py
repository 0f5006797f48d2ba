"""Simulated photon-counting runs of the entropic contextuality test.

Pipeline per state: compute the six context joints and the four classical pair
distributions, degrade them with the white-noise measurement model, optionally
replace them by Poissonian counts, build the classical product distributions,
mix them equally with the quantum ones, and evaluate the inequality on the
mixture.  Statistical uncertainty is
estimated by Poisson bootstrap of the raw counts.

Seeding rule: every random stream is ``SeedSequence(master_seed,
spawn_key=(state_index, stream))`` where ``state_index`` is the 1-based catalog
position of the state and ``stream`` is 0-5 for the contexts, 6-9 for the
classical pairs and 10 for the bootstrap.  Results therefore do not depend on
the order in which states are processed or on the number of workers.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy.optimize import brentq

from . import __version__
from .entropic import binary_entropy
from .errors import ContractViolation, EmptyDataError
from .nct import PAIRS, PairDistribution, base_distribution, classical_parity_minus, pair_distribution
from .pmsquare import CONTEXTS, OUTCOMES3, JointDistribution8, joint_distribution
from .qcore import DIM, canonical_label, check_density, state_factory, state_index

CONTEXT_STREAMS = range(0, 6)
PAIR_STREAMS = range(6, 10)
BOOTSTRAP_STREAM = 10

_ODD = np.array([s1 * s2 * s3 < 0 for s1, s2, s3 in OUTCOMES3])

CSV_COLUMNS = (
    ["state_label"]
    + [f"H{i}" for i in range(1, 7)]
    + [f"sigma{i}" for i in range(1, 7)]
    + ["margin", "sigma_margin", "sd_violation"]
)


def load_reference_table() -> list[dict]:
    """Published per-state entropies; ``err*`` columns are in units of 1e-5 bits."""
    text = resources.files("pmentropy").joinpath("data/table1_reference.csv").read_text()
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append({
            "state_label": rec["state_label"],
            "H": [float(rec[f"H{i}"]) for i in range(1, 7)],
            "err": [int(rec[f"err{i}"]) * 1e-5 for i in range(1, 7)],
            "SD": int(rec["SD"]),
        })
    return rows


def reference_rhs_mean() -> float:
    rows = load_reference_table()
    return float(np.mean([h for r in rows for h in r["H"][:5]]))


# Output of calibrate_depolarizing() rounded to 4 digits; test_photonlab pins it.
DEFAULT_DEPOLARIZING = 0.0272


@dataclass(frozen=True)
class NoiseModel:
    """Aggregate imperfection model.

    ``depolarizing`` is the weight of uniformly random detector outcomes mixed
    into every measured distribution.  A depolarizing channel on the state alone
    cannot be used for this: each context product is +/- identity, so parities
    are the same for every state including the maximally mixed one.

    ``angle_jitter_sigma`` (degrees) only affects the optics device path; the
    operator-level pipeline in this module ignores it.
    """

    depolarizing: float = 0.0
    angle_jitter_sigma: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.depolarizing <= 1.0:
            raise ValueError(f"depolarizing strength {self.depolarizing} outside [0, 1]")
        if self.angle_jitter_sigma < 0:
            raise ValueError("angle jitter must be nonnegative")

    @classmethod
    def parse(cls, spec: str) -> "NoiseModel":
        """Parse ``none``, ``depol:default`` or ``depol:<float>``."""
        spec = spec.strip().lower()
        if spec == "none":
            return cls()
        kind, _, arg = spec.partition(":")
        if kind != "depol" or not arg:
            raise ValueError(f"bad noise spec {spec!r}; use none | depol:<float> | depol:default")
        if arg == "default":
            return cls(DEFAULT_DEPOLARIZING)
        try:
            return cls(float(arg))
        except ValueError:
            raise ValueError(f"bad depolarizing strength {arg!r}") from None

    def spec(self) -> str:
        return "none" if self.depolarizing == 0 else f"depol:{self.depolarizing!r}"


@dataclass(frozen=True)
class ShotPlan:
    shots_per_setting: int = 20000
    bootstrap_resamples: int = 1000
    master_seed: int = 0

    def __post_init__(self):
        if self.shots_per_setting < 1:
            raise ValueError("shots_per_setting must be >= 1")
        if self.bootstrap_resamples < 100:
            raise ValueError("bootstrap_resamples must be >= 100")


@dataclass(frozen=True, eq=False)
class CountRecord:
    """Raw counts: ``contexts`` is (6, 8) over ``OUTCOMES3``, ``pairs`` is (4, 4) over ``OUTCOMES2``."""

    contexts: np.ndarray
    pairs: np.ndarray

    def __post_init__(self):
        for arr in (self.contexts, self.pairs):
            if np.any(np.asarray(arr) < 0):
                raise ContractViolation("counts must be nonnegative")


@dataclass(frozen=True)
class BootstrapResult:
    sigma_terms: tuple[float, ...]
    sigma_margin: float
    mean_terms: tuple[float, ...]
    mean_margin: float


@dataclass(frozen=True)
class ReportRow:
    state_label: str
    entropies: tuple[float, ...]
    sigmas: tuple[float, ...]
    margin: float
    sigma_margin: float
    sd_violation: float
    lhs: float
    rhs: float
    quantum_entropies: tuple[float, ...]

    @property
    def violated(self) -> bool:
        return self.margin > 0

    def csv_record(self) -> list[str]:
        values = [*self.entropies, *self.sigmas, self.margin, self.sigma_margin, self.sd_violation]
        return [self.state_label] + [repr(float(v)) for v in values]


@dataclass
class ExperimentReport:
    rows: list[ReportRow]
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.meta.items():
            buf.write(f"# {key}={value}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow(row.csv_record())
        return buf.getvalue()

    def to_json(self) -> str:
        """Rows carry the CSV fields plus lhs and rhs; non-finite values become null."""
        def clean(v):
            return float(v) if math.isfinite(v) else None

        rows = []
        for row in self.rows:
            values = [*row.entropies, *row.sigmas, row.margin, row.sigma_margin, row.sd_violation]
            rec = {"state_label": row.state_label}
            rec.update({k: clean(v) for k, v in zip(CSV_COLUMNS[1:], values)})
            rec["lhs"] = clean(row.lhs)
            rec["rhs"] = clean(row.rhs)
            rows.append(rec)
        return json.dumps({"meta": self.meta, "rows": rows}, indent=2) + "\n"

    def sd_range(self) -> tuple[float, float]:
        sds = [r.sd_violation for r in self.rows if not math.isnan(r.sd_violation)]
        if not sds:
            return float("nan"), float("nan")
        return min(sds), max(sds)


def apply_depolarizing(rho: np.ndarray, p: float) -> np.ndarray:
    """State channel (1 - p) rho + p 1/4.  Leaves every context parity unchanged."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing strength {p} outside [0, 1]")
    return (1 - p) * np.asarray(rho, dtype=complex) + p * np.eye(DIM) / DIM


def depolarize_outcomes(probs, p: float) -> np.ndarray:
    """Mix a measured distribution with the uniform one: (1 - p) P + p / n_outcomes."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"noise strength {p} outside [0, 1]")
    probs = np.asarray(probs, dtype=float)
    return (1 - p) * probs + p / probs.shape[-1]


def _probs(dist) -> np.ndarray:
    if isinstance(dist, (JointDistribution8, PairDistribution)):
        return np.asarray(dist.probs, dtype=float)
    return np.asarray(dist, dtype=float)


def simulate_counts(dist, plan, rng: np.random.Generator) -> np.ndarray:
    """Independent Poisson counts per outcome bin with mean ``shots * p``."""
    shots = plan.shots_per_setting if isinstance(plan, ShotPlan) else int(plan)
    probs = _probs(dist)
    if abs(probs.sum() - 1) > 1e-8:
        raise ContractViolation("cannot simulate counts from an unnormalized distribution")
    return rng.poisson(shots * np.clip(probs, 0.0, None))


def empirical_distribution(counts) -> np.ndarray:
    counts = np.asarray(counts)
    total = counts.sum(axis=-1, keepdims=True)
    if np.any(total <= 0):
        raise EmptyDataError("no counts recorded")
    return counts / total


def _mixed_parity_minus(context_probs: np.ndarray, pair_probs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """P(product=-1) for quantum and mixed distributions; leading batch axes allowed."""
    quantum = context_probs[..., _ODD].sum(axis=-1)
    base = base_distribution(pair_probs[..., 0, :], pair_probs[..., 1, :])
    classical = classical_parity_minus(base)
    return quantum, (quantum + classical) / 2


def _terms(context_probs, pair_probs):
    quantum, mixed = _mixed_parity_minus(context_probs, pair_probs)
    h = binary_entropy(mixed)
    margin = h[..., 5] - h[..., :5].sum(axis=-1)
    return h, margin, binary_entropy(quantum)


def bootstrap_sigma(counts: CountRecord, resamples: int, rng: np.random.Generator) -> BootstrapResult:
    """Poisson-bootstrap standard deviations of the six mixed entropies and the margin."""
    if resamples < 100:
        raise ValueError("bootstrap needs at least 100 resamples")
    ctx = rng.poisson(np.broadcast_to(counts.contexts, (resamples, 6, 8)))
    pairs = rng.poisson(np.broadcast_to(counts.pairs, (resamples, 4, 4)))
    h, margin, _ = _terms(empirical_distribution(ctx), empirical_distribution(pairs))
    return BootstrapResult(
        sigma_terms=tuple(float(s) for s in h.std(axis=0, ddof=1)),
        sigma_margin=float(margin.std(ddof=1)),
        mean_terms=tuple(float(m) for m in h.mean(axis=0)),
        mean_margin=float(margin.mean()),
    )


def bootstrap_binary_sigma(counts, resamples: int, rng: np.random.Generator) -> tuple[float, float]:
    """Bootstrap (sigma, mean) of the entropy of one binary count pair (n_plus, n_minus)."""
    if resamples < 100:
        raise ValueError("bootstrap needs at least 100 resamples")
    draws = rng.poisson(np.broadcast_to(np.asarray(counts), (resamples, 2)))
    h = binary_entropy(empirical_distribution(draws)[:, 1])
    return float(h.std(ddof=1)), float(h.mean())


def stream(master_seed: int, state_key: int, stream_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(state_key, stream_id)))


def exact_distributions(rho: np.ndarray, noise: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """(6, 8) context joints and (4, 4) pair distributions of ``rho`` under outcome noise."""
    ctx = np.array([joint_distribution(rho, c).probs for c in CONTEXTS])
    pairs = np.array([pair_distribution(rho, p).probs for p in PAIRS])
    return depolarize_outcomes(ctx, noise), depolarize_outcomes(pairs, noise)


def simulate_record(rho: np.ndarray, plan: ShotPlan, state_key: int,
                    noise: float = 0.0) -> CountRecord:
    ctx, pairs = exact_distributions(rho, noise)
    seed = plan.master_seed
    return CountRecord(
        contexts=np.array([simulate_counts(ctx[i], plan, stream(seed, state_key, s))
                           for i, s in enumerate(CONTEXT_STREAMS)]),
        pairs=np.array([simulate_counts(pairs[i], plan, stream(seed, state_key, s))
                        for i, s in enumerate(PAIR_STREAMS)]),
    )


def run_state(rho, noise: NoiseModel = NoiseModel(), plan: ShotPlan = ShotPlan(),
              mode: str = "analytic", label: str = "custom", state_key: int = 0) -> ReportRow:
    """One report row for one state.

    In analytic mode the uncertainties and SD are NaN; in sampled mode they come
    from the bootstrap.
    """
    if mode not in ("analytic", "sampled"):
        raise ValueError(f"mode must be 'analytic' or 'sampled', got {mode!r}")
    rho = check_density(rho)
    p = noise.depolarizing
    nan = float("nan")
    if mode == "analytic":
        ctx, pairs = exact_distributions(rho, p)
        sigmas, sigma_margin, sd = (nan,) * 6, nan, nan
    else:
        record = simulate_record(rho, plan, state_key, p)
        ctx = empirical_distribution(record.contexts)
        pairs = empirical_distribution(record.pairs)
        boot = bootstrap_sigma(record, plan.bootstrap_resamples,
                               stream(plan.master_seed, state_key, BOOTSTRAP_STREAM))
        sigmas, sigma_margin = boot.sigma_terms, boot.sigma_margin
    h, margin, hq = _terms(ctx, pairs)
    margin = float(margin)
    if mode == "sampled":
        if sigma_margin > 0:
            sd = margin / sigma_margin
        else:
            sd = math.copysign(math.inf, margin) if margin != 0 else nan
    return ReportRow(
        state_label=label,
        entropies=tuple(float(x) for x in h),
        sigmas=tuple(float(s) for s in sigmas),
        margin=margin,
        sigma_margin=float(sigma_margin),
        sd_violation=float(sd),
        lhs=float(h[5]),
        rhs=float(h[:5].sum()),
        quantum_entropies=tuple(float(x) for x in hq),
    )


def _run_label(args) -> ReportRow:
    label, noise, plan, mode = args
    return run_state(state_factory(label), noise, plan, mode, label=label,
                     state_key=state_index(label))


def run_table(states, noise: NoiseModel = NoiseModel(), plan: ShotPlan = ShotPlan(),
              mode: str = "sampled", workers: int = 1) -> ExperimentReport:
    labels = [canonical_label(s) for s in states]
    jobs = [(label, noise, plan, mode) for label in labels]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_label, jobs))
    else:
        rows = [_run_label(job) for job in jobs]
    meta = {
        "software": f"pmentropy {__version__}",
        "mode": mode,
        "noise": noise.spec(),
        "seed": plan.master_seed,
        "shots": plan.shots_per_setting,
        "resamples": plan.bootstrap_resamples,
    }
    return ExperimentReport(rows, meta)


def calibrate_depolarizing(target: float | None = None) -> float:
    """Depolarizing strength whose analytic mean RHS entropy equals ``target``.

    ``target`` defaults to the mean of the 130 published RHS entries.  The
    analytic sextet is state independent under global depolarization, so the
    sweep uses |0><0|.
    """
    target = reference_rhs_mean() if target is None else target
    rho = state_factory("Psi1")

    def gap(p):
        return np.mean(run_state(rho, NoiseModel(p), mode="analytic").entropies[:5]) - target

    return float(brentq(gap, 1e-9, 0.5, xtol=1e-12))
