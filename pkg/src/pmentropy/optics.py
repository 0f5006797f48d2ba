"""Jones-calculus model of the photonic measurement devices.

A photon mode is ``(rail, pol)`` with integer rail positions and ``pol`` in
{"H", "V"}.  The ququart basis sits on rails 0 (upper) and 2 (lower):
|0>=(0,H), |1>=(0,V), |2>=(2,H), |3>=(2,V).  Beam displacers shift one
polarization by a number of rails, polarizing beam splitters send the reflected
polarization to a far-away rail, and waveplates act on the rails in their scope.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import CircuitError, SettingTableError
from .pmsquare import OUTCOMES3, normalize_id, observable
from .qcore import is_hermitian, is_involution, projector_pm

POLS = ("H", "V")
QUBIT_MODES = ((0, "H"), (0, "V"), (2, "H"), (2, "V"))
PASS_TOLERANCE = 1e-8


def _rot(theta_deg: float) -> np.ndarray:
    t = math.radians(theta_deg)
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, s], [-s, c]], dtype=complex)


def jones_hwp(theta: float) -> np.ndarray:
    """Half-wave plate with fast axis at ``theta`` degrees: [[cos2t, sin2t], [sin2t, -cos2t]]."""
    t = math.radians(2 * theta)
    return np.array([[math.cos(t), math.sin(t)], [math.sin(t), -math.cos(t)]], dtype=complex)


def jones_qwp(theta: float) -> np.ndarray:
    """Quarter-wave plate with fast axis at ``theta`` degrees; diag(1, i) at 0."""
    return _rot(-theta) @ np.diag([1, 1j]) @ _rot(theta)


def basis_rotation(obs: np.ndarray) -> np.ndarray:
    """Unitary |H><m+| + |V><m-| taking the observable's eigenbasis to H/V.

    Eigenvector phases are fixed so the first nonzero component is real positive.
    """
    obs = np.asarray(obs, dtype=complex)
    if obs.shape != (2, 2) or not is_hermitian(obs, 1e-10) or not is_involution(obs):
        raise ValueError("basis_rotation needs a 2x2 Hermitian observable squaring to identity")
    vals, vecs = np.linalg.eigh(obs)
    if not np.allclose(vals, [-1, 1], atol=1e-10):
        raise ValueError("observable is degenerate; eigenvalues must be -1 and +1")
    cols = []
    for k in (1, 0):  # +1 eigenvector first
        v = vecs[:, k]
        lead = v[np.argmax(np.abs(v) > 1e-12)]
        cols.append(v * abs(lead) / lead)
    return np.array(cols).conj()


def equal_up_to_phase(u: np.ndarray, v: np.ndarray, atol: float = 1e-12) -> bool:
    return phase_distance(u, v) < atol


def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """min over global phases phi of ||u - exp(i phi) v|| (operator norm)."""
    overlap = np.vdot(v, u)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-15 else 1.0
    return float(np.linalg.norm(u - phase * v, 2))


@dataclass(frozen=True)
class OpticalElement:
    """One stage.  ``kind`` is hwp, qwp, bd, pbs or qc."""

    kind: str
    rails: tuple[int, ...]
    angle: float | None = None
    plate: str | None = None
    displace: str = "V"
    shift: int = 0
    transmit: str = "H"
    reflect_shift: int = 0

    def __post_init__(self):
        if self.kind not in ("hwp", "qwp", "bd", "pbs", "qc"):
            raise CircuitError(f"unknown element kind {self.kind!r}")
        if self.kind in ("hwp", "qwp") and self.angle is None:
            raise CircuitError(f"{self.kind} {self.plate or ''} has no angle")
        if self.displace not in POLS or self.transmit not in POLS:
            raise CircuitError("polarization must be 'H' or 'V'")

    def jones(self) -> np.ndarray:
        return jones_hwp(self.angle) if self.kind == "hwp" else jones_qwp(self.angle)

    def act(self, amps: dict) -> dict:
        """Apply the element to a sparse amplitude map {(rail, pol): amplitude}."""
        out: dict = {}

        def add(mode, amp):
            out[mode] = out.get(mode, 0) + amp

        if self.kind in ("hwp", "qwp"):
            jones = self.jones()
            for (rail, pol), amp in amps.items():
                if rail in self.rails:
                    col = POLS.index(pol)
                    add((rail, "H"), jones[0, col] * amp)
                    add((rail, "V"), jones[1, col] * amp)
                else:
                    add((rail, pol), amp)
        elif self.kind in ("bd", "pbs"):
            moved, step = ((self.displace, self.shift) if self.kind == "bd"
                           else (POLS[1 - POLS.index(self.transmit)], self.reflect_shift))
            for (rail, pol), amp in amps.items():
                if rail in self.rails and pol == moved:
                    add((rail + step, pol), amp)
                else:
                    add((rail, pol), amp)
        else:
            raise CircuitError("quartz dephasers only act on density matrices")
        return out


@dataclass(frozen=True)
class Circuit:
    stages: tuple[OpticalElement, ...]
    inputs: tuple[tuple[int, str], ...] = QUBIT_MODES
    outputs: tuple[tuple[int, str], ...] = QUBIT_MODES
    rails: tuple[int, ...] | None = None
    name: str = ""

    def __post_init__(self):
        validate_circuit(self)


def validate_circuit(circuit: Circuit) -> None:
    allowed = set(circuit.rails) if circuit.rails is not None else None
    for mode in (*circuit.inputs, *circuit.outputs):
        if mode[1] not in POLS:
            raise CircuitError(f"bad polarization in mode {mode!r}")
        if allowed is not None and mode[0] not in allowed:
            raise CircuitError(f"mode {mode!r} is on an undeclared rail")
    if allowed is None:
        return
    for k, stage in enumerate(circuit.stages):
        stray = set(stage.rails) - allowed
        if stray:
            raise CircuitError(f"stage {k} ({stage.kind} {stage.plate or ''}) acts on undeclared rails {sorted(stray)}")
        landing = set()
        if stage.kind == "bd":
            landing = {r + stage.shift for r in stage.rails}
        elif stage.kind == "pbs":
            landing = {r + stage.reflect_shift for r in stage.rails}
        if landing - allowed:
            raise CircuitError(f"stage {k} ({stage.kind}) routes light to undeclared rails {sorted(landing - allowed)}")


def transfer_matrix(circuit: Circuit) -> tuple[list, np.ndarray]:
    """(final modes, T) with T[j, i] the amplitude from input i to final mode j."""
    columns = []
    for mode in circuit.inputs:
        amps = {mode: 1.0 + 0j}
        for stage in circuit.stages:
            amps = stage.act(amps)
        columns.append(amps)
    modes = list(circuit.outputs)
    for col in columns:
        for mode, amp in col.items():
            if mode not in modes:
                modes.append(mode)
    mat = np.zeros((len(modes), len(circuit.inputs)), dtype=complex)
    for i, col in enumerate(columns):
        for mode, amp in col.items():
            mat[modes.index(mode), i] = amp
    return modes, mat


def kept_isometry(circuit: Circuit, kept=None) -> np.ndarray:
    """Map from the input modes to the ``kept`` output modes (default: declared outputs)."""
    kept = list(circuit.outputs if kept is None else kept)
    modes, mat = transfer_matrix(circuit)
    out = np.zeros((len(kept), mat.shape[1]), dtype=complex)
    for j, mode in enumerate(kept):
        if mode in modes:
            out[j] = mat[modes.index(mode)]
    return out


def effective_measurement_operator(circuit: Circuit, kept=None) -> np.ndarray:
    """E = V^dagger V for the isometry V onto the kept output modes."""
    v = kept_isometry(circuit, kept)
    return v.conj().T @ v


def apply_circuit(circuit: Circuit, state: np.ndarray) -> np.ndarray:
    """Propagate amplitudes (1-D) or a density matrix (2-D) and return it on the output modes.

    Light leaving through other modes (for example reflected PBS ports) is dropped,
    so the result is unnormalized with weight equal to the transmission probability.
    """
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        if any(s.kind == "qc" for s in circuit.stages):
            raise CircuitError("circuits with quartz dephasers need a density-matrix input")
        return kept_isometry(circuit) @ state
    return _apply_density(circuit, state)


def _apply_density(circuit: Circuit, rho: np.ndarray) -> np.ndarray:
    modes = list(circuit.inputs)
    if rho.shape != (len(modes), len(modes)):
        raise CircuitError(f"density matrix shape {rho.shape} does not match {len(modes)} input modes")
    for stage in circuit.stages:
        if stage.kind == "qc":
            rails = set(stage.rails)
            for i, (ri, _) in enumerate(modes):
                for j, (rj, _) in enumerate(modes):
                    if ri != rj and ri in rails and rj in rails:
                        rho[i, j] = 0
            continue
        cols = [stage.act({m: 1.0 + 0j}) for m in modes]
        new_modes = []
        for col in cols:
            for m in col:
                if m not in new_modes:
                    new_modes.append(m)
        t = np.zeros((len(new_modes), len(modes)), dtype=complex)
        for i, col in enumerate(cols):
            for m, amp in col.items():
                t[new_modes.index(m), i] = amp
        rho = t @ rho @ t.conj().T
        modes = new_modes
    out = np.zeros((len(circuit.outputs),) * 2, dtype=complex)
    idx = [modes.index(m) if m in modes else None for m in circuit.outputs]
    for a, i in enumerate(idx):
        for b, j in enumerate(idx):
            if i is not None and j is not None:
                out[a, b] = rho[i, j]
    return out


# ---------------------------------------------------------------- setting tables

@dataclass
class SettingTable:
    """Waveplate angles keyed by (measurement, outcome); ``None`` marks a bypassed plate."""

    columns: list[str]
    rows: dict = field(default_factory=dict)

    def row(self, measurement: str, outcome: int) -> dict:
        key = (normalize_id(measurement), int(outcome))
        try:
            return self.rows[key]
        except KeyError:
            raise SettingTableError(f"no settings for {key}") from None

    def __len__(self) -> int:
        return len(self.rows)


def _fmt_angle(value) -> str:
    if value is None:
        return ""
    return f"{value:g}"


def parse_setting_table(text: str) -> SettingTable:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SettingTableError("empty setting table") from None
    if header[:2] != ["measurement", "outcome"] or len(header) < 3:
        raise SettingTableError("header must start with measurement,outcome", row=0)
    columns = header[2:]
    table = SettingTable(columns)
    for n, rec in enumerate(reader, start=1):
        if not rec:
            continue
        if len(rec) != len(header):
            raise SettingTableError(f"expected {len(header)} cells, found {len(rec)}", row=n)
        name, outcome = rec[0].strip(), rec[1].strip()
        try:
            name = normalize_id(name)
        except ValueError:
            raise SettingTableError(f"unknown measurement {name!r}", row=n) from None
        if outcome not in ("+1", "-1", "1"):
            raise SettingTableError(f"outcome must be +1 or -1, got {outcome!r}", row=n)
        angles = {}
        for col, cell in zip(columns, rec[2:]):
            cell = cell.strip()
            try:
                angles[col] = float(cell) if cell else None
            except ValueError:
                raise SettingTableError(f"bad angle {cell!r} for {col}", row=n) from None
        key = (name, int(outcome))
        if key in table.rows:
            raise SettingTableError(f"duplicate row {key}", row=n)
        table.rows[key] = angles
    return table


def load_setting_table(path=None) -> SettingTable:
    """Parse a setting table; without ``path`` the bundled angle table is used."""
    if path is None:
        text = resources.files("pmentropy").joinpath("data/settings.csv").read_text()
    else:
        text = Path(path).read_text()
    return parse_setting_table(text)


def dump_setting_table(table: SettingTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["measurement", "outcome", *table.columns])
    for (name, outcome), angles in table.rows.items():
        writer.writerow([name, f"{outcome:+d}", *(_fmt_angle(angles.get(c)) for c in table.columns)])
    return buf.getvalue()


def load_templates(path=None) -> dict:
    if path is None:
        text = resources.files("pmentropy").joinpath("data/templates.json").read_text()
    else:
        text = Path(path).read_text()
    return json.loads(text)


def build_circuit(template: dict, angles: dict, name: str = "") -> Circuit:
    """Bind plate angles into a template.  Bypassed optional plates are left out."""
    missing = [p for p in template.get("required", []) if angles.get(p) is None]
    if missing:
        raise SettingTableError(f"{name}: missing angles for required plates {missing}")
    stages = []
    for spec in template["stages"]:
        spec = dict(spec)
        kind = spec.pop("kind")
        rails = tuple(spec.pop("rails"))
        plate = spec.pop("plate", None)
        if plate is not None:
            angle = angles.get(plate)
            if angle is None:
                continue
            spec["angle"] = angle
        stages.append(OpticalElement(kind=kind, rails=rails, plate=plate, **spec))
    return Circuit(
        stages=tuple(stages),
        inputs=tuple(tuple(m) for m in template["inputs"]),
        outputs=tuple(tuple(m) for m in template["outputs"]),
        rails=tuple(template["rails"]) if "rails" in template else None,
        name=name,
    )


def device_circuit(measurement: str, outcome: int, table: SettingTable | None = None,
                   templates: dict | None = None, angles: dict | None = None) -> Circuit:
    table = load_setting_table() if table is None else table
    templates = load_templates() if templates is None else templates
    measurement = normalize_id(measurement)
    template = templates["templates"][templates["measurements"][measurement]]
    angles = table.row(measurement, outcome) if angles is None else angles
    return build_circuit(template, angles, name=f"{measurement},{outcome:+d}")


@dataclass(frozen=True)
class VerificationResult:
    measurement: str
    outcome: int
    template: str
    projector_distance: float  # ||E - P||
    output_distance: float  # min_phi ||V - e^{i phi} P||
    passed: bool

    @property
    def distance(self) -> float:
        return max(self.projector_distance, self.output_distance)


def verify_setting(measurement: str, outcome: int, table: SettingTable | None = None,
                   templates: dict | None = None, angles: dict | None = None) -> VerificationResult:
    """Compare a device built from table angles with the target eigenprojector.

    Two metrics are reported: the operator-norm distance of E = V^dagger V from
    the projector, and the distance of V itself from the projector up to a
    global phase, which checks that the device leaves the photon in the
    measured eigenstate for the next device in a sequence.
    """
    templates = load_templates() if templates is None else templates
    measurement = normalize_id(measurement)
    circuit = device_circuit(measurement, outcome, table, templates, angles)
    target = projector_pm(observable(measurement), outcome)
    v = kept_isometry(circuit)
    d_proj = float(np.linalg.norm(v.conj().T @ v - target, 2))
    d_out = phase_distance(v, target)
    return VerificationResult(
        measurement, outcome, templates["measurements"][measurement],
        d_proj, d_out, max(d_proj, d_out) < PASS_TOLERANCE,
    )


def verify_all(table: SettingTable | None = None, templates: dict | None = None) -> list[VerificationResult]:
    table = load_setting_table() if table is None else table
    templates = load_templates() if templates is None else templates
    return [verify_setting(m, o, table, templates) for (m, o) in table.rows]


def jitter_angles(angles: dict, sigma: float, rng: np.random.Generator) -> dict:
    """Gaussian waveplate setting errors of ``sigma`` degrees on every present plate."""
    return {k: (None if v is None else v + rng.normal(0.0, sigma)) for k, v in angles.items()}


def chained_joint_distribution(rho: np.ndarray, ctx, table: SettingTable | None = None,
                               templates: dict | None = None) -> np.ndarray:
    """Outcome probabilities of three devices in sequence, ordered like ``OUTCOMES3``."""
    table = load_setting_table() if table is None else table
    templates = load_templates() if templates is None else templates
    devices = {}
    for obs_id in ctx:
        for s in (1, -1):
            circuit = device_circuit(obs_id, s, table, templates)
            devices[obs_id, s] = (circuit, kept_isometry(circuit))
    probs = []
    rho = np.asarray(rho, dtype=complex)
    for signs in OUTCOMES3:
        total = np.eye(4, dtype=complex)
        previous = None
        for obs_id, s in zip(ctx, signs):
            circuit, v = devices[normalize_id(obs_id), s]
            if previous is not None and previous.outputs != circuit.inputs:
                raise CircuitError(f"{previous.name} outputs do not match {circuit.name} inputs")
            total = v @ total
            previous = circuit
        probs.append(float(np.real(np.trace(total @ rho @ total.conj().T))))
    return np.array(probs)

