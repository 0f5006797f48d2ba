"""Command-line entry point: ``pmentropy run | verify | states``."""
from __future__ import annotations

import itertools
import json
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import click
import numpy as np

from . import nct, optics, photonlab
from .pmsquare import CONTEXTS, OBSERVABLE_IDS, check_compatibility, context_label, context_product_sign
from .qcore import STATE_LABELS, canonical_label


@dataclass
class RunConfig:
    states: list[str]
    shots: int = 20000
    seed: int = 0
    noise: str = "depol:default"
    mode: str = "sampled"
    format: str = "csv"
    output: str = "-"
    resamples: int = 1000
    workers: int = 1

    def validate(self) -> "RunConfig":
        if self.states == ["all"]:
            self.states = list(STATE_LABELS)
        self.states = [canonical_label(s) for s in self.states]
        photonlab.NoiseModel.parse(self.noise)
        if self.mode not in ("analytic", "sampled"):
            raise ValueError(f"mode must be analytic or sampled, got {self.mode!r}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        photonlab.ShotPlan(self.shots, self.resamples, self.seed)
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        return cls(**data)


def _split_states(value: str) -> list[str]:
    return [s.strip() for s in value.split(",") if s.strip()]


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Entropic state-independent contextuality: simulation and verification."""


@main.command()
@click.option("--states", default="all", show_default=True, help="Comma-separated labels or 'all'.")
@click.option("--shots", default=20000, show_default=True, type=int, help="Photons per setting.")
@click.option("--seed", default=0, show_default=True, type=int, help="Master seed.")
@click.option("--noise", default="depol:default", show_default=True,
              help="none | depol:<float> | depol:default")
@click.option("--mode", default="sampled", show_default=True, type=click.Choice(["analytic", "sampled"]))
@click.option("--format", "fmt", default="csv", show_default=True, type=click.Choice(["csv", "json"]))
@click.option("--output", "-o", default="-", show_default=True, help="Report path, '-' for stdout.")
@click.option("--resamples", default=1000, show_default=True, type=int, help="Bootstrap resamples.")
@click.option("--workers", default=1, show_default=True, type=int, help="Worker processes.")
@click.option("--config", "config_path", type=click.Path(dir_okay=False),
              help="JSON file whose keys override the flags.")
def run(states, shots, seed, noise, mode, fmt, output, resamples, workers, config_path):
    """Simulate the 26-state table and write a report."""
    cfg = RunConfig(_split_states(states), shots, seed, noise, mode, fmt, output, resamples, workers)
    try:
        if config_path:
            overrides = json.loads(Path(config_path).read_text())
            if isinstance(overrides.get("states"), str):
                overrides["states"] = _split_states(overrides["states"])
            cfg = RunConfig.from_dict({**cfg.to_dict(), **overrides})
        cfg.validate()
    except OSError as exc:
        raise click.ClickException(f"cannot read config: {exc}")
    except (ValueError, TypeError) as exc:
        raise click.UsageError(str(exc))

    plan = photonlab.ShotPlan(cfg.shots, cfg.resamples, cfg.seed)
    report = photonlab.run_table(cfg.states, photonlab.NoiseModel.parse(cfg.noise), plan,
                                 cfg.mode, workers=cfg.workers)
    text = report.to_csv() if cfg.format == "csv" else report.to_json()
    if cfg.output == "-":
        click.echo(text, nl=False)
    else:
        try:
            Path(cfg.output).write_text(text)
        except OSError as exc:
            raise click.ClickException(f"cannot write report: {exc}")
    lo, hi = report.sd_range()
    margins = [r.margin for r in report.rows]
    click.echo(
        f"states={len(report.rows)} min_margin={min(margins):.5f} max_margin={max(margins):.5f} "
        f"min_sd={_fmt(lo)} max_sd={_fmt(hi)}",
        err=True,
    )


def _fmt(x: float) -> str:
    return "n/a" if math.isnan(x) else f"{x:.1f}"


@main.command()
@click.argument("target", type=click.Choice(["contexts", "optics", "classical"]))
@click.option("--jitter", default=0.0, show_default=True, type=float,
              help="Gaussian angle error (degrees) applied to every plate (optics only).")
@click.option("--seed", default=0, show_default=True, type=int, help="Seed for --jitter.")
def verify(target, jitter, seed):
    """Check operator identities, optical settings or the classical model."""
    failures = {"contexts": _verify_contexts, "classical": _verify_classical,
                "optics": lambda: _verify_optics(jitter, seed)}[target]()
    if failures:
        click.echo(f"FAILED: {', '.join(failures)}")
        sys.exit(1)
    click.echo("all checks passed")


def _verify_contexts() -> list[str]:
    failures = []
    expected = {ctx: (-1 if ctx == ("alpha", "beta", "gamma") else 1) for ctx in CONTEXTS}
    for ctx in CONTEXTS:
        sign = context_product_sign(ctx)
        ok = sign == expected[ctx] and check_compatibility(ctx)
        click.echo(f"{context_label(ctx):22s} product={sign:+d} {'ok' if ok else 'FAIL'}")
        if not ok:
            failures.append(context_label(ctx))
    click.echo("commutation matrix (1 = compatible):")
    click.echo("       " + " ".join(f"{o:>5s}" for o in OBSERVABLE_IDS))
    for p in OBSERVABLE_IDS:
        cells = ["    -" if p == q else f"{int(check_compatibility((p, q))):5d}" for q in OBSERVABLE_IDS]
        click.echo(f"{p:>6s} " + " ".join(cells))
    return failures


def _verify_classical() -> list[str]:
    failures = []
    for values in itertools.product((1, -1), repeat=4):
        assignment = nct.derive_assignment(*values)
        if any(q != 1 for q in assignment.products()):
            failures.append(str(values))
    click.echo(f"{16 - len(failures)}/16 assignments give all six products +1")
    return failures


def _verify_optics(jitter: float, seed: int) -> list[str]:
    table = optics.load_setting_table()
    templates = optics.load_templates()
    rng = np.random.default_rng(seed)
    failures = []
    click.echo(f"{'setting':10s} {'template':16s} {'||E-P||':>10s} {'||V-P||':>10s}  result")
    for (name, outcome), angles in table.rows.items():
        if jitter > 0:
            angles = optics.jitter_angles(angles, jitter, rng)
        res = optics.verify_setting(name, outcome, table, templates, angles=angles)
        hard = name in ("a", "B")
        status = "pass" if res.passed else ("FAIL" if hard else "diagnostic")
        click.echo(f"{name + ',' + format(outcome, '+d'):10s} {res.template:16s} "
                   f"{res.projector_distance:10.2e} {res.output_distance:10.2e}  {status}")
        if hard and not res.passed:
            failures.append(f"{name},{outcome:+d}")
    return failures


@main.group()
def states():
    """State catalog."""


@states.command("list")
def states_list():
    """Print the 26 state labels."""
    for label in STATE_LABELS:
        click.echo(label)


if __name__ == "__main__":
    main()
