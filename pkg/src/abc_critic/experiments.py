"""Seed-pinned experiments writing CSV tables plus a ``manifest.txt``.

Config files are flat ``key = value`` lines with ``#`` comments.  Every
experiment is a function ``ExperimentConfig -> {filename: (header, rows)}``;
nothing touches the output directory until all tables are computed, so a
failing run leaves no partial CSVs behind.
"""

from __future__ import annotations

import csv
import io
import math
import platform
import shutil
import time
from dataclasses import dataclass, fields, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .builtin import (LocationModel, binomial_error_posterior, binomial_uniform_model,
                      poisson_abc_theta_density, poisson_error_posterior, poisson_evidence,
                      poisson_exp_model)
from .criticism import (EvidenceEstimate, Transform, evidence_exact_match,
                        posterior_predictive_pvalue, pvalue_tail, reparam_demo)
from .exceptions import AbcCriticError
from .model import Observation
from .priors import cauchy_integer_prior, gaussian_error_prior, uniform_integer_prior
from .quadrature import QuadratureSpec, adaptive_simpson
from .rng import RngStream
from .samplers import abc_mu_reject, abc_reject, pilot_bound_rejection

FIGURE1_MAX_X0 = 40

Table = tuple[list[str], list[list]]


class ConfigError(AbcCriticError, ValueError):
    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path, self.line = path, line
        where = f"{path or '<config>'}:{line}: " if line is not None else (
            f"{path}: " if path else "")
        super().__init__(where + message)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    model: str = "poisson-exp"
    x0: float = 2
    x0_range: tuple[int, int] = (0, 20)
    N: int = 1_000_000
    B: int = 10
    h: float = 0.5
    K: int = 200
    out_dir: str = "results"
    trials: int = 5
    pilot: int = 10
    fresh: int = 10_000
    seeds: int = 100
    tau: float = 1.0
    eps_scale: float = 1.0
    eps_max: int = 10
    kernel: str = "gaussian"

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; "
                              f"choose from {', '.join(EXPERIMENTS)}")
        lo, hi = self.x0_range
        if lo > hi:
            raise ConfigError(f"x0_range lo={lo} exceeds hi={hi}")
        for name in ("N", "B", "K", "trials", "pilot", "fresh", "seeds"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not self.h > 0:
            raise ConfigError("h must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        return self


def _parse_range(text: str) -> tuple[int, int]:
    parts = text.replace("..", ",").split(",")
    if len(parts) != 2:
        raise ValueError("expected 'lo,hi'")
    return int(parts[0]), int(parts[1])


_PARSERS: dict[str, Callable[[str], object]] = {
    "experiment": str, "model": str, "out_dir": str, "kernel": str,
    "seed": int, "N": int, "B": int, "K": int, "trials": int, "pilot": int,
    "fresh": int, "seeds": int, "eps_max": int,
    "x0": float, "h": float, "tau": float, "eps_scale": float,
    "x0_range": _parse_range,
}


def _convert(key: str, text: str):
    parser = _PARSERS[key]
    if parser is int:
        # accept 1e6-style counts as long as they are integral
        try:
            return int(text)
        except ValueError:
            value = float(text)
            if not value.is_integer():
                raise ValueError("not an integer") from None
            return int(value)
    return parser(text)


def parse_config(text: str, path: str | None = None, **overrides) -> ExperimentConfig:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected key=value", path, lineno)
        key, _, val = (s.strip() for s in line.partition("="))
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", path, lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", path, lineno)
        try:
            values[key] = _convert(key, val)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {val!r} ({exc})", path, lineno) from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    for required in ("experiment", "seed"):
        if required not in values:
            raise ConfigError(f"missing required key {required!r}", path)
    return ExperimentConfig(**values).validate()


def load_config(path: str | Path, **overrides) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", str(path)) from None
    return parse_config(text, str(path), **overrides)


def config_from_manifest(path: str | Path) -> ExperimentConfig:
    """Rebuild the config echoed into a run's ``manifest.txt``."""
    lines = [ln for ln in Path(path).read_text().splitlines()
             if ln.partition("=")[0].strip() in _PARSERS]
    return parse_config("\n".join(lines), str(path))


def format_config(cfg: ExperimentConfig) -> str:
    out = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ",".join(str(x) for x in v)
        out.append(f"{f.name}={v}")
    return "\n".join(out) + "\n"


# -- CSV ---------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def render_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


# -- models ------------------------------------------------------------------

def _discrete_model(cfg: ExperimentConfig):
    if cfg.model == "poisson-exp":
        return poisson_exp_model(), lambda x0: poisson_evidence(x0)
    if cfg.model == "binomial-uniform":
        return binomial_uniform_model(cfg.trials), lambda x0: 1.0 / (cfg.trials + 1)
    raise ConfigError(f"experiment {cfg.experiment} does not support model {cfg.model!r}")


def _require_model(cfg, *allowed):
    if cfg.model not in allowed:
        raise ConfigError(f"experiment {cfg.experiment} requires model in {allowed}, "
                          f"got {cfg.model!r}")


def _x0s(cfg):
    lo, hi = cfg.x0_range
    return range(lo, hi + 1)


def _status(z: float) -> str:
    return "PASS" if abs(z) <= 3 else "FAIL"


# -- experiments -------------------------------------------------------------

def run_figure1(cfg: ExperimentConfig, workers=None) -> dict[str, Table]:
    """Exact evidence and tail-area p-value per x0 for the Poisson model."""
    _require_model(cfg, "poisson-exp")
    lo, hi = cfg.x0_range
    if lo < 0 or hi > FIGURE1_MAX_X0:
        raise ConfigError(f"figure1 x0_range must lie within [0, {FIGURE1_MAX_X0}]")
    if cfg.K <= hi:
        raise ConfigError("K must exceed the largest x0")
    prior = cauchy_integer_prior(cfg.K)
    header = ["x0", "evidence", "pvalue", "pvalue_tail_bound",
              "log2_evidence", "log2_pvalue", "pvalue_strict"]
    rows = []
    for x0 in _x0s(cfg):
        post = poisson_error_posterior(x0, cfg.K, prior)
        ev = poisson_evidence(x0)
        p = pvalue_tail(post)
        rows.append([x0, ev, p, post.tail_bound, math.log2(ev), math.log2(p),
                     pvalue_tail(post, strict=True)])
    return {"figure1.csv": (header, rows)}


def run_evidence_table(cfg: ExperimentConfig, workers=None) -> dict[str, Table]:
    """Exact-match evidence estimates with 3 SE checks against the closed form."""
    model, exact = _discrete_model(cfg)
    root = RngStream(cfg.seed)
    header = ["x0", "exact", "estimate", "std_error", "abs_error", "z", "status"]
    rows = []
    for x0 in _x0s(cfg):
        obs = Observation.from_data(model, x0)
        est = evidence_exact_match(model, obs, cfg.N, root.substream(x0), workers=workers)
        truth = exact(x0)
        z = (est.value - truth) / est.std_error if est.std_error > 0 else math.inf
        rows.append([x0, truth, est.value, est.std_error, abs(est.value - truth), z, _status(z)])
    return {"evidence_table.csv": (header, rows)}


def _theta_bins(x0, prior, n_bins=40, top=15.0):
    edges = np.linspace(0.0, top, n_bins + 1)
    masses = []
    for a, b in zip(edges[:-1], edges[1:]):
        spec = QuadratureSpec(a, b, abs_tol=1e-12, panels=4)
        masses.append(float(adaptive_simpson(
            lambda t: poisson_abc_theta_density(np.array([t]), x0, prior), spec)[0]))
    masses.append(max(0.0, 1.0 - math.fsum(masses)))
    return np.append(edges, np.inf), np.array(masses)


def run_abcmu_posterior(cfg: ExperimentConfig, workers=None) -> dict[str, Table]:
    """Accepted-eps frequencies from exact-match ABC-mu against the analytic posterior."""
    model, _ = _discrete_model(cfg)
    x0 = int(cfg.x0)
    obs = Observation.from_data(model, x0)
    if cfg.model == "poisson-exp":
        prior = cauchy_integer_prior(cfg.K)
        post = poisson_error_posterior(x0, cfg.K, prior)
        support = np.arange(-x0, cfg.eps_max + 1)
    else:
        prior = uniform_integer_prior(cfg.trials)
        post = binomial_error_posterior(cfg.trials, x0)
        support = np.arange(-cfg.trials, cfg.trials + 1)
    run = abc_mu_reject(model, prior, obs, cfg.N, RngStream(cfg.seed), workers=workers)
    freq, se = run.error_marginal(support)
    header = ["eps", "accepted", "frequency", "std_error", "exact", "z", "status"]
    rows = []
    counts = np.bincount(np.searchsorted(support, run.errors[np.isin(run.errors, support)]),
                         minlength=support.size)
    for k, c, f, s in zip(support, counts, freq, se):
        exact = post.mass_at(k)
        z = (f - exact) / s if s > 0 else (0.0 if f == exact else math.inf)
        rows.append([k, c, f, s, exact, z, _status(z)])
    tables = {"abcmu_eps.csv": (header, rows)}
    if cfg.model == "poisson-exp":
        edges, masses = _theta_bins(x0, prior)
        theta = run.thetas[:, 0]
        counts_t = np.histogram(theta, bins=edges)[0]
        freq_t = counts_t / run.acceptances
        trows = [[edges[i], edges[i + 1], counts_t[i], freq_t[i], masses[i]]
                 for i in range(masses.size)]
        tv = 0.5 * float(np.sum(np.abs(freq_t - masses)))
        tables["abcmu_theta.csv"] = (["bin_lo", "bin_hi", "accepted", "frequency", "exact"], trows)
        tables["abcmu_summary.csv"] = (
            ["proposals", "acceptances", "acceptance_rate", "theta_tv"],
            [[run.proposals, run.acceptances, run.acceptance_rate, tv]])
    return tables


def run_pilot_bound(cfg: ExperimentConfig, workers=None) -> dict[str, Table]:
    """Envelope violations of the pilot-estimated bound, one row per seed."""
    model, _ = _discrete_model(cfg)
    obs = Observation.from_data(model, int(cfg.x0))
    prior = (cauchy_integer_prior(cfg.K) if cfg.model == "poisson-exp"
             else uniform_integer_prior(cfg.trials))
    root = RngStream(cfg.seed)
    header = ["seed_index", "C", "max_fresh", "fresh_evaluations", "violations",
              "violation_rate", "acceptances"]
    rows = []
    for i in range(cfg.seeds):
        run, rep = pilot_bound_rejection(model, prior, obs, cfg.pilot, cfg.fresh, cfg.B, cfg.h,
                                         root.substream(i), kernel=cfg.kernel, workers=workers)
        rows.append([i, rep.C, rep.max_fresh, rep.fresh_evaluations, rep.violations,
                     rep.violation_rate, run.acceptances])
    hit = sum(1 for r in rows if r[4] > 0)
    summary = (["seeds", "seeds_with_violation", "fraction_with_violation",
                "mean_violation_rate"],
               [[cfg.seeds, hit, hit / cfg.seeds, float(np.mean([r[5] for r in rows]))]])
    return {"pilot_bound.csv": (header, rows), "pilot_bound_summary.csv": summary}


def run_reparam_demo(cfg: ExperimentConfig, workers=None) -> dict[str, Table]:
    """TV between error posteriors built on eps and on a transformed error."""
    _require_model(cfg, "location")
    model = LocationModel(0.0, cfg.tau)
    prior = gaussian_error_prior(cfg.eps_scale)
    rows = []
    for t in (Transform.identity(), Transform.affine(2.0, 1.0), Transform.cubic(1.0)):
        tv, _ = reparam_demo(model, prior, t, float(cfg.x0), affine=Transform.identity())
        rows.append([t.name, tv])
    return {"reparam.csv": (["transform", "tv"], rows)}


def run_predictive_check(cfg: ExperimentConfig, workers=None) -> dict[str, Table]:
    """Evidence, tail-area p-value and posterior predictive p-value side by side."""
    _require_model(cfg, "poisson-exp")
    model = poisson_exp_model()
    prior = cauchy_integer_prior(cfg.K)
    root = RngStream(cfg.seed)
    header = ["x0", "evidence_exact", "evidence_estimate", "evidence_std_error",
              "pvalue_tail", "predictive_pvalue", "posterior_draws"]
    rows = []
    for x0 in _x0s(cfg):
        obs = Observation.from_data(model, x0)
        sub = root.substream(x0)
        run = abc_reject(model, obs, 0.0, cfg.N, sub.substream(0), workers=workers)
        ev = EvidenceEstimate.from_rate(run.acceptances, run.proposals)
        ppp = (posterior_predictive_pvalue(model, run.thetas, obs, sub.substream(1))
               if run.acceptances else math.nan)
        rows.append([x0, poisson_evidence(x0), ev.value, ev.std_error,
                     pvalue_tail(poisson_error_posterior(x0, cfg.K, prior)), ppp,
                     run.acceptances])
    return {"predictive_check.csv": (header, rows)}


EXPERIMENTS: dict[str, Callable[..., dict[str, Table]]] = {
    "figure1": run_figure1,
    "evidence-table": run_evidence_table,
    "abcmu-posterior": run_abcmu_posterior,
    "pilot-bound": run_pilot_bound,
    "reparam-demo": run_reparam_demo,
    "predictive-check": run_predictive_check,
}


def run_experiment(cfg: ExperimentConfig | str | Path, workers: int | None = None,
                   **overrides) -> Path:
    """Run one experiment and write its CSVs and manifest; returns the output directory."""
    if not isinstance(cfg, ExperimentConfig):
        cfg = load_config(cfg, **overrides)
    elif overrides:
        cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None}).validate()
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    tables = EXPERIMENTS[cfg.experiment](cfg, workers=workers)
    elapsed = time.perf_counter() - t0

    out = Path(cfg.out_dir)
    created = not out.exists()
    written: list[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, (header, rows) in tables.items():
            path = out / name
            path.write_text(render_csv(header, rows), newline="")
            written.append(path)
        manifest = out / "manifest.txt"
        manifest.write_text(
            format_config(cfg)
            + f"tool_version={__version__}\n"
            + f"python={platform.python_version()}\n"
            + f"numpy={np.__version__}\n"
            + f"outputs={','.join(tables)}\n"
            + f"started_utc={started.isoformat()}\n"
            + f"wall_clock_seconds={elapsed:.3f}\n", newline="")
        written.append(manifest)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        if created:
            shutil.rmtree(out, ignore_errors=True)
        raise
    return out
