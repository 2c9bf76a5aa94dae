"""Command-line surface for the condition-number distribution toolkit.

Subcommands evaluate density curves and moment generating functions, run
Monte Carlo validation sweeps against the analytic formulas, emit the
built-in comparison figures as plain data files, and run a self-test
sweep over the library's cross-module invariants.

Files are written atomically (write to a sibling, then rename), so an
interrupted run never leaves a truncated artifact behind.  All CSV
numbers carry 17 significant digits so a regression diff survives a
double round-trip.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
import time
from dataclasses import asdict, dataclass, fields

import numpy as np

from .asymptotic import (
    ScaledParams,
    cdf_v_kappa_d_alpha0,
    cdf_v_kappa_d_interp,
    cdf_v_kappa_e_interp,
    normalization_v_kappa_d,
    normalization_v_kappa_e,
    pdf_v_kappa_d_grid,
    pdf_v_kappa_e_grid,
)
from .detkit import lemma_a1_det_int, lemma_a1_rhs_int, lemma_a2_det_int, lemma_a2_rhs_int
from .exact import (
    EXTENDED_N_THRESHOLD,
    METRIC_KAPPA_D,
    METRIC_KAPPA_E,
    METRIC_LAMBDA_MIN,
    METRICS,
    DensityCurve,
    Dims,
    cdf_kappa_d_interp,
    cdf_kappa_e_interp,
    cdf_lambda2_interp,
    cdf_lambda_min_interp,
    mgf_kappa_d,
    mgf_kappa_e,
    normalization_kappa_d,
    normalization_kappa_e,
    normalization_lambda2,
    normalization_lambda_min,
    pdf_kappa_d,
    pdf_kappa_d_grid,
    pdf_kappa_e,
    pdf_kappa_e_grid,
    pdf_lambda2_grid,
    pdf_lambda_min_grid,
    pdf_via_lambda2_connection,
    pdf_via_min_connection,
    q_closed,
    q_integral_oracle,
    r_closed,
    r_integral_oracle,
)
from .numkit import ConvergenceError
from .sampler import (
    SamplerError,
    build_report,
    ks_compare,
    ks_threshold,
    mc_collect,
    sample_matrix,
)

log = logging.getLogger("wishartcond")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_SELFTEST = 3

THREADS_ENV = "WISHARTCOND_THREADS"

# figure id -> (metric, alpha, n, mu, curve range); the ranges cover all but
# ~0.1% of the scaled mass at the default sample count
_FIGURES = {
    "1a": (METRIC_KAPPA_D, 1, 50, 4.0, (0.005, 10.0)),
    "1b": (METRIC_KAPPA_D, 2, 50, 4.0, (0.005, 1.5)),
    "2a": (METRIC_KAPPA_E, 0, 10, 4.0, (0.004, 0.8)),
    "2b": (METRIC_KAPPA_E, 1, 50, 4.0, (0.003, 0.25)),
}
_FIGURE_CURVE_POINTS = 400


class UsageError(ValueError):
    """Bad flags or flag combinations; exits with status 1."""


@dataclass
class RunConfig:
    """Everything a run needs, round-trippable through JSON reports."""

    command: str
    metric: str | None = None
    kind: str = "exact"
    n: int | None = None
    alpha: int | None = None
    mu: float | None = None
    grid: str | None = None
    s: float | None = None
    figure_id: str | None = None
    samples: int = 100_000
    seed: int = 1
    bins: int = 60
    precision: str = "auto"
    out: str | None = None
    format: str = "csv"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(payload) - names
        if unknown:
            raise UsageError(f"unknown config fields: {sorted(unknown)}")
        return cls(**payload)


# ---------------------------------------------------------------------------
# small plumbing


def parse_grid(spec: str) -> np.ndarray:
    """start:stop:points, inclusive on both ends."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must look like start:stop:points, got {spec!r}")
    try:
        start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"could not parse grid spec {spec!r}") from None
    if not start < stop:
        raise UsageError("grid start must be strictly below stop")
    if points < 2:
        raise UsageError("grid needs at least 2 points")
    return np.linspace(start, stop, points)


def _fmt17(x) -> str:
    return format(float(x), ".17g")


def _write_atomic(path: str, text: str):
    tmp = f"{path}.part"
    with open(tmp, "w", encoding="ascii") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _curve_csv(xs, ys) -> str:
    lines = ["x,pdf"]
    lines.extend(f"{_fmt17(x)},{_fmt17(y)}" for x, y in zip(xs, ys))
    return "\n".join(lines) + "\n"


def _hist_csv(edges, masses) -> str:
    lines = ["bin_lo,bin_hi,mass"]
    lines.extend(f"{_fmt17(lo)},{_fmt17(hi)},{_fmt17(m)}"
                 for lo, hi, m in zip(edges[:-1], edges[1:], masses))
    return "\n".join(lines) + "\n"


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _emit(cfg: RunConfig, text: str, path: str | None = None):
    target = path if path is not None else cfg.out
    if target is None:
        sys.stdout.write(text)
    else:
        _write_atomic(target, text)


def _workers() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        count = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if count < 1:
        raise UsageError(f"{THREADS_ENV} must be >= 1, got {count}")
    return count


def _need_dims(cfg: RunConfig) -> Dims:
    if cfg.n is None or cfg.alpha is None:
        raise UsageError("the exact kind needs both --n and --alpha")
    if cfg.metric == METRIC_KAPPA_E and cfg.n == 2:
        raise UsageError(
            "kappa-e needs n >= 3: at n=2 the second-smallest eigenvalue is "
            "already the largest, so use kappa-d instead")
    return Dims(cfg.n, cfg.alpha)


def _need_scaled(cfg: RunConfig) -> ScaledParams:
    if cfg.n is not None:
        raise UsageError(
            "the asymptotic kind describes the large-n limit and takes no --n; "
            "drop --n or switch to --kind exact")
    if cfg.alpha is None:
        raise UsageError("the asymptotic kind needs --alpha")
    if cfg.metric not in (METRIC_KAPPA_D, METRIC_KAPPA_E):
        raise UsageError("asymptotic curves exist for kappa-d and kappa-e only")
    return ScaledParams(cfg.mu if cfg.mu is not None else 1.0, cfg.alpha)


def _precision_meta(cfg: RunConfig, dims: Dims | None) -> dict:
    meta = {"precision": cfg.precision}
    if dims is not None and cfg.precision == "auto" and dims.n > EXTENDED_N_THRESHOLD:
        meta["precision_note"] = (
            f"auto escalates to extended precision above n={EXTENDED_N_THRESHOLD} "
            "when the coefficient table mixes signs")
    return meta


# ---------------------------------------------------------------------------
# commands


def cmd_density(cfg: RunConfig) -> int:
    if cfg.grid is None:
        raise UsageError("density needs --grid start:stop:points")
    xs = parse_grid(cfg.grid)
    if cfg.kind == "exact":
        dims = _need_dims(cfg)
        kw = {"precision": cfg.precision}
        if cfg.metric == METRIC_KAPPA_D:
            ys = pdf_kappa_d_grid(xs, dims, **kw)
        elif cfg.metric == METRIC_KAPPA_E:
            ys = pdf_kappa_e_grid(xs, dims, **kw)
        elif cfg.metric == METRIC_LAMBDA_MIN:
            ys = pdf_lambda_min_grid(xs, dims, **kw)
        else:
            ys = pdf_lambda2_grid(xs, dims, **kw)
        curve = DensityCurve(cfg.metric, "exact", xs, ys, dims=dims,
                             meta=_precision_meta(cfg, dims))
    else:
        params = _need_scaled(cfg)
        if cfg.metric == METRIC_KAPPA_D:
            ys = pdf_v_kappa_d_grid(xs, params)
        else:
            ys = pdf_v_kappa_e_grid(xs, params)
        curve = DensityCurve(cfg.metric, "asymptotic", xs, ys, mu=params.mu,
                             meta={"alpha": params.alpha})
    if cfg.format == "json":
        payload = {
            "config": cfg.to_dict(),
            "x": [float(v) for v in curve.grid],
            "pdf": [float(v) for v in curve.values],
            "meta": curve.meta,
        }
        _emit(cfg, _json_text(payload))
    else:
        _emit(cfg, _curve_csv(curve.grid, curve.values))
    return EXIT_OK


def cmd_mgf(cfg: RunConfig) -> int:
    if cfg.kind != "exact":
        raise UsageError("the moment generating function is exact-only; drop --kind")
    dims = _need_dims(cfg)
    if cfg.metric == METRIC_KAPPA_D:
        mgf = lambda s: mgf_kappa_d(s, dims)
    elif cfg.metric == METRIC_KAPPA_E:
        mgf = lambda s: mgf_kappa_e(s, dims)
    else:
        raise UsageError("mgf supports kappa-d and kappa-e only")
    if (cfg.s is None) == (cfg.grid is None):
        raise UsageError("mgf needs exactly one of --s or --grid")
    if cfg.s is not None:
        value = mgf(cfg.s)
        if cfg.out is None and cfg.format == "csv":
            sys.stdout.write(f"{_fmt17(value)}\n")
        elif cfg.format == "json":
            _emit(cfg, _json_text({"config": cfg.to_dict(), "s": cfg.s,
                                   "value": float(value)}))
        else:
            _emit(cfg, _curve_csv([cfg.s], [value]))
        return EXIT_OK
    xs = parse_grid(cfg.grid)
    ys = np.array([mgf(float(s)) for s in xs])
    if cfg.format == "json":
        _emit(cfg, _json_text({"config": cfg.to_dict(),
                               "x": [float(v) for v in xs],
                               "pdf": [float(v) for v in ys]}))
    else:
        _emit(cfg, _curve_csv(xs, ys))
    return EXIT_OK


def _exact_cdf(metric: str, dims: Dims, y_max: float, precision: str):
    kw = {"precision": precision}
    if metric == METRIC_KAPPA_D:
        return cdf_kappa_d_interp(dims, y_max, **kw)
    if metric == METRIC_KAPPA_E:
        return cdf_kappa_e_interp(dims, y_max, **kw)
    if metric == METRIC_LAMBDA_MIN:
        return cdf_lambda_min_interp(dims, y_max, **kw)
    return cdf_lambda2_interp(dims, y_max, **kw)


def _mc_run(cfg: RunConfig, threshold: float | None = None):
    """Draws, analytic CDF and the scored report for one MC configuration."""
    dims = _need_dims(cfg)
    if cfg.samples < 1:
        raise UsageError("--samples must be >= 1")
    draws = mc_collect(cfg.metric, dims, cfg.samples, cfg.seed, workers=_workers())
    if cfg.kind == "asymptotic":
        if cfg.metric not in (METRIC_KAPPA_D, METRIC_KAPPA_E):
            raise UsageError("asymptotic comparison exists for kappa-d and kappa-e only")
        mu = cfg.mu if cfg.mu is not None else 1.0
        params = ScaledParams(mu, dims.alpha)
        draws = draws / (mu * dims.n ** 3)
        if cfg.metric == METRIC_KAPPA_D:
            cdf = cdf_v_kappa_d_interp(params)
        else:
            cdf = cdf_v_kappa_e_interp(params)
        meta = {"kind": "asymptotic", "mu": mu, "scale": mu * dims.n ** 3}
    else:
        y_max = float(draws.max()) * (1.0 + 1e-9)
        cdf = _exact_cdf(cfg.metric, dims, y_max, cfg.precision)
        meta = {"kind": "exact"}
    report = build_report(cfg.metric, dims, draws, cfg.seed, cdf,
                          bins=cfg.bins, threshold=threshold)
    report.meta.update(meta)
    return report


def _report_payload(cfg: RunConfig, report) -> dict:
    return {
        "config": cfg.to_dict(),
        "results": {
            "metric": report.metric,
            "n": report.dims.n,
            "alpha": report.dims.alpha,
            "samples": report.samples,
            "seed": report.seed,
            "bins": report.bins,
            "bin_edges": [float(v) for v in report.edges],
            "bin_masses": [float(v) for v in report.masses],
            "ks_statistic": float(report.ks_statistic),
            "ks_threshold": float(report.ks_threshold),
            "passed": bool(report.passed),
            "meta": report.meta,
        },
    }


def cmd_mc(cfg: RunConfig) -> int:
    report = _mc_run(cfg)
    if cfg.format == "csv":
        _emit(cfg, _hist_csv(report.edges, report.masses))
    else:
        _emit(cfg, _json_text(_report_payload(cfg, report)))
    log.info("mc %s n=%d alpha=%d: ks=%.5f threshold=%.5f %s",
             cfg.metric, report.dims.n, report.dims.alpha, report.ks_statistic,
             report.ks_threshold, "pass" if report.passed else "FAIL")
    return EXIT_OK


def cmd_figure(cfg: RunConfig) -> int:
    if cfg.figure_id not in _FIGURES:
        raise UsageError(f"unknown figure id {cfg.figure_id!r}; "
                         f"pick one of {sorted(_FIGURES)}")
    metric, alpha, n, mu, (v_lo, v_hi) = _FIGURES[cfg.figure_id]
    prefix = cfg.out if cfg.out is not None else f"figure_{cfg.figure_id}"
    run = RunConfig(command="mc", metric=metric, kind="asymptotic", n=n,
                    alpha=alpha, mu=mu, samples=cfg.samples, seed=cfg.seed,
                    bins=cfg.bins, precision=cfg.precision)
    # the acceptance allowance: finite-n bias on top of sampling noise
    threshold = 0.03 if n <= 10 else 0.02
    report = _mc_run(run, threshold=threshold)

    vs = np.linspace(v_lo, v_hi, _FIGURE_CURVE_POINTS)
    params = ScaledParams(mu, alpha)
    if metric == METRIC_KAPPA_D:
        pdf = pdf_v_kappa_d_grid(vs, params)
    else:
        pdf = pdf_v_kappa_e_grid(vs, params)

    curve_path = f"{prefix}_curve.csv"
    hist_path = f"{prefix}_hist.csv"
    report_path = f"{prefix}_report.json"
    _write_atomic(curve_path, _curve_csv(vs, pdf))
    _write_atomic(hist_path, _hist_csv(report.edges, report.masses))
    payload = _report_payload(cfg, report)
    payload["results"]["files"] = [curve_path, hist_path]
    _write_atomic(report_path, _json_text(payload))
    print(f"figure {cfg.figure_id}: metric={metric} n={n} alpha={alpha} mu={mu:g} "
          f"ks={report.ks_statistic:.5f} threshold={threshold:g} "
          f"{'pass' if report.passed else 'FAIL'} -> {prefix}_*")
    return EXIT_OK


# ---------------------------------------------------------------------------
# selftest: one deterministic check per cross-module invariant


def _rel_gap(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def _st_kd_modes():
    for n in (2, 4):
        for alpha in (0, 1):
            dims = Dims(n, alpha)
            ys = np.linspace(n + 0.2, 6.0 * n, 40)
            gap = _rel_gap(pdf_kappa_d_grid(ys, dims, mode="theorem"),
                           pdf_kappa_d_grid(ys, dims, mode="closed"))
            assert gap < 1e-10, f"n={n} alpha={alpha} gap={gap:.2e}"


def _st_exact_normalizations():
    dims = Dims(3, 1)
    for name, fn in (("kappa-d", normalization_kappa_d),
                     ("kappa-e", normalization_kappa_e),
                     ("lambda-min", normalization_lambda_min),
                     ("lambda-2", normalization_lambda2)):
        total = fn(dims)
        assert abs(total - 1.0) < 1e-6, f"{name}: {total!r}"


def _st_asymptotic_normalizations():
    for alpha in (0, 1):
        for name, total in (("kappa-d", normalization_v_kappa_d(ScaledParams(1.0, alpha))),
                            ("kappa-e", normalization_v_kappa_e(ScaledParams(1.0, alpha)))):
            assert abs(total - 1.0) < 1e-6, f"{name} alpha={alpha}: {total!r}"


def _st_kd_asymptotic_modes():
    vs = np.linspace(0.02, 8.0, 50)
    for alpha in (1, 2):
        params = ScaledParams(1.0, alpha)
        gap = _rel_gap(pdf_v_kappa_d_grid(vs, params, mode="determinant"),
                       pdf_v_kappa_d_grid(vs, params, mode="closed"))
        assert gap < 1e-9, f"alpha={alpha} gap={gap:.2e}"


def _st_limit_cdf_identity():
    mu = 4.0
    for x in np.linspace(0.8, 6.0, 20):
        got = cdf_v_kappa_d_alpha0(x * x / (4.0 * mu), mu)
        want = float(np.exp(-4.0 / (x * x)))
        assert abs(got - want) < 1e-12, f"x={x}: {got!r} vs {want!r}"


def _st_integer_lemmas():
    rng = random.Random(7)
    for _ in range(60):
        alpha = rng.randint(1, 5)
        n = rng.randint(2, 6)
        jvec = [rng.randint(0, n + alpha - 1 - l) for l in range(1, alpha + 1)]
        assert lemma_a1_det_int(jvec, n, alpha) == lemma_a1_rhs_int(jvec, n, alpha)
    for _ in range(60):
        alpha = rng.randint(1, 4)
        n = rng.randint(2, 6)
        lvec = [rng.randint(0, n + alpha - j) for j in (1, 2)]
        lvec += [rng.randint(0, n + alpha + 2 - k) for k in range(3, alpha + 3)]
        assert lemma_a2_det_int(lvec, n, alpha) == lemma_a2_rhs_int(lvec, n, alpha)


def _st_sampler_moments():
    dims = Dims(64, 0)
    a = sample_matrix(dims, seed=5).entries
    b = sample_matrix(dims, seed=5).entries
    assert np.array_equal(a, b), "same seed must reproduce the same matrix"
    mean_sq = float(np.mean(np.abs(a) ** 2))
    assert abs(mean_sq - 1.0) < 0.05, f"mean |entry|^2 = {mean_sq!r}"


def _st_mc_exact_agreement():
    dims = Dims(3, 0)
    draws = mc_collect(METRIC_KAPPA_D, dims, 4000, seed=11)
    cdf = cdf_kappa_d_interp(dims, float(draws.max()) * (1.0 + 1e-9))
    stat = ks_compare(draws, cdf)
    bound = ks_threshold(len(draws))
    assert stat < bound, f"ks={stat:.4f} >= {bound:.4f}"


def _st_connection_identities():
    for n in (3, 4):
        for alpha in (0, 1):
            dims = Dims(n, alpha)
            for y in (n + 0.7, 2.0 * n, 3.5 * n):
                gap = _rel_gap(pdf_via_min_connection(y, dims), pdf_kappa_d(y, dims))
                assert gap < 1e-8, f"kappa-d n={n} alpha={alpha} y={y}: {gap:.2e}"
                gap = _rel_gap(pdf_via_lambda2_connection(y - 1.0, dims),
                               pdf_kappa_e(y - 1.0, dims))
                assert gap < 1e-8, f"kappa-e n={n} alpha={alpha} y={y - 1.0}: {gap:.2e}"


def _st_proof_integrals():
    for n, alpha, z in ((2, 1, 0.3), (3, 2, 0.7)):
        gap = _rel_gap(q_closed(n, alpha, z), q_integral_oracle(n, alpha, z))
        assert gap < 1e-6, f"q n={n} alpha={alpha} z={z}: {gap:.2e}"
    for n, a, b, alpha in ((2, 1.2, 0.8, 1), (3, 0.9, 1.4, 2)):
        gap = _rel_gap(r_closed(n, a, b, alpha), r_integral_oracle(n, a, b, alpha))
        assert gap < 1e-6, f"r n={n} a={a} b={b} alpha={alpha}: {gap:.2e}"


_SELFTEST_CHECKS = (
    ("kappa-d nested sums vs closed form", _st_kd_modes),
    ("exact densities integrate to 1", _st_exact_normalizations),
    ("asymptotic densities integrate to 1", _st_asymptotic_normalizations),
    ("asymptotic kappa-d determinant vs closed form", _st_kd_asymptotic_modes),
    ("alpha=0 limit CDF identity", _st_limit_cdf_identity),
    ("integer determinant lemmas", _st_integer_lemmas),
    ("sampler determinism and moments", _st_sampler_moments),
    ("Monte Carlo vs exact CDF at n=3", _st_mc_exact_agreement),
    ("connection identities", _st_connection_identities),
    ("proof-integral closed forms vs quadrature", _st_proof_integrals),
)


def cmd_selftest(cfg: RunConfig) -> int:
    failures = 0
    for name, check in _SELFTEST_CHECKS:
        started = time.perf_counter()
        try:
            check()
        except Exception as exc:  # every failure becomes a report line
            failures += 1
            print(f"FAIL  {name}: {exc}")
        else:
            print(f"ok    {name}  ({time.perf_counter() - started:.1f}s)")
    if failures:
        print(f"{failures} of {len(_SELFTEST_CHECKS)} checks failed")
        return EXIT_SELFTEST
    print(f"all {len(_SELFTEST_CHECKS)} checks passed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_shared(sub, *, dims=True, mu=False, precision=True, output=True):
    if dims:
        sub.add_argument("--n", type=int, help="matrix columns")
        sub.add_argument("--alpha", type=int, help="rows minus columns")
    if mu:
        sub.add_argument("--mu", type=float, help="scale constant of the limit variable")
    if precision:
        sub.add_argument("--precision", choices=("auto", "double", "extended"),
                         default="auto")
    if output:
        sub.add_argument("--out", help="output path (default: stdout)")
        sub.add_argument("--format", choices=("csv", "json"), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wishartcond",
                     description="Condition-number distributions of complex "
                                 "Gaussian Gram matrices.")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("density", help="evaluate a density curve on a grid")
    p.add_argument("--metric", choices=METRICS, required=True)
    p.add_argument("--kind", choices=("exact", "asymptotic"), default="exact")
    p.add_argument("--grid", required=True, help="start:stop:points")
    _add_shared(p, mu=True)

    p = commands.add_parser("mgf", help="evaluate a moment generating function")
    p.add_argument("--metric", choices=(METRIC_KAPPA_D, METRIC_KAPPA_E), required=True)
    p.add_argument("--s", type=float, help="single transform argument")
    p.add_argument("--grid", help="start:stop:points over transform arguments")
    _add_shared(p)

    p = commands.add_parser("mc", help="Monte Carlo draws scored against a curve")
    p.add_argument("--metric", choices=METRICS, required=True)
    p.add_argument("--kind", choices=("exact", "asymptotic"), default="exact")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--bins", type=int, default=60)
    _add_shared(p, mu=True)

    p = commands.add_parser("figure", help="emit a built-in comparison figure "
                                           "as data files")
    p.add_argument("--id", dest="figure_id", choices=sorted(_FIGURES), required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--precision", choices=("auto", "double", "extended"),
                   default="auto")
    p.add_argument("--out", help="output path prefix")

    commands.add_parser("selftest", help="run the cross-module invariant suite")
    return parser


_DEFAULT_FORMATS = {"density": "csv", "mgf": "csv", "mc": "json"}


def config_from_args(argv) -> RunConfig:
    space = build_parser().parse_args(argv)
    values = vars(space)
    if values.get("format") is None:
        values["format"] = _DEFAULT_FORMATS.get(values["command"], "csv")
    known = {f.name for f in fields(RunConfig)}
    return RunConfig(**{k: v for k, v in values.items() if k in known})


_COMMANDS = {
    "density": cmd_density,
    "mgf": cmd_mgf,
    "mc": cmd_mc,
    "figure": cmd_figure,
    "selftest": cmd_selftest,
}


def run(cfg: RunConfig) -> int:
    if cfg.command not in _COMMANDS:
        raise UsageError(f"unknown command {cfg.command!r}")
    return _COMMANDS[cfg.command](cfg)


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("WISHARTCOND_LOG", "WARNING"))
    try:
        cfg = config_from_args(sys.argv[1:] if argv is None else argv)
        return run(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, SamplerError, FloatingPointError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
