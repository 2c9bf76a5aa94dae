"""Monte Carlo ground truth for the analytic densities.

Sampling is deterministic by construction: draw index i under seed s uses
its own counter-based stream keyed by (s, i), so the same draw comes out
bit-identical whether the batch runs on one worker or eight, and any
single matrix can be regenerated in isolation.  Normals come from
Box-Muller applied to the raw 64-bit stream; each complex entry has unit
variance (1/2 per real component).

Two eigenvalue paths, both implemented here rather than delegated:

* cyclic complex Jacobi with accumulated vectors, used for single
  matrices; its per-pair residual is checked against the Gram matrix.
* batched Householder tridiagonalization plus Sturm bisection, used by
  the bulk collector, which only needs the one or two smallest
  eigenvalues and the trace of each sample.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exact import (
    METRIC_KAPPA_D,
    METRIC_KAPPA_E,
    METRIC_LAMBDA_2,
    METRIC_LAMBDA_MIN,
    METRICS,
    Dims,
    EigenSpectrum,
    metric_from_spectrum,
)

log = logging.getLogger("wishartcond")

_INV64 = 2.0 ** -64
_JACOBI_SWEEP_CAP = 60
_RESIDUAL_BOUND = 1e-10
_PIVMIN = 1e-290


class SamplerError(RuntimeError):
    """Eigensolver breakdown or an impossible sample, with its index."""


@dataclass(frozen=True)
class ComplexMatrix:
    """One Gaussian draw: entries are iid complex standard normals."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.ndim != 2:
            raise ValueError("need a 2-d entry array")
        object.__setattr__(self, "entries", e)

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]


def _raw_block(seed: int, index: int, count: int) -> np.ndarray:
    bg = np.random.Philox(key=[seed & (2 ** 64 - 1), index & (2 ** 64 - 1)])
    return bg.random_raw(count)


def _box_muller(raw: np.ndarray) -> np.ndarray:
    """Interleaved raw 64-bit words to complex standard normals."""
    # u1 in (0, 1] keeps the log finite; u2 in [0, 1)
    u1 = (raw[..., 0::2].astype(np.float64) + 1.0) * _INV64
    u2 = raw[..., 1::2].astype(np.float64) * _INV64
    r = np.sqrt(-np.log(u1))
    ang = (2.0 * math.pi) * u2
    return r * np.cos(ang) + 1j * (r * np.sin(ang))


def _normal_block(seed: int, index: int, count: int) -> np.ndarray:
    """count iid complex standard normals from the (seed, index) stream."""
    return _box_muller(_raw_block(seed, index, 2 * count))


def sample_matrix(dims: Dims, seed: int, index: int = 0) -> ComplexMatrix:
    """The index-th matrix draw of the given shape under this seed."""
    z = _normal_block(seed, index, dims.mn)
    return ComplexMatrix(z.reshape(dims.m, dims.n))


def _matrix_batch(dims: Dims, seed: int, start: int, stop: int) -> np.ndarray:
    raw = np.empty((stop - start, 2 * dims.mn), dtype=np.uint64)
    for k in range(start, stop):
        raw[k - start] = _raw_block(seed, k, 2 * dims.mn)
    return _box_muller(raw).reshape(stop - start, dims.m, dims.n)


# ---------------------------------------------------------------------------
# cyclic complex Jacobi, with vectors


def jacobi_eigh(G: np.ndarray, tol: float = 1e-14,
                sweep_cap: int = _JACOBI_SWEEP_CAP):
    """Full Hermitian eigendecomposition by cyclic Jacobi rotations.

    Returns (values ascending, vectors as columns).  Each rotation first
    strips the phase of the pivot entry, then applies the classical
    symmetric rotation picked from the smaller-angle root.
    """
    A = np.array(G, dtype=complex)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("need a square matrix")
    U = np.eye(n, dtype=complex)
    off_scale = tol * max(np.linalg.norm(A), 1e-300)
    for sweep in range(sweep_cap):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = A[p, q]
                ag = abs(g)
                off = max(off, ag)
                if ag == 0.0:
                    continue
                phase = g / ag
                a = A[p, p].real
                b = A[q, q].real
                tau = (b - a) / (2.0 * ag)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                # J restricted to (p, q): [[c, s], [-s conj(phase), c conj(phase)]]
                colp = A[:, p] * c - A[:, q] * (s * np.conj(phase))
                colq = A[:, p] * s + A[:, q] * (c * np.conj(phase))
                A[:, p] = colp
                A[:, q] = colq
                rowp = A[p, :] * c - A[q, :] * (s * phase)
                rowq = A[p, :] * s + A[q, :] * (c * phase)
                A[p, :] = rowp
                A[q, :] = rowq
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                A[p, q] = 0.0
                A[q, p] = 0.0
                colp = U[:, p] * c - U[:, q] * (s * np.conj(phase))
                colq = U[:, p] * s + U[:, q] * (c * np.conj(phase))
                U[:, p] = colp
                U[:, q] = colq
        if off <= off_scale:
            vals = np.diag(A).real
            order = np.argsort(vals, kind="stable")
            return vals[order], U[:, order]
    raise SamplerError(f"Jacobi sweep cap {sweep_cap} hit, off-diagonal {off:.3e}")


def gram_spectrum(A: ComplexMatrix) -> EigenSpectrum:
    """Ascending spectrum of A*A with an enforced per-pair residual bound."""
    if A.m < A.n:
        raise ValueError("need at least as many rows as columns")
    G = A.entries.conj().T @ A.entries
    vals, vecs = jacobi_eigh(G)
    scale = max(float(vals[-1]), 1e-300) if len(vals) else 1e-300
    resid = np.linalg.norm(G @ vecs - vecs * vals[None, :], axis=0)
    worst = float(resid.max() / scale)
    if worst > _RESIDUAL_BOUND:
        raise SamplerError(f"eigenpair residual {worst:.3e} above bound")
    return EigenSpectrum(np.maximum(vals, 0.0), Dims(A.n, A.m - A.n))


# ---------------------------------------------------------------------------
# batched tridiagonalization + Sturm bisection


def _tridiagonalize_batch(G: np.ndarray):
    """Reduce a stack of Hermitian matrices to (diagonal, |subdiagonal|^2)."""
    B = np.array(G, dtype=complex)
    k, n, _ = B.shape
    for j in range(n - 2):
        x = B[:, j + 1:, j]
        normx = np.sqrt((x.real ** 2 + x.imag ** 2).sum(axis=1))
        x0 = x[:, 0]
        ax0 = np.abs(x0)
        phase = np.where(ax0 > 0, x0 / np.where(ax0 > 0, ax0, 1.0), 1.0)
        head = -phase * normx
        v = x.copy()
        v[:, 0] -= head
        vnorm2 = (v.real ** 2 + v.imag ** 2).sum(axis=1)
        beta = np.where(vnorm2 > 0, 2.0 / np.where(vnorm2 > 0, vnorm2, 1.0), 0.0)
        S = B[:, j + 1:, j + 1:]
        p = beta[:, None] * (S @ v[:, :, None])[:, :, 0]
        kk = 0.5 * beta * np.einsum("ki,ki->k", np.conj(v), p).real
        w = p - kk[:, None] * v
        # S -= v w^H + w v^H, as one stacked rank-2 product
        vw = np.stack([v, w], axis=2)
        wv = np.conj(np.stack([w, v], axis=2))
        S -= vw @ np.swapaxes(wv, 1, 2)
        B[:, j + 1, j] = head
        B[:, j + 2:, j] = 0.0
        B[:, j, j + 1:] = np.conj(B[:, j + 1:, j])
    d = np.real(np.einsum("kii->ki", B))
    sub = B[:, np.arange(1, n), np.arange(0, n - 1)] if n > 1 else np.empty((k, 0))
    e2 = (sub.real ** 2 + sub.imag ** 2)
    return d, e2


def _sturm_counts(d: np.ndarray, e2: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Number of eigenvalues strictly below x, per batch member."""
    q = d[:, 0] - x
    q = np.where(np.abs(q) < _PIVMIN, -_PIVMIN, q)
    cnt = (q < 0).astype(np.int64)
    for i in range(1, d.shape[1]):
        q = d[:, i] - x - e2[:, i - 1] / q
        q = np.where(np.abs(q) < _PIVMIN, -_PIVMIN, q)
        cnt += q < 0
    return cnt


def _kth_smallest(d: np.ndarray, e2: np.ndarray, kth: int) -> np.ndarray:
    """kth smallest eigenvalue (1-based) of each tridiagonal in the stack."""
    n = d.shape[1]
    if n == 1:
        return d[:, 0].copy()
    e = np.sqrt(e2)
    r = np.zeros_like(d)
    r[:, :-1] += e
    r[:, 1:] += e
    lo = (d - r).min(axis=1)
    hi = (d + r).max(axis=1)
    hi = hi + 1e-12 * np.maximum(np.abs(hi), 1.0)
    # each lane freezes on its own tolerance, so a sample's bisection path
    # never depends on what else shares the batch
    for _ in range(130):
        live = hi - lo > 1e-14 * np.maximum(np.abs(hi), 1e-30)
        if not np.any(live):
            break
        mid = 0.5 * (lo + hi)
        below = _sturm_counts(d, e2, mid) >= kth
        hi = np.where(live & below, mid, hi)
        lo = np.where(live & ~below, mid, lo)
    return 0.5 * (lo + hi)


def _chunk_values(metric: str, dims: Dims, seed: int, start: int, stop: int,
                  debug: bool) -> np.ndarray:
    A = _matrix_batch(dims, seed, start, stop)
    G = np.swapaxes(A.conj(), 1, 2) @ A
    tr = np.real(np.einsum("kii->k", G))
    d, e2 = _tridiagonalize_batch(G)
    lam1 = _kth_smallest(d, e2, 1)
    lam2 = _kth_smallest(d, e2, 2) if dims.n >= 2 else None
    bad = ~np.isfinite(lam1) | (lam1 <= 0)
    if lam2 is not None:
        bad |= ~np.isfinite(lam2)
    if np.any(bad):
        idx = start + int(np.argmax(bad))
        raise SamplerError(f"eigensolver failed for sample index {idx}")
    if debug:
        _debug_check(A, G, lam1, lam2, start)
    if metric == METRIC_KAPPA_D:
        return tr / lam1
    if metric == METRIC_KAPPA_E:
        return tr / lam2
    if metric == METRIC_LAMBDA_MIN:
        return lam1
    return lam2


def _debug_check(A: np.ndarray, G: np.ndarray, lam1, lam2, start: int):
    # full Jacobi pass per sample: residual enforcement plus agreement
    # between the two eigenvalue paths
    for k in range(A.shape[0]):
        spec = gram_spectrum(ComplexMatrix(A[k]))
        scale = max(float(spec.values[-1]), 1e-300)
        if abs(spec.values[0] - lam1[k]) > 1e-8 * scale:
            raise SamplerError(
                f"eigenvalue paths disagree at sample index {start + k}")
        if lam2 is not None and abs(spec.values[1] - lam2[k]) > 1e-8 * scale:
            raise SamplerError(
                f"eigenvalue paths disagree at sample index {start + k}")


def mc_collect(metric: str, dims: Dims, count: int, seed: int,
               workers: int = 1, chunk: int = 4096,
               debug: bool = False) -> np.ndarray:
    """count draws of the chosen statistic, bit-deterministic in (seed, index).

    The sample index space is split into fixed chunks; workers only change
    how chunks are scheduled, never what any index produces.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    if count < 1:
        raise ValueError("count must be >= 1")
    if metric in (METRIC_KAPPA_E, METRIC_LAMBDA_2) and dims.n < 2:
        raise ValueError("second-smallest eigenvalue needs n >= 2")
    spans = [(s, min(s + chunk, count)) for s in range(0, count, chunk)]
    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda sp: _chunk_values(metric, dims, seed, sp[0], sp[1], debug),
                spans))
    else:
        parts = [_chunk_values(metric, dims, seed, s, t, debug) for s, t in spans]
    return np.concatenate(parts)


# ---------------------------------------------------------------------------
# empirical comparison


def ks_compare(draws, cdf) -> float:
    """Two-sided Kolmogorov-Smirnov distance between draws and a CDF."""
    xs = np.sort(np.asarray(draws, dtype=float))
    if len(xs) == 0:
        raise ValueError("need at least one draw")
    fs = np.asarray(cdf(xs), dtype=float)
    if np.any(np.diff(fs) < -1e-12):
        raise ValueError("cdf is not monotone over the sample range")
    n = len(xs)
    grid = np.arange(1, n + 1) / n
    return float(max((grid - fs).max(), (fs - (grid - 1.0 / n)).max()))


def ks_threshold(count: int) -> float:
    """Asymptotic 1% critical value for the KS statistic."""
    return 1.63 / math.sqrt(count)


@dataclass
class McReport:
    """One Monte Carlo validation run against an analytic curve."""

    dims: Dims
    metric: str
    samples: int
    seed: int
    bins: int
    edges: np.ndarray
    masses: np.ndarray
    ks_statistic: float
    ks_threshold: float
    passed: bool
    meta: dict = field(default_factory=dict)


def build_report(metric: str, dims: Dims, draws, seed: int, cdf,
                 bins: int = 60, threshold: float | None = None) -> McReport:
    """Histogram the draws and score them against the analytic CDF."""
    draws = np.asarray(draws, dtype=float)
    if threshold is None:
        threshold = ks_threshold(len(draws))
    counts, edges = np.histogram(draws, bins=bins)
    masses = counts / len(draws)
    stat = ks_compare(draws, cdf)
    return McReport(dims=dims, metric=metric, samples=len(draws), seed=seed,
                    bins=bins, edges=edges, masses=masses, ks_statistic=stat,
                    ks_threshold=threshold, passed=stat <= threshold)
