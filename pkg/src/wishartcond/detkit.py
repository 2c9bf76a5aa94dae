"""Determinants, Vandermonde products and multi-index iteration.

The exact densities are built from determinants of three flavours:

* exact integer determinants (fraction-free elimination), used by the
  falling-product identities that collapse the nested finite sums;
* floating determinants of small real matrices with an exactly tracked
  sign (partial-pivot elimination);
* determinants of matrices whose entries are sign/log-magnitude scalars,
  handled by factoring the largest magnitude out of each row first.

The nested sums themselves run over integer lattice boxes; IndexVector is
the odometer that walks such a box.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .numkit import DOUBLE, NumericContext, SignedLog


# ---------------------------------------------------------------------------
# lattice iteration


@dataclass(frozen=True)
class IndexVector:
    """A point in the box prod_i {0, ..., bounds[i]} (bounds inclusive)."""

    entries: tuple
    bounds: tuple

    def __post_init__(self):
        if len(self.entries) != len(self.bounds):
            raise ValueError("entries and bounds must have equal length")
        for e, b in zip(self.entries, self.bounds):
            if b < 0 or not 0 <= e <= b:
                raise ValueError(f"entry {e} outside [0, {b}]")

    @staticmethod
    def first(bounds) -> "IndexVector":
        bounds = tuple(bounds)
        return IndexVector((0,) * len(bounds), bounds)

    def next(self) -> "IndexVector | None":
        """Odometer step: increment the last slot, carrying left on overflow."""
        entries = list(self.entries)
        for i in reversed(range(len(entries))):
            if entries[i] < self.bounds[i]:
                entries[i] += 1
                return IndexVector(tuple(entries), self.bounds)
            entries[i] = 0
        return None


def iter_index_boxes(bounds):
    """Yield every entries-tuple of the box exactly once, odometer order."""
    bounds = tuple(bounds)
    if len(bounds) == 0:
        yield ()
        return
    iv = IndexVector.first(bounds)
    while iv is not None:
        yield iv.entries
        iv = iv.next()


# ---------------------------------------------------------------------------
# Vandermonde products


def vandermonde_int(xs) -> int:
    """Exact Vandermonde product prod_{l<k} (x_k - x_l) for integer nodes."""
    xs = list(xs)
    out = 1
    for k in range(len(xs)):
        for l in range(k):
            out *= xs[k] - xs[l]
    return out


def vandermonde(xs, ctx: NumericContext = DOUBLE) -> SignedLog:
    """Vandermonde product over real nodes, with exact zero on repeats."""
    xs = list(xs)
    sign = 1
    logmag = ctx.real(0.0)
    for k in range(len(xs)):
        for l in range(k):
            d = xs[k] - xs[l]
            if d == 0:
                return SignedLog.zero()
            if d < 0:
                sign = -sign
            logmag = logmag + ctx.log(abs(ctx.real(d)))
    return SignedLog(sign, logmag)


# ---------------------------------------------------------------------------
# determinants


def det_int(mat) -> int:
    """Exact determinant of an integer matrix by Bareiss elimination."""
    m = [list(map(int, row)) for row in mat]
    size = len(m)
    for row in m:
        if len(row) != size:
            raise ValueError("matrix must be square")
    if size == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(size - 1):
        if m[k][k] == 0:
            for r in range(k + 1, size):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[-1][-1]


def _eliminate(rows, size):
    """Partial-pivot elimination on mutable rows of backend scalars.

    Returns (parity, pivots) with parity the permutation sign, or None as
    pivots when the matrix is numerically singular.
    """
    parity = 1
    pivots = []
    for k in range(size):
        p = max(range(k, size), key=lambda r: abs(rows[r][k]))
        if rows[p][k] == 0:
            return parity, None
        if p != k:
            rows[k], rows[p] = rows[p], rows[k]
            parity = -parity
        piv = rows[k][k]
        pivots.append(piv)
        for i in range(k + 1, size):
            factor = rows[i][k] / piv
            if factor != 0:
                for j in range(k + 1, size):
                    rows[i][j] = rows[i][j] - factor * rows[k][j]
    return parity, pivots


def det_general(mat, ctx: NumericContext = DOUBLE) -> SignedLog:
    """Determinant of a real matrix as a SignedLog, sign tracked exactly."""
    rows = [[ctx.real(x) for x in row] for row in mat]
    size = len(rows)
    for row in rows:
        if len(row) != size:
            raise ValueError("matrix must be square")
    if size == 0:
        return SignedLog.one()
    parity, pivots = _eliminate(rows, size)
    if pivots is None:
        return SignedLog.zero()
    sign = parity
    logmag = ctx.real(0.0)
    for piv in pivots:
        if piv < 0:
            sign = -sign
        logmag = logmag + ctx.log(abs(piv))
    return SignedLog(sign, logmag)


def det_signedlog(mat) -> SignedLog:
    """Determinant of a matrix of SignedLog entries.

    The largest log-magnitude of each row is factored out, the scaled matrix
    (entries in [-1, 1]) is eliminated in the backend arithmetic, and the row
    factors are added back in the log domain.
    """
    size = len(mat)
    for row in mat:
        if len(row) != size:
            raise ValueError("matrix must be square")
    if size == 0:
        return SignedLog.one()
    shifts = []
    scaled = []
    for row in mat:
        live = [c.logmag for c in row if c.sign != 0]
        if not live:
            return SignedLog.zero()
        m = live[0]
        for lm in live[1:]:
            if lm > m:
                m = lm
        shifts.append(m)
        scaled.append([c.sign * (0 if c.sign == 0 else _safe_exp(c.logmag - m)) for c in row])
    parity, pivots = _eliminate(scaled, size)
    if pivots is None:
        return SignedLog.zero()
    sign = parity
    logmag = sum(shifts[1:], shifts[0])
    for piv in pivots:
        if piv < 0:
            sign = -sign
        logmag = logmag + _safe_log(abs(piv))
    return SignedLog(sign, logmag)


def _safe_exp(x):
    from .numkit import _exp

    return _exp(x)


def _safe_log(x):
    from .numkit import _log

    return _log(x)


# ---------------------------------------------------------------------------
# falling-product determinant identities
#
# Both identities reduce a determinant of falling products over shifted index
# variables to the Vandermonde of the shifted indices themselves.  They are
# what collapses the nested sums of the exact densities into finitely many
# closed terms, so they get exact integer implementations plus property
# tests.


def _falling_product(base: int, count: int) -> int:
    """base (base-1) ... (base-count+1), empty product = 1."""
    out = 1
    for i in range(count):
        out *= base - i
    return out


def lemma_a1_matrix(jvec, n: int, alpha: int) -> list[list[int]]:
    jvec = list(jvec)
    if len(jvec) != alpha:
        raise ValueError("jvec must have length alpha")
    for l, j in enumerate(jvec, start=1):
        if not 0 <= j <= n + alpha - 1 - l:
            raise ValueError(f"index {j} out of range for slot {l}")
    mat = []
    for k in range(1, alpha + 1):
        row = []
        for l in range(1, alpha + 1):
            c_shift = n + alpha - 1 - jvec[l - 1] - l
            row.append(_falling_product(c_shift, alpha - k))
        mat.append(row)
    return mat


def lemma_a1_det_int(jvec, n: int, alpha: int) -> int:
    return det_int(lemma_a1_matrix(jvec, n, alpha))


def lemma_a1_lhs(jvec, n: int, alpha: int, ctx: NumericContext = DOUBLE) -> SignedLog:
    """Determinant side of the first falling-product identity."""
    return SignedLog.from_fraction(lemma_a1_det_int(jvec, n, alpha), ctx)


def lemma_a1_rhs_int(jvec, n: int, alpha: int) -> int:
    """Vandermonde side: nodes c_l = l + j_l."""
    del n  # the right-hand side depends on the indices alone
    return vandermonde_int([l + j for l, j in enumerate(jvec, start=1)])


def lemma_a2_matrix(lvec, n: int, alpha: int) -> list[list[int]]:
    lvec = list(lvec)
    if len(lvec) != alpha + 2:
        raise ValueError("lvec must have length alpha + 2")
    for j in (1, 2):
        if not 0 <= lvec[j - 1] <= n + alpha - j:
            raise ValueError(f"index {lvec[j-1]} out of range for slot {j}")
    for k in range(3, alpha + 3):
        if not 0 <= lvec[k - 1] <= n + alpha + 2 - k:
            raise ValueError(f"index {lvec[k-1]} out of range for slot {k}")
    shifted = []
    for j in (1, 2):
        z = j + lvec[j - 1]
        shifted.append(n + alpha - z)
    for k in range(3, alpha + 3):
        w = k + lvec[k - 1] - 2
        shifted.append(n + alpha - w)
    mat = []
    for i in range(1, alpha + 3):
        mat.append([_falling_product(s, alpha + 2 - i) for s in shifted])
    return mat


def lemma_a2_det_int(lvec, n: int, alpha: int) -> int:
    return det_int(lemma_a2_matrix(lvec, n, alpha))


def lemma_a2_lhs(lvec, n: int, alpha: int, ctx: NumericContext = DOUBLE) -> SignedLog:
    """Determinant side of the second falling-product identity."""
    return SignedLog.from_fraction(lemma_a2_det_int(lvec, n, alpha), ctx)


def lemma_a2_rhs_int(lvec, n: int, alpha: int) -> int:
    """Vandermonde side: nodes z_1, z_2 then w_3, ..., w_{alpha+2}."""
    del n
    nodes = [1 + lvec[0], 2 + lvec[1]]
    for k in range(3, alpha + 3):
        nodes.append(k + lvec[k - 1] - 2)
    return vandermonde_int(nodes)
