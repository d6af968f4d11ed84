"""Dense complex linear-algebra primitives.

Matrices and vectors are plain numpy ``complex128`` arrays.  Everything in
this module is a pure function of its inputs; family objects freeze their
arrays on construction so they are safe to share.

Norms are Frobenius throughout.  Overflow is handled by a saturate-and-flag
policy: word application never raises on magnitude growth, it returns a
boolean flag instead, and diagonal families are routed through a log-domain
representation that stays exact far beyond the binary64 range.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadPartition, DimensionMismatch, NotCommuting

TOL_COMM = 1e-10
TOL_STRUCT = 1e-9
SATURATION_LIMIT = 1e300
LOG_SATURATION = np.log(SATURATION_LIMIT)


def as_matrix(a) -> np.ndarray:
    """Coerce to a square complex matrix and validate shape/finiteness."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def as_vector(v, n: int | None = None) -> np.ndarray:
    w = np.asarray(v, dtype=complex).reshape(-1)
    if n is not None and w.shape[0] != n:
        raise DimensionMismatch(f"expected a vector of length {n}, got {w.shape[0]}")
    return w


def frobenius(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def wrap_angle(x):
    """Wrap angles into (-pi, pi]."""
    a = np.remainder(np.asarray(x, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(a == -np.pi, np.pi, a)


@dataclass(frozen=True)
class Word:
    """Exponent tuple addressing one semigroup element A_1^k1 ... A_p^kp."""

    exponents: tuple[int, ...]

    def __post_init__(self):
        if any(k < 0 for k in self.exponents):
            raise ValueError("word exponents must be nonnegative")

    @property
    def total_degree(self) -> int:
        return sum(self.exponents)

    @property
    def p(self) -> int:
        return len(self.exponents)

    def __add__(self, other: "Word") -> "Word":
        if len(self.exponents) != len(other.exponents):
            raise DimensionMismatch("words address different generator counts")
        return Word(tuple(a + b for a, b in zip(self.exponents, other.exponents)))


@dataclass(frozen=True)
class GeneratorFamily:
    """A verified-commuting tuple of n x n generators.

    Constructed through :func:`verify_commuting`; the arrays are frozen so a
    family can be shared across threads without copies.
    """

    n: int
    generators: tuple[np.ndarray, ...]
    commutation_residual: float
    labels: tuple[str, ...] | None = None
    is_diagonal: bool = field(default=False)

    @property
    def p(self) -> int:
        return len(self.generators)


def _freeze(m: np.ndarray) -> np.ndarray:
    m = m.copy()
    m.setflags(write=False)
    return m


def verify_commuting(matrices, tol: float = TOL_COMM, labels=None) -> GeneratorFamily:
    """Check pairwise commutation and build a :class:`GeneratorFamily`.

    The residual for a pair (A, B) is |AB - BA|_F / (|A|_F |B|_F + 1); the
    family is accepted iff the max over pairs is <= ``tol``.  Raises
    :class:`NotCommuting` (carrying the worst pair) otherwise.
    """
    mats = [as_matrix(a) for a in matrices]
    if not mats:
        raise DimensionMismatch("empty generator list")
    n = mats[0].shape[0]
    for k, m in enumerate(mats):
        if m.shape[0] != n:
            raise DimensionMismatch(
                f"generator {k + 1} is {m.shape[0]}x{m.shape[1]}, expected {n}x{n}"
            )
    norms = [frobenius(m) for m in mats]
    worst = (0.0, 0.0, 0, 0)
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            raw = frobenius(mats[i] @ mats[j] - mats[j] @ mats[i])
            res = raw / (norms[i] * norms[j] + 1.0)
            if res > worst[0]:
                worst = (res, raw, i, j)
    if worst[0] > tol:
        raise NotCommuting(worst[2], worst[3], worst[1], worst[0], tol)
    diagonal = all(np.count_nonzero(m - np.diag(np.diagonal(m))) == 0 for m in mats)
    return GeneratorFamily(
        n=n,
        generators=tuple(_freeze(m) for m in mats),
        commutation_residual=worst[0],
        labels=tuple(labels) if labels else None,
        is_diagonal=diagonal,
    )


def block_slices(partition) -> list[slice]:
    partition = [int(b) for b in partition]
    if any(b <= 0 for b in partition):
        raise BadPartition(f"partition entries must be positive, got {partition}")
    out, start = [], 0
    for b in partition:
        out.append(slice(start, start + b))
        start += b
    return out


def is_in_K(m: np.ndarray, partition, tol: float = TOL_STRUCT):
    """Test membership in the blockwise lower-triangular structure.

    A matrix belongs to the structure for ``partition`` = (n_1, ..., n_r)
    when it is block diagonal and each diagonal block is lower triangular
    with a single repeated diagonal value.  Returns ``(ok, residual)`` where
    ``residual`` is the largest violating entry magnitude (absolute).
    """
    m = as_matrix(m)
    n = m.shape[0]
    sl = block_slices(partition)
    if sl[-1].stop != n:
        raise BadPartition(
            f"partition {tuple(partition)} sums to {sl[-1].stop}, matrix has order {n}"
        )
    mask_off = np.ones((n, n), dtype=bool)
    residual = 0.0
    for s in sl:
        mask_off[s, s] = False
        block = m[s, s]
        d = block.shape[0]
        if d > 1:
            upper = np.abs(block[np.triu_indices(d, k=1)])
            if upper.size:
                residual = max(residual, float(upper.max()))
        diag = np.diagonal(block)
        mu = diag.mean()
        if d > 1:
            residual = max(residual, float(np.abs(diag - mu).max()))
    off = np.abs(m[mask_off])
    if off.size:
        residual = max(residual, float(off.max()))
    return residual <= tol, residual


@dataclass(frozen=True)
class LogDiagonal:
    """Log-domain form of a diagonal matrix: entries exp(log_moduli + i args).

    ``log_moduli[i] = -inf`` encodes an exactly zero entry.  Args are kept in
    (-pi, pi].  Powers and products become additions here, so diagonal word
    application cannot overflow while the final result is representable.
    """

    n: int
    log_moduli: np.ndarray
    args: np.ndarray

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "LogDiagonal":
        m = as_matrix(m)
        d = np.diagonal(m)
        if np.count_nonzero(m - np.diag(d)) != 0:
            raise ValueError("matrix is not diagonal")
        with np.errstate(divide="ignore"):
            lm = np.log(np.abs(d))
        return cls(n=m.shape[0], log_moduli=_freeze(lm), args=_freeze(np.angle(d)))

    @classmethod
    def from_values(cls, log_moduli, args) -> "LogDiagonal":
        lm = np.asarray(log_moduli, dtype=float)
        ar = wrap_angle(args)
        if lm.shape != ar.shape:
            raise DimensionMismatch("log_moduli and args must have equal length")
        return cls(n=lm.shape[0], log_moduli=_freeze(lm), args=_freeze(ar))

    def to_matrix(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            d = np.exp(self.log_moduli) * np.exp(1j * self.args)
        return np.diag(d)

    def power(self, k: int) -> "LogDiagonal":
        return LogDiagonal.from_values(k * self.log_moduli, k * self.args)

    def __mul__(self, other: "LogDiagonal") -> "LogDiagonal":
        return LogDiagonal.from_values(
            self.log_moduli + other.log_moduli, self.args + other.args
        )


def word_log_diagonal(family: GeneratorFamily, w: Word) -> LogDiagonal:
    """Log-domain diagonal of A_1^k1 ... A_p^kp for a diagonal family."""
    if not family.is_diagonal:
        raise ValueError("family is not diagonal")
    if w.p != family.p:
        raise DimensionMismatch("word length does not match generator count")
    lm = np.zeros(family.n)
    ar = np.zeros(family.n)
    for k, g in zip(w.exponents, family.generators):
        if k == 0:
            continue
        ld = LogDiagonal.from_matrix(g)
        lm = lm + k * ld.log_moduli
        ar = ar + k * ld.args
    return LogDiagonal.from_values(lm, ar)


def matrix_power(m: np.ndarray, k: int):
    """m**k by repeated squaring.  Returns (result, saturated)."""
    n = m.shape[0]
    result = np.eye(n, dtype=complex)
    base = m
    saturated = False
    with np.errstate(over="ignore", invalid="ignore"):
        while k > 0:
            if k & 1:
                result = result @ base
                saturated = saturated or _overflowed(result)
            k >>= 1
            if k:
                base = base @ base
                saturated = saturated or _overflowed(base)
    return result, saturated


def _overflowed(m: np.ndarray) -> bool:
    a = np.abs(m)
    return bool(np.any(~np.isfinite(a)) or np.any(a > SATURATION_LIMIT))


def word_apply(family: GeneratorFamily, w: Word, v) -> tuple[np.ndarray, bool]:
    """Apply the word product A_1^k1 ... A_p^kp to a vector.

    Uses per-generator repeated squaring; the result carries a saturation
    flag instead of raising when any intermediate magnitude exceeds the
    binary64-safe limit.  Diagonal families take the log-domain route which
    only flags results that are themselves unrepresentable.
    """
    vec = as_vector(v, family.n)
    if w.p != family.p:
        raise DimensionMismatch("word length does not match generator count")
    if family.is_diagonal:
        ld = word_log_diagonal(family, w)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_out = ld.log_moduli + np.log(np.abs(vec))
            arg_out = ld.args + np.angle(vec)
        zero = vec == 0
        saturated = bool(np.any(log_out[~zero] > LOG_SATURATION))
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.exp(log_out) * np.exp(1j * arg_out)
        out[zero] = 0.0
        return out, saturated
    saturated = False
    out = vec
    with np.errstate(over="ignore", invalid="ignore"):
        for k, g in zip(reversed(w.exponents), reversed(family.generators)):
            if k == 0:
                continue
            pw, sat = matrix_power(g, k)
            saturated = saturated or sat
            out = pw @ out
            saturated = saturated or _overflowed(out)
    return out, saturated


def word_matrix(family: GeneratorFamily, w: Word) -> tuple[np.ndarray, bool]:
    """Full matrix of the word product, with the same saturation policy."""
    if w.p != family.p:
        raise DimensionMismatch("word length does not match generator count")
    out = np.eye(family.n, dtype=complex)
    saturated = False
    with np.errstate(over="ignore", invalid="ignore"):
        for k, g in zip(w.exponents, family.generators):
            if k == 0:
                continue
            pw, sat = matrix_power(g, k)
            saturated = saturated or sat
            out = out @ pw
            saturated = saturated or _overflowed(out)
    return out, saturated
