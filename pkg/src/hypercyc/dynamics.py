"""Orbit dynamics: word scans, J-set scoring, grid coverage, certification.

Enumeration order is fixed once and for all: total degree ascending, and
within one degree exponent tuples in descending lexicographic order.  Every
scan in this module walks words in that order, so partial minima and cell
sets merge deterministically.

True density is undecidable from finite data; the verdict vocabulary
(empirically-hypercyclic / not-hypercyclic / inconclusive) keeps that
epistemic status explicit.  Coverage thresholds live in
:class:`CertifyConfig` and are echoed into every result.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .algebra import (
    LOG_SATURATION,
    GeneratorFamily,
    LogDiagonal,
    Word,
    as_vector,
    is_in_K,
    word_apply,
    word_matrix,
)
from .errors import (
    BudgetOverflow,
    GridTooLarge,
    NoBasisVectorInU,
    NotTriangularForm,
)
from .normal_form import NormalForm, build_normal_form, reference_frame
from .structure import BlockStructureReport, rank_condition

GRID_CELL_LIMIT = 10**8


def scan_threads() -> int:
    """Worker cap for chunked scans, from HYPERCYC_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("HYPERCYC_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# word enumeration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WordBudget:
    """Degree window [min_total_degree, max_total_degree] for word scans.

    ``max_words`` optionally caps the enumeration; with ``on_overflow =
    "truncate"`` the scan keeps the first ``max_words`` words of the fixed
    order, otherwise exceeding the cap raises :class:`BudgetOverflow`.
    """

    max_total_degree: int
    min_total_degree: int = 0
    max_words: int | None = None
    on_overflow: str = "error"

    def __post_init__(self):
        if self.min_total_degree < 0:
            raise ValueError("min total degree must be nonnegative")
        # min > max is allowed and enumerates nothing (an empty window)
        if self.on_overflow not in ("error", "truncate"):
            raise ValueError("on_overflow must be 'error' or 'truncate'")


def word_count(p: int, budget: WordBudget) -> int:
    """Number of exponent tuples in the budget window (before any cap)."""
    return sum(
        math.comb(d + p - 1, p - 1)
        for d in range(budget.min_total_degree, budget.max_total_degree + 1)
    )


def _compositions(d: int, p: int, memo: dict) -> np.ndarray:
    """All p-tuples summing to d, descending lexicographic, as int32 rows."""
    key = (d, p)
    got = memo.get(key)
    if got is not None:
        return got
    if p == 1:
        out = np.array([[d]], dtype=np.int32)
    elif p == 2:
        first = np.arange(d, -1, -1, dtype=np.int32)
        out = np.column_stack([first, d - first])
    else:
        parts = []
        for k in range(d, -1, -1):
            sub = _compositions(d - k, p - 1, memo)
            block = np.empty((sub.shape[0], p), dtype=np.int32)
            block[:, 0] = k
            block[:, 1:] = sub
            parts.append(block)
        out = np.vstack(parts)
    memo[key] = out
    return out


def _apply_cap(p: int, budget: WordBudget) -> int | None:
    """Return the number of words to keep, or None for no cap."""
    if budget.max_words is None:
        return None
    count = word_count(p, budget)
    if count <= budget.max_words:
        return None
    if budget.on_overflow == "error":
        raise BudgetOverflow(count, budget.max_words)
    return budget.max_words


def exponent_array(p: int, budget: WordBudget) -> np.ndarray:
    """The full word list as an (m, p) int32 array in enumeration order."""
    keep = _apply_cap(p, budget)
    memo: dict = {}
    blocks = [
        _compositions(d, p, memo)
        for d in range(budget.min_total_degree, budget.max_total_degree + 1)
    ]
    memo.clear()
    arr = np.vstack(blocks) if blocks else np.zeros((0, p), dtype=np.int32)
    if keep is not None:
        arr = arr[:keep]
    return arr


def enumerate_words(p: int, budget: WordBudget):
    """Yield :class:`Word` objects in the fixed deterministic order."""
    keep = _apply_cap(p, budget)
    memo: dict = {}
    emitted = 0
    for d in range(budget.min_total_degree, budget.max_total_degree + 1):
        for row in _compositions(d, p, memo):
            if keep is not None and emitted >= keep:
                return
            yield Word(tuple(int(k) for k in row))
            emitted += 1


# ---------------------------------------------------------------------------
# the constrained least-squares kernel
# ---------------------------------------------------------------------------


def _ball_ls_distance(s: np.ndarray, g: np.ndarray, delta: float):
    """min over |v| <= delta of |diag(s) v - g|, s real >= 0.

    Returns (distance, v).  Solved exactly: the unconstrained minimizer if
    it fits in the ball, otherwise the boundary solution from the monotone
    one-dimensional secular equation in the Lagrange multiplier.
    """
    s = np.asarray(s, dtype=float)
    g = np.asarray(g, dtype=complex)
    pos = s > 0.0
    if delta == 0.0 or not pos.any():
        return float(np.linalg.norm(g)), np.zeros_like(g)
    sp = s[pos]
    gp = g[pos]
    unc = np.abs(gp) / sp
    v = np.zeros_like(g)
    if np.linalg.norm(unc) <= delta * (1.0 + 1e-12):
        v[pos] = gp / sp
        return float(np.linalg.norm(g[~pos])), v
    s2 = sp * sp
    w2 = s2 * np.abs(gp) ** 2

    def phi_log(mu):
        lam = math.exp(mu)
        with np.errstate(over="ignore"):
            val = float(np.sum(w2 / (s2 + lam) ** 2)) - delta * delta
        return min(val, 1e300) if math.isfinite(val) else 1e300

    # the multiplier can live anywhere between the float floor and
    # |S g| / delta, so bracket the monotone secular equation in log scale
    mu_lo = math.log(1e-300)
    hi = float(np.linalg.norm(sp * np.abs(gp))) / delta
    mu_hi = math.log(max(hi, 1e-290)) + 1e-6
    while phi_log(mu_hi) > 0 and mu_hi < 710:
        mu_hi += 5.0
    if phi_log(mu_lo) <= 0:
        lam = 1e-300
    else:
        lam = math.exp(
            scipy.optimize.brentq(phi_log, mu_lo, mu_hi, rtol=8.9e-16, maxiter=300)
        )
    v[pos] = sp * gp / (s2 + lam)
    resid = np.linalg.norm(np.concatenate([sp * v[pos] - gp, g[~pos]]))
    return float(resid), v


def distance_to_ball_image(w_mat, x, delta: float, y):
    """Exact min over |xt - x| <= delta of |W xt - y|.

    Returns (distance, minimizer).  A saturated (non-finite) W
    short-circuits to (+inf, None).  Distance 0 iff y lies in the image of
    the closed ball.
    """
    w_mat = np.asarray(w_mat, dtype=complex)
    if not np.all(np.isfinite(w_mat)):
        return float("inf"), None
    x = as_vector(x)
    y = as_vector(y)
    if delta < 0:
        raise ValueError("ball radius must be nonnegative")
    scale = max(1.0, float(np.abs(w_mat).max()) / 1e100)
    ws = w_mat / scale
    c = y / scale - ws @ x
    if delta == 0.0:
        return scale * float(np.linalg.norm(c)), x.copy()
    u_svd, s, vh = np.linalg.svd(ws)
    g = u_svd.conj().T @ c
    dist, v = _ball_ls_distance(s, g, delta)
    xt = x + vh.conj().T @ v
    return scale * dist, xt


def _diag_ball_distance(w_diag: np.ndarray, x, delta: float, y):
    """Same as distance_to_ball_image for W = diag(w_diag), in O(n)."""
    w_diag = np.asarray(w_diag, dtype=complex)
    if not np.all(np.isfinite(w_diag)):
        return float("inf"), None
    x = as_vector(x)
    y = as_vector(y)
    scale = max(1.0, float(np.abs(w_diag).max()) / 1e100)
    ws = w_diag / scale
    c = y / scale - ws * x
    if delta == 0.0:
        return scale * float(np.linalg.norm(c)), x.copy()
    phase = np.where(ws == 0, 1.0 + 0j, ws / np.abs(np.where(ws == 0, 1.0, ws)))
    g = np.conj(phase) * c
    dist, v = _ball_ls_distance(np.abs(ws), g, delta)
    return scale * dist, x + v


# ---------------------------------------------------------------------------
# J-set scoring
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JsetScore:
    """Best constrained distance to a target over an enumerated word budget."""

    x: np.ndarray
    y: np.ndarray
    delta: float
    budget: WordBudget
    best_word: Word | None
    best_distance: float
    words_scanned: int


class DiagonalWordScan:
    """Reusable word scan for a diagonal family.

    Precomputes the exponent table once; the per-target score pass is fully
    vectorized.  Exactness is preserved: a per-coordinate relaxation gives a
    valid lower bound for every word, candidate words are solved exactly in
    lower-bound order, and the scan stops once no bound can beat the best
    distance found.  Zero-distance hits short-circuit the scan at the first
    word (in enumeration order) whose ball image contains the target.
    """

    CHUNK = 400_000
    CACHE_LIMIT_BYTES = 500_000_000

    def __init__(self, family: GeneratorFamily, budget: WordBudget):
        if not family.is_diagonal:
            raise ValueError("DiagonalWordScan requires a diagonal family")
        self.family = family
        self.budget = budget
        self.exponents = exponent_array(family.p, budget)
        logs = [LogDiagonal.from_matrix(g) for g in family.generators]
        self.log_mod = np.vstack([ld.log_moduli for ld in logs])  # (p, n)
        self.args = np.vstack([ld.args for ld in logs])  # (p, n)
        n_words = self.exponents.shape[0]
        self._cache: list[tuple[np.ndarray, np.ndarray]] | None = None
        if n_words * family.n * 16 <= self.CACHE_LIMIT_BYTES:
            self._cache = [self._compute_chunk(lo, hi) for lo, hi in self._ranges()]

    def _ranges(self):
        n_words = self.exponents.shape[0]
        return [
            (lo, min(lo + self.CHUNK, n_words)) for lo in range(0, n_words, self.CHUNK)
        ]

    def _compute_chunk(self, lo, hi):
        e = self.exponents[lo:hi].astype(np.float64)
        return e @ self.log_mod, e @ self.args

    def _chunk(self, index, ranges):
        if self._cache is not None:
            return self._cache[index]
        return self._compute_chunk(*ranges[index])

    def word_at(self, idx: int) -> Word:
        return Word(tuple(int(k) for k in self.exponents[idx]))

    def diag_at(self, idx: int) -> np.ndarray:
        e = self.exponents[idx].astype(np.float64)
        with np.errstate(over="ignore"):
            return np.exp(e @ self.log_mod) * np.exp(1j * (e @ self.args))

    def score(self, x, y, delta: float) -> JsetScore:
        x = as_vector(x, self.family.n)
        y = as_vector(y, self.family.n)
        ranges = self._ranges()
        workers = scan_threads()

        def screen(index):
            lm, ar = self._chunk(index, ranges)
            with np.errstate(over="ignore", invalid="ignore"):
                aw = np.exp(lm)
                w = aw * np.exp(1j * ar)
                sat = lm.max(axis=1) > LOG_SATURATION if lm.size else np.zeros(0, bool)
                c = y[None, :] - w * x[None, :]
                ac = np.abs(c)
                ratio = np.where(
                    aw > 0, ac / np.where(aw > 0, aw, 1.0), np.where(ac == 0, 0.0, np.inf)
                )
                rho = np.sqrt(np.sum(ratio * ratio, axis=1))
                lb = np.sqrt(np.sum(np.maximum(ac - delta * aw, 0.0) ** 2, axis=1))
            lb[sat] = np.inf
            rho[sat] = np.inf
            return rho, lb

        if workers > 1 and len(ranges) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                screened = list(pool.map(screen, range(len(ranges))))
        else:
            screened = None

        best = float("inf")
        best_idx = -1
        cand_idx: list[np.ndarray] = []
        cand_lb: list[np.ndarray] = []
        scanned = self.exponents.shape[0]
        for index, (lo, hi) in enumerate(ranges):
            rho, lb = screened[index] if screened is not None else screen(index)
            zero = np.flatnonzero(rho <= delta)
            if zero.size:
                return JsetScore(
                    x=x, y=y, delta=delta, budget=self.budget,
                    best_word=self.word_at(lo + int(zero[0])),
                    best_distance=0.0, words_scanned=scanned,
                )
            if lb.size == 0:
                continue
            j = int(np.argmin(lb))
            if np.isfinite(lb[j]):
                d, _ = _diag_ball_distance(self.diag_at(lo + j), x, delta, y)
                if d < best or (d == best and lo + j < best_idx):
                    best, best_idx = d, lo + j
            keep = np.flatnonzero(lb < best)
            cand_idx.append(keep + lo)
            cand_lb.append(lb[keep])
        if cand_idx:
            idx = np.concatenate(cand_idx)
            lbs = np.concatenate(cand_lb)
            order = np.lexsort((idx, lbs))
            for k in order:
                i = int(idx[k])
                if lbs[k] >= best:
                    break
                d, _ = _diag_ball_distance(self.diag_at(i), x, delta, y)
                if d < best or (d == best and i < best_idx):
                    best, best_idx = d, i
        return JsetScore(
            x=x, y=y, delta=delta, budget=self.budget,
            best_word=self.word_at(best_idx) if best_idx >= 0 else None,
            best_distance=best, words_scanned=scanned,
        )


def delta_schedule(delta: float, rungs: int) -> tuple[float, ...]:
    """Shrinking ball radii delta / 2^t, t = 0..rungs-1.

    Limit-set membership concerns shrinking neighborhoods of the source
    point; scoring a target along this schedule (scores can only grow as
    the ball shrinks) strengthens the evidence a single radius gives.
    """
    if rungs < 1:
        raise ValueError("need at least one rung")
    return tuple(delta / 2**t for t in range(rungs))


def jset_score(
    family: GeneratorFamily,
    x,
    y,
    delta: float,
    budget: WordBudget,
    scanner: DiagonalWordScan | None = None,
) -> JsetScore:
    """Minimum constrained distance min_w min_{|xt-x|<=delta} |W_w xt - y|.

    The minimum runs over the enumerated word budget; the word realizing it
    is recorded.  The empty word is excluded by requiring min degree >= 1.
    """
    if budget.min_total_degree < 1:
        raise ValueError("J-set budgets need min total degree >= 1")
    if delta < 0:
        raise ValueError("ball radius must be nonnegative")
    x = as_vector(x, family.n)
    y = as_vector(y, family.n)
    if scanner is not None:
        if scanner.family is not family or scanner.budget != budget:
            raise ValueError("scanner was built for a different family or budget")
        return scanner.score(x, y, delta)
    if family.is_diagonal:
        return DiagonalWordScan(family, budget).score(x, y, delta)
    best = float("inf")
    best_word = None
    scanned = 0
    for w in enumerate_words(family.p, budget):
        scanned += 1
        mat, sat = word_matrix(family, w)
        if sat:
            continue
        d, _ = distance_to_ball_image(mat, x, delta, y)
        if d < best:
            best, best_word = d, w
            if best == 0.0:
                break
    if best_word is None and scanned:
        # every word saturated; report the first word with +inf
        best_word = next(enumerate_words(family.p, budget))
    return JsetScore(
        x=x, y=y, delta=delta, budget=budget,
        best_word=best_word, best_distance=best, words_scanned=scanned,
    )


# ---------------------------------------------------------------------------
# orbit sampling and grid coverage
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrbitCloud:
    """Orbit points with per-point word provenance and saturation flags."""

    exponents: np.ndarray  # (m, p) int32
    points: np.ndarray  # (m, n) complex
    saturated: np.ndarray  # (m,) bool

    @property
    def p(self) -> int:
        return self.exponents.shape[1]

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]


def orbit_sample(family: GeneratorFamily, v, budget: WordBudget) -> OrbitCloud:
    """Apply every enumerated word to v.

    Saturated points are retained with their flag set: they witness escape
    to infinity but never count as grid hits.
    """
    v = as_vector(v, family.n)
    exps = exponent_array(family.p, budget)
    m = exps.shape[0]
    if family.is_diagonal:
        logs = [LogDiagonal.from_matrix(g) for g in family.generators]
        log_mod = np.vstack([ld.log_moduli for ld in logs])
        args = np.vstack([ld.args for ld in logs])
        with np.errstate(divide="ignore"):
            lv = np.log(np.abs(v))
        av = np.angle(v)
        points = np.empty((m, family.n), dtype=complex)
        saturated = np.zeros(m, dtype=bool)
        chunk = DiagonalWordScan.CHUNK
        for lo in range(0, m, chunk):
            hi = min(lo + chunk, m)
            e = exps[lo:hi].astype(np.float64)
            lm = e @ log_mod + lv[None, :]
            ar = e @ args + av[None, :]
            with np.errstate(over="ignore", invalid="ignore"):
                pts = np.exp(lm) * np.exp(1j * ar)
            pts[:, v == 0] = 0.0
            finite_cols = v != 0
            if finite_cols.any():
                saturated[lo:hi] = lm[:, finite_cols].max(axis=1) > LOG_SATURATION
            points[lo:hi] = pts
        return OrbitCloud(exponents=exps, points=points, saturated=saturated)
    points = np.empty((m, family.n), dtype=complex)
    saturated = np.zeros(m, dtype=bool)
    for i, w in enumerate(enumerate_words(family.p, budget)):
        points[i], saturated[i] = word_apply(family, w, v)
    return OrbitCloud(exponents=exps, points=points, saturated=saturated)


@dataclass(frozen=True)
class DensityReport:
    """Occupied-cell statistics of a uniform grid over a centered box."""

    R: float
    h: float
    axes: tuple[int, ...]  # real-coordinate indices (re1, im1, re2, ...)
    cells_per_axis: int
    cells_total: int
    cells_hit: int
    points_used: int

    @property
    def coverage(self) -> float:
        return self.cells_hit / self.cells_total if self.cells_total else 0.0


def _real_coords(points: np.ndarray) -> np.ndarray:
    m, n = points.shape
    out = np.empty((m, 2 * n), dtype=float)
    out[:, 0::2] = points.real
    out[:, 1::2] = points.imag
    return out


def box_coverage(
    cloud: OrbitCloud | np.ndarray,
    R: float = 2.0,
    h: float = 0.1,
    axes: tuple[int, ...] | None = None,
) -> DensityReport:
    """Count occupied cells of the step-h grid on [-R, R]^(2n).

    ``axes`` selects a subset of the 2n real coordinates (e.g. one
    re/im pair) for projection coverage.  Saturated and out-of-box points
    are ignored.  Coverage is exactly nondecreasing in the word budget for
    a fixed grid, since point sets only grow.
    """
    if R <= 0 or h <= 0:
        raise ValueError("need R > 0 and h > 0")
    if isinstance(cloud, OrbitCloud):
        pts = cloud.points[~cloud.saturated]
    else:
        pts = np.asarray(cloud, dtype=complex)
        pts = pts[np.all(np.isfinite(pts), axis=1)]
    coords = _real_coords(pts)
    if axes is None:
        axes = tuple(range(coords.shape[1]))
    q = math.ceil(2 * R / h - 1e-9)
    cells_total = q ** len(axes)
    if cells_total > GRID_CELL_LIMIT:
        raise GridTooLarge(cells_total, GRID_CELL_LIMIT)
    sel = coords[:, list(axes)]
    with np.errstate(invalid="ignore"):
        inside = np.all((sel >= -R) & (sel < R), axis=1)
    sel = sel[inside]
    idx = np.floor((sel + R) / h).astype(np.int64)
    np.clip(idx, 0, q - 1, out=idx)
    if idx.shape[0] == 0:
        hit = 0
    else:
        lin = idx[:, 0].copy()
        for a in range(1, idx.shape[1]):
            lin = lin * q + idx[:, a]
        hit = int(np.unique(lin).size)
    return DensityReport(
        R=R, h=h, axes=tuple(axes), cells_per_axis=q,
        cells_total=cells_total, cells_hit=hit, points_used=int(idx.shape[0]),
    )


# ---------------------------------------------------------------------------
# certification pipeline
# ---------------------------------------------------------------------------

EMPIRICALLY_HYPERCYCLIC = "empirically-hypercyclic"
NOT_HYPERCYCLIC = "not-hypercyclic"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class CertifyConfig:
    """Grid, budget ladder and thresholds for the certification pipeline.

    The coverage thresholds are artifact conventions (true density is not
    decidable from finite data): a run passes when every 2-real-dimensional
    coordinate-pair projection covers at least ``pass_projection`` of its
    grid (plus ``pass_full`` on the full grid when n <= 2), and plateaus
    when the full-dimension coverage grows by less than ``plateau_growth``
    (of its level, floored at ``plateau_level``) across the last three
    rungs while staying under ``plateau_level``.  Projections cannot carry
    the plateau test: a confined orbit can still project densely onto
    every coordinate pair.
    """

    R: float = 2.0
    h: float = 0.1
    ladder: tuple[int, ...] = (10, 20, 40, 80)
    min_degree_fraction: float = 0.25
    pass_projection: float = 0.9
    pass_full: float = 0.5
    plateau_level: float = 0.1
    plateau_growth: float = 0.01
    delta: float = 1e-2
    max_words: int | None = None
    tol_struct: float = 1e-9

    def budget_for(self, degree: int) -> WordBudget:
        return WordBudget(
            max_total_degree=degree,
            min_total_degree=math.ceil(degree * self.min_degree_fraction),
            max_words=self.max_words,
            on_overflow="truncate",
        )


@dataclass(frozen=True)
class RungStats:
    degree: int
    min_degree: int
    words: int
    projections: dict
    min_projection: float
    max_projection: float
    full_coverage: float
    full_grid_h: float


@dataclass(frozen=True)
class CertifyResult:
    status: str
    reason: str | None
    rungs: tuple[RungStats, ...]
    rank_report: BlockStructureReport | None
    normal_form: NormalForm | None
    test_vector: np.ndarray | None
    config: CertifyConfig

    @property
    def exit_code(self) -> int:
        return 2 if self.status == NOT_HYPERCYCLIC else 0


def _projection_axes(n: int) -> list[tuple[int, int]]:
    axes = range(2 * n)
    return [(i, j) for i in axes for j in axes if i < j]


def _confinement_grid_h(n: int, R: float, h: float) -> float:
    """Finest full-grid step not exceeding the cell limit.

    For n <= 2 this is the configured grid.  Above that the configured step
    would blow past the cell limit, so the full-dimension statistic (the
    only one that can see orbit confinement: coordinate projections of a
    confined orbit may well be dense) runs on a coarser grid.
    """
    q = math.ceil(2 * R / h - 1e-9)
    if q ** (2 * n) <= GRID_CELL_LIMIT:
        return h
    q = int(GRID_CELL_LIMIT ** (1.0 / (2 * n)))
    return 2 * R / q


def coverage_ladder(family: GeneratorFamily, v, config: CertifyConfig):
    """Run the budget ladder on the orbit of v; return (status, reason, rungs)."""
    n = family.n
    full_h = _confinement_grid_h(n, config.R, config.h)
    rungs: list[RungStats] = []
    passed = False
    for degree in config.ladder:
        budget = config.budget_for(degree)
        cloud = orbit_sample(family, v, budget)
        projections = {
            ax: box_coverage(cloud, config.R, config.h, axes=ax).coverage
            for ax in _projection_axes(n)
        }
        full = box_coverage(cloud, config.R, full_h).coverage
        rungs.append(
            RungStats(
                degree=degree,
                min_degree=budget.min_total_degree,
                words=len(cloud),
                projections=projections,
                min_projection=min(projections.values()),
                max_projection=max(projections.values()),
                full_coverage=full,
                full_grid_h=full_h,
            )
        )
        if rungs[-1].min_projection >= config.pass_projection and (
            n > 2 or full >= config.pass_full
        ):
            passed = True
            break
    if passed:
        return EMPIRICALLY_HYPERCYCLIC, None, tuple(rungs)
    if len(rungs) >= 3:
        s1, s2, s3 = (r.full_coverage for r in rungs[-3:])
        # growth below 1% of the current level or of the plateau scale:
        # a relative-only test never plateaus on vanishing coverages
        def flat(prev, nxt):
            return (nxt - prev) <= config.plateau_growth * max(
                prev, config.plateau_level
            )

        if flat(s1, s2) and flat(s2, s3) and s3 < config.plateau_level:
            return NOT_HYPERCYCLIC, "structure", tuple(rungs)
    return INCONCLUSIVE, None, tuple(rungs)


def certify_hypercyclic(
    family: GeneratorFamily, config: CertifyConfig = CertifyConfig()
) -> CertifyResult:
    """Decide hypercyclicity empirically through the canonical test point.

    Pipeline: normal form, then the per-block rank gate (failure is an
    exact structural obstruction), then the coverage ladder on the orbit of
    v0.  A plateau far below the density threshold is reported as
    structural non-hypercyclicity; anything else that misses the coverage
    bar stays inconclusive.
    """
    nf = build_normal_form(family, tol_struct=config.tol_struct)
    report = rank_condition(nf)
    if not report.ok:
        return CertifyResult(
            status=NOT_HYPERCYCLIC,
            reason="rank-obstruction",
            rungs=(),
            rank_report=report,
            normal_form=nf,
            test_vector=None,
            config=config,
        )
    frame = reference_frame(nf)
    status, reason, rungs = coverage_ladder(family, frame.v0, config)
    return CertifyResult(
        status=status,
        reason=reason,
        rungs=rungs,
        rank_report=report,
        normal_form=nf,
        test_vector=frame.v0,
        config=config,
    )


@dataclass(frozen=True)
class ProbeResult:
    status: str
    reason: str | None
    basis_index: int  # 1-based index of the probed basis vector
    rungs: tuple[RungStats, ...]


def basis_jset_probe(
    family: GeneratorFamily,
    basis,
    config: CertifyConfig = CertifyConfig(),
    tol: float = 1e-9,
) -> ProbeResult:
    """Coverage probe for single-block triangular families.

    For such families the open set V is C* x C^(n-1): density certified at
    any basis vector with nonzero first coordinate certifies the family.
    Picks the first such vector; a basis always contains one, so failure to
    find it means the input vectors are not a basis.
    """
    for g in family.generators:
        ok, res = is_in_K(g, (family.n,))
        if not ok:
            raise NotTriangularForm(
                f"family is not in single-block triangular form (residual {res:.3e})"
            )
    vecs = [as_vector(v, family.n) for v in basis]
    i0 = None
    for i, v in enumerate(vecs):
        nv = np.linalg.norm(v)
        if nv > 0 and abs(v[0]) > tol * nv:
            i0 = i
            break
    if i0 is None:
        raise NoBasisVectorInU(
            "no vector has a nonzero first coordinate; the input is not a basis"
        )
    status, reason, rungs = coverage_ladder(family, vecs[i0], config)
    return ProbeResult(status=status, reason=reason, basis_index=i0 + 1, rungs=rungs)
