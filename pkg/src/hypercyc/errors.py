"""Exception hierarchy shared by all hypercyc modules."""


class HypercycError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(HypercycError):
    pass


class NotCommuting(HypercycError):
    """Raised when a generator list fails the commutation test.

    Carries the worst offending pair (``i``, ``j``), the raw commutator
    Frobenius norm and the normalized residual.
    """

    def __init__(self, i, j, raw_norm, residual, tol):
        self.pair = (i, j)
        self.raw_norm = raw_norm
        self.residual = residual
        self.tol = tol
        super().__init__(
            f"generators {i} and {j} do not commute: "
            f"|AB-BA| = {raw_norm:.3e}, residual {residual:.3e} > tol {tol:.1e}"
        )


class BadPartition(HypercycError):
    pass


class ClusteringAmbiguous(HypercycError):
    """Two joint-eigenvalue clusters are too close to separate reliably."""

    def __init__(self, gap, tol):
        self.gap = gap
        self.tol = tol
        super().__init__(
            f"eigenvalue clusters separated by {gap:.3e}, within 10x of the "
            f"clustering tolerance {tol:.3e}; refusing to guess"
        )


class IllConditioned(HypercycError):
    """The best conjugation found exceeds the condition-number limit.

    The partially valid normal form is attached as ``normal_form``.
    """

    def __init__(self, cond, limit, normal_form=None):
        self.cond = cond
        self.limit = limit
        self.normal_form = normal_form
        super().__init__(f"conjugation condition number {cond:.3e} exceeds {limit:.1e}")


class NotTriangularForm(HypercycError):
    pass


class BudgetOverflow(HypercycError):
    def __init__(self, count, max_words):
        self.count = count
        self.max_words = max_words
        super().__init__(
            f"word budget enumerates {count} words, above the cap {max_words} "
            "and no truncation strategy is set"
        )


class GridTooLarge(HypercycError):
    def __init__(self, cells_total, limit=10**8):
        self.cells_total = cells_total
        super().__init__(f"grid has {cells_total} cells, above the limit {limit}")


class NoBasisVectorInU(HypercycError):
    pass


class ZeroCoordinate(HypercycError):
    pass


class BadDimension(HypercycError):
    pass


class NoPairFound(HypercycError):
    """Dense-pair search exhausted its grid without reaching the target.

    ``best_b`` / ``best_score`` record the best candidate seen so the caller
    can still proceed at reduced quality.
    """

    def __init__(self, best_b, best_score, target):
        self.best_b = best_b
        self.best_score = best_score
        self.target = target
        super().__init__(
            f"no pair reached coverage {target}; best was b={best_b} "
            f"with score {best_score:.4f}"
        )


class ParseError(HypercycError):
    pass
