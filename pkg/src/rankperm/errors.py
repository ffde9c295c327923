"""Exception types raised across the package."""


class RankPermError(ValueError):
    """Base class for all package errors."""


class ZeroRowSum(RankPermError):
    def __init__(self, index):
        super().__init__(f"row {index + 1} sums to zero")
        self.index = index


class ZeroColSum(RankPermError):
    def __init__(self, index):
        super().__init__(f"column {index + 1} sums to zero")
        self.index = index


class InvalidRank(RankPermError):
    def __init__(self, n, k):
        super().__init__(f"rank bound k={k} outside 1..{n}")
        self.n = n
        self.k = k


class DimensionMismatch(RankPermError):
    pass


class DimensionTooLarge(RankPermError):
    def __init__(self, n, n_max):
        super().__init__(f"n={n} exceeds the limit {n_max}")
        self.n = n
        self.n_max = n_max


class NotNonnegative(RankPermError):
    pass


class NotExactMode(RankPermError):
    pass


class MissingSigma(RankPermError):
    pass


class RationalizationFailed(RankPermError):
    pass


class MatrixParseError(RankPermError):
    pass
