"""Exception types shared across the package."""


class BudgetExceeded(RuntimeError):
    """An enumeration cap was hit before an answer could be established.

    This is never a mathematical "no": callers must treat it as "unknown".
    """

    def __init__(self, what: str, cap: int):
        super().__init__(f"{what} exceeded budget cap {cap}")
        self.what = what
        self.cap = cap
