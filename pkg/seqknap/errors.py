class SeqKnapError(ValueError):
    """
    Root of every domain error raised by seqknap.
    """


class EmptyInstance(SeqKnapError):
    pass


class NonDivisibleSizes(SeqKnapError):
    pass


class MissingUnitSize(SeqKnapError):
    pass


class NonPositiveField(SeqKnapError):
    pass


class IndexOutOfRange(SeqKnapError):
    pass


class InstanceParseError(SeqKnapError):
    """
    Raised when an instance file cannot be read; `field` points at the offending JSON path.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class InfeasibleKeep(SeqKnapError):
    pass


class InfeasibleY(SeqKnapError):
    pass


class DivisibilityViolation(SeqKnapError):
    pass


class BudgetExceeded(SeqKnapError):
    pass


class SearchSpaceTooLarge(BudgetExceeded):
    pass


class BranchBudgetExceeded(BudgetExceeded):
    pass


class SelectionBudgetExceeded(BudgetExceeded):
    pass


class SubsetBudgetExceeded(BudgetExceeded):
    pass
