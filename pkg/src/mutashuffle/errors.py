class ShuffleValidationError(ValueError):
    """Raised for malformed input: unknown families, bad parameters, size mismatches."""

    pass


class IncompleteSequenceError(ShuffleValidationError):
    pass


class GuardExceededError(ShuffleValidationError):
    """An exact computation was asked for a state space beyond its enumeration guard."""

    pass


class InfeasibleRecordError(ShuffleValidationError):
    pass


class RuleUnsatisfiedError(ShuffleValidationError):
    pass


class EmptyConditionError(ShuffleValidationError):
    pass


class ContractViolation(RuntimeError):
    """An internal invariant failed. Never swallowed inside the library."""

    pass


class CriterionFailure(RuntimeError):
    pass
