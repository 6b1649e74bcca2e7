"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operator is defined."""


class StructuralSetError(ValueError):
    """Three A-values fail the orthonormality condition of a structural set."""

    def __init__(self, message, pair=None, value=None):
        super().__init__(message)
        self.pair = pair
        self.value = value


class PreconditionError(ValueError):
    """Inputs do not satisfy the hypotheses of an identity check."""


class ConfigError(ValueError):
    """An experiment configuration failed to parse or validate."""

    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field
