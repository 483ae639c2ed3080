"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Input has the wrong shape or structure (non-square, dimension mismatch, empty)."""


class DomainError(ValueError):
    """Argument lies outside the domain where the operation is defined."""


class TrainingError(RuntimeError):
    """Training diverged (non-finite loss)."""


class ConfigError(ValueError):
    """Run configuration is malformed or refers to missing files."""
