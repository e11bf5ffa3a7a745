"""Exception types shared across the toolkit."""


class SmaxError(Exception):
    """Base class for every error raised by this package."""


class ParseError(SmaxError, ValueError):
    """Malformed edge-list, partition or spec input."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        prefix = f"{source}: " if source else ""
        suffix = f" at line {line}" if line is not None else ""
        super().__init__(f"{prefix}{message}{suffix}")


class DomainError(SmaxError, ValueError):
    """Arguments outside the domain of an operation."""


class GenerationError(SmaxError, RuntimeError):
    """A benchmark generator could not satisfy its constraints."""
