"""Exception type shared across the package."""


class MsirError(ValueError):
    """Raised when an input violates a documented precondition or invariant.

    Subclasses ValueError so callers may catch it generically; the message
    names the violated condition and, where available, the offending row,
    entry, or parameter.
    """
