"""Exception hierarchy shared by every module."""


class PlieError(Exception):
    """Base class; every error carries a JSON-friendly payload."""

    def payload(self) -> dict:
        return {"error": type(self).__name__, "message": str(self)}


class DomainError(PlieError, ValueError):
    """A point or interval lies outside the domain an operation accepts."""

    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x

    def payload(self):
        out = super().payload()
        if self.x is not None:
            out["x"] = self.x
        return out


class EscapeError(DomainError):
    """An iterate left the domain; ``step`` is the first k with g^k(x) outside."""

    def __init__(self, start, step, value):
        super().__init__(
            f"iterate {step} of {start!r} is {value!r}, outside the domain", x=start
        )
        self.start = start
        self.step = step
        self.value = value

    def payload(self):
        out = super().payload()
        out.update(start=self.start, step=self.step, value=_finite_or_str(self.value))
        return out


class EvalError(PlieError, ArithmeticError):
    """An expression is undefined or overflows at the requested point."""


class NumericError(PlieError, ArithmeticError):
    """An iterative numerical method did not converge."""


class ConfigError(PlieError, ValueError):
    pass


class ParseError(PlieError, ValueError):
    """Syntax error in an expression, interval or coefficient literal.

    Raised with the 0-based character offset; ``position`` is the 1-based
    column, so an error at end of input has position len(text) + 1.
    """

    def __init__(self, offset, expected, found, text=""):
        super().__init__(f"at position {offset + 1}: expected {expected}, found {found}")
        self.offset = offset
        self.position = offset + 1
        self.expected = expected
        self.found = found
        self.text = text

    def payload(self):
        out = super().payload()
        out.update(position=self.position, expected=self.expected, found=self.found)
        return out


def _finite_or_str(v):
    try:
        v = float(v)
    except (TypeError, ValueError):
        return str(v)
    return v if v == v and abs(v) != float("inf") else str(v)
