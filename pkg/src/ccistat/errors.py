"""Exception types raised by the library."""


class InvalidArgumentError(ValueError):
    """An argument lies outside the documented domain."""


class DegenerateGeometryError(ValueError):
    """The mobile station coincides with a base station."""


class InversionError(ArithmeticError):
    """Characteristic-function inversion did not produce a valid density.

    ``diagnostics`` carries the truncation frequency, step, tail bound and
    achieved normalization so the caller can see what went wrong.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})

    def __str__(self):
        base = super().__str__()
        if not self.diagnostics:
            return base
        extra = ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                          for k, v in self.diagnostics.items())
        return f"{base} ({extra})"


class UndefinedRatioError(ZeroDivisionError):
    """A difference factor was requested relative to a zero rate."""


class ConfigError(ValueError):
    """A run configuration could not be parsed or validated."""
