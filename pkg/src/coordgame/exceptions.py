"""Exception hierarchy.

Everything raised on bad input derives from :class:`ValueError` so callers
(and the CLI) can catch a single type.
"""


class InvalidArgumentError(ValueError):
    pass


class NumericalDomainError(ArithmeticError):
    """A function evaluated to a non-finite value where a finite one was needed."""


class BracketError(ValueError):
    """The root-finding bracket does not straddle a sign change."""

    def __init__(self, lo, hi, f_lo, f_hi):
        self.lo, self.hi = lo, hi
        self.f_lo, self.f_hi = f_lo, f_hi
        super().__init__(
            f"f has the same sign at both ends of [{lo!r}, {hi!r}]: "
            f"f(lo)={f_lo!r}, f(hi)={f_hi!r}"
        )


class InvalidDensityError(ValueError):
    pass


class InvalidBenefitError(InvalidArgumentError):
    pass


class NoiselessDegenerateError(InvalidArgumentError):
    """Operation needs sigma_z_sq > 0; the noiseless case reduces to an indicator."""


class ResourceLimitError(ValueError):
    pass


class NumericalInconsistencyError(RuntimeError):
    pass
