"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class BracketError(ValueError):
    """The supplied interval does not bracket a sign change."""


class DegenerateClassError(ValueError):
    """A histogram class has zero expected probability but nonzero counts."""


class DegenerateChannelError(ValueError):
    """The channel transmittance makes the requested problem trivial (eta in {0, 1})."""


class KeyRefusedError(RuntimeError):
    """Raw key extraction was requested for a session that did not verify as secure."""
