"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input violates a documented precondition or invariant."""


class DegenerateSpectrumError(ValidationError):
    """The Hamiltonian has (near-)degenerate levels, so the block form of the
    generator is undefined.  Use the dense superoperator path instead."""


class DefectiveGeneratorError(RuntimeError):
    """The generator's eigenvector matrix is too ill-conditioned to trust a
    biorthogonal decomposition (condition number above threshold)."""


class NoSteadyStateError(RuntimeError):
    """No eigenvalue of the generator is compatible with zero, so a steady
    state cannot be identified."""


class ConfigError(ValueError):
    """An experiment configuration file failed schema validation.

    ``path`` is a dotted key path locating the offending entry.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
