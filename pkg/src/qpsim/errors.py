"""Exception hierarchy shared across the simulator.

Exit-code mapping used by the CLI:
  1  domain failure (e.g. no factors found)
  2  usage, parse or validation errors
  3  resource errors (memory budget)
"""


class QpError(Exception):
    """Base class for all simulator errors."""

    exit_code = 1


class ConfigurationError(QpError):
    """Invalid configuration value (qubit count out of range, bad mode...)."""

    exit_code = 2


class GateDefinitionError(QpError):
    """Non-unitary matrix, non-bijective permutation, duplicate gate name."""

    exit_code = 2


class ValidationError(QpError):
    """Structurally invalid operation: index collision, out-of-range target."""

    exit_code = 2


class ParseError(QpError):
    """One or more diagnostics produced while parsing a .qp script."""

    exit_code = 2

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class ExecutionError(QpError):
    """Runtime contract violation (Copy before Measure, deferred-mode use)."""

    exit_code = 2


class ResourceError(QpError):
    """Dense allocation would exceed the configured memory budget."""

    exit_code = 3


class InternalError(QpError):
    """Invariant breach that should never happen for valid inputs."""

    exit_code = 1
