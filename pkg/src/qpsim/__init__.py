"""qpsim: a hybrid quantum/classical circuit simulator with a sparse
state-vector engine, the `.qp` command language and Shor factorization
pipelines."""

from .errors import (
    ConfigurationError,
    ExecutionError,
    GateDefinitionError,
    InternalError,
    ParseError,
    QpError,
    ResourceError,
    ValidationError,
)
from .executor import (
    ExecutionConfig,
    ExecutionTrace,
    Executor,
    execute,
    render_state,
    run_log,
    snapshot_states,
    timing_report,
)
from .gates import (
    GateRegistry,
    copy_action,
    default_registry,
    modexp_action,
    pow_mod,
    rphase_angle,
)
from .lang import Program, emit, parse, validate
from .shor import (
    FactorizationResult,
    ShorParams,
    build_shor_program,
    build_shor_text,
    classical_order,
    continued_fraction_order,
    exact_control_distribution,
    extract_factors,
    factor,
)
from .state import ClassicalRegister, MeasurementOutcome, QuantumState, new_state

__version__ = "0.1.0"

__all__ = [
    "ClassicalRegister",
    "ConfigurationError",
    "ExecutionConfig",
    "ExecutionError",
    "ExecutionTrace",
    "Executor",
    "FactorizationResult",
    "GateDefinitionError",
    "GateRegistry",
    "InternalError",
    "MeasurementOutcome",
    "ParseError",
    "Program",
    "QpError",
    "QuantumState",
    "ResourceError",
    "ShorParams",
    "ValidationError",
    "build_shor_program",
    "build_shor_text",
    "classical_order",
    "continued_fraction_order",
    "copy_action",
    "default_registry",
    "emit",
    "exact_control_distribution",
    "execute",
    "extract_factors",
    "factor",
    "modexp_action",
    "new_state",
    "parse",
    "pow_mod",
    "render_state",
    "rphase_angle",
    "run_log",
    "snapshot_states",
    "timing_report",
    "validate",
]
