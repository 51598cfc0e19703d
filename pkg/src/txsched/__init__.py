"""Energy-minimal transmission scheduling for deadline-constrained
packets on a point-to-point link with a convex power-rate law."""

from .model import (
    EmptyInstance,
    EpochDecomposition,
    Instance,
    InstanceFormatError,
    MalformedPacket,
    Packet,
    decompose,
    instance_from_json,
    instance_to_json,
    is_non_fifo,
    normalize_instance,
)
from .power import (
    BracketOverflow,
    Monomial,
    NegativeInput,
    NegativeRate,
    PowerModel,
    Shannon,
    ZeroRate,
    g_inverse,
    g_of_rate,
    power_of_rate,
    schedule_energy,
)
from .scheduler import (
    InconsistentTrace,
    InternalDeadlineMiss,
    InternalIdle,
    InternalInvariantViolation,
    IterationStep,
    IterationTrace,
    NoCandidates,
    Schedule,
    Segment,
    SubInterval,
    edf_fill,
    enumerate_subintervals,
    schedule_from_allocation,
    schedule_from_json,
    schedule_to_json,
    select_max_rate,
    shift_out,
    solve,
    unshift,
)
from .verifier import (
    DimensionMismatch,
    EpochCondition,
    FeasibilityReport,
    InfeasibleInput,
    KKTCertificate,
    NotOptimal,
    VerificationReport,
    check_feasible,
    check_optimality,
    extract_certificate,
)
from .oracle import (
    OracleSolution,
    TooLarge,
    project_capped_simplex,
    solve_grid,
    solve_projected_gradient,
)
from .harness import (
    BenchRow,
    ConfigInvalid,
    GeneratorConfig,
    baseline_constant_edf,
    bench_complexity,
    generate,
)

__version__ = "0.1.0"

__all__ = [
    "BenchRow",
    "BracketOverflow",
    "ConfigInvalid",
    "DimensionMismatch",
    "EmptyInstance",
    "EpochCondition",
    "EpochDecomposition",
    "FeasibilityReport",
    "GeneratorConfig",
    "InconsistentTrace",
    "InfeasibleInput",
    "Instance",
    "InstanceFormatError",
    "InternalDeadlineMiss",
    "InternalIdle",
    "InternalInvariantViolation",
    "IterationStep",
    "IterationTrace",
    "KKTCertificate",
    "MalformedPacket",
    "Monomial",
    "NegativeInput",
    "NegativeRate",
    "NoCandidates",
    "NotOptimal",
    "OracleSolution",
    "Packet",
    "PowerModel",
    "Schedule",
    "Segment",
    "Shannon",
    "SubInterval",
    "TooLarge",
    "VerificationReport",
    "ZeroRate",
    "baseline_constant_edf",
    "bench_complexity",
    "check_feasible",
    "check_optimality",
    "decompose",
    "edf_fill",
    "enumerate_subintervals",
    "extract_certificate",
    "g_inverse",
    "g_of_rate",
    "generate",
    "instance_from_json",
    "instance_to_json",
    "is_non_fifo",
    "normalize_instance",
    "power_of_rate",
    "project_capped_simplex",
    "schedule_energy",
    "schedule_from_allocation",
    "schedule_from_json",
    "schedule_to_json",
    "select_max_rate",
    "shift_out",
    "solve",
    "solve_grid",
    "solve_projected_gradient",
    "unshift",
]
