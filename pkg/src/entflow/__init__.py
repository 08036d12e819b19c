"""Entanglement specification networks and the information flow along paths."""

from .labels import (
    ANTILINEAR,
    LINEAR,
    FunctionalLabel,
    Linearity,
    Measurement,
    bell_id,
    bell_id_star,
    bell_labels,
    bell_measurement,
    bell_pi,
    bell_pi_star,
    compose,
    label_of,
    projector_of,
    state_of,
    tensor,
    virtual_factorization,
)
from .linalg import kron, kron_factor, prop_eq, rank_one
from .network import (
    BipartiteProjector,
    Diagnostic,
    LocalUnitary,
    MultiProjector,
    Network,
    NetworkBuilder,
    NetworkError,
    Track,
    UnipartiteProjector,
)
from .oracle import (
    CapacityError,
    FactorReport,
    StateTensor,
    TheoremReport,
    ZeroAmplitudeError,
    apply_projector,
    extract_factor,
    initial_state,
    run,
    verify_theorem,
)
from .paths import (
    Path,
    PathError,
    PathStep,
    composite,
    equivalent,
    start_at_anchor,
    start_at_input,
    start_free,
    validate_path,
)
from .protocols import (
    CompiledProtocol,
    NotCompilableError,
    ProtocolTree,
    beta_input,
    builtin_gate_teleportation,
    builtin_parallel,
    builtin_swap,
    builtin_teleportation,
    compile_unconditional,
    instantiate,
    tree_of_network,
    verify_compiled,
)
from .multipartite import (
    TripartiteLabel,
    as_first_order,
    as_second_order,
    worked_example_network,
    worked_example_predict,
)
from .specfile import SpecDocument, parse, serialize

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
