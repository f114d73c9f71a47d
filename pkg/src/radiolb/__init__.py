"""radiolb: collision-model radio broadcast simulation and lower-bound tooling."""

from .adversary import (
    AdversaryOutcome,
    DerivedFamily,
    Witness,
    analyze,
    cross_check,
    derive_family,
    find_witness,
)
from .c2 import (
    C2Params,
    TopologyVector,
    build_c2,
    component_of,
    decode_c2,
    encode_c2,
    enumerate_c2,
    l1_index,
    l1_label,
    l2_label,
    layer_of,
)
from .core import (
    INACTIVE,
    LISTEN,
    PAYLOAD,
    PHI,
    SOURCE,
    BroadcastPayload,
    ComponentDesc,
    Inactive,
    Listen,
    Network,
    Opaque,
    Phi,
    Received,
    RoundRecord,
    Trace,
    Transmit,
    completion_round,
    last_informed_round,
    recompute_informed,
    run,
    step_round,
    trace_to_jsonl,
)
from .prune import (
    COLLISION,
    SILENT,
    Collision,
    Event,
    PruneResult,
    Silent,
    Single,
    classify_event,
    event_sequence,
    mark_components,
    membership,
    run_prune,
)
from .protocols import (
    Protocol,
    ProtocolContext,
    StageTag,
    check_legality,
    get_protocol,
    round_robin,
    selfam_driven,
    silent_l1,
)
from .reductions import (
    AdviceString,
    make_advice,
    pi4_with_advice,
    to_pi1,
    to_pi2,
    to_pi3,
    to_pi4,
    transform_chain,
)
from .selfam import (
    SetFamily,
    family_from_lines,
    family_to_lines,
    global_round_bound,
    greedy_selective,
    indices_to_mask,
    is_selective,
    mask_to_indices,
    min_selective_size,
    size_bound,
    size_bound_in_range,
)

__version__ = "0.1.0"
