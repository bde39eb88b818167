"""Direct imports."""

__version__ = "0.1.0"

# pylint: disable=wrong-import-position
from .channels import (
    apply_channel,
    apply_selective,
    avg_coherence_selective,
    check_c2a_nonselective,
    check_c2b_family,
    check_c3_convexity,
    instrument,
    is_incoherent_kraus,
    is_strictly_incoherent,
    kraus_operator,
    random_sio_instrument,
    validate_instrument,
)
from .measures import c_l1, c_rel_entropy, c_tr_family_closed, c_tr_qubit, measure_ordering_mc, measure_report
from .solver import closest_incoherent, coherence, default_config, grid_oracle, verify_theorem2
from .states import (
    density_matrix,
    dephase,
    diagonal_state,
    family_state,
    load_state,
    make_family_state,
    maximally_coherent,
    random_density_matrix,
    random_family_state,
)

__all__ = [
    "__version__",
    "apply_channel",
    "apply_selective",
    "avg_coherence_selective",
    "c_l1",
    "c_rel_entropy",
    "c_tr_family_closed",
    "c_tr_qubit",
    "check_c2a_nonselective",
    "check_c2b_family",
    "check_c3_convexity",
    "closest_incoherent",
    "coherence",
    "default_config",
    "density_matrix",
    "dephase",
    "diagonal_state",
    "family_state",
    "grid_oracle",
    "instrument",
    "is_incoherent_kraus",
    "is_strictly_incoherent",
    "kraus_operator",
    "load_state",
    "make_family_state",
    "maximally_coherent",
    "measure_ordering_mc",
    "measure_report",
    "random_density_matrix",
    "random_family_state",
    "random_sio_instrument",
    "validate_instrument",
    "verify_theorem2",
]
