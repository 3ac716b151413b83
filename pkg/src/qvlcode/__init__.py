"""Universal fixed- and variable-length compression of quantum i.i.d. sources, simulated at desk scale."""
__version__ = "0.1.0"

from .linalg import (  # noqa: E402
    DensityMatrix,
    Ensemble,
    MemoryCapError,
    average_state,
    bures_distance,
    tensor_power,
    von_neumann_entropy,
)
from .exponents import overflow_exponent, constant_C, shannon_entropy, relative_entropy  # noqa: E402
from .schur_weyl import decomposition, isotypic_projector, rate_projector  # noqa: E402
from .fixed_code import make_fixed, average_error, error_bound_chain  # noqa: E402
from .varlen import RateGrid, make_naive, make_smeared, varlen_report  # noqa: E402
from .entangled import BipartiteState, BipartiteEnsemble, local_fixed_error  # noqa: E402

__all__ = [
    "__version__",
    "DensityMatrix", "Ensemble", "MemoryCapError", "average_state", "bures_distance",
    "tensor_power", "von_neumann_entropy",
    "overflow_exponent", "constant_C", "shannon_entropy", "relative_entropy",
    "decomposition", "isotypic_projector", "rate_projector",
    "make_fixed", "average_error", "error_bound_chain",
    "RateGrid", "make_naive", "make_smeared", "varlen_report",
    "BipartiteState", "BipartiteEnsemble", "local_fixed_error",
]
