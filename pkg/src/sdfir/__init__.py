"""FIR approximation of analog filters by sampled-data H-infinity design.

Given a stable analog target and an input characteristic, the package
builds the lifted fast-rate error system, poses the tap-affine
bounded-real LMI, and minimizes the certified gain with an embedded
dense interior-point SDP solver.  Single-rate, multi-rate, and
multi-delay targets are supported.
"""

from .error_system import (
    AffineErrorSystem,
    ValidationError,
    build_multi_delay,
    build_multi_rate,
    build_single_rate,
)
from .fir import FirFilter, impulse_response, load_coefficients, realize_ss, save_coefficients
from .hinf import NormResult, hinf_norm, kyp_norm_bisect
from .lifting import (
    LiftedSystem,
    lift,
    lift_fir_polyphase,
    make_hold_vector,
    make_multirate_hold,
    make_sample_row,
)
from .sdp import (
    AffineBlock,
    CongruenceBlock,
    FeasibilityResult,
    LmiProblem,
    SdpResult,
    SolverOptions,
    SolveStatus,
    feasibility,
    solve_min,
)
from .statespace import (
    StateSpace,
    add,
    delay_augment,
    freq_response,
    from_transfer_function,
    series,
    zoh_discretize,
)
from .synth import (
    DesignResult,
    DesignSpec,
    design_fir,
    design_multi_delay,
    verify_bound,
)

__all__ = [
    "AffineBlock",
    "AffineErrorSystem",
    "CongruenceBlock",
    "DesignResult",
    "DesignSpec",
    "FeasibilityResult",
    "FirFilter",
    "LiftedSystem",
    "LmiProblem",
    "NormResult",
    "SdpResult",
    "SolveStatus",
    "SolverOptions",
    "StateSpace",
    "ValidationError",
    "add",
    "build_multi_delay",
    "build_multi_rate",
    "build_single_rate",
    "delay_augment",
    "design_fir",
    "design_multi_delay",
    "feasibility",
    "freq_response",
    "from_transfer_function",
    "hinf_norm",
    "impulse_response",
    "kyp_norm_bisect",
    "lift",
    "lift_fir_polyphase",
    "load_coefficients",
    "make_hold_vector",
    "make_multirate_hold",
    "make_sample_row",
    "realize_ss",
    "save_coefficients",
    "series",
    "solve_min",
    "verify_bound",
    "zoh_discretize",
]

__version__ = "0.1.0"
