"""Sparse-coding (LASSO-ADMM) signal detection for large-scale MIMO.

Detectors follow the scikit-learn estimator convention: construct with
hyperparameters, ``fit`` on a channel realization, ``predict`` received
vectors. The :mod:`lassomimo.simulate` harness runs Monte Carlo BER
campaigns over SNR grids and the ``lassomimo`` CLI writes them to CSV.
"""

from .admm import (
    AdmmConfig,
    AdmmState,
    CachedFactor,
    alpha_update,
    factorize,
    iterate_from_factor,
    soft_threshold,
    solve,
    z_update,
)
from .channel import (
    ComplexChannel,
    RealSystemModel,
    complex_to_real_matrix,
    draw_channel,
    noise_var_for_snr,
    stack_complex,
    to_real,
    transmit,
    unstack_real,
)
from .constellation import Constellation, make_constellation
from .detectors import (
    DETECTORS,
    DetectionResult,
    LassoADMMDetector,
    MLDetector,
    MMSEDetector,
    TwoStageLassoDetector,
    ZeroForcingDetector,
    classify_gray_zone,
    make_detector,
)
from .simulate import BerPoint, Campaign, run_campaign, run_trial
from .sparse import ActiveSet, SparseProblem, build_sparse_problem, reduce_problem

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig",
    "AdmmState",
    "ActiveSet",
    "BerPoint",
    "CachedFactor",
    "Campaign",
    "ComplexChannel",
    "Constellation",
    "DETECTORS",
    "DetectionResult",
    "LassoADMMDetector",
    "MLDetector",
    "MMSEDetector",
    "RealSystemModel",
    "SparseProblem",
    "TwoStageLassoDetector",
    "ZeroForcingDetector",
    "alpha_update",
    "build_sparse_problem",
    "classify_gray_zone",
    "complex_to_real_matrix",
    "draw_channel",
    "factorize",
    "iterate_from_factor",
    "make_constellation",
    "make_detector",
    "noise_var_for_snr",
    "reduce_problem",
    "run_campaign",
    "run_trial",
    "soft_threshold",
    "solve",
    "stack_complex",
    "to_real",
    "transmit",
    "unstack_real",
    "z_update",
]
