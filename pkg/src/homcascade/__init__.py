"""homcascade: k-module beam-splitter cascade (generalized HOM) simulator.

Exact biphoton coincidence rates for concatenated 50:50 beam-splitter stages
with per-stage delays and achromatic wave plates: transfer matrices and
mixed-frequency permanents, plane-wave term sums, closed-form Gaussian rate
integration with an independent quadrature oracle, coarse graining,
zero-manifold scans with exclusivity verdicts, and the two-step delay
recovery procedure.
"""

__version__ = "0.1.0"

from .cascade import (
    ClosedFormUnavailableError,
    cascade_matrix,
    det_mixed,
    module_matrix,
    perm,
    perm_closed_form,
)
from .config import BiphotonSpectrum, CoarseGrainWindow, PhaseConfig
from .rates import (
    CoincidenceResult,
    delta_r_closed_k3,
    rate_analytic,
    rate_coarse_analytic,
    rate_coarse_numeric,
    rate_quadrature,
    rates_batch,
    rbar_batch,
)
from .signsum import (
    EntryDecomposition,
    FrequencyLine,
    TermSum,
    decompose_entries,
    diag_frequency_spectrum,
    modsquare_split,
    perm_termsum,
    split_fk,
)
from .zeropoint import (
    CalibrationEstimate,
    CalibrationError,
    CalibrationGeometry,
    NoRealSolutionError,
    PathologicalFamilyError,
    Profile1D,
    ScanGrid,
    ScanReport,
    ZeroVerdict,
    calibrate_from_scans,
    origin_perm,
    scan_report,
    scan_zero_manifold,
    solve_theta3_k4,
    synthesize_profiles,
    verify_k4_exclusive,
)

__all__ = [
    "__version__",
    "BiphotonSpectrum",
    "CalibrationEstimate",
    "CalibrationError",
    "CalibrationGeometry",
    "ClosedFormUnavailableError",
    "CoarseGrainWindow",
    "CoincidenceResult",
    "EntryDecomposition",
    "FrequencyLine",
    "NoRealSolutionError",
    "PathologicalFamilyError",
    "PhaseConfig",
    "Profile1D",
    "ScanGrid",
    "ScanReport",
    "TermSum",
    "ZeroVerdict",
    "calibrate_from_scans",
    "cascade_matrix",
    "decompose_entries",
    "delta_r_closed_k3",
    "det_mixed",
    "diag_frequency_spectrum",
    "modsquare_split",
    "module_matrix",
    "origin_perm",
    "perm",
    "perm_closed_form",
    "perm_termsum",
    "rate_analytic",
    "rate_coarse_analytic",
    "rate_coarse_numeric",
    "rate_quadrature",
    "rates_batch",
    "rbar_batch",
    "scan_report",
    "scan_zero_manifold",
    "solve_theta3_k4",
    "split_fk",
    "synthesize_profiles",
    "verify_k4_exclusive",
]
