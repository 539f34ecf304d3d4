"""Localized Nakagami parametric imaging for ultrasound envelopes.

Simulate speckle phantoms, detect RF envelopes, estimate (mu, omega) maps
with fixed windows, window compounding, or per-voxel multiscale kernel
selection, and score the maps against ground truth.
"""

from ._backend import COMPILED, backend_name
from .envelope import Axis, RFFrame, analytic_envelope
from .errors import NakamapError
from .evaluation import EvalReport, RegionStat, evaluate
from .grids import Image2D, Kind, read_image, render_gray, write_image
from .mapping import (
    KernelSpec,
    ParametricResult,
    estimate_fixed,
    estimate_mkl,
    estimate_wmc,
    window_samples,
)
from .nakagami import (
    MU_MAX,
    MU_MIN,
    FitQuality,
    NakagamiParams,
    SampleSet,
    cdf,
    digamma,
    estimate_mle,
    estimate_moments,
    fit_quality,
    lgamma,
    log_likelihood,
    pdf,
    sample,
)
from .phantom import (
    Arrangement,
    Layout,
    PhantomSpec,
    PhantomTruth,
    generate_distribution_phantom,
    generate_scatterer_phantom,
)

__version__ = "0.1.0"

__all__ = [
    "COMPILED",
    "backend_name",
    "Axis",
    "RFFrame",
    "analytic_envelope",
    "NakamapError",
    "EvalReport",
    "RegionStat",
    "evaluate",
    "Image2D",
    "Kind",
    "read_image",
    "render_gray",
    "write_image",
    "KernelSpec",
    "ParametricResult",
    "estimate_fixed",
    "estimate_mkl",
    "estimate_wmc",
    "window_samples",
    "MU_MAX",
    "MU_MIN",
    "FitQuality",
    "NakagamiParams",
    "SampleSet",
    "cdf",
    "digamma",
    "estimate_mle",
    "estimate_moments",
    "fit_quality",
    "lgamma",
    "log_likelihood",
    "pdf",
    "sample",
    "Arrangement",
    "Layout",
    "PhantomSpec",
    "PhantomTruth",
    "generate_distribution_phantom",
    "generate_scatterer_phantom",
    "__version__",
]
