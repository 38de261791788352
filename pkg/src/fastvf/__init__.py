"""Order-statistics color vector filters with minimax-approximated kernels."""

from .filters import FilterSpec, amnf, bvdf, evmf, run_filter
from .imagecore import RgbImage, WindowView, load_ppm, save_ppm, sliding_apply
from .metrics import QualityReport, evaluate, mae, mse, ncd, rgb_to_lab
from .minimax import PolyApprox, RationalApprox, certify_error, eval_poly, eval_rational, remez_fit
from .noise import NoiseSpec, corrupt

__version__ = "0.1.0"

__all__ = [
    "FilterSpec",
    "NoiseSpec",
    "PolyApprox",
    "QualityReport",
    "RationalApprox",
    "RgbImage",
    "WindowView",
    "amnf",
    "bvdf",
    "certify_error",
    "corrupt",
    "eval_poly",
    "eval_rational",
    "evaluate",
    "evmf",
    "load_ppm",
    "mae",
    "mse",
    "ncd",
    "remez_fit",
    "rgb_to_lab",
    "run_filter",
    "save_ppm",
    "sliding_apply",
]
