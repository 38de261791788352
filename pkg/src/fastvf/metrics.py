"""MAE, MSE and NCD image quality criteria.

NCD is measured in CIELAB, reached through sRGB (IEC 61966-2-1 transfer
curve), BT.709 primaries and the D65 white point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imagecore import RgbImage

__all__ = ["QualityReport", "mae", "mse", "ncd", "rgb_to_lab", "evaluate"]

# linear sRGB -> XYZ, D65
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
# reference white = XYZ of RGB (1, 1, 1), so white maps to a* = b* = 0
_WHITE = _RGB_TO_XYZ.sum(axis=1)

_DELTA = 6.0 / 29.0


class DimensionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class QualityReport:
    mae: float
    mse: float
    ncd: float
    elapsed: float = 0.0

    def line(self) -> str:
        return (
            f"mae={self.mae:.6g} mse={self.mse:.6g} "
            f"ncd={self.ncd:.6g} time={self.elapsed:.6g}"
        )


def _pair(a: RgbImage, b: RgbImage) -> tuple[np.ndarray, np.ndarray]:
    if a.pixels.shape != b.pixels.shape:
        raise DimensionMismatchError(
            f"image sizes differ: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    return a.pixels.astype(np.float64), b.pixels.astype(np.float64)


def mae(a: RgbImage, b: RgbImage) -> float:
    x, y = _pair(a, b)
    return float(np.abs(x - y).sum() / x.size)


def mse(a: RgbImage, b: RgbImage) -> float:
    x, y = _pair(a, b)
    return float(((x - y) ** 2).sum() / x.size)


def _srgb_decode(v: np.ndarray) -> np.ndarray:
    v = v / 255.0
    return np.where(v <= 0.04045, v / 12.92, ((v + 0.055) / 1.055) ** 2.4)


def _lab_f(t: np.ndarray) -> np.ndarray:
    return np.where(t > _DELTA**3, np.cbrt(t), t / (3 * _DELTA**2) + 4.0 / 29.0)


def rgb_to_lab(pixels) -> np.ndarray:
    """Convert 8-bit sRGB values (shape ``(..., 3)``) to CIELAB ``(L*, a*, b*)``."""
    rgb = np.asarray(pixels, dtype=np.float64)
    if rgb.shape[-1] != 3:
        raise ValueError("last axis must hold 3 channels")
    xyz = _srgb_decode(rgb) @ _RGB_TO_XYZ.T
    f = _lab_f(xyz / _WHITE)
    L = 116.0 * f[..., 1] - 16.0
    a = 500.0 * (f[..., 0] - f[..., 1])
    b = 200.0 * (f[..., 1] - f[..., 2])
    return np.stack([L, a, b], axis=-1)


def ncd(a: RgbImage, b: RgbImage) -> float:
    """Normalized color difference; ``a`` is the reference image."""
    _pair(a, b)
    lab_a = rgb_to_lab(a.pixels)
    lab_b = rgb_to_lab(b.pixels)
    denom = np.linalg.norm(lab_a, axis=-1).sum()
    if denom == 0.0:
        raise ZeroDivisionError("NCD undefined for an all-black reference image")
    return float(np.linalg.norm(lab_a - lab_b, axis=-1).sum() / denom)


def evaluate(reference: RgbImage, test: RgbImage, elapsed: float = 0.0) -> QualityReport:
    return QualityReport(mae(reference, test), mse(reference, test), ncd(reference, test), elapsed)
