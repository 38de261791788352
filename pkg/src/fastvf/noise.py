"""Seeded impulsive / mixed noise models for RGB images.

Randomness comes from numpy's PCG64 generator seeded with the 64-bit
``seed``. Every model consumes the same fixed draw layout, each block in
raster order over the image:

1. ``uniform(M, N, 2)``: pixel selection, then corruption pattern
2. ``uniform(M, N, 3)``: per-channel selection (uncorrelated model)
3. ``integers(0, 256, (M, N, 3))`` or ``{0, 255}``: impulse values
4. ``standard_normal(M, N, 3)``: gaussian component (mixed model)

so a mixed run with ``gaussian_sigma=0`` reproduces the correlated run bit
for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imagecore import RgbImage

__all__ = ["NOISE_MODELS", "IMPULSE_LAWS", "NoiseSpec", "corrupt", "corrupt_with_mask"]

NOISE_MODELS = ("uncorrelated_impulsive", "correlated_impulsive", "mixed")
IMPULSE_LAWS = ("uniform", "saltpepper")

_ALIASES = {"uncorrelated": "uncorrelated_impulsive", "correlated": "correlated_impulsive"}


@dataclass(frozen=True)
class NoiseSpec:
    """Noise model parameters.

    ``phi_k`` defaults to 0.25 per channel. In the uncorrelated model each
    channel is hit independently with probability ``phi_k[k]`` and ``phi``
    is not used; pass ``phi_k=(phi, phi, phi)`` to drive it by ``phi``.
    """

    model: str = "correlated_impulsive"
    phi: float = 0.1
    phi_k: tuple[float, float, float] | None = None
    gaussian_sigma: float = 10.0
    seed: int = 0
    impulse: str = "uniform"

    def __post_init__(self):
        model = _ALIASES.get(self.model, self.model)
        object.__setattr__(self, "model", model)
        if model not in NOISE_MODELS:
            raise ValueError(f"unknown noise model {self.model!r}")
        if not 0.0 <= self.phi <= 1.0:
            raise ValueError("phi out of range")
        if self.phi_k is not None:
            pk = tuple(float(p) for p in self.phi_k)
            if len(pk) != 3:
                raise ValueError("phi_k needs three channel probabilities")
            if any(not 0.0 <= p <= 1.0 for p in pk):
                raise ValueError("phi_k out of range")
            if model != "uncorrelated_impulsive" and sum(pk) > 1.0 + 1e-12:
                raise ValueError("phi_k must sum to at most 1")
            object.__setattr__(self, "phi_k", pk)
        if self.gaussian_sigma < 0:
            raise ValueError("gaussian_sigma must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.impulse not in IMPULSE_LAWS:
            raise ValueError(f"impulse must be one of {IMPULSE_LAWS}")

    @property
    def channel_probs(self) -> tuple[float, float, float]:
        return self.phi_k if self.phi_k is not None else (0.25, 0.25, 0.25)


def corrupt_with_mask(img: RgbImage, spec: NoiseSpec) -> tuple[RgbImage, np.ndarray]:
    """Corrupt ``img`` and also return the ``(M, N, 3)`` mask of channels
    that received an impulse (gaussian perturbation is not marked)."""
    m, n = img.height, img.width
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    select = rng.random((m, n, 2))
    per_channel = rng.random((m, n, 3))
    if spec.impulse == "uniform":
        impulses = rng.integers(0, 256, size=(m, n, 3), dtype=np.int64)
    else:
        impulses = rng.integers(0, 2, size=(m, n, 3), dtype=np.int64) * 255
    gauss = rng.standard_normal((m, n, 3))

    pk = np.asarray(spec.channel_probs)
    if spec.model == "uncorrelated_impulsive":
        mask = per_channel < pk
    else:
        hit = select[..., 0] < spec.phi
        edges = np.cumsum(pk)
        pattern = np.searchsorted(edges, select[..., 1], side="right")
        # pattern 0/1/2: single channel, 3: all channels
        mask = np.zeros((m, n, 3), dtype=bool)
        for k in range(3):
            mask[..., k] = hit & ((pattern == k) | (pattern == 3))

    base = img.pixels.astype(np.float64)
    if spec.model == "mixed":
        base = np.clip(_round_half_away(base + spec.gaussian_sigma * gauss), 0, 255)
    out = np.where(mask, impulses, base).astype(np.uint8)
    return RgbImage(out), mask


def corrupt(img: RgbImage, spec: NoiseSpec) -> RgbImage:
    return corrupt_with_mask(img, spec)[0]


def _round_half_away(v: np.ndarray) -> np.ndarray:
    return np.sign(v) * np.floor(np.abs(v) + 0.5)
