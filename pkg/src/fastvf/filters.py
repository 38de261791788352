"""BVDF, AMNF (exponential / gaussian kernel) and EVMF vector filters.

Each family has a compiled per-window core shared by the window-level API
(:func:`bvdf`, :func:`amnf`, :func:`evmf`) and the whole-image driver used by
:func:`run_filter`. ``approx`` switches the transcendental kernels to their
minimax versions from :mod:`fastvf.fastmath`; nothing else changes.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numba
import numpy as np
from numba import njit, prange

from .fastmath import (
    DEFAULT_TABLE,
    EXP_VARIANTS,
    KernelTable,
    _arccos_approx,
    _arccos_exact,
    _ent_approx,
    _ent_exact,
    _exp_neg_approx,
    _exp_neg_exact,
)
from .imagecore import RgbImage, WindowView, check_window, pad_image, restore_border

__all__ = [
    "FAMILIES",
    "MODES",
    "FilterSpec",
    "bvdf",
    "bvdf_index",
    "amnf",
    "evmf",
    "evmf_decision",
    "run_filter",
]

FAMILIES = ("BVDF", "AMNFE", "AMNFG", "EVMF")
MODES = ("exact", "approx")


@dataclass(frozen=True)
class FilterSpec:
    family: str
    mode: str = "exact"
    window_side: int = 3
    kappa: float = 0.33
    exp_variant: str = "rational"

    def __post_init__(self):
        family = self.family.upper()
        object.__setattr__(self, "family", family)
        if family not in FAMILIES:
            raise ValueError(f"unknown filter family {self.family!r}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.window_side % 2 == 0:
            raise ValueError("window must be odd")
        if self.window_side < 3:
            raise ValueError("window must be at least 3")
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if self.exp_variant not in EXP_VARIANTS:
            raise ValueError(f"exp variant must be one of {EXP_VARIANTS}")

    @property
    def label(self) -> str:
        return f"{self.family}-{self.mode}-w{self.window_side}"


# --------------------------------------------------------------------------
# per-window cores
# --------------------------------------------------------------------------


@njit(cache=True)
def _bvdf_core(win, approx, acos_c, asin_c, angles, norms):
    n = win.shape[0]
    for i in range(n):
        norms[i] = math.sqrt(win[i, 0] * win[i, 0] + win[i, 1] * win[i, 1] + win[i, 2] * win[i, 2])
    for i in range(n):
        # a vector's angle to itself is exactly zero in both modes
        angles[i, i] = 0.0
        for j in range(i + 1, n):
            if norms[i] == 0.0 or norms[j] == 0.0:
                a = 0.0
            else:
                dot = win[i, 0] * win[j, 0] + win[i, 1] * win[j, 1] + win[i, 2] * win[j, 2]
                z = dot / (norms[i] * norms[j])
                if z > 1.0:
                    z = 1.0
                elif z < 0.0:
                    z = 0.0
                if approx:
                    a = _arccos_approx(z, acos_c, asin_c)
                else:
                    a = _arccos_exact(z)
            angles[i, j] = a
            angles[j, i] = a
    best = 0
    best_sum = np.inf
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += angles[i, j]
        if s < best_sum:
            best_sum = s
            best = i
    return best


@njit(cache=True)
def _amnf_core(win, approx, gaussian, kappa, exp_num, exp_den, exp_cutoff, h, out):
    """Writes the unrounded estimate to ``out``; returns False on fallback."""
    n = win.shape[0]
    c = n // 2
    scale = float(n) ** (-kappa / 3.0)
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += abs(win[i, 0] - win[j, 0]) + abs(win[i, 1] - win[j, 1]) + abs(win[i, 2] - win[j, 2])
        h[i] = scale * s
        if h[i] == 0.0:
            return False
    total = 0.0
    out[0] = 0.0
    out[1] = 0.0
    out[2] = 0.0
    for i in range(n):
        d0 = win[c, 0] - win[i, 0]
        d1 = win[c, 1] - win[i, 1]
        d2 = win[c, 2] - win[i, 2]
        if gaussian:
            u = 0.5 * (d0 * d0 + d1 * d1 + d2 * d2) / (h[i] * h[i])
        else:
            u = (abs(d0) + abs(d1) + abs(d2)) / h[i]
        if approx:
            k = _exp_neg_approx(u, exp_num, exp_den, exp_cutoff)
        else:
            k = _exp_neg_exact(u)
        wgt = k / (h[i] * h[i] * h[i])
        total += wgt
        out[0] += wgt * win[i, 0]
        out[1] += wgt * win[i, 1]
        out[2] += wgt * win[i, 2]
    if not total > 0.0:
        return False
    out[0] /= total
    out[1] /= total
    out[2] /= total
    return True


@njit(cache=True)
def _quantize(v):
    # half away from zero, then clamp
    r = math.floor(v + 0.5) if v >= 0.0 else -math.floor(-v + 0.5)
    if r < 0.0:
        return 0.0
    if r > 255.0:
        return 255.0
    return r


@njit(cache=True)
def _vector_median_core(win, dists):
    n = win.shape[0]
    for i in range(n):
        dists[i, i] = 0.0
        for j in range(i + 1, n):
            d0 = win[i, 0] - win[j, 0]
            d1 = win[i, 1] - win[j, 1]
            d2 = win[i, 2] - win[j, 2]
            d = math.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
            dists[i, j] = d
            dists[j, i] = d
    best = 0
    best_sum = np.inf
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += dists[i, j]
        if s < best_sum:
            best_sum = s
            best = i
    return best


@njit(cache=True)
def _evmf_switch(win, approx, ent_num, ent_den, ent_cutoff, dev):
    """True when the center is classified as noisy (P_C > beta_C)."""
    n = win.shape[0]
    c = n // 2
    m0 = 0.0
    m1 = 0.0
    m2 = 0.0
    for i in range(n):
        m0 += win[i, 0]
        m1 += win[i, 1]
        m2 += win[i, 2]
    m0 /= n
    m1 /= n
    m2 /= n
    total = 0.0
    for i in range(n):
        d0 = win[i, 0] - m0
        d1 = win[i, 1] - m1
        d2 = win[i, 2] - m2
        dev[i] = math.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
        total += dev[i]
    if total == 0.0:
        return False
    ent_sum = 0.0
    ent_c = 0.0
    for i in range(n):
        p = dev[i] / total
        if approx:
            e = _ent_approx(p, ent_num, ent_den, ent_cutoff)
        else:
            e = _ent_exact(p)
        ent_sum += e
        if i == c:
            ent_c = e
    beta = 0.0 if ent_sum == 0.0 else ent_c / ent_sum
    return dev[c] / total > beta


@njit(cache=True)
def _evmf_core(win, approx, ent_num, ent_den, ent_cutoff, dev, dists):
    if _evmf_switch(win, approx, ent_num, ent_den, ent_cutoff, dev):
        return _vector_median_core(win, dists)
    return win.shape[0] // 2


# --------------------------------------------------------------------------
# whole-image drivers
# --------------------------------------------------------------------------


@njit(cache=True)
def _gather(padded, r, c, w, win):
    k = 0
    for dr in range(w):
        for dc in range(w):
            win[k, 0] = padded[r + dr, c + dc, 0]
            win[k, 1] = padded[r + dr, c + dc, 1]
            win[k, 2] = padded[r + dr, c + dc, 2]
            k += 1


@njit(parallel=True, cache=True)
def _bvdf_image(padded, w, approx, acos_c, asin_c, out):
    rows, cols = out.shape[0], out.shape[1]
    n = w * w
    for r in prange(rows):
        win = np.empty((n, 3))
        angles = np.empty((n, n))
        norms = np.empty(n)
        for c in range(cols):
            _gather(padded, r, c, w, win)
            k = _bvdf_core(win, approx, acos_c, asin_c, angles, norms)
            for ch in range(3):
                out[r, c, ch] = np.uint8(win[k, ch])


@njit(parallel=True, cache=True)
def _amnf_image(padded, w, approx, gaussian, kappa, exp_num, exp_den, exp_cutoff, out):
    rows, cols = out.shape[0], out.shape[1]
    n = w * w
    for r in prange(rows):
        win = np.empty((n, 3))
        h = np.empty(n)
        est = np.empty(3)
        for c in range(cols):
            _gather(padded, r, c, w, win)
            if _amnf_core(win, approx, gaussian, kappa, exp_num, exp_den, exp_cutoff, h, est):
                for ch in range(3):
                    out[r, c, ch] = np.uint8(_quantize(est[ch]))
            else:
                for ch in range(3):
                    out[r, c, ch] = np.uint8(win[n // 2, ch])


@njit(parallel=True, cache=True)
def _evmf_image(padded, w, approx, ent_num, ent_den, ent_cutoff, out):
    rows, cols = out.shape[0], out.shape[1]
    n = w * w
    for r in prange(rows):
        win = np.empty((n, 3))
        dev = np.empty(n)
        dists = np.empty((n, n))
        for c in range(cols):
            _gather(padded, r, c, w, win)
            k = _evmf_core(win, approx, ent_num, ent_den, ent_cutoff, dev, dists)
            for ch in range(3):
                out[r, c, ch] = np.uint8(win[k, ch])


# --------------------------------------------------------------------------
# window-level API
# --------------------------------------------------------------------------


def _samples(win) -> np.ndarray:
    arr = win.samples if isinstance(win, WindowView) else win
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    n = arr.shape[0]
    w = math.isqrt(n)
    if arr.ndim != 2 or arr.shape[1] != 3 or w * w != n or w % 2 == 0 or w < 3:
        raise ValueError(f"window must hold w*w samples of 3 channels, w odd >= 3; got {arr.shape}")
    return arr


def _approx(mode: str) -> bool:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return mode == "approx"


def bvdf_index(win, mode: str = "exact", table: KernelTable | None = None) -> int:
    """0-based index of the sample with the smallest summed angle."""
    x = _samples(win)
    arr = (table or DEFAULT_TABLE).kernel_args()
    n = x.shape[0]
    return int(
        _bvdf_core(x, _approx(mode), arr["acos_c"], arr["asin_c"], np.empty((n, n)), np.empty(n))
    )


def bvdf(win, mode: str = "exact", table: KernelTable | None = None) -> np.ndarray:
    x = _samples(win)
    return x[bvdf_index(x, mode, table)].copy()


def amnf(
    win,
    mode: str = "exact",
    kernel: str = "exponential",
    kappa: float = 0.33,
    table: KernelTable | None = None,
    exp_variant: str = "rational",
) -> np.ndarray:
    """Kernel-weighted window average, rounded to integer channel values.

    ``kernel`` is ``"exponential"`` (AMNFE) or ``"gaussian"`` (AMNFG).
    Uniform windows and all-zero weight sums return the center sample.
    """
    if kernel not in ("exponential", "gaussian"):
        raise ValueError(f"unknown kernel {kernel!r}")
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    x = _samples(win)
    arr = (table or DEFAULT_TABLE).kernel_args(exp_variant)
    n = x.shape[0]
    est = np.empty(3)
    ok = _amnf_core(
        x,
        _approx(mode),
        kernel == "gaussian",
        float(kappa),
        arr["exp_num"],
        arr["exp_den"],
        arr["exp_cutoff"],
        np.empty(n),
        est,
    )
    if not ok:
        return x[n // 2].copy()
    return np.array([_quantize(v) for v in est])


def evmf_decision(win, mode: str = "exact", table: KernelTable | None = None) -> bool:
    """Whether the switching rule classifies the window center as noisy."""
    x = _samples(win)
    arr = (table or DEFAULT_TABLE).kernel_args()
    return bool(
        _evmf_switch(
            x, _approx(mode), arr["ent_num"], arr["ent_den"], arr["ent_cutoff"], np.empty(x.shape[0])
        )
    )


def evmf(win, mode: str = "exact", table: KernelTable | None = None) -> np.ndarray:
    x = _samples(win)
    arr = (table or DEFAULT_TABLE).kernel_args()
    n = x.shape[0]
    k = _evmf_core(
        x,
        _approx(mode),
        arr["ent_num"],
        arr["ent_den"],
        arr["ent_cutoff"],
        np.empty(n),
        np.empty((n, n)),
    )
    return x[k].copy()


# --------------------------------------------------------------------------
# image-level API
# --------------------------------------------------------------------------


def _launch(padded, spec: FilterSpec, table: KernelTable, out):
    arr = table.kernel_args(spec.exp_variant)
    approx = spec.mode == "approx"
    w = spec.window_side
    if spec.family == "BVDF":
        _bvdf_image(padded, w, approx, arr["acos_c"], arr["asin_c"], out)
    elif spec.family == "EVMF":
        _evmf_image(padded, w, approx, arr["ent_num"], arr["ent_den"], arr["ent_cutoff"], out)
    else:
        _amnf_image(
            padded,
            w,
            approx,
            spec.family == "AMNFG",
            float(spec.kappa),
            arr["exp_num"],
            arr["exp_den"],
            arr["exp_cutoff"],
            out,
        )


_warmed: set = set()


def _warm_up(spec: FilterSpec, table: KernelTable) -> None:
    # trigger compilation (or cache load) outside the timed region
    key = (spec.family, spec.mode)
    if key in _warmed:
        return
    tiny = np.zeros((3, 3, 3), dtype=np.uint8)
    _launch(tiny, spec, table, np.empty((1, 1, 3), dtype=np.uint8))
    _warmed.add(key)


def run_filter(
    img: RgbImage,
    spec: FilterSpec,
    table: KernelTable | None = None,
    border: str = "replicate",
    threads: int | None = None,
) -> tuple[RgbImage, float]:
    """Filter ``img`` and return it with the wall-clock filtering time.

    Output is identical for any thread count. ``border="skip"`` copies the
    pixels whose window would leave the image instead of filtering them.
    """
    if border not in ("replicate", "skip"):
        raise ValueError(f"unknown border mode {border!r}")
    check_window(img, spec.window_side)
    table = table or DEFAULT_TABLE
    if threads is not None:
        if not 1 <= threads <= numba.config.NUMBA_NUM_THREADS:
            raise ValueError(
                f"threads must be in [1, {numba.config.NUMBA_NUM_THREADS}]"
            )
        numba.set_num_threads(threads)
    _warm_up(spec, table)
    padded = pad_image(img, spec.window_side)
    out = np.empty_like(img.pixels)
    start = time.perf_counter()
    _launch(padded, spec, table, out)
    elapsed = time.perf_counter() - start
    if border == "skip":
        restore_border(out, img, spec.window_side)
    return RgbImage(out), elapsed
