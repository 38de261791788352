"""RGB image container, PPM (P3/P6) I/O and the sliding-window engine.

Window samples are numbered raster-wise, top-left to bottom-right. The
documentation uses 1-based numbers ``x_1 .. x_n`` with the center at
``C = (n + 1) / 2``; in code, sample ``k`` lives at ``samples[k - 1]`` and
the center at ``samples[n // 2]``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = [
    "RgbImage",
    "WindowView",
    "PpmError",
    "MalformedHeaderError",
    "UnsupportedMaxvalError",
    "TruncatedPayloadError",
    "WindowSizeError",
    "load_ppm",
    "save_ppm",
    "check_window",
    "pad_image",
    "sliding_apply",
]

BORDER_MODES = ("replicate", "skip")


class RgbImage:
    """M x N image of 8-bit RGB pixels, backed by a ``(M, N, 3)`` uint8 array."""

    __slots__ = ("pixels",)

    def __init__(self, pixels):
        arr = np.asarray(pixels)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected an (M, N, 3) array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must have at least one pixel")
        if arr.dtype != np.uint8:
            if np.any(arr < 0) or np.any(arr > 255):
                raise ValueError("channel values must lie in [0, 255]")
            if np.issubdtype(arr.dtype, np.floating) and np.any(arr != np.round(arr)):
                raise ValueError("channel values must be integers")
            arr = arr.astype(np.uint8)
        self.pixels = np.ascontiguousarray(arr)

    @classmethod
    def from_data(cls, width: int, height: int, data) -> "RgbImage":
        """Build from a flat row-major channel sequence of length 3*M*N."""
        flat = np.asarray(data)
        if flat.size != 3 * width * height:
            raise ValueError(
                f"data length {flat.size} != 3 * {height} * {width}"
            )
        return cls(flat.reshape(height, width, 3))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def data(self) -> np.ndarray:
        return self.pixels.reshape(-1)

    def copy(self) -> "RgbImage":
        return RgbImage(self.pixels.copy())

    def __eq__(self, other):
        if not isinstance(other, RgbImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    def __repr__(self):
        return f"RgbImage(width={self.width}, height={self.height})"


@dataclass(frozen=True)
class WindowView:
    """The ``n`` samples of one square window, in raster order."""

    samples: np.ndarray

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def center_index(self) -> int:
        """1-based index C of the center sample."""
        return (self.n + 1) // 2

    @property
    def center(self) -> np.ndarray:
        return self.samples[self.n // 2]

    def sample(self, k: int) -> np.ndarray:
        """Sample ``x_k`` with 1-based ``k``."""
        if not 1 <= k <= self.n:
            raise IndexError(k)
        return self.samples[k - 1]


# --------------------------------------------------------------------------
# PPM
# --------------------------------------------------------------------------


class PpmError(ValueError):
    pass


class MalformedHeaderError(PpmError):
    pass


class UnsupportedMaxvalError(PpmError):
    pass


class TruncatedPayloadError(PpmError):
    pass


def _header_tokens(buf: bytes, count: int, pos: int) -> tuple[list[bytes], int]:
    tokens = []
    n = len(buf)
    while len(tokens) < count:
        while pos < n and buf[pos : pos + 1].isspace():
            pos += 1
        if pos < n and buf[pos : pos + 1] == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        if pos >= n:
            raise MalformedHeaderError("unexpected end of header")
        start = pos
        while pos < n and not buf[pos : pos + 1].isspace() and buf[pos : pos + 1] != b"#":
            pos += 1
        tokens.append(buf[start:pos])
    return tokens, pos


def load_ppm(path) -> RgbImage:
    """Read a P3 or P6 PPM with maxval 255."""
    with open(path, "rb") as fh:
        buf = fh.read()
    magic = buf[:2]
    if magic not in (b"P3", b"P6"):
        raise MalformedHeaderError(f"not a P3/P6 PPM (magic {magic!r})")
    tokens, pos = _header_tokens(buf, 3, 2)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise MalformedHeaderError(f"non-integer header field in {tokens!r}") from None
    if width <= 0 or height <= 0:
        raise MalformedHeaderError(f"bad dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedMaxvalError(f"unsupported maxval {maxval}")
    count = 3 * width * height

    if magic == b"P6":
        if pos >= len(buf) or not buf[pos : pos + 1].isspace():
            raise MalformedHeaderError("missing whitespace after maxval")
        payload = buf[pos + 1 : pos + 1 + count]
        if len(payload) < count:
            raise TruncatedPayloadError(f"expected {count} bytes, got {len(payload)}")
        data = np.frombuffer(payload, dtype=np.uint8)
    else:
        body = b"\n".join(line.split(b"#", 1)[0] for line in buf[pos:].splitlines())
        fields = body.split()
        if len(fields) < count:
            raise TruncatedPayloadError(f"expected {count} samples, got {len(fields)}")
        try:
            data = np.array([int(v) for v in fields[:count]], dtype=np.int64)
        except ValueError:
            raise MalformedHeaderError("non-integer sample in P3 payload") from None
        if np.any(data < 0) or np.any(data > 255):
            raise PpmError("sample value outside [0, 255]")
    return RgbImage.from_data(width, height, data.astype(np.uint8))


def save_ppm(img: RgbImage, path, binary: bool = True) -> None:
    """Write ``img`` as P6 (``binary``) or P3. Comments are never emitted."""
    if not os.fspath(path):
        raise FileNotFoundError("empty output path")
    header = f"{'P6' if binary else 'P3'}\n{img.width} {img.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        if binary:
            fh.write(img.pixels.tobytes())
        else:
            for row in img.pixels:
                fh.write(" ".join(str(v) for v in row.reshape(-1)).encode("ascii"))
                fh.write(b"\n")


# --------------------------------------------------------------------------
# Sliding window
# --------------------------------------------------------------------------


class WindowSizeError(ValueError):
    pass


def check_window(img: RgbImage, w: int) -> None:
    if w % 2 == 0:
        raise WindowSizeError("window must be odd")
    if w < 3:
        raise WindowSizeError("window must be at least 3")
    if w > min(img.height, img.width):
        raise WindowSizeError(
            f"window {w} exceeds image size {img.height}x{img.width}"
        )


def pad_image(img: RgbImage, w: int) -> np.ndarray:
    """Replicate-pad by ``w // 2`` pixels on every side."""
    r = w // 2
    return np.pad(img.pixels, ((r, r), (r, r), (0, 0)), mode="edge")


def restore_border(out: np.ndarray, img: RgbImage, w: int) -> None:
    """Copy the unfiltered input into the ``w // 2`` wide frame of ``out``."""
    r = w // 2
    out[:r] = img.pixels[:r]
    out[-r:] = img.pixels[-r:]
    out[:, :r] = img.pixels[:, :r]
    out[:, -r:] = img.pixels[:, -r:]


def sliding_apply(
    img: RgbImage,
    w: int,
    f: Callable[[WindowView], object],
    border: str = "replicate",
) -> RgbImage:
    """Apply ``f`` to the window centered on every pixel.

    This is the reference engine: it calls a Python function per pixel and
    is meant for small images and custom window functions. The filters in
    :mod:`fastvf.filters` run compiled loops with identical semantics.
    """
    check_window(img, w)
    if border not in BORDER_MODES:
        raise ValueError(f"unknown border mode {border!r}")
    windows = sliding_window_view(pad_image(img, w), (w, w), axis=(0, 1))
    # (M, N, 3, w, w) -> (M, N, w*w, 3)
    windows = np.moveaxis(windows, 2, -1).reshape(img.height, img.width, w * w, 3)
    out = np.empty_like(img.pixels)
    for r in range(img.height):
        for c in range(img.width):
            px = np.asarray(f(WindowView(windows[r, c].astype(np.float64))))
            if px.shape != (3,) or np.any(px < 0) or np.any(px > 255):
                raise ValueError(f"window function returned invalid pixel {px!r}")
            out[r, c] = px
    if border == "skip":
        restore_border(out, img, w)
    return RgbImage(out)
