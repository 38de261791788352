import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from fastvf import RgbImage

# lines reported by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def random_image(seed: int, m: int = 128, n: int | None = None) -> RgbImage:
    """I.i.d. uniform 8-bit pixels."""
    rng = np.random.default_rng(seed)
    return RgbImage(rng.integers(0, 256, (m, n or m, 3), dtype=np.uint8))


def smooth_image(seed: int, m: int = 128, n: int | None = None, sigma: float = 6.0) -> RgbImage:
    """Low-pass filtered noise stretched to the full 8-bit range."""
    rng = np.random.default_rng(seed)
    base = rng.uniform(0, 255, (m, n or m, 3))
    img = np.stack([gaussian_filter(base[..., k], sigma) for k in range(3)], axis=-1)
    img = (img - img.min()) / (img.max() - img.min()) * 255
    return RgbImage(np.round(img).astype(np.uint8))


def random_windows(seed: int, count: int, n: int = 9) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, (count, n, 3)).astype(np.float64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
