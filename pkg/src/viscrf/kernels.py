"""Center-surround filter construction.

Kernels are built from sampled Gaussians with two dimensionless knobs:
the surround ratio s = sigma_surround / sigma_center and the window
ratio h, which sets the kernel side length to h * sigma_c + 1 (rounded
to the nearest odd integer so the filter stays symmetric).  Each sampled
Gaussian is normalized to unit sum before subtraction, which makes the
difference kernel zero-sum on the discrete grid: the inhibitory surround
exactly balances the excitatory center.

The analytic second-derivative-of-Gaussian kernel is provided as an
independent reference; note its central lobe is negative as the formula
is written, the opposite sign convention from the on-center difference
kernel (positive center, negative surround).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class KernelError(ValueError):
    """Raised for invalid kernel parameters."""


@dataclass(frozen=True)
class DoGParams:
    """Center sigma plus the surround and window ratios.

    s = 1 would make center and surround cancel into the zero filter,
    so s must be strictly greater than 1.
    """

    sigma_c: float
    s: float = 1.6
    h: float = 8.0

    def __post_init__(self) -> None:
        if self.sigma_c <= 0:
            raise KernelError(f"sigma_c must be positive, got {self.sigma_c}")
        if self.s <= 1:
            raise KernelError(f"surround ratio must be > 1, got {self.s}")
        if self.h <= 0:
            raise KernelError(f"window ratio must be positive, got {self.h}")

    @property
    def sigma_s(self) -> float:
        return self.s * self.sigma_c


@dataclass(frozen=True)
class Kernel:
    """Odd-sized square filter with its center at ((size-1)/2, (size-1)/2)."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise KernelError(f"kernel must be square, got shape {w.shape}")
        if w.shape[0] % 2 == 0 or w.shape[0] < 1:
            raise KernelError(f"kernel size must be odd, got {w.shape[0]}")
        if not np.all(np.isfinite(w)):
            raise KernelError("kernel contains non-finite weights")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @property
    def radius(self) -> int:
        return self.weights.shape[0] // 2


def window_size(sigma_c: float, h: float) -> int:
    """Kernel side length: h * sigma_c + 1, as the nearest odd integer >= 3.

    Rounding is half toward +inf; an even result is bumped up by one.
    """
    if sigma_c <= 0 or h <= 0:
        raise KernelError(f"window_size needs positive inputs, got ({sigma_c}, {h})")
    w = int(math.floor(h * sigma_c + 1 + 0.5))
    if w % 2 == 0:
        w += 1
    return max(w, 3)


def _grid(size: int) -> tuple[np.ndarray, np.ndarray]:
    m = size // 2
    y, x = np.mgrid[-m : m + 1, -m : m + 1]
    return x.astype(np.float64), y.astype(np.float64)


def gaussian_kernel(sigma: float, size: int) -> Kernel:
    """Sampled isotropic Gaussian, normalized to unit sum."""
    if sigma <= 0:
        raise KernelError(f"sigma must be positive, got {sigma}")
    if size < 3 or size % 2 == 0:
        raise KernelError(f"size must be an odd integer >= 3, got {size}")
    x, y = _grid(size)
    g = np.exp(-(x * x + y * y) / (2.0 * sigma * sigma))
    return Kernel(g / g.sum())


def gaussian_profile_1d(sigma: float, size: int) -> np.ndarray:
    """1D sampled Gaussian, unit sum; separable factor of the 2D kernel."""
    if sigma <= 0:
        raise KernelError(f"sigma must be positive, got {sigma}")
    if size < 3 or size % 2 == 0:
        raise KernelError(f"size must be an odd integer >= 3, got {size}")
    m = size // 2
    x = np.arange(-m, m + 1, dtype=np.float64)
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def dog_kernel(p: DoGParams) -> Kernel:
    """Center Gaussian minus surround Gaussian on a shared window.

    Both Gaussians carry unit sum, so the difference sums to zero on the
    grid; the center weight is positive (on-center convention).
    """
    size = window_size(p.sigma_c, p.h)
    center = gaussian_kernel(p.sigma_c, size)
    surround = gaussian_kernel(p.sigma_s, size)
    return Kernel(center.weights - surround.weights)


def log_kernel(sigma: float, size: int) -> Kernel:
    """Sampled analytic second derivative of a Gaussian, DC-corrected.

    weights(x, y) = (x^2 + y^2 - 2 sigma^2) / (2 pi sigma^6)
                    * exp(-(x^2 + y^2) / (2 sigma^2)),
    then the mean weight is subtracted so the kernel sums to zero on the
    finite grid.  The central lobe is negative under this sign convention.
    """
    if sigma <= 0:
        raise KernelError(f"sigma must be positive, got {sigma}")
    if size < 3 or size % 2 == 0:
        raise KernelError(f"size must be an odd integer >= 3, got {size}")
    x, y = _grid(size)
    r2 = x * x + y * y
    w = (r2 - 2.0 * sigma * sigma) / (2.0 * math.pi * sigma**6) * np.exp(
        -r2 / (2.0 * sigma * sigma)
    )
    return Kernel(w - w.mean())


def dump_kernel_csv(k: Kernel, path: str | Path) -> None:
    """Debug dump: one row per line, comma-separated, 9 significant digits."""
    lines = [",".join(f"{v:.9g}" for v in row) for row in k.weights]
    Path(path).write_text("\n".join(lines) + "\n")
