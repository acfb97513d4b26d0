"""Convolution engine and multiscale edge-map construction.

A DoG edge map is a stack of center-surround responses of the source
image, one layer per center sigma, every layer computed from the
original image at full resolution (no cascading, no downsampling).  The
second-level map is built by differencing consecutive layers of the
first.

The default response path blurs with two separable 1D Gaussian passes
sharing the window of the center sigma and subtracts; direct convolution
with the assembled 2D difference kernel is kept as an equivalent route
(linearity of convolution makes the two agree to rounding).  The 1D
passes fold mirrored sample pairs together and average both axis
orders, which makes every layer commute with quarter-turn rotation
bit-exactly (isotropic kernels, replicate border).

Out-of-bounds reads always use nearest-edge replication.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .kernels import DoGParams, Kernel, dog_kernel, gaussian_profile_1d, window_size
from .raster import Raster


class ScaleSpaceError(ValueError):
    """Raised for invalid scale lists, layers, or convolution inputs."""


def _worker_count() -> int:
    """Thread cap from VISCRF_THREADS (0 or unset = auto)."""
    raw = os.environ.get("VISCRF_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def validate_scales(scales: list[float]) -> list[float]:
    out = [float(s) for s in scales]
    if not out:
        raise ScaleSpaceError("scale list must be non-empty")
    if any(s <= 0 for s in out):
        raise ScaleSpaceError(f"scales must be positive, got {out}")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ScaleSpaceError(f"scales must be strictly increasing, got {out}")
    return out


@dataclass(frozen=True)
class EdgeLayer:
    scale: float
    response: Raster


@dataclass(frozen=True)
class EdgeMap:
    """Ordered stack of same-sized response layers tagged with their scale."""

    kind: str  # "dog" | "log"
    layers: tuple[EdgeLayer, ...]
    s: float
    h: float

    def __post_init__(self) -> None:
        if self.kind not in ("dog", "log"):
            raise ScaleSpaceError(f"edge map kind must be 'dog' or 'log', got {self.kind!r}")
        if not self.layers:
            raise ScaleSpaceError("edge map needs at least one layer")
        w, hgt = self.layers[0].response.width, self.layers[0].response.height
        for lay in self.layers:
            if (lay.response.width, lay.response.height) != (w, hgt):
                raise ScaleSpaceError("edge map layers must share dimensions")

    @property
    def scales(self) -> list[float]:
        return [lay.scale for lay in self.layers]


@dataclass(frozen=True)
class ThresholdPolicy:
    """Binarization rule: 'sign' (response > 0) or 'mean_pos_neg'
    (keep only responses beyond the mean positive / mean negative level)."""

    mode: str = "sign"

    def __post_init__(self) -> None:
        if self.mode not in ("sign", "mean_pos_neg"):
            raise ScaleSpaceError(f"unknown threshold mode {self.mode!r}")


# ---------------------------------------------------------------------------
# Convolution


def convolve(r: Raster, k: Kernel, border: str = "replicate") -> Raster:
    """Full-image convolution, same output size, nearest-edge replication.

    out(x, y) = sum_ij k(i, j) * r(x - i, y - j) with border replication
    supplying out-of-bounds samples.
    """
    if border != "replicate":
        raise ScaleSpaceError(f"unsupported border mode {border!r}")
    if k.size >= 4 * max(r.width, r.height):
        raise ScaleSpaceError(
            f"kernel size {k.size} degenerate for {r.width}x{r.height} image"
        )
    m = k.radius
    padded = np.pad(r.data, m, mode="edge")
    out = fftconvolve(padded, k.weights, mode="valid")
    return Raster(out)


def _blur1d(a: np.ndarray, g: np.ndarray, axis: int) -> np.ndarray:
    """1D unit-sum blur along one axis with replicate border.

    Mirrored taps are folded pairwise (g[j] * (left + right)) so the
    result is invariant under reversal of the blurred axis, bit for bit.
    """
    m = len(g) // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (m, m)
    p = np.pad(a, pad, mode="edge")
    n = a.shape[axis]

    def sl(off: int) -> np.ndarray:
        idx = [slice(None), slice(None)]
        idx[axis] = slice(m + off, m + off + n)
        return p[tuple(idx)]

    out = g[m] * sl(0)
    for j in range(1, m + 1):
        out += g[m + j] * (sl(-j) + sl(j))
    return out


def _blur2d(a: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Separable 2D blur, symmetrized over the two axis orders.

    Averaging x-then-y with y-then-x removes the only asymmetry left in
    the separable scheme, so quarter-turn rotations of the input produce
    bit-identical rotated outputs.
    """
    xy = _blur1d(_blur1d(a, g, 1), g, 0)
    yx = _blur1d(_blur1d(a, g, 0), g, 1)
    return 0.5 * (xy + yx)


def dog_response(r: Raster, p: DoGParams, method: str = "blur_diff") -> Raster:
    """One edge-map scale: center blur minus surround blur.

    'blur_diff' runs two separable Gaussian passes on the shared window
    of the center sigma; 'direct' convolves with the assembled 2D
    difference kernel.  The routes agree within rounding error.
    """
    if method == "direct":
        return convolve(r, dog_kernel(p))
    if method == "blur_diff":
        size = window_size(p.sigma_c, p.h)
        gc = gaussian_profile_1d(p.sigma_c, size)
        gs = gaussian_profile_1d(p.sigma_s, size)
        return Raster(_blur2d(r.data, gc) - _blur2d(r.data, gs))
    raise ScaleSpaceError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Edge maps


def emap_dog(r: Raster, scales: list[float], s: float = 1.6, h: float = 8.0) -> EdgeMap:
    """DoG edge map: one independent layer per scale, ascending."""
    scales = validate_scales(scales)
    params = [DoGParams(sigma_c=sc, s=s, h=h) for sc in scales]
    workers = min(_worker_count(), len(params))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            responses = list(pool.map(lambda p: dog_response(r, p), params))
    else:
        responses = [dog_response(r, p) for p in params]
    layers = tuple(
        EdgeLayer(scale=sc, response=resp) for sc, resp in zip(scales, responses)
    )
    return EdgeMap(kind="dog", layers=layers, s=s, h=h)


def emap_log(dog: EdgeMap) -> EdgeMap:
    """Second-level map: pointwise difference of consecutive DoG layers.

    Layer i is dog[i+1] - dog[i], tagged with the lower sigma of the pair.
    """
    if dog.kind != "dog":
        raise ScaleSpaceError("emap_log needs a DoG edge map")
    if len(dog.layers) < 2:
        raise ScaleSpaceError("emap_log needs at least 2 source layers")
    layers = tuple(
        EdgeLayer(
            scale=lo.scale,
            response=Raster(hi.response.data - lo.response.data),
        )
        for lo, hi in zip(dog.layers, dog.layers[1:])
    )
    return EdgeMap(kind="log", layers=layers, s=dog.s, h=dog.h)


def binarize(layer: Raster, policy: ThresholdPolicy) -> Raster:
    """Threshold a signed response layer.

    sign: 1 where response > 0, else 0.
    mean_pos_neg: +1 above the mean of the positive responses, -1 below
    the mean of the negative responses, 0 between.  A layer with no
    positive (negative) samples produces no +1 (-1) outputs.
    """
    data = layer.data
    if policy.mode == "sign":
        return Raster((data > 0).astype(np.float64))
    pos = data[data > 0]
    neg = data[data < 0]
    thr_max = pos.mean() if pos.size else math.inf
    thr_min = neg.mean() if neg.size else -math.inf
    out = np.zeros_like(data)
    out[data > thr_max] = 1.0
    out[data < thr_min] = -1.0
    return Raster(out)


# ---------------------------------------------------------------------------
# Rendering

# Diverging map: blue -> cyan -> white -> yellow -> red, white pinned at 0.
_JET_STOPS = [
    (-1.0, (0, 0, 255)),
    (-0.5, (0, 255, 255)),
    (0.0, (255, 255, 255)),
    (0.5, (255, 255, 0)),
    (1.0, (255, 0, 0)),
]


def render_jetwhite(layer: Raster) -> np.ndarray:
    """Map signed responses to a diverging false-color image.

    Zero renders pure white; -A and +A (A = max |response|) saturate to
    blue and red through cyan and yellow, piecewise linear per channel.
    Returns an (H, W, 3) uint8 array.
    """
    amp = float(np.max(np.abs(layer.data)))
    t = layer.data / amp if amp > 0 else np.zeros_like(layer.data)
    xs = np.array([p for p, _ in _JET_STOPS])
    out = np.empty((layer.height, layer.width, 3), dtype=np.uint8)
    for c in range(3):
        ys = np.array([rgb[c] for _, rgb in _JET_STOPS], dtype=np.float64)
        chan = np.interp(t, xs, ys)
        out[:, :, c] = np.clip(np.floor(chan + 0.5), 0, 255).astype(np.uint8)
    return out


# ---------------------------------------------------------------------------
# Scale selection


@dataclass(frozen=True)
class ScaleSelection:
    """Feature-driven scales: raw sigmas f / (2 s) plus the grid-snapped list."""

    raw: list[float]
    scales: list[float] = field(default_factory=list)


def select_scales(
    feature_sizes: list[float], s: float = 1.6, grid_step: float = 0.5
) -> ScaleSelection:
    """Derive center sigmas from feature extents.

    A feature of extent f is matched when the surround diameter 2 sigma_s
    equals f, i.e. raw sigma_c = f / (2 s).  The returned list spans the
    grid multiples of grid_step from the snapped minimum to the snapped
    maximum raw value (nearest multiple, half up, floor of one step).
    """
    if not feature_sizes:
        raise ScaleSpaceError("feature list must be non-empty")
    if any(f <= 0 for f in feature_sizes):
        raise ScaleSpaceError(f"feature sizes must be positive, got {feature_sizes}")
    if grid_step <= 0:
        raise ScaleSpaceError(f"grid_step must be positive, got {grid_step}")
    if s <= 1:
        raise ScaleSpaceError(f"surround ratio must be > 1, got {s}")

    raw = [f / (2.0 * s) for f in feature_sizes]

    def snap(v: float) -> float:
        return max(math.floor(v / grid_step + 0.5), 1) * grid_step

    lo, hi = snap(min(raw)), snap(max(raw))
    n = int(round((hi - lo) / grid_step))
    scales = sorted({round(lo + i * grid_step, 12) for i in range(n + 1)})
    return ScaleSelection(raw=raw, scales=scales)
