"""Line-segment extraction and tilt statistics for edge-map layers.

Each binarized layer goes through a standard three-step chain: vote the
on-pixels into a (theta, rho) accumulator, pick accumulator peaks
greedily with local suppression, then walk the on-pixels along each
peak line to recover maximal runs as segments.  Segment angles come
from the endpoints, not the accumulator bin, so they resolve finer than
the theta quantization.  Deviations are then aggregated per scale
around the four reference orientations (horizontal, both diagonals,
vertical).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .raster import Raster
from .scalespace import EdgeMap, ThresholdPolicy, binarize


class AnalysisError(ValueError):
    """Raised for invalid analysis inputs."""


@dataclass(frozen=True)
class HoughParams:
    theta_res: float = 1.0  # degrees per accumulator bin
    rho_res: float = 1.0  # pixels per bin
    num_peaks: int = 100
    peak_floor: float = 0.3  # fraction of accumulator max
    fill_gap: float = 5.0  # merge runs separated by gaps up to this
    min_length: float = 50.0  # discard shorter segments

    def __post_init__(self) -> None:
        if self.theta_res <= 0 or self.rho_res <= 0:
            raise AnalysisError("resolutions must be positive")
        if not 0 < self.peak_floor <= 1:
            raise AnalysisError(f"peak_floor must be in (0, 1], got {self.peak_floor}")
        if self.fill_gap < 0:
            raise AnalysisError(f"fill_gap must be >= 0, got {self.fill_gap}")
        if self.min_length < 1:
            raise AnalysisError(f"min_length must be >= 1, got {self.min_length}")
        if self.num_peaks < 1:
            raise AnalysisError(f"num_peaks must be >= 1, got {self.num_peaks}")


@dataclass(frozen=True)
class LineSegment:
    """Detected segment: endpoints, angle in [0, 180) from +x, length."""

    x1: float
    y1: float
    x2: float
    y2: float
    angle: float
    length: float
    scale_tag: float


@dataclass(frozen=True)
class TiltStats:
    scale_tag: float
    bin: str  # H | D+ | V | D-
    ref_angle: float
    n: int
    mean_angle: float
    mean_dev: float
    std_dev: float
    total_length: float


@dataclass(frozen=True)
class HoughAccumulator:
    acc: np.ndarray  # (n_theta, n_rho) int64 vote counts
    thetas: np.ndarray  # bin centers, degrees in [-90, 90)
    rhos: np.ndarray  # bin centers, pixels in [-D, D]


def _on_pixels(bin_layer: Raster) -> tuple[np.ndarray, np.ndarray]:
    values = np.unique(bin_layer.data)
    if not np.all(np.isin(values, (0.0, 1.0))):
        raise AnalysisError("hough input must be binary {0, 1}")
    ys, xs = np.nonzero(bin_layer.data)
    return xs.astype(np.float64), ys.astype(np.float64)


def hough_accumulate(
    bin_layer: Raster, theta_res: float = 1.0, rho_res: float = 1.0
) -> HoughAccumulator:
    """Vote every on-pixel into the (theta, rho) grid.

    theta spans [-90, 90) in theta_res steps; rho spans [-D, D] in
    rho_res steps with D the image diagonal.  Each on-pixel adds one
    vote per theta column at rho = x cos(theta) + y sin(theta), rounded
    to the nearest rho bin.
    """
    xs, ys = _on_pixels(bin_layer)
    n_theta = int(round(180.0 / theta_res))
    thetas = -90.0 + theta_res * np.arange(n_theta)
    diag = math.ceil(math.hypot(bin_layer.width, bin_layer.height))
    n_rho = int(round(2 * diag / rho_res)) + 1
    rhos = -diag + rho_res * np.arange(n_rho)
    acc = np.zeros((n_theta, n_rho), dtype=np.int64)
    if xs.size:
        rad = np.deg2rad(thetas)
        cos, sin = np.cos(rad), np.sin(rad)
        for i in range(n_theta):
            r = xs * cos[i] + ys * sin[i]
            idx = np.rint((r + diag) / rho_res).astype(np.intp)
            acc[i] = np.bincount(idx, minlength=n_rho)
    return HoughAccumulator(acc=acc, thetas=thetas, rhos=rhos)


def hough_peaks(
    hough: HoughAccumulator, num_peaks: int = 100, peak_floor: float = 0.3
) -> list[tuple[float, float]]:
    """Greedy peak picking with 3x3 suppression.

    Peaks below peak_floor times the accumulator maximum are ignored;
    ties resolve to the smaller theta index, then the smaller rho index
    (argmax order on the (theta, rho) grid).
    """
    acc = hough.acc.copy()
    ceiling = int(acc.max())
    if ceiling == 0:
        return []
    floor = peak_floor * ceiling
    peaks: list[tuple[float, float]] = []
    for _ in range(num_peaks):
        flat = int(np.argmax(acc))
        ti, ri = np.unravel_index(flat, acc.shape)
        if acc[ti, ri] < floor:
            break
        peaks.append((float(hough.thetas[ti]), float(hough.rhos[ri])))
        acc[max(ti - 1, 0) : ti + 2, max(ri - 1, 0) : ri + 2] = 0
    return peaks


def _endpoint_angle(dx: float, dy: float) -> float:
    ang = math.degrees(math.atan2(dy, dx)) % 180.0
    return 0.0 if ang == 180.0 else ang


def extract_segments(
    bin_layer: Raster,
    peaks: list[tuple[float, float]],
    fill_gap: float = 5.0,
    min_length: float = 50.0,
    rho_res: float = 1.0,
    scale_tag: float = 0.0,
) -> list[LineSegment]:
    """Walk the on-pixels along each peak line and emit maximal runs.

    Pixels within half a rho bin of the line are ordered by their
    projection along it; runs whose gaps (missing pixels between
    consecutive projections) stay within fill_gap merge, and runs whose
    endpoint distance falls short of min_length are dropped.  Pixels
    belonging to an accepted segment are claimed and no longer feed
    later (weaker) peaks, so each edge yields one segment.
    """
    xs, ys = _on_pixels(bin_layer)
    segments: list[LineSegment] = []
    if xs.size == 0:
        return segments
    used = np.zeros(xs.size, dtype=bool)
    for theta, rho in peaks:
        rad = math.radians(theta)
        cos, sin = math.cos(rad), math.sin(rad)
        dist = xs * cos + ys * sin - rho
        sel = np.nonzero((np.abs(dist) <= rho_res / 2.0) & ~used)[0]
        if sel.size == 0:
            continue
        px, py = xs[sel], ys[sel]
        t = -px * sin + py * cos
        order = np.argsort(t, kind="stable")
        px, py, sel = px[order], py[order], sel[order]
        t = t[order]
        breaks = np.nonzero(np.diff(t) - 1.0 > fill_gap)[0]
        starts = np.concatenate(([0], breaks + 1))
        ends = np.concatenate((breaks, [t.size - 1]))
        for a, b in zip(starts, ends):
            dx, dy = px[b] - px[a], py[b] - py[a]
            length = math.hypot(dx, dy)
            if length < min_length:
                continue
            used[sel[a : b + 1]] = True
            segments.append(
                LineSegment(
                    x1=float(px[a]),
                    y1=float(py[a]),
                    x2=float(px[b]),
                    y2=float(py[b]),
                    angle=_endpoint_angle(dx, dy),
                    length=length,
                    scale_tag=scale_tag,
                )
            )
    return segments


# ---------------------------------------------------------------------------
# Orientation binning and statistics

BIN_ORDER = ("H", "D+", "V", "D-")
REF_ANGLES = {"H": 0.0, "D+": 45.0, "V": 90.0, "D-": 135.0}


def bin_orientation(angle: float) -> str:
    """Classify an angle into H / D+ / V / D- (45-degree half-open bins)."""
    if not 0 <= angle < 180:
        raise AnalysisError(f"angle must be in [0, 180), got {angle}")
    if angle < 22.5 or angle >= 157.5:
        return "H"
    if angle < 67.5:
        return "D+"
    if angle < 112.5:
        return "V"
    return "D-"


def angle_deviation(angle: float, ref: float) -> float:
    """Signed deviation of angle from ref, wrapped into (-90, 90]."""
    dev = (angle - ref) % 180.0
    if dev > 90.0:
        dev -= 180.0
    return dev


def tilt_statistics(
    segments: list[LineSegment], scale_tag: float
) -> list[TiltStats]:
    """Per-orientation-bin aggregates for one scale, ordered H, D+, V, D-.

    Angles are wrapped into the reference +/- 22.5 window before
    averaging; std is the population standard deviation of deviations.
    """
    by_bin: dict[str, list[LineSegment]] = {b: [] for b in BIN_ORDER}
    for seg in segments:
        by_bin[bin_orientation(seg.angle)].append(seg)
    stats: list[TiltStats] = []
    for b in BIN_ORDER:
        segs = by_bin[b]
        if not segs:
            continue
        ref = REF_ANGLES[b]
        devs = np.array([angle_deviation(s.angle, ref) for s in segs])
        mean_dev = float(devs.mean())
        stats.append(
            TiltStats(
                scale_tag=scale_tag,
                bin=b,
                ref_angle=ref,
                n=len(segs),
                mean_angle=(ref + mean_dev) % 180.0,
                mean_dev=mean_dev,
                std_dev=float(devs.std()),
                total_length=float(sum(s.length for s in segs)),
            )
        )
    return stats


# ---------------------------------------------------------------------------
# Full per-layer chain


@dataclass(frozen=True)
class AnalysisResult:
    stats: list[TiltStats]
    segments: list[LineSegment]
    overlays: dict[float, np.ndarray]  # scale -> RGB uint8, only when requested


def _overlay(bin_layer: Raster, segments: list[LineSegment]) -> np.ndarray:
    """Segments in green over the binary layer, start/end marked
    yellow/red (3x3 crosses)."""
    base = (bin_layer.data != 0).astype(np.uint8) * 255
    rgb = np.stack([base, base, base], axis=-1)

    def put(x: float, y: float, color: tuple[int, int, int]) -> None:
        xi, yi = int(round(x)), int(round(y))
        if 0 <= xi < rgb.shape[1] and 0 <= yi < rgb.shape[0]:
            rgb[yi, xi] = color

    for seg in segments:
        n = max(int(math.ceil(seg.length)), 1)
        for i in range(n + 1):
            f = i / n
            put(seg.x1 + f * (seg.x2 - seg.x1), seg.y1 + f * (seg.y2 - seg.y1), (0, 200, 0))
        for ox, oy in ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)):
            put(seg.x1 + ox, seg.y1 + oy, (255, 255, 0))
            put(seg.x2 + ox, seg.y2 + oy, (255, 0, 0))
    return rgb


def analyze_layer(
    layer: Raster,
    scale_tag: float,
    hp: HoughParams,
    policy: ThresholdPolicy,
) -> tuple[list[TiltStats], list[LineSegment], Raster]:
    """binarize -> accumulate -> peaks -> segments -> statistics for one layer."""
    binary = binarize(layer, policy)
    # mean_pos_neg yields {-1, 0, +1}; any retained response is an edge pixel.
    on = Raster((binary.data != 0).astype(np.float64))
    hough = hough_accumulate(on, hp.theta_res, hp.rho_res)
    peaks = hough_peaks(hough, hp.num_peaks, hp.peak_floor)
    segments = extract_segments(
        on, peaks, hp.fill_gap, hp.min_length, hp.rho_res, scale_tag
    )
    return tilt_statistics(segments, scale_tag), segments, on


def run_analysis(
    emap: EdgeMap,
    hp: HoughParams | None = None,
    policy: ThresholdPolicy | None = None,
    make_overlays: bool = False,
) -> AnalysisResult:
    """Run the full chain over every edge-map layer, keyed by scale."""
    hp = hp or HoughParams()
    policy = policy or ThresholdPolicy()
    all_stats: list[TiltStats] = []
    all_segments: list[LineSegment] = []
    overlays: dict[float, np.ndarray] = {}
    for layer in emap.layers:
        stats, segments, on = analyze_layer(layer.response, layer.scale, hp, policy)
        all_stats.extend(stats)
        all_segments.extend(segments)
        if make_overlays:
            overlays[layer.scale] = _overlay(on, segments)
    return AnalysisResult(stats=all_stats, segments=all_segments, overlays=overlays)


# ---------------------------------------------------------------------------
# CSV output

STATS_HEADER = [
    "scale",
    "bin",
    "ref_angle_deg",
    "n_segments",
    "mean_angle_deg",
    "mean_dev_deg",
    "std_dev_deg",
    "total_length_px",
]
SEGMENTS_HEADER = ["scale", "x1", "y1", "x2", "y2", "angle_deg", "length_px"]


def write_stats_csv(stats: list[TiltStats], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(STATS_HEADER)
        for st in stats:
            writer.writerow(
                [
                    f"{st.scale_tag:.6f}",
                    st.bin,
                    f"{st.ref_angle:.6f}",
                    st.n,
                    f"{st.mean_angle:.6f}",
                    f"{st.mean_dev:.6f}",
                    f"{st.std_dev:.6f}",
                    f"{st.total_length:.6f}",
                ]
            )


def write_segments_csv(segments: list[LineSegment], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SEGMENTS_HEADER)
        for s in segments:
            writer.writerow(
                [
                    f"{s.scale_tag:.6f}",
                    f"{s.x1:.6f}",
                    f"{s.y1:.6f}",
                    f"{s.x2:.6f}",
                    f"{s.y2:.6f}",
                    f"{s.angle:.6f}",
                    f"{s.length:.6f}",
                ]
            )
