"""Procedural tile-illusion stimuli.

Two families: brick walls of alternately shifted dark/light tile rows
separated by thin gray mortar lines, and checkerboards with small
square dots of the opposite luminance superimposed near tile corners.
All generators are deterministic, integer-pixel geometry (no
anti-aliasing): the same spec always yields a bit-identical raster.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .raster import Raster


class StimulusError(ValueError):
    """Raised for invalid stimulus specifications."""


@dataclass(frozen=True)
class CafeWallSpec:
    """Shifted brick wall: rows x cols tiles of side T, mortar thickness M.

    Mortar runs strictly between tile rows (none on the outer border).
    Odd rows are shifted right by `shift` pixels (default T/2).  The
    classic configuration has lum_dark < lum_mortar < lum_light; other
    orderings are accepted but off-spec.
    """

    rows: int
    cols: int
    tile: int
    mortar: int
    shift: float | None = None
    lum_dark: float = 0.0
    lum_light: float = 1.0
    lum_mortar: float = 0.5

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise StimulusError(f"tile counts must be positive, got {self.rows}x{self.cols}")
        if self.tile < 1:
            raise StimulusError(f"tile size must be >= 1, got {self.tile}")
        if not 0 <= self.mortar < self.tile:
            raise StimulusError(f"mortar must satisfy 0 <= M < T, got {self.mortar}")
        if self.shift is not None and not 0 <= self.shift < 2 * self.tile:
            raise StimulusError(f"shift must be in [0, 2T), got {self.shift}")

    @property
    def phase(self) -> int:
        return int(self.tile // 2 if self.shift is None else self.shift)

    @property
    def classic(self) -> bool:
        return self.lum_dark < self.lum_mortar < self.lum_light


# Corner labels for dot placement within a tile.
_CORNERS = ("tl", "tr", "bl", "br")

# Best reading of the published 1-3 dot figure: three dots on the dark
# tiles (both upper corners plus lower left), one dot on the light tiles
# (lower right); odd tile columns mirror left-right, giving the vertical
# symmetry between adjacent columns.  See docs/one_three_tilt_layout.md.
_ONE_THREE_DARK = ("tl", "tr", "bl")
_ONE_THREE_LIGHT = ("br",)
_MIRROR = {"tl": "tr", "tr": "tl", "bl": "br", "br": "bl"}


@dataclass(frozen=True)
class DotGridSpec:
    """Checkerboard with superimposed square dots.

    Dots sit at tile corners, inset `gap` pixels from the two adjacent
    tile borders, and take the opposite tile's luminance.  layout is
    'cross_bulge' (four dots on every dark tile), 'one_three_tilt'
    (three dots on dark tiles, one on light, mirrored across adjacent
    columns) or 'custom' with explicit (row, col, corner) placements.
    """

    n_rows: int
    n_cols: int
    tile: int
    dot: int
    gap: int
    layout: str = "cross_bulge"
    placements: tuple[tuple[int, int, str], ...] = field(default_factory=tuple)
    lum_dark: float = 0.0
    lum_light: float = 1.0

    def __post_init__(self) -> None:
        if self.n_rows < 1 or self.n_cols < 1:
            raise StimulusError(f"tile counts must be positive, got {self.n_rows}x{self.n_cols}")
        if self.tile < 1:
            raise StimulusError(f"tile size must be >= 1, got {self.tile}")
        if self.dot < 0 or self.gap < 0:
            raise StimulusError("dot and gap must be non-negative")
        if self.dot and self.dot + self.gap > self.tile / 2:
            raise StimulusError(
                f"corner placement needs dot + gap <= tile/2, got {self.dot} + {self.gap}"
            )
        if self.layout not in ("cross_bulge", "one_three_tilt", "custom"):
            raise StimulusError(f"unknown layout {self.layout!r}")
        for rc in self.placements:
            r, c, corner = rc
            if not (0 <= r < self.n_rows and 0 <= c < self.n_cols):
                raise StimulusError(f"placement {rc} outside the tile grid")
            if corner not in _CORNERS:
                raise StimulusError(f"unknown corner {corner!r}")


def cafe_wall(spec: CafeWallSpec) -> Raster:
    """Generate the brick-wall stimulus.

    Output is (cols*T) wide and (rows*T + (rows-1)*M) tall.  Within a
    row, tiles alternate dark/light starting dark at the row phase.
    """
    t, m = spec.tile, spec.mortar
    width = spec.cols * t
    height = spec.rows * t + (spec.rows - 1) * m
    out = np.full((height, width), spec.lum_mortar, dtype=np.float64)
    x = np.arange(width)
    for k in range(spec.rows):
        phase = (k % 2) * spec.phase
        parity = np.floor_divide(x - phase, t) % 2
        row = np.where(parity == 0, spec.lum_dark, spec.lum_light)
        y0 = k * (t + m)
        out[y0 : y0 + t, :] = row
    return Raster(out)


def _corner_origin(corner: str, tile: int, dot: int, gap: int) -> tuple[int, int]:
    x = gap if corner in ("tl", "bl") else tile - gap - dot
    y = gap if corner in ("tl", "tr") else tile - gap - dot
    return x, y


def _dot_plan(spec: DotGridSpec) -> list[tuple[int, int, str]]:
    """Expand the layout into explicit (row, col, corner) placements."""
    if spec.layout == "custom":
        return list(spec.placements)
    plan: list[tuple[int, int, str]] = []
    for r in range(spec.n_rows):
        for c in range(spec.n_cols):
            dark = (r + c) % 2 == 0
            if spec.layout == "cross_bulge":
                corners = _CORNERS if dark else ()
            else:  # one_three_tilt
                corners = _ONE_THREE_DARK if dark else _ONE_THREE_LIGHT
                if c % 2 == 1:
                    corners = tuple(_MIRROR[cn] for cn in corners)
            plan.extend((r, c, cn) for cn in corners)
    return plan


def dot_checkerboard(spec: DotGridSpec) -> Raster:
    """Generate a checkerboard with superimposed corner dots."""
    t = spec.tile
    out = np.empty((spec.n_rows * t, spec.n_cols * t), dtype=np.float64)
    for r in range(spec.n_rows):
        for c in range(spec.n_cols):
            dark = (r + c) % 2 == 0
            out[r * t : (r + 1) * t, c * t : (c + 1) * t] = (
                spec.lum_dark if dark else spec.lum_light
            )
    if spec.dot:
        for r, c, corner in _dot_plan(spec):
            dark = (r + c) % 2 == 0
            lum = spec.lum_light if dark else spec.lum_dark
            dx, dy = _corner_origin(corner, t, spec.dot, spec.gap)
            x0, y0 = c * t + dx, r * t + dy
            if dx < 0 or dy < 0 or dx + spec.dot > t or dy + spec.dot > t:
                raise StimulusError(f"dot at ({r}, {c}, {corner}) exceeds tile bounds")
            out[y0 : y0 + spec.dot, x0 : x0 + spec.dot] = lum
    return Raster(out)


def gap_variant(spec: DotGridSpec, gaps: list[int]) -> list[Raster]:
    """One raster per gap value, all other spec fields unchanged."""
    from dataclasses import replace

    return [dot_checkerboard(replace(spec, gap=g)) for g in gaps]
