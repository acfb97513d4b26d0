"""Core 2D grayscale raster type and file I/O.

Rasters are immutable value objects holding row-major float64 samples in
(y, x) order with x growing rightwards and y growing downwards.  File
support covers portable graymaps (P2 ASCII, P5 binary, maxval 255),
portable pixmaps (P3/P6, converted to luminance) and 8-bit PNG.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Fixed RGB -> luminance weights (ITU-R BT.601).
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class RasterError(ValueError):
    """Raised for malformed rasters or unreadable/unsupported image files."""


@dataclass(frozen=True)
class Raster:
    """Immutable 2D grayscale field of real-valued samples."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise RasterError(f"raster data must be 2D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise RasterError(f"raster dimensions must be >= 1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise RasterError("raster contains non-finite samples")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def sample(self, x: int, y: int) -> float:
        return float(self.data[y, x])


@dataclass(frozen=True)
class CropRect:
    """Axis-aligned crop window: offset (x0, y0), size w x h."""

    x0: int
    y0: int
    w: int
    h: int

    def __post_init__(self) -> None:
        if self.x0 < 0 or self.y0 < 0:
            raise RasterError(f"crop offset must be non-negative, got ({self.x0}, {self.y0})")
        if self.w < 1 or self.h < 1:
            raise RasterError(f"crop size must be positive, got {self.w}x{self.h}")


def crop(r: Raster, rect: CropRect) -> Raster:
    """Return the w x h sub-raster at (x0, y0); the source is left untouched."""
    if rect.x0 + rect.w > r.width or rect.y0 + rect.h > r.height:
        raise RasterError(
            f"crop {rect} exceeds raster bounds {r.width}x{r.height}"
        )
    return Raster(r.data[rect.y0 : rect.y0 + rect.h, rect.x0 : rect.x0 + rect.w])


def rotate90(r: Raster) -> Raster:
    """Rotate 90 degrees counterclockwise (numpy rot90 convention).

    Output dimensions are swapped and four applications restore the input
    bit-exactly.
    """
    return Raster(np.rot90(r.data))


# ---------------------------------------------------------------------------
# File I/O


def _read_pnm(raw: bytes) -> np.ndarray:
    """Parse P2/P3/P5/P6 into a float64 array scaled to [0, 1]."""
    if len(raw) < 2 or raw[:1] != b"P":
        raise RasterError("not a PNM file")
    magic = raw[:2].decode("ascii", errors="replace")
    if magic not in ("P2", "P3", "P5", "P6"):
        raise RasterError(f"unsupported PNM magic {magic!r}")

    # Header tokens may be separated by arbitrary whitespace and '#' comments.
    pos = 2
    tokens: list[int] = []
    while len(tokens) < 3:
        m = re.compile(rb"\s*(#[^\n]*\n)*\s*(\d+)").match(raw, pos)
        if m is None:
            raise RasterError("truncated PNM header")
        tokens.append(int(m.group(2)))
        pos = m.end()
    width, height, maxval = tokens
    if width < 1 or height < 1:
        raise RasterError(f"zero-dimension image {width}x{height}")
    if maxval != 255:
        raise RasterError(f"only maxval 255 is supported, got {maxval}")

    channels = 3 if magic in ("P3", "P6") else 1
    count = width * height * channels
    if magic in ("P5", "P6"):
        # Exactly one whitespace byte separates the header from the raster.
        pos += 1
        body = raw[pos : pos + count]
        if len(body) != count:
            raise RasterError("truncated PNM pixel data")
        values = np.frombuffer(body, dtype=np.uint8).astype(np.float64)
    else:
        fields = raw[pos:].split()
        if len(fields) < count:
            raise RasterError("truncated PNM pixel data")
        values = np.array([int(f) for f in fields[:count]], dtype=np.float64)
        if values.min() < 0 or values.max() > maxval:
            raise RasterError("PNM sample out of range")

    values /= maxval
    if channels == 3:
        rgb = values.reshape(height, width, 3)
        values = (
            LUMA_WEIGHTS[0] * rgb[:, :, 0]
            + LUMA_WEIGHTS[1] * rgb[:, :, 1]
            + LUMA_WEIGHTS[2] * rgb[:, :, 2]
        )
    return values.reshape(height, width)


def read_image(path: str | Path) -> Raster:
    """Read a grayscale raster from PGM/PPM (maxval 255) or 8-bit PNG.

    Samples are scaled to [0, 1]; RGB inputs are converted to luminance
    with the fixed BT.601 weights.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise RasterError(f"cannot read {path}: {exc}") from exc

    if raw[:1] == b"P":
        return Raster(_read_pnm(raw))
    if raw[:8] == b"\x89PNG\r\n\x1a\n":
        from PIL import Image

        with Image.open(path) as img:
            if img.mode in ("RGB", "RGBA"):
                img = img.convert("RGB")
                arr = np.asarray(img, dtype=np.float64) / 255.0
                data = (
                    LUMA_WEIGHTS[0] * arr[:, :, 0]
                    + LUMA_WEIGHTS[1] * arr[:, :, 1]
                    + LUMA_WEIGHTS[2] * arr[:, :, 2]
                )
            elif img.mode in ("L", "1", "I;16", "P"):
                data = np.asarray(img.convert("L"), dtype=np.float64) / 255.0
            else:
                raise RasterError(f"unsupported PNG mode {img.mode}")
        if data.size == 0:
            raise RasterError("zero-dimension image")
        return Raster(data)
    raise RasterError(f"unsupported image format in {path}")


def _quantize(samples: np.ndarray, mode: str) -> np.ndarray:
    if mode == "linear_unit":
        if samples.min() < 0.0 or samples.max() > 1.0:
            raise RasterError("linear_unit mode requires samples in [0, 1]")
        scaled = samples * 255.0
    elif mode == "signed_symmetric":
        # [-A, +A] maps onto [0, 255] with 0 at mid-gray.
        amp = float(np.max(np.abs(samples)))
        if amp == 0.0:
            scaled = np.full_like(samples, 127.5)
        else:
            scaled = (samples / amp) * 127.5 + 127.5
    else:
        raise RasterError(f"unknown write mode {mode!r}")
    # Round half up.
    return np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)


def write_raster(r: Raster, path: str | Path, mode: str = "linear_unit") -> None:
    """Write a raster as P5 PGM (or 8-bit grayscale PNG for .png paths).

    mode 'linear_unit' expects samples in [0, 1]; 'signed_symmetric' maps
    [-A, +A] (A = max |sample|) onto [0, 255] with zero at mid-gray,
    rounded half up.
    """
    path = Path(path)
    pixels = _quantize(r.data, mode)
    if path.suffix.lower() == ".png":
        from PIL import Image

        Image.fromarray(pixels, mode="L").save(path)
        return
    header = f"P5\n{r.width} {r.height}\n255\n".encode("ascii")
    try:
        path.write_bytes(header + pixels.tobytes())
    except OSError as exc:
        raise RasterError(f"cannot write {path}: {exc}") from exc


def write_rgb_png(rgb: np.ndarray, path: str | Path) -> None:
    """Write an (H, W, 3) uint8 array as a PNG file."""
    from PIL import Image

    if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.dtype != np.uint8:
        raise RasterError("expected (H, W, 3) uint8 RGB data")
    Image.fromarray(rgb, mode="RGB").save(Path(path))
