"""Config-driven orchestration: stimulus/image -> edge maps -> tilt analysis.

A pipeline run is fully described by a PipelineConfig (usually loaded
from a YAML file, see docs/config.md).  Runs are deterministic: the
manifest, rasters and CSVs contain no timestamps, so re-running an
identical config reproduces them bit for bit.  Only the report carries
timing.  The manifest is written before any artifact and lists every
file the run writes.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, ValidationError

from . import stimuli
from .raster import CropRect, Raster, crop, read_image, write_raster, write_rgb_png
from .scalespace import (
    EdgeMap,
    ThresholdPolicy,
    binarize,
    emap_dog,
    emap_log,
    render_jetwhite,
    select_scales,
)
from .tiltanalysis import (
    AnalysisResult,
    HoughParams,
    TiltStats,
    run_analysis,
    write_segments_csv,
    write_stats_csv,
)


class ConfigError(ValueError):
    """Invalid pipeline configuration; the message names the field path."""


class PipelineError(RuntimeError):
    """Failure inside a pipeline stage; the message names the stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage}: {cause}")
        self.stage = stage
        self.cause = cause


# ---------------------------------------------------------------------------
# Config models


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CafeWallModel(_Model):
    kind: Literal["cafe_wall"] = "cafe_wall"
    rows: int
    cols: int
    tile: int
    mortar: int
    shift: Optional[float] = None
    lum_dark: float = 0.0
    lum_light: float = 1.0
    lum_mortar: float = 0.5


class DotGridModel(_Model):
    kind: Literal["dot_checkerboard"] = "dot_checkerboard"
    rows: int
    cols: int
    tile: int
    dot: int
    gap: int
    layout: Literal["cross_bulge", "one_three_tilt"] = "cross_bulge"
    lum_dark: float = 0.0
    lum_light: float = 1.0


class InputModel(_Model):
    stimulus: Optional[CafeWallModel | DotGridModel] = None
    image: Optional[str] = None


class CropModel(_Model):
    x0: int
    y0: int
    w: int
    h: int


class DogModel(_Model):
    scales: Optional[list[float]] = None
    feature_sizes: Optional[list[float]] = None
    grid_step: float = 0.5


class HoughModel(_Model):
    theta_res: float = 1.0
    rho_res: float = 1.0
    num_peaks: int = 100
    peak_floor: float = 0.3
    fill_gap: float = 5.0
    min_length: float = 50.0


class OutputsModel(_Model):
    rasters: bool = True
    binary: bool = False
    jet: bool = False
    csv: bool = True
    overlays: bool = False
    manifest: bool = True


class PipelineConfig(_Model):
    input: InputModel
    crop: Optional[CropModel] = None
    dog: DogModel
    s: float = 1.6
    h: float = 8.0
    log_enabled: bool = False
    threshold: Literal["sign", "mean_pos_neg"] = "sign"
    hough: HoughModel = HoughModel()
    outputs: OutputsModel = OutputsModel()
    out_dir: str = "out"


def _check_semantics(cfg: PipelineConfig) -> None:
    sources = [s for s in (cfg.input.stimulus, cfg.input.image) if s is not None]
    if len(sources) != 1:
        raise ConfigError("input: exactly one of input.stimulus or input.image is required")
    if not cfg.dog.scales and not cfg.dog.feature_sizes:
        raise ConfigError("dog.scales: no scales given and no feature list to derive them from")
    if cfg.dog.scales is not None and len(cfg.dog.scales) == 0:
        raise ConfigError("dog.scales: scale list must be non-empty")


def load_config(data: dict) -> PipelineConfig:
    """Build and validate a PipelineConfig from a plain mapping."""
    try:
        cfg = PipelineConfig(**data)
    except ValidationError as exc:
        first = exc.errors()[0]
        path = ".".join(str(p) for p in first["loc"])
        raise ConfigError(f"{path}: {first['msg']}") from exc
    _check_semantics(cfg)
    return cfg


def load_config_file(path: str | Path) -> PipelineConfig:
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    data = yaml.safe_load(raw)
    if not isinstance(data, dict):
        raise ConfigError("config: document must be a mapping")
    return load_config(data)


# ---------------------------------------------------------------------------
# Run report


@dataclass(frozen=True)
class RunReport:
    out_dir: str
    files: list[str]
    scales: list[float]
    stats: list[TiltStats]
    elapsed_s: float


def _fmt_scale(sc: float) -> str:
    return f"{sc:g}"


def _stem(cfg: PipelineConfig) -> str:
    if cfg.input.image:
        return Path(cfg.input.image).stem
    assert cfg.input.stimulus is not None
    return "cafewall" if cfg.input.stimulus.kind == "cafe_wall" else "dots"


def build_input(cfg: PipelineConfig) -> Raster:
    """Resolve the configured input source into a raster."""
    if cfg.input.image:
        r = read_image(cfg.input.image)
    else:
        stim = cfg.input.stimulus
        assert stim is not None
        if isinstance(stim, CafeWallModel):
            r = stimuli.cafe_wall(
                stimuli.CafeWallSpec(
                    rows=stim.rows,
                    cols=stim.cols,
                    tile=stim.tile,
                    mortar=stim.mortar,
                    shift=stim.shift,
                    lum_dark=stim.lum_dark,
                    lum_light=stim.lum_light,
                    lum_mortar=stim.lum_mortar,
                )
            )
        else:
            r = stimuli.dot_checkerboard(
                stimuli.DotGridSpec(
                    n_rows=stim.rows,
                    n_cols=stim.cols,
                    tile=stim.tile,
                    dot=stim.dot,
                    gap=stim.gap,
                    layout=stim.layout,
                    lum_dark=stim.lum_dark,
                    lum_light=stim.lum_light,
                )
            )
    if cfg.crop is not None:
        r = crop(r, CropRect(cfg.crop.x0, cfg.crop.y0, cfg.crop.w, cfg.crop.h))
    return r


def resolve_scales(cfg: PipelineConfig) -> list[float]:
    if cfg.dog.scales:
        return [float(s) for s in cfg.dog.scales]
    assert cfg.dog.feature_sizes
    return select_scales(cfg.dog.feature_sizes, cfg.s, cfg.dog.grid_step).scales


def _layer_files(stem: str, kind: str, scales: list[float], out: OutputsModel) -> list[str]:
    files: list[str] = []
    for sc in scales:
        base = f"{stem}_{kind}_s{_fmt_scale(sc)}"
        if out.rasters:
            files.append(f"{base}.pgm")
        if out.binary:
            files.append(f"{base}_bin.pgm")
        if out.jet:
            files.append(f"{base}_jet.png")
    return files


def _planned_files(cfg: PipelineConfig, stem: str, scales: list[float]) -> list[str]:
    files: list[str] = []
    if cfg.outputs.manifest:
        files.append("manifest.yaml")
    files += _layer_files(stem, "dog", scales, cfg.outputs)
    if cfg.log_enabled:
        files += _layer_files(stem, "log", scales[:-1], cfg.outputs)
    if cfg.outputs.csv:
        files.append(f"{stem}_tilt_dog.csv")
        files.append(f"{stem}_segments_dog.csv")
        if cfg.log_enabled:
            files.append(f"{stem}_tilt_log.csv")
            files.append(f"{stem}_segments_log.csv")
    if cfg.outputs.overlays:
        for sc in scales:
            files.append(f"{stem}_dog_s{_fmt_scale(sc)}_overlay.png")
        if cfg.log_enabled:
            for sc in scales[:-1]:
                files.append(f"{stem}_log_s{_fmt_scale(sc)}_overlay.png")
    files.append("report.json")
    return files


def _write_manifest(path: Path, cfg: PipelineConfig, scales: list[float], files: list[str]) -> None:
    doc = {
        "params": {
            "s": cfg.s,
            "h": cfg.h,
            "threshold": cfg.threshold,
            "log_enabled": cfg.log_enabled,
            "hough": cfg.hough.model_dump(),
        },
        "scales": scales,
        "files": files,
    }
    path.write_text(yaml.safe_dump(doc, sort_keys=True))


def _write_layers(
    emap: EdgeMap, stem: str, kind: str, out_dir: Path, out: OutputsModel, policy: ThresholdPolicy
) -> None:
    for layer in emap.layers:
        base = f"{stem}_{kind}_s{_fmt_scale(layer.scale)}"
        if out.rasters:
            write_raster(layer.response, out_dir / f"{base}.pgm", mode="signed_symmetric")
        if out.binary:
            binary = binarize(layer.response, ThresholdPolicy("sign"))
            write_raster(binary, out_dir / f"{base}_bin.pgm", mode="linear_unit")
        if out.jet:
            write_rgb_png(render_jetwhite(layer.response), out_dir / f"{base}_jet.png")


def _write_analysis(
    result: AnalysisResult, stem: str, kind: str, out_dir: Path, out: OutputsModel
) -> None:
    if out.csv:
        write_stats_csv(result.stats, out_dir / f"{stem}_tilt_{kind}.csv")
        write_segments_csv(result.segments, out_dir / f"{stem}_segments_{kind}.csv")
    if out.overlays:
        for sc, rgb in result.overlays.items():
            write_rgb_png(rgb, out_dir / f"{stem}_{kind}_s{_fmt_scale(sc)}_overlay.png")


def run_pipeline(cfg: PipelineConfig) -> RunReport:
    """Execute the full pipeline for one validated config."""
    t0 = time.monotonic()
    _check_semantics(cfg)
    stem = _stem(cfg)

    try:
        source = build_input(cfg)
    except Exception as exc:
        raise PipelineError("input", exc) from exc

    try:
        scales = resolve_scales(cfg)
        dog = emap_dog(source, scales, s=cfg.s, h=cfg.h)
        log = emap_log(dog) if cfg.log_enabled else None
    except Exception as exc:
        raise PipelineError("model", exc) from exc

    policy = ThresholdPolicy(cfg.threshold)
    hp = HoughParams(**cfg.hough.model_dump())
    try:
        dog_result = run_analysis(dog, hp, policy, make_overlays=cfg.outputs.overlays)
        log_result = (
            run_analysis(log, hp, policy, make_overlays=cfg.outputs.overlays)
            if log is not None
            else None
        )
    except Exception as exc:
        raise PipelineError("analysis", exc) from exc

    out_dir = Path(cfg.out_dir)
    files = _planned_files(cfg, stem, scales)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if cfg.outputs.manifest:
            _write_manifest(out_dir / "manifest.yaml", cfg, scales, files)
        _write_layers(dog, stem, "dog", out_dir, cfg.outputs, policy)
        if log is not None:
            _write_layers(log, stem, "log", out_dir, cfg.outputs, policy)
        _write_analysis(dog_result, stem, "dog", out_dir, cfg.outputs)
        if log_result is not None:
            _write_analysis(log_result, stem, "log", out_dir, cfg.outputs)
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError("output", exc) from exc

    elapsed = time.monotonic() - t0
    report = RunReport(
        out_dir=str(out_dir),
        files=files,
        scales=scales,
        stats=dog_result.stats + (log_result.stats if log_result else []),
        elapsed_s=elapsed,
    )
    try:
        (out_dir / "report.json").write_text(
            json.dumps(
                {
                    "out_dir": report.out_dir,
                    "files": report.files,
                    "scales": report.scales,
                    "stats": [vars(st) for st in report.stats],
                    "elapsed_s": report.elapsed_s,
                },
                indent=2,
            )
        )
    except OSError as exc:
        raise PipelineError("output", exc) from exc
    return report
