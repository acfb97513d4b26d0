"""Command-line front end.

Subcommands: generate (cafewall | dots), edgemap, analyze, pipeline,
render.  Exit codes: 0 success, 1 configuration/usage error, 2 I/O
error.  Defaults follow the model's standard settings (s=1.6, h=8).
"""
from __future__ import annotations

import sys
from pathlib import Path

import click
import yaml

from .pipeline import ConfigError, PipelineError, load_config_file, run_pipeline
from .raster import Raster, RasterError, read_image, write_raster, write_rgb_png
from .scalespace import (
    ScaleSpaceError,
    ThresholdPolicy,
    binarize,
    emap_dog,
    emap_log,
    render_jetwhite,
)
from .stimuli import CafeWallSpec, DotGridSpec, StimulusError, cafe_wall, dot_checkerboard
from .tiltanalysis import (
    AnalysisError,
    HoughParams,
    run_analysis,
    write_segments_csv,
    write_stats_csv,
)
from .scalespace import EdgeMap, EdgeLayer


def _parse_scales(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"scales: {exc}") from exc


@click.group()
def cli() -> None:
    """Tile-illusion stimulus generation, multiscale edge maps and tilt analysis."""


@cli.group()
def generate() -> None:
    """Generate procedural stimuli."""


@generate.command()
@click.option("--rows", type=int, required=True, help="Tile rows.")
@click.option("--cols", type=int, required=True, help="Tile columns.")
@click.option("--tile", type=int, required=True, help="Tile side in pixels.")
@click.option("--mortar", type=int, default=0, show_default=True, help="Mortar thickness in pixels.")
@click.option("--shift", type=float, default=None, help="Odd-row phase shift in pixels [default: tile/2].")
@click.option("--out", "out_path", type=click.Path(), required=True, help="Output raster path (.pgm/.png).")
def cafewall(rows: int, cols: int, tile: int, mortar: int, shift: float | None, out_path: str) -> None:
    """Shifted brick wall with mortar lines between rows."""
    spec = CafeWallSpec(rows=rows, cols=cols, tile=tile, mortar=mortar, shift=shift)
    write_raster(cafe_wall(spec), out_path, mode="linear_unit")
    click.echo(f"wrote {out_path}")


@generate.command()
@click.option("--rows", type=int, required=True)
@click.option("--cols", type=int, required=True)
@click.option("--tile", type=int, required=True)
@click.option("--dot", type=int, required=True, help="Dot side in pixels.")
@click.option("--gap", type=int, default=5, show_default=True, help="Dot inset from tile borders.")
@click.option(
    "--layout",
    type=click.Choice(["cross_bulge", "one_three_tilt"]),
    default="cross_bulge",
    show_default=True,
)
@click.option("--out", "out_path", type=click.Path(), required=True)
def dots(rows: int, cols: int, tile: int, dot: int, gap: int, layout: str, out_path: str) -> None:
    """Checkerboard with superimposed corner dots."""
    spec = DotGridSpec(n_rows=rows, n_cols=cols, tile=tile, dot=dot, gap=gap, layout=layout)
    write_raster(dot_checkerboard(spec), out_path, mode="linear_unit")
    click.echo(f"wrote {out_path}")


@cli.command()
@click.option("--in", "in_path", type=click.Path(), required=True, help="Input image (PGM/PPM/PNG).")
@click.option("--scales", required=True, help="Comma-separated center sigmas, e.g. 1,2,3,4.")
@click.option("--s", type=float, default=1.6, show_default=True, help="Surround ratio.")
@click.option("--h", type=float, default=8.0, show_default=True, help="Window ratio.")
@click.option("--log/--no-log", "log_enabled", default=False, show_default=True, help="Also emit consecutive-scale difference layers.")
@click.option("--out-dir", type=click.Path(), required=True)
def edgemap(in_path: str, scales: str, s: float, h: float, log_enabled: bool, out_dir: str) -> None:
    """Compute the multiscale edge map of an image and write one file per layer."""
    r = read_image(in_path)
    scale_list = _parse_scales(scales)
    dog = emap_dog(r, scale_list, s=s, h=h)
    maps = [("dog", dog)]
    if log_enabled:
        maps.append(("log", emap_log(dog)))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(in_path).stem
    files = []
    for kind, emap in maps:
        for layer in emap.layers:
            name = f"{stem}_{kind}_s{layer.scale:g}.pgm"
            write_raster(layer.response, out / name, mode="signed_symmetric")
            files.append(name)
    manifest = {
        "params": {"s": s, "h": h, "log_enabled": log_enabled},
        "scales": scale_list,
        "stem": stem,
        "files": files,
    }
    (out / "manifest.yaml").write_text(yaml.safe_dump(manifest, sort_keys=True))
    click.echo(f"wrote {len(files)} layers + manifest to {out_dir}")


@cli.command()
@click.option("--in-dir", type=click.Path(), required=True, help="Edge-map directory holding manifest.yaml.")
@click.option("--fillgap", type=float, default=5.0, show_default=True)
@click.option("--minlen", type=float, default=50.0, show_default=True)
@click.option("--threshold", type=click.Choice(["sign", "mean_pos_neg"]), default="sign", show_default=True)
@click.option("--csv", "csv_path", type=click.Path(), required=True, help="Tilt statistics CSV output.")
@click.option("--segments-csv", type=click.Path(), default=None, help="Optional per-segment CSV output.")
def analyze(in_dir: str, fillgap: float, minlen: float, threshold: str, csv_path: str, segments_csv: str | None) -> None:
    """Hough/tilt analysis of a previously written edge map."""
    mpath = Path(in_dir) / "manifest.yaml"
    if not mpath.exists():
        raise ConfigError(f"in-dir: no manifest.yaml in {in_dir}")
    manifest = yaml.safe_load(mpath.read_text())
    stem = manifest.get("stem", "")
    scales = manifest["scales"]
    # Written layers are signed_symmetric quantized: recover the sign map
    # relative to the mid-gray zero level.
    layers = []
    for sc in scales:
        path = Path(in_dir) / f"{stem}_dog_s{sc:g}.pgm"
        signed = Raster(read_image(path).data - 127.5 / 255.0)
        layers.append(EdgeLayer(scale=float(sc), response=signed))
    emap = EdgeMap(
        kind="dog",
        layers=tuple(layers),
        s=manifest["params"]["s"],
        h=manifest["params"]["h"],
    )
    hp = HoughParams(fill_gap=fillgap, min_length=minlen)
    result = run_analysis(emap, hp, ThresholdPolicy(threshold))
    write_stats_csv(result.stats, csv_path)
    if segments_csv:
        write_segments_csv(result.segments, segments_csv)
    click.echo(f"wrote {csv_path} ({len(result.stats)} rows)")


@cli.command()
@click.option("--config", "config_path", type=click.Path(), required=True, help="YAML pipeline config (docs/config.md).")
@click.option("--out-dir", type=click.Path(), default=None, help="Override out_dir from the config.")
@click.option("--s", type=float, default=None, help="Override surround ratio.")
@click.option("--h", type=float, default=None, help="Override window ratio.")
@click.option("--scales", default=None, help="Override scale list, comma-separated.")
def pipeline(config_path: str, out_dir: str | None, s: float | None, h: float | None, scales: str | None) -> None:
    """Run the full generate/edge-map/analysis pipeline from a config file."""
    cfg = load_config_file(config_path)
    updates: dict = {}
    if out_dir is not None:
        updates["out_dir"] = out_dir
    if s is not None:
        updates["s"] = s
    if h is not None:
        updates["h"] = h
    if scales is not None:
        updates["dog"] = cfg.dog.model_copy(update={"scales": _parse_scales(scales), "feature_sizes": None})
    if updates:
        cfg = cfg.model_copy(update=updates)
    report = run_pipeline(cfg)
    click.echo(f"wrote {len(report.files)} files to {report.out_dir} in {report.elapsed_s:.2f}s")
    for st in report.stats:
        click.echo(
            f"  scale {st.scale_tag:g} bin {st.bin}: n={st.n} "
            f"mean_dev={st.mean_dev:.3f} std={st.std_dev:.3f}"
        )


@cli.command()
@click.option("--in", "in_path", type=click.Path(), required=True)
@click.option(
    "--mode",
    type=click.Choice(["jet", "signed", "bin"]),
    default="jet",
    show_default=True,
    help="jet: diverging false color; signed: mid-gray-centered grayscale; bin: sign-binarized.",
)
@click.option("--out", "out_path", type=click.Path(), required=True)
def render(in_path: str, mode: str, out_path: str) -> None:
    """Re-render a raster file for display."""
    r = read_image(in_path)
    signed = Raster(r.data - 127.5 / 255.0)
    if mode == "jet":
        write_rgb_png(render_jetwhite(signed), out_path)
    elif mode == "signed":
        write_raster(signed, out_path, mode="signed_symmetric")
    else:
        write_raster(binarize(signed, ThresholdPolicy("sign")), out_path, mode="linear_unit")
    click.echo(f"wrote {out_path}")


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        click.echo(exc.format_message(), err=True)
        if exc.ctx is not None:
            click.echo(exc.ctx.get_usage(), err=True)
        return 1
    except (ConfigError, StimulusError, ScaleSpaceError, AnalysisError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except PipelineError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1 if not isinstance(exc.cause, OSError) else 2
    except (RasterError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
