"""End-to-end acceptance checks for the shipped model.

Each test prints one PASS/FAIL line so the suite output doubles as an
acceptance report.  Tolerances are part of the contract and must not be
loosened.
"""
import hashlib
import time
from pathlib import Path

import numpy as np
import pytest

from viscrf.kernels import DoGParams, dog_kernel, log_kernel, window_size
from viscrf.pipeline import load_config, run_pipeline
from viscrf.raster import Raster, rotate90
from viscrf.scalespace import (
    convolve,
    dog_response,
    emap_dog,
    emap_log,
    select_scales,
)
from viscrf.stimuli import CafeWallSpec, DotGridSpec, cafe_wall, dot_checkerboard
from viscrf.tiltanalysis import HoughParams, bin_orientation, run_analysis

SWEEP_S = (1.4, 1.6, 2.0, 2.6, 2.8, 5.0)
SWEEP_SIGMA = (4, 8, 12)
SWEEP_H = (2, 4, 6, 8, 10, 12)


REPORT_LINES: list[str] = []


def report(num, ok, detail):
    line = f"ACCEPTANCE {num:2d}: {'PASS' if ok else 'FAIL'} — {detail}"
    print(line)
    REPORT_LINES.append(line)
    assert ok, line


def test_01_kernel_zero_sum():
    t0 = time.monotonic()
    worst = 0.0
    for s in SWEEP_S:
        for sc in SWEEP_SIGMA:
            for h in SWEEP_H:
                total = abs(dog_kernel(DoGParams(sigma_c=sc, s=s, h=h)).weights.sum())
                worst = max(worst, total)
    elapsed = time.monotonic() - t0
    ok = worst <= 1e-12 and elapsed < 5.0
    report(1, ok, f"zero-sum sweep: worst |sum|={worst:.3e} (≤1e-12), {elapsed:.2f}s (<5s)")


def test_02_path_equivalence():
    t0 = time.monotonic()
    rng = np.random.default_rng(42)
    rasters = [Raster(rng.random((64, 64))) for _ in range(10)]
    worst = 0.0
    for s in SWEEP_S:
        for sc in SWEEP_SIGMA:
            for h in SWEEP_H:
                p = DoGParams(sigma_c=sc, s=s, h=h)
                for r in rasters:
                    a = dog_response(r, p, "direct").data
                    b = dog_response(r, p, "blur_diff").data
                    worst = max(worst, float(np.abs(a - b).max()))
    elapsed = time.monotonic() - t0
    ok = worst <= 1e-9 and elapsed < 30.0
    report(2, ok, f"direct vs blur_diff: worst diff={worst:.3e} (≤1e-9), {elapsed:.1f}s (<30s)")


def test_03_log_limit():
    rng = np.random.default_rng(7)
    img = Raster(rng.random((128, 128)))
    layer = emap_log(emap_dog(img, [1.00, 1.25], s=1.6, h=8.0)).layers[0].response.data
    lk = log_kernel(1.12, window_size(1.12, 8.0))
    oracle = convolve(img, lk).data
    a, b = layer.ravel(), oracle.ravel()
    cos = abs(float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))))
    ok = cos >= 0.99
    report(3, ok, f"consecutive-scale difference vs analytic operator: |cos|={cos:.4f} (≥0.99)")


def test_04_brightness_invariance():
    worst = 0.0
    for level in (0.0, 0.5, 1.0):
        r = Raster(np.full((48, 48), level))
        dog = emap_dog(r, [1.0, 2.0, 4.0], s=1.6, h=8.0)
        log = emap_log(dog)
        for em in (dog, log):
            for lay in em.layers:
                worst = max(worst, float(np.abs(lay.response.data).max()))
    ok = worst <= 1e-9
    report(4, ok, f"constant inputs: worst |response|={worst:.3e} (≤1e-9)")


def test_05_rotation_equivariance():
    rng = np.random.default_rng(11)
    r = Raster(rng.random((57, 43)))
    scales = [1.5, 3.0]
    em = emap_dog(r, scales, s=1.6, h=8.0)
    em_rot = emap_dog(rotate90(r), scales, s=1.6, h=8.0)
    band = max(window_size(sc, 8.0) for sc in scales) // 2
    exact_ok, inner_worst = True, 0.0
    for lay, lay_rot in zip(em.layers, em_rot.layers):
        a = np.rot90(lay.response.data)
        b = lay_rot.response.data
        interior = np.zeros(a.shape, dtype=bool)
        interior[band:-band, band:-band] = True
        exact_ok &= bool(np.array_equal(a[interior], b[interior]))
        inner_worst = max(inner_worst, float(np.abs(a - b).max()))
    ok = exact_ok and inner_worst <= 1e-9
    report(
        5,
        ok,
        f"rotate90 commutes: interior bit-exact={exact_ok}, "
        f"global worst diff={inner_worst:.3e} (≤1e-9)",
    )


def test_06_mortar_cue_disappearance():
    t0 = time.monotonic()
    wall = cafe_wall(CafeWallSpec(rows=3, cols=3, tile=200, mortar=8))
    em = emap_dog(wall, [8.0, 28.0], s=2.0, h=8.0)
    res = run_analysis(em, HoughParams(fill_gap=5.0, min_length=200.0))
    fine = [
        s for s in res.segments if s.scale_tag == 8.0 and bin_orientation(s.angle) == "H"
    ]
    coarse = [
        s for s in res.segments if s.scale_tag == 28.0 and bin_orientation(s.angle) == "H"
    ]
    mortar_centers = [200.0 + 8 / 2 + k * 208.0 for k in range(2)]
    per_row = [
        any(abs((s.y1 + s.y2) / 2 - c) < 104 for s in fine) for c in mortar_centers
    ]
    elapsed = time.monotonic() - t0
    ok = all(per_row) and len(coarse) == 0 and elapsed < 120.0
    report(
        6,
        ok,
        f"mortar rows covered at σc=8: {per_row}, H segments ≥200px at σc=28: "
        f"{len(coarse)} (=0), {elapsed:.1f}s (<120s)",
    )


def test_07_alternating_tilt():
    wall = cafe_wall(CafeWallSpec(rows=3, cols=9, tile=50, mortar=2))
    em = emap_dog(wall, [2.0], s=2.0, h=8.0)
    res = run_analysis(em, HoughParams(fill_gap=5.0, min_length=50.0))
    hsegs = [s for s in res.segments if bin_orientation(s.angle) == "H"]
    devs = np.array([((s.angle + 90.0) % 180.0) - 90.0 for s in hsegs])
    mean_abs = float(np.abs(devs).mean())
    mortar_centers = np.array([51.0, 103.0])
    groups = {0: [], 1: []}
    for s, d in zip(hsegs, devs):
        yc = (s.y1 + s.y2) / 2
        groups[int(np.argmin(np.abs(mortar_centers - yc)))].append(d)
    row_means = [float(np.mean(groups[k])) for k in (0, 1)]
    alternating = row_means[0] * row_means[1] < 0
    ok = 1.0 <= mean_abs <= 15.0 and alternating
    report(
        7,
        ok,
        f"H-bin mean |dev|={mean_abs:.2f}° (∈[1,15]), per-mortar-row mean devs "
        f"{row_means[0]:+.2f}°/{row_means[1]:+.2f}° (opposite signs)",
    )


def test_08_scale_selection_arithmetic():
    raw = select_scales([20, 100, 1], s=1.6, grid_step=0.5).raw
    ok = raw == [6.25, 31.25, 0.3125]
    report(8, ok, f"raw scales for features (20,100,1) at s=1.6: {raw} (exact)")


def test_09_stimulus_audits():
    wall_spec = CafeWallSpec(rows=3, cols=9, tile=50, mortar=2)
    wall = cafe_wall(wall_spec)
    dims_ok = (wall.width, wall.height) == (450, 154)
    mortar_ok = int(np.count_nonzero(wall.data == 0.5)) == 2 * 2 * 450

    grid_spec = DotGridSpec(n_rows=9, n_cols=9, tile=100, dot=20, gap=5)
    grid = dot_checkerboard(grid_spec)
    grid_dims_ok = (grid.width, grid.height) == (900, 900)
    tiles_ok = True
    for tr in range(9):
        for tc in range(9):
            if (tr + tc) % 2 == 0:
                tile = grid.data[tr * 100 : (tr + 1) * 100, tc * 100 : (tc + 1) * 100]
                tiles_ok &= int(np.count_nonzero(tile == 1.0)) == 1600
    ok = dims_ok and mortar_ok and grid_dims_ok and tiles_ok
    report(
        9,
        ok,
        f"wall 450×154={dims_ok}, mortar count={mortar_ok}, grid 900×900={grid_dims_ok}, "
        f"1600 dot px per dark tile={tiles_ok}",
    )


def test_10_determinism(tmp_path):
    def run(tag):
        cfg = load_config(
            {
                "input": {
                    "stimulus": {
                        "kind": "cafe_wall",
                        "rows": 3,
                        "cols": 9,
                        "tile": 50,
                        "mortar": 2,
                    }
                },
                "dog": {"scales": [1, 2, 4]},
                "s": 2.0,
                "hough": {"fill_gap": 5, "min_length": 50},
                "outputs": {"rasters": True, "binary": True, "csv": True, "manifest": True},
                "out_dir": str(tmp_path / tag),
            }
        )
        run_pipeline(cfg)
        digests = {}
        for p in sorted((tmp_path / tag).rglob("*")):
            if p.is_file() and p.suffix in (".pgm", ".csv", ".yaml"):
                digests[p.name] = hashlib.sha256(p.read_bytes()).hexdigest()
        return digests

    da, db = run("a"), run("b")
    ok = da == db and len(da) >= 6
    report(10, ok, f"repeat runs: {len(da)} raster/CSV files, trees identical={da == db}")
