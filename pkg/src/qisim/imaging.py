"""Raster-scan imaging of a reflectivity scene.

The beam stays fixed and the target moves; one acquisition per pixel
builds the image. Singles and coincidences come from the same simulated
acquisition per pixel, so the classical (CI) and pair-correlated (QI)
images are noise-correlated exactly as when both statistics are recorded
simultaneously. The background stays on for every pixel.

Scenes load from plain-text portable graymaps (PGM P2) with reflectivity
gray/maxval; images export to PGM P2 rescaled to maxval 65535 plus a raw
CSV of unscaled counts.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .model import ExperimentConfig, validate_config
from .rng import PIXEL_SPACE, substream


class ImageKind(enum.Enum):
    CI = "CI"
    QI = "QI"


@dataclass
class Scene:
    """Reflectivity map in [0, 1]; pixel pitch is in arbitrary units."""

    grid: np.ndarray
    pixel_pitch: float = 1.0

    def __post_init__(self) -> None:
        self.grid = np.asarray(self.grid, dtype=np.float64)
        if self.grid.ndim != 2 or min(self.grid.shape) < 1:
            raise ValueError("scene grid must be a 2-D array")
        if np.any(self.grid < 0) or np.any(self.grid > 1):
            raise ValueError("scene reflectivity must lie in [0, 1]")


@dataclass
class PixelImage:
    grid: np.ndarray  # counts (or rates), non-negative
    dwell_pulses: int
    kind: ImageKind

    def __post_init__(self) -> None:
        self.grid = np.asarray(self.grid, dtype=np.float64)
        if self.grid.ndim != 2:
            raise ValueError("image grid must be a 2-D array")
        if np.any(self.grid < 0):
            raise ValueError("image values must be non-negative")


def two_level_scene(
    height: int, width: int, fg_level: float = 1.0, bg_level: float = 0.0
) -> tuple[Scene, np.ndarray]:
    """Centered bright block on a dark field; returns (scene, foreground mask)."""
    grid = np.full((height, width), bg_level, dtype=np.float64)
    r0, r1 = height // 4, height - height // 4
    c0, c1 = width // 4, width - width // 4
    grid[r0:r1, c0:c1] = fg_level
    mask = np.zeros((height, width), dtype=bool)
    mask[r0:r1, c0:c1] = True
    return Scene(grid), mask


def raster_scan(
    scene: Scene,
    config: ExperimentConfig,
    dwell_pulses: int,
    rng: Optional[np.random.Generator] = None,
    max_workers: int = 1,
) -> tuple[PixelImage, PixelImage]:
    """Acquire CI (singles) and QI (coincidence) images of the scene.

    Each pixel is an independent acquisition on its own substream keyed by
    (seed, row, col), so the scan parallelizes and reproduces exactly. If
    an explicit generator is passed, per-pixel streams are spawned from it
    in row-major order instead.
    """
    from .channel import simulate_counts

    validate_config(config)
    if dwell_pulses < 1:
        raise ValueError("dwell_pulses must be at least 1")
    h, w = scene.grid.shape
    pixel_rngs = None
    if rng is not None:
        pixel_rngs = rng.spawn(h * w)

    def pixel_counts(r: int, c: int):
        cfg = replace(
            config,
            channel=replace(config.channel, target_reflectivity=float(scene.grid[r, c])),
        )
        gen = (
            pixel_rngs[r * w + c]
            if pixel_rngs is not None
            else substream(config.seed, PIXEL_SPACE, r, c)
        )
        return simulate_counts(cfg, True, dwell_pulses, gen)

    ci = np.zeros((h, w), dtype=np.float64)
    qi = np.zeros((h, w), dtype=np.float64)
    if max_workers > 1 and pixel_rngs is None:
        from concurrent.futures import ProcessPoolExecutor

        coords = [(r, c) for r in range(h) for c in range(w)]
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            results = pool.map(
                _pixel_star, [(config, float(scene.grid[r, c]), dwell_pulses, r, c) for r, c in coords]
            )
        for (r, c), (n_sig, n_coinc) in zip(coords, results):
            ci[r, c] = n_sig
            qi[r, c] = n_coinc
    else:
        for r in range(h):
            for c in range(w):
                counts = pixel_counts(r, c)
                ci[r, c] = counts.n_signal_clicks
                qi[r, c] = counts.n_coincidences
    return (
        PixelImage(ci, dwell_pulses, ImageKind.CI),
        PixelImage(qi, dwell_pulses, ImageKind.QI),
    )


def _pixel_star(args) -> tuple[int, int]:
    from .channel import simulate_counts

    config, reflectivity, dwell_pulses, r, c = args
    cfg = replace(config, channel=replace(config.channel, target_reflectivity=reflectivity))
    counts = simulate_counts(cfg, True, dwell_pulses, substream(config.seed, PIXEL_SPACE, r, c))
    return counts.n_signal_clicks, counts.n_coincidences


def interpolate4(image: PixelImage) -> PixelImage:
    """Bilinear 2x upsampling used to smooth the pixelated scans.

    Output is (2H-1) x (2W-1): original samples sit at even indices,
    inserted samples average their 2 (edge) or 4 (face) nearest originals.
    """
    g = image.grid
    h, w = g.shape
    if h < 2 or w < 2:
        raise ValueError("image too small to interpolate")
    out = np.zeros((2 * h - 1, 2 * w - 1), dtype=np.float64)
    out[::2, ::2] = g
    out[::2, 1::2] = 0.5 * (g[:, :-1] + g[:, 1:])
    out[1::2, ::2] = 0.5 * (g[:-1, :] + g[1:, :])
    out[1::2, 1::2] = 0.25 * (g[:-1, :-1] + g[:-1, 1:] + g[1:, :-1] + g[1:, 1:])
    return PixelImage(out, image.dwell_pulses, image.kind)


def contrast(image: PixelImage, foreground_mask: np.ndarray) -> float:
    """Separation of foreground from background in pooled-noise units.

    (mean_fg - mean_bg) / sqrt((var_fg + var_bg)/2). Zero when both
    classes are identical constants; infinite when the classes separate
    with zero variance. May be negative.
    """
    mask = np.asarray(foreground_mask, dtype=bool)
    if mask.shape != image.grid.shape:
        raise ValueError("mask shape must match image shape")
    fg = image.grid[mask]
    bg = image.grid[~mask]
    if fg.size == 0 or bg.size == 0:
        raise ValueError("mask must select at least one pixel of each class")
    delta = float(np.mean(fg) - np.mean(bg))
    pooled = 0.5 * (float(np.var(fg)) + float(np.var(bg)))
    if pooled == 0.0:
        if delta == 0.0:
            return 0.0
        return math.inf if delta > 0 else -math.inf
    return delta / math.sqrt(pooled)


# ---------------------------------------------------------------------------
# Plain-text portable graymap (PGM P2) I/O
# ---------------------------------------------------------------------------


def read_pgm(path: str) -> tuple[np.ndarray, int]:
    """Read a P2 graymap; returns (values, maxval). Comments are skipped."""
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        tokens: list[str] = []
        for line in fh:
            body = line.split("#", 1)[0]
            tokens.extend(body.split())
    if not tokens or tokens[0] != "P2":
        raise ValueError("bad scene: not a plain PGM (P2) file")
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
        values = np.array([int(t) for t in tokens[4:]], dtype=np.int64)
    except (ValueError, IndexError) as exc:
        raise ValueError("bad scene: malformed PGM header or samples") from exc
    if width < 1 or height < 1 or maxval < 1:
        raise ValueError("bad scene: non-positive PGM dimensions")
    if values.size != width * height:
        raise ValueError("bad scene: sample count does not match dimensions")
    if np.any(values < 0) or np.any(values > maxval):
        raise ValueError("bad scene: sample out of range")
    return values.reshape(height, width), maxval


def write_pgm(path: str, grid: np.ndarray, maxval: int = 65535) -> None:
    """Write counts as P2, linearly rescaled so the peak maps to maxval."""
    g = np.asarray(grid, dtype=np.float64)
    peak = float(g.max()) if g.size else 0.0
    scaled = np.zeros_like(g, dtype=np.int64) if peak <= 0 else np.rint(g * (maxval / peak)).astype(np.int64)
    h, w = g.shape
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"P2\n{w} {h}\n{maxval}\n")
        for row in scaled:
            fh.write(" ".join(str(int(v)) for v in row) + "\n")


def scene_from_pgm(path: str, pixel_pitch: float = 1.0) -> Scene:
    values, maxval = read_pgm(path)
    return Scene(values.astype(np.float64) / maxval, pixel_pitch)


def scene_to_pgm(scene: Scene, path: str, maxval: int = 255) -> None:
    grid = np.rint(scene.grid * maxval).astype(np.int64)
    h, w = grid.shape
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"P2\n{w} {h}\n{maxval}\n")
        for row in grid:
            fh.write(" ".join(str(int(v)) for v in row) + "\n")


def image_to_csv(image: PixelImage, path: str) -> None:
    """Raw unscaled counts, one CSV row per image row."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in image.grid:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
