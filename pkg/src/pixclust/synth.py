"""Seeded synthetic test images.

Spatially smooth noise keeps segment counts moderate, so the same generators
serve unit tests, the acceptance suite and the CLI ``gen`` command without
external assets.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .image import Image

KINDS = ("bimodal", "bands", "checker")


def _smooth_noise(rng: np.random.Generator, shape, sigma: float) -> np.ndarray:
    return ndimage.gaussian_filter(rng.normal(0.0, 1.0, shape), sigma=sigma)


def _finish(field: np.ndarray, levels: int) -> Image:
    grid = np.clip(np.rint(field), 0, levels - 1).astype(np.int32)
    return Image(grid.shape[1], grid.shape[0], levels, grid)


def generate(
    kind: str, width: int, height: int, levels: int = 256, seed: int = 0
) -> Image:
    """Deterministic synthetic image of the given kind.

    bimodal: dark background with a bright disk; bands: four horizontal
    intensity bands; checker: checkerboard cells; all carry smooth noise.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown image kind {kind!r}; options: {', '.join(KINDS)}")
    rng = np.random.default_rng(seed)
    shape = (height, width)
    yy, xx = np.mgrid[0:height, 0:width]
    amp = levels / 16.0
    if kind == "bimodal":
        base = np.full(shape, levels * 0.25)
        cy, cx = height / 2.0, width / 2.0
        r = min(width, height) / 3.2
        disk = (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
        base[disk] = levels * 0.72
        field = base + amp * _smooth_noise(rng, shape, sigma=2.0)
    elif kind == "bands":
        edges = np.linspace(0, height, 5).astype(int)
        means = np.array([0.15, 0.4, 0.6, 0.85]) * levels
        base = np.zeros(shape)
        for k in range(4):
            base[edges[k] : edges[k + 1], :] = means[k]
        field = base + amp * _smooth_noise(rng, shape, sigma=2.0)
    else:  # checker
        cell = max(4, min(width, height) // 8)
        parity = ((yy // cell) + (xx // cell)) % 2
        base = np.where(parity == 0, levels * 0.3, levels * 0.7)
        field = base + 0.5 * amp * _smooth_noise(rng, shape, sigma=1.5)
    return _finish(field, levels)
