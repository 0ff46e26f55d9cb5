"""Grayscale image container used throughout the package."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Image:
    """A grayscale image with explicit intensity-level count.

    ``pixels`` is a flat, row-major int32 array of length ``width * height``;
    every value lies in ``[0, levels)``.  The array is marked read-only so
    images can be shared freely.
    """

    width: int
    height: int
    levels: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        if not 2 <= self.levels <= 65536:
            raise ValueError(f"levels must be in [2, 65536], got {self.levels}")
        pix = np.ascontiguousarray(self.pixels, dtype=np.int32).ravel()
        if pix.size != self.width * self.height:
            raise ValueError(
                f"pixel count {pix.size} != width*height {self.width * self.height}"
            )
        if pix.size and (pix.min() < 0 or pix.max() >= self.levels):
            raise ValueError("pixel value outside [0, levels)")
        pix.setflags(write=False)
        object.__setattr__(self, "pixels", pix)

    @property
    def n(self) -> int:
        """Number of pixels."""
        return self.width * self.height

    def grid(self) -> np.ndarray:
        """Pixels as a read-only (height, width) view."""
        return self.pixels.reshape(self.height, self.width)


def image_from_grid(grid, levels: int) -> Image:
    """Build an Image from a 2-D array of intensities."""
    arr = np.asarray(grid)
    if arr.ndim != 2:
        raise ValueError("grid must be 2-D")
    return Image(width=arr.shape[1], height=arr.shape[0], levels=levels, pixels=arr)
