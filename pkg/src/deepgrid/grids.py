"""Cell geometries over descriptor space.

Two tilings are provided: a rectangular grid with equal-width bins per
axis, and a disk tiling of concentric equal-width rings where ring i is
cut into 2*(2*i + 1) equal-angle sectors.  The ring law makes every cell
in the disk cover exactly the same area.

Both geometries map descriptors to flat cell indices; descriptors outside
the bounds clamp to the nearest boundary cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CartesianGrid:
    """Row-major rectangular tiling of a box.

    ``shape[k]`` equal-width bins along axis k between ``lower[k]`` and
    ``upper[k]``.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    shape: tuple[int, ...]

    def __post_init__(self):
        if not (len(self.lower) == len(self.upper) == len(self.shape)):
            raise ValueError("lower/upper/shape must have the same length")
        if any(n < 1 for n in self.shape):
            raise ValueError("each axis needs at least one bin")
        if any(hi <= lo for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("upper bound must exceed lower bound on every axis")

    @property
    def n_cells(self) -> int:
        return math.prod(self.shape)

    @property
    def dim(self) -> int:
        return len(self.shape)

    def locate(self, bd) -> int:
        flat = 0
        for k in range(len(self.shape)):
            lo = self.lower[k]
            n = self.shape[k]
            t = (bd[k] - lo) / (self.upper[k] - lo) * n
            i = int(t)
            if t < 0:
                i = 0
            elif i >= n:
                i = n - 1
            flat = flat * n + i
        return flat

    def locate_batch(self, bds: np.ndarray) -> np.ndarray:
        bds = np.asarray(bds, dtype=float)
        flat = np.zeros(bds.shape[0], dtype=np.int64)
        for k in range(len(self.shape)):
            lo = self.lower[k]
            n = self.shape[k]
            t = (bds[:, k] - lo) / (self.upper[k] - lo) * n
            i = np.clip(np.floor(t).astype(np.int64), 0, n - 1)
            flat = flat * n + i
        return flat


@dataclass(frozen=True)
class PolarGrid:
    """Equal-area disk tiling: ``rings`` rings of width radius/rings,
    ring i split into 2*(2*i + 1) sectors.  Total cells: 2 * rings**2.

    Cell order: ring by ring from the centre, sectors counter-clockwise
    from angle 0, so ring i starts at flat index 2*i**2.
    """

    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0
    rings: int = 71

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.rings < 1:
            raise ValueError("need at least one ring")

    @property
    def n_cells(self) -> int:
        return 2 * self.rings * self.rings

    @property
    def dim(self) -> int:
        return 2

    def sectors_in_ring(self, ring: int) -> int:
        return 2 * (2 * ring + 1)

    def locate(self, bd) -> int:
        dx = bd[0] - self.center[0]
        dy = bd[1] - self.center[1]
        r = math.sqrt(dx * dx + dy * dy)
        ring = int(r / self.radius * self.rings)
        if ring >= self.rings:  # outside the disk clamps to the outer ring
            ring = self.rings - 1
        m = 2 * (2 * ring + 1)
        phi = math.atan2(dy, dx) % TWO_PI
        sector = int(phi / TWO_PI * m)
        if sector >= m:
            sector = m - 1
        return 2 * ring * ring + sector

    def locate_batch(self, bds: np.ndarray) -> np.ndarray:
        bds = np.asarray(bds, dtype=float)
        dx = bds[:, 0] - self.center[0]
        dy = bds[:, 1] - self.center[1]
        r = np.sqrt(dx * dx + dy * dy)
        ring = np.minimum((r / self.radius * self.rings).astype(np.int64), self.rings - 1)
        m = 2 * (2 * ring + 1)
        phi = np.arctan2(dy, dx) % TWO_PI
        sector = np.minimum((phi / TWO_PI * m).astype(np.int64), m - 1)
        return 2 * ring * ring + sector


Geometry = CartesianGrid | PolarGrid
