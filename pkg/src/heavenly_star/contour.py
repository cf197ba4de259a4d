"""Circular contour discretisation and node-sampled series."""

from dataclasses import dataclass, field

import numpy as np

from .ring import Poly, RingElement, to_complex
from .star import GradedSeries

SIDES = ("plus", "minus", "off")


@dataclass(frozen=True)
class Contour:
    """Unit circle with N trapezoid nodes and N staggered targets half a step away."""

    n: int
    radius: float = 1.0
    _grid: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 64 or self.n & (self.n - 1):
            raise ValueError(f"node count must be a power of two >= 64, got {self.n}")
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def nodes(self):
        if "nodes" not in self._grid:
            self._grid["nodes"] = self.radius * np.exp(2j * np.pi * np.arange(self.n) / self.n)
        return self._grid["nodes"]

    @property
    def targets(self):
        if "targets" not in self._grid:
            self._grid["targets"] = self.radius * np.exp(2j * np.pi * (np.arange(self.n) + 0.5) / self.n)
        return self._grid["targets"]

    @property
    def weights(self):
        """Trapezoid weights for (1/2 pi i) * integral of f(tau) dtau."""
        return self.nodes / self.n

    def wavenumbers(self):
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)


@dataclass(frozen=True)
class ContourSeries:
    """A GradedSeries whose coefficients are arrays over the points of a contour grid."""

    series: GradedSeries
    points: np.ndarray
    side: str = "off"

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}")

    @property
    def n(self):
        return len(self.points)

    def with_series(self, series, side=None):
        return ContourSeries(series, self.points, self.side if side is None else side)

    def at(self, j):
        """Series at a single point (complex scalars)."""
        return self.series.map_coefficients(lambda c: _pick(c, j))

    def free_element_is_one(self, tol=0.0):
        free = self.series.t_slice(0)
        one = GradedSeries.one(self.series.t_max, self.series.k_max).to_float()
        diff = free - broadcast(one, self.n)
        return diff.norm() <= tol


def _pick(c, j):
    num = Poly({e: complex(v[j]) if isinstance(v, np.ndarray) else v for e, v in c.num.terms.items()})
    return RingElement(num, c.den, _reduced=True) if not num.is_zero else RingElement(num)


def broadcast(series, n):
    """Turn scalar coefficients into constant arrays of length n."""

    def lift(c):
        num = Poly({e: v if isinstance(v, np.ndarray) else np.full(n, to_complex(v), dtype=complex)
                    for e, v in c.num.terms.items()})
        return RingElement(num, c.den, _reduced=True)

    return series.map_coefficients(lift)
