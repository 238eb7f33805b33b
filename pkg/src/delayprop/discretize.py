"""Bin schemes: mapping continuous delay minutes to ordered bins and back.

A scheme is a strictly increasing edge sequence plus optional unbounded tail
bins below the first edge and above the last. Interior bins are half-open
``[lo, hi)`` so that adjacent bins partition the line. Tail bins have no
finite midpoint, so a representative point is placed ``tail_halfwidth``
minutes beyond the edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class BinRangeError(ValueError):
    """Value falls outside a scheme whose tails are closed."""


@dataclass(frozen=True)
class BinScheme:
    edges: tuple[float, ...]
    lower_open: bool = True
    upper_open: bool = True
    tail_halfwidth: float = 7.5

    def __post_init__(self) -> None:
        edges = tuple(float(e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        if len(edges) < 2:
            raise ValueError("a bin scheme needs at least 2 edges")
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise ValueError("edges must be strictly increasing")
        if self.tail_halfwidth <= 0:
            raise ValueError("tail_halfwidth must be positive")
        if self.n_bins < 2:
            raise ValueError("a bin scheme needs at least 2 bins")

    @property
    def n_bins(self) -> int:
        return len(self.edges) - 1 + int(self.lower_open) + int(self.upper_open)

    def bin_index(self, x: float) -> int:
        """Return the index of the bin containing ``x``.

        Interior bins are ``[lo, hi)``. Out-of-range values land in the tail
        bins when the corresponding tail is open, otherwise BinRangeError.
        """
        x = float(x)
        if not np.isfinite(x):
            raise ValueError(f"cannot bin non-finite value {x!r}")
        if x < self.edges[0]:
            if self.lower_open:
                return 0
            raise BinRangeError(f"{x} below closed lower edge {self.edges[0]}")
        if x >= self.edges[-1]:
            if self.upper_open:
                return self.n_bins - 1
            raise BinRangeError(f"{x} at or above closed upper edge {self.edges[-1]}")
        # right=True gives the count of edges <= x, i.e. the interior interval.
        interior = int(np.searchsorted(np.asarray(self.edges), x, side="right")) - 1
        return interior + int(self.lower_open)

    def bounds(self, k: int) -> tuple[float, float]:
        """Lower/upper boundary of bin ``k``; open tails use +-inf."""
        self._check_index(k)
        lo_tail = self.lower_open and k == 0
        hi_tail = self.upper_open and k == self.n_bins - 1
        if lo_tail:
            return (-np.inf, self.edges[0])
        if hi_tail:
            return (self.edges[-1], np.inf)
        i = k - int(self.lower_open)
        return (self.edges[i], self.edges[i + 1])

    def midpoint(self, k: int) -> float:
        """Representative value of bin ``k`` (tails: edge +- tail_halfwidth)."""
        lo, hi = self.bounds(k)
        if lo == -np.inf:
            return hi - self.tail_halfwidth
        if hi == np.inf:
            return lo + self.tail_halfwidth
        return (lo + hi) / 2.0

    def midpoints(self) -> np.ndarray:
        return np.array([self.midpoint(k) for k in range(self.n_bins)])

    def label(self, k: int) -> str:
        lo, hi = self.bounds(k)
        if lo == -np.inf:
            return f"(-inf,{_fmt(hi)})"
        if hi == np.inf:
            return f"[{_fmt(lo)},inf)"
        return f"[{_fmt(lo)},{_fmt(hi)})"

    def labels(self) -> list[str]:
        return [self.label(k) for k in range(self.n_bins)]

    def _check_index(self, k: int) -> None:
        if not 0 <= k < self.n_bins:
            raise IndexError(f"bin index {k} out of range [0, {self.n_bins})")


def empirical_density(values, scheme: BinScheme) -> np.ndarray:
    """Normalized histogram of ``values`` over the scheme's bins.

    Raises ValueError on empty input; the result sums to 1.
    """
    values = np.asarray(list(values), dtype=float)
    if values.size == 0:
        raise ValueError("empirical_density needs at least one value")
    counts = np.zeros(scheme.n_bins)
    for v in values:
        counts[scheme.bin_index(v)] += 1
    return counts / counts.sum()


def _fmt(x: float) -> str:
    return f"{x:g}"


def delay_bin_scheme() -> BinScheme:
    """Default scheme for delay variables: 15-minute bins, open tails."""
    return BinScheme(edges=tuple(float(e) for e in range(-60, 135, 15)),
                     lower_open=True, upper_open=True, tail_halfwidth=7.5)


def density_bin_scheme(lo: float = -60.0, hi: float = 120.0) -> BinScheme:
    """Fine 2-minute scheme used for plotting marginal densities."""
    edges = tuple(np.arange(lo, hi + 2.0, 2.0))
    return BinScheme(edges=edges, lower_open=True, upper_open=True,
                     tail_halfwidth=1.0)
