"""Periodicity cell of the saturated ground: geometry, micro-shapes, averages.

The medium is modelled as a periodic array of box-shaped cells
V = [0, l1) x [0, l2) x [0, l3).  Each cell is split along every axis at an
interior coordinate g_i; the open box (g1, l1) x (g2, l2) x (g3, l3) is
occupied by pore fluid and the remainder of the cell by the solid skeleton.
Points on the closure boundary of the fluid box count as solid, so the
origin and the corner (g1, g2, g3) are both solid.

Micro-displacements inside the cell are described by one saw-tooth profile
per axis.  The profile for axis i depends on the i-th coordinate only,

    h_i(x) = a_i - 2 (a_i / g_i) x               on [0, g_i],
    h_i(x) = -a_i + 2 a_i (x - g_i) / (l_i - g_i) on [g_i, l_i],

with amplitude a_i > 0.  The profile is continuous, l_i-periodic, takes the
values +a_i at the cell faces and -a_i at the split, and has zero mean over
the cell, over the solid part, and over the fluid part.  Its gradient is
piecewise constant; at the kinks we use the right-sided limit by
convention, so the gradient is defined everywhere and never an error.

Volume averages are always normalised by the full cell volume |V|, also
when the integrand is restricted to one phase.  Two integration routes are
provided and cross-checked in the test suite:

* closed-form piecewise integration (primary), exploiting that every
  integrand of interest is a product of per-axis polynomials on the eight
  sub-boxes obtained by splitting each axis at g_i, and
* tensor-product Gauss-Legendre quadrature per sub-box (oracle), exact for
  per-axis polynomial degree up to ``2 * points_per_axis - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .errors import ValidationError

Phase = Literal["solid", "fluid", "all"]

SOLID: Phase = "solid"
FLUID: Phase = "fluid"
ALL: Phase = "all"

_PHASES = (SOLID, FLUID, ALL)


@dataclass(frozen=True)
class CellGeometry:
    """Box-shaped periodicity cell with one split coordinate per axis.

    Attributes:
        l1, l2, l3: Cell edge lengths in metres.
        g1, g2, g3: Split coordinates, 0 < g_i < l_i.  The open box above
            the splits holds the fluid, the rest is solid skeleton.
    """

    l1: float
    l2: float
    l3: float
    g1: float
    g2: float
    g3: float

    def __post_init__(self) -> None:
        for name, edge in zip(("l1", "l2", "l3"), self.edges):
            if not (edge > 0.0 and math.isfinite(edge)):
                raise ValidationError(f"{name} must be a positive finite length, got {edge}")
        for name, split, edge in zip(("g1", "g2", "g3"), self.splits, self.edges):
            if not (0.0 < split < edge):
                raise ValidationError(f"{name} must lie strictly inside (0, {edge}), got {split}")

    @property
    def edges(self) -> tuple[float, float, float]:
        return (self.l1, self.l2, self.l3)

    @property
    def splits(self) -> tuple[float, float, float]:
        return (self.g1, self.g2, self.g3)

    @property
    def volume(self) -> float:
        return self.l1 * self.l2 * self.l3

    @property
    def fluid_fraction(self) -> float:
        """Volume fraction of the fluid box, prod(l_i - g_i) / prod(l_i)."""
        frac = 1.0
        for split, edge in zip(self.splits, self.edges):
            frac *= (edge - split) / edge
        return frac

    @property
    def solid_fraction(self) -> float:
        return 1.0 - self.fluid_fraction

    def reduce(self, axis: int, x: float) -> float:
        """Map a coordinate into the reference interval [0, l_i) by periodicity."""
        edge = self._edge(axis)
        r = math.fmod(x, edge)
        if r < 0.0:
            r += edge
        return r

    def phase_at(self, point: tuple[float, float, float]) -> Phase:
        """Phase of a point, after periodic reduction of every coordinate.

        The fluid box is open, so any point with a coordinate at or below
        its split (or exactly on a cell face, which reduces to 0) is solid.
        """
        for axis in range(3):
            r = self.reduce(axis, point[axis])
            if r <= self.splits[axis]:
                return SOLID
        return FLUID

    def _edge(self, axis: int) -> float:
        if axis not in (0, 1, 2):
            raise ValidationError(f"axis must be 0, 1 or 2, got {axis}")
        return self.edges[axis]


@dataclass(frozen=True)
class ShapeFunctionSet:
    """Saw-tooth micro-shape profiles, one per axis, on a given cell.

    Attributes:
        geometry: The periodicity cell the profiles live on.
        a1, a2, a3: Profile amplitudes in metres (peak value at the cell
            faces, trough value -a_i at the split).
    """

    geometry: CellGeometry
    a1: float
    a2: float
    a3: float

    def __post_init__(self) -> None:
        for name, amp in zip(("a1", "a2", "a3"), self.amplitudes):
            if not (amp > 0.0 and math.isfinite(amp)):
                raise ValidationError(f"{name} must be a positive finite amplitude, got {amp}")

    @property
    def amplitudes(self) -> tuple[float, float, float]:
        return (self.a1, self.a2, self.a3)

    def value(self, axis: int, x: float) -> float:
        """Profile value h_i(x) after periodic reduction of x.

        Args:
            axis: Axis index 0, 1 or 2.
            x: Coordinate along that axis, any real number.
        """
        geo = self.geometry
        edge = geo._edge(axis)
        split = geo.splits[axis]
        amp = self.amplitudes[axis]
        r = geo.reduce(axis, x)
        if r <= split:
            return amp - 2.0 * (amp / split) * r
        return -amp + 2.0 * amp * (r - split) / (edge - split)

    def gradient(self, axis: int, x: float) -> float:
        """Profile slope dh_i/dx at x; right-sided limit at the kinks."""
        geo = self.geometry
        edge = geo._edge(axis)
        split = geo.splits[axis]
        amp = self.amplitudes[axis]
        r = geo.reduce(axis, x)
        if r < split:
            return -2.0 * amp / split
        return 2.0 * amp / (edge - split)

    def gradient_bound(self, axis: int) -> float:
        """Upper bound 2 a_i * max(1/g_i, 1/(l_i - g_i)) on |dh_i/dx|."""
        geo = self.geometry
        split = geo.splits[axis]
        edge = geo.edges[axis]
        return 2.0 * self.amplitudes[axis] * max(1.0 / split, 1.0 / (edge - split))


# ---------------------------------------------------------------------------
# Quadrature route
# ---------------------------------------------------------------------------


def _axis_intervals(geometry: CellGeometry, axis: int) -> tuple[tuple[float, float], tuple[float, float]]:
    split = geometry.splits[axis]
    edge = geometry.edges[axis]
    return ((0.0, split), (split, edge))


def cell_average(
    geometry: CellGeometry,
    integrand: Callable[[float, float, float], float],
    phase: Phase = ALL,
    points_per_axis: int = 3,
) -> float:
    """Cell average of a pointwise integrand, normalised by the full |V|.

    The cell is cut into the eight sub-boxes delimited by the splits g_i and
    each sub-box is integrated with a tensor-product Gauss-Legendre rule, so
    integrands that are polynomial per sub-box (all the moments used by the
    coefficient assembly, degree <= 3 per axis) are integrated exactly up to
    rounding.  Kink lines never coincide with quadrature nodes because the
    sub-box boundaries sit exactly on them.

    Args:
        geometry: Periodicity cell.
        integrand: Callable f(x1, x2, x3) evaluated at interior points.
        phase: Restrict the integral to "solid", "fluid" or integrate over
            the whole cell ("all").  The average keeps the full-|V| norm.
        points_per_axis: Gauss points per sub-box per axis (>= 2 for the
            piecewise-cubic moments).

    Returns:
        (1 / |V|) * integral of f over the selected region.
    """
    if phase not in _PHASES:
        raise ValidationError(f"phase must be one of {_PHASES}, got {phase!r}")
    if points_per_axis < 2:
        raise ValidationError("points_per_axis must be at least 2")

    nodes, weights = np.polynomial.legendre.leggauss(points_per_axis)
    per_axis = []
    for axis in range(3):
        mapped = []
        for lo, hi in _axis_intervals(geometry, axis):
            half = 0.5 * (hi - lo)
            mid = 0.5 * (hi + lo)
            mapped.append((mid + half * nodes, half * weights))
        per_axis.append(mapped)

    total = 0.0
    # Sub-box (b1, b2, b3): index 1 means the upper interval (g_i, l_i).
    # The fluid box is exactly (1, 1, 1); every other sub-box is solid.
    for b1 in range(2):
        for b2 in range(2):
            for b3 in range(2):
                in_fluid = b1 == 1 and b2 == 1 and b3 == 1
                if phase == FLUID and not in_fluid:
                    continue
                if phase == SOLID and in_fluid:
                    continue
                x1s, w1s = per_axis[0][b1]
                x2s, w2s = per_axis[1][b2]
                x3s, w3s = per_axis[2][b3]
                for x1, w1 in zip(x1s, w1s):
                    for x2, w2 in zip(x2s, w2s):
                        acc = 0.0
                        for x3, w3 in zip(x3s, w3s):
                            acc += w3 * integrand(x1, x2, x3)
                        total += w1 * w2 * acc
    return total / geometry.volume


# ---------------------------------------------------------------------------
# Closed-form route
# ---------------------------------------------------------------------------
# Every moment below is a product of per-axis one-dimensional integrals of
# piecewise polynomials, so the exact value is a short algebraic expression.
# "all" means the full-cell average; the solid value is obtained as the
# difference of the full and fluid values because the solid region is the
# complement of the fluid box, not a product of intervals.


def _lower_gradient(shapes: ShapeFunctionSet, axis: int) -> float:
    return -2.0 * shapes.amplitudes[axis] / shapes.geometry.splits[axis]


def _upper_gradient(shapes: ShapeFunctionSet, axis: int) -> float:
    geo = shapes.geometry
    return 2.0 * shapes.amplitudes[axis] / (geo.edges[axis] - geo.splits[axis])


def phase_fraction(geometry: CellGeometry, phase: Phase) -> float:
    """Closed-form <1> over a phase (full-|V| normalisation)."""
    if phase == ALL:
        return 1.0
    if phase == FLUID:
        return geometry.fluid_fraction
    if phase == SOLID:
        return geometry.solid_fraction
    raise ValidationError(f"phase must be one of {_PHASES}, got {phase!r}")


def gradient_mean(shapes: ShapeFunctionSet, axis: int, phase: Phase) -> float:
    """Closed-form <dh_i/dx_i> over a phase."""
    geo = shapes.geometry
    fluid = _upper_gradient(shapes, axis) * geo.fluid_fraction
    lo, hi = geo.splits[axis], geo.edges[axis]
    full = (_lower_gradient(shapes, axis) * lo + _upper_gradient(shapes, axis) * (hi - lo)) / hi
    return _dispatch(phase, full, fluid)


def gradient_square_mean(shapes: ShapeFunctionSet, axis: int, phase: Phase) -> float:
    """Closed-form <(dh_i/dx_i)^2> over a phase."""
    geo = shapes.geometry
    lo, hi = geo.splits[axis], geo.edges[axis]
    d_lo = _lower_gradient(shapes, axis)
    d_hi = _upper_gradient(shapes, axis)
    fluid = d_hi * d_hi * geo.fluid_fraction
    full = (d_lo * d_lo * lo + d_hi * d_hi * (hi - lo)) / hi
    return _dispatch(phase, full, fluid)


def gradient_product_mean(shapes: ShapeFunctionSet, axis_a: int, axis_b: int, phase: Phase) -> float:
    """Closed-form <(dh_a/dx_a)(dh_b/dx_b)> over a phase, distinct axes."""
    if axis_a == axis_b:
        return gradient_square_mean(shapes, axis_a, phase)
    fluid = _upper_gradient(shapes, axis_a) * _upper_gradient(shapes, axis_b) * shapes.geometry.fluid_fraction
    # The full-cell average factorises per axis and each factor vanishes.
    full = gradient_mean(shapes, axis_a, ALL) * gradient_mean(shapes, axis_b, ALL)
    return _dispatch(phase, full, fluid)


def shape_square_mean(shapes: ShapeFunctionSet, axis: int, phase: Phase) -> float:
    """Closed-form <h_i^2> over a phase.

    On each linear branch running from value u to value v over length L the
    one-dimensional integral of the square is L (u^2 + u v + v^2) / 3; both
    branches run between +-a_i, which collapses the sum to a_i^2 l_i / 3.
    """
    geo = shapes.geometry
    amp = shapes.amplitudes[axis]
    full = amp * amp / 3.0
    fluid = full * geo.fluid_fraction
    return _dispatch(phase, full, fluid)


def _dispatch(phase: Phase, full: float, fluid: float) -> float:
    if phase == ALL:
        return full
    if phase == FLUID:
        return fluid
    if phase == SOLID:
        return full - fluid
    raise ValidationError(f"phase must be one of {_PHASES}, got {phase!r}")


# ---------------------------------------------------------------------------
# Self-checks
# ---------------------------------------------------------------------------


def validate_shape_properties(shapes: ShapeFunctionSet, points_per_axis: int = 3) -> list[str]:
    """Check the structural properties of a shape-function set.

    Verifies, per axis: values bounded by the amplitude, slope bounded by
    the analytic bound, periodicity at the cell faces, and vanishing mean
    over both phases (via the quadrature route, tolerance 1e-13 * a_i).

    Returns:
        A list of human-readable violations; empty if everything holds.
    """
    geo = shapes.geometry
    violations: list[str] = []
    for axis in range(3):
        amp = shapes.amplitudes[axis]
        edge = geo.edges[axis]
        xs = np.linspace(0.0, edge, 57, endpoint=False)
        values = np.array([shapes.value(axis, x) for x in xs])
        if np.any(np.abs(values) > amp * (1.0 + 1e-12)):
            violations.append(f"axis {axis}: |h| exceeds the amplitude {amp}")
        slopes = np.array([shapes.gradient(axis, x) for x in xs])
        if np.any(np.abs(slopes) > shapes.gradient_bound(axis) * (1.0 + 1e-12)):
            violations.append(f"axis {axis}: |dh/dx| exceeds the analytic bound")
        if abs(shapes.value(axis, 0.0) - shapes.value(axis, edge)) > 1e-12 * amp:
            violations.append(f"axis {axis}: profile is not periodic across the cell")

        def profile(x1: float, x2: float, x3: float, axis: int = axis) -> float:
            return shapes.value(axis, (x1, x2, x3)[axis])

        for phase in (SOLID, FLUID):
            mean = cell_average(geo, profile, phase, points_per_axis)
            if abs(mean) > 1e-13 * amp:
                violations.append(f"axis {axis}: <h> over {phase} is {mean}, expected 0")
    return violations
