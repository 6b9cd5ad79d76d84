"""Macroscopic coefficients of the micro-structured ground model.

The upscaled momentum balance couples the macro displacement U, three
internal micro-descriptors Q (one per saw-tooth profile) and the pore
pressure P through constant coefficients that are volume averages over the
periodicity cell:

    e_i    fluid-gradient coupling  <dh_i/dx_i>_fluid (also the pressure
           link factor of descriptor i),
    f_i    elastic coupling to the macro strain,
    w_i    viscous coupling to the macro strain rate,
    C_ij   elastic descriptor-descriptor stiffness,
    D_ij   viscous descriptor-descriptor damping,
    m_i    micro-inertia <rho h_i^2>.

The solid is isotropic linear-elastic (lambda_s, mu_s) with deviatoric
viscosity mu_tilde_s; the fluid contributes deviatoric viscosity mu_tilde_f
and pressure only.  Two backends are provided:

* "first-principles": every entry is a phase-restricted cell average of
  material moduli times shape gradients, evaluated with the closed-form
  piecewise integration from :mod:`compacta.cell`.
* "paper": the published closed-form entries for the cubic cell.  They
  coincide with the averages except for the micro-inertia m_i, whose
  published solid factor g^3 differs from the geometric complement
  1 - (1 - g)^3; both values are exposed and reported, never reconciled
  silently.  The published lateral strain coupling is implemented in its
  symmetric form (f_2 = f_3).

For a cubic cell and the uniaxial settling scenario the three descriptor
equations collapse, via the fluid-volume constraint

    e_1 Q_1 + (e_2 + e_3) Q_0 = phi_F * eta * min(t, t0) / t0,

to one damped linear oscillator

    Q0'' + alpha0 Q0' + beta0 Q0 = gamma0 * strain + gamma1 * strain_rate.

The "paper" backend evaluates the published formulas for alpha0, beta0,
gamma0, gamma1 directly; the "first-principles" backend eliminates Q_1 and
P from its own macro coefficients.  All four scalars scale as 1 / l0^2
under cell rescaling, so the ratios used downstream are size-independent.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import cell
from .cell import ALL, FLUID, SOLID, CellGeometry, ShapeFunctionSet
from .errors import (
    BracketingError,
    CompactaError,
    SingularModelError,
    UnsupportedGeometryError,
    ValidationError,
)

Backend = Literal["paper", "first-principles"]

PAPER: Backend = "paper"
FIRST_PRINCIPLES: Backend = "first-principles"

_BACKENDS = (PAPER, FIRST_PRINCIPLES)


@dataclass(frozen=True)
class MaterialParams:
    """Constituent properties of the saturated ground.

    Attributes:
        rho_s, rho_f: Solid and fluid mass densities (kg/m^3).
        lambda_s, mu_s: Lame moduli of the solid skeleton (Pa).
        mu_tilde_s, mu_tilde_f: Deviatoric viscosities of solid and fluid
            (Pa s).
        body_force: Body force density (N/m^3).  The settling model is
            formulated for zero body force; a nonzero value is rejected
            where the reduction is performed.
    """

    rho_s: float
    rho_f: float
    lambda_s: float
    mu_s: float
    mu_tilde_s: float
    mu_tilde_f: float
    body_force: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        for name in ("rho_s", "rho_f", "lambda_s", "mu_s", "mu_tilde_s", "mu_tilde_f"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise ValidationError(f"{name} must be positive and finite, got {value}")
        if len(self.body_force) != 3 or not all(math.isfinite(b) for b in self.body_force):
            raise ValidationError(f"body_force must be three finite components, got {self.body_force}")

    @property
    def has_body_force(self) -> bool:
        return any(b != 0.0 for b in self.body_force)


@dataclass(frozen=True)
class CubicSpec:
    """Cubic periodicity cell in normalised parameters.

    Attributes:
        l0: Cell edge length (m).
        g: Normalised split coordinate, 0 < g < 1 (split at g * l0 on every
            axis).
        h: Normalised shape amplitude, > 0 (amplitude h * l0 on every axis).
    """

    l0: float
    g: float
    h: float

    def __post_init__(self) -> None:
        if not (self.l0 > 0.0 and math.isfinite(self.l0)):
            raise ValidationError(f"l0 must be a positive finite length, got {self.l0}")
        if not (0.0 < self.g < 1.0):
            raise ValidationError(f"g must lie strictly inside (0, 1), got {self.g}")
        if not (self.h > 0.0 and math.isfinite(self.h)):
            raise ValidationError(f"h must be positive and finite, got {self.h}")

    @property
    def diagonal(self) -> float:
        """Cell diagonal sqrt(3) * l0, the published cell-size measure."""
        return math.sqrt(3.0) * self.l0

    def geometry(self) -> CellGeometry:
        g_abs = self.g * self.l0
        return CellGeometry(self.l0, self.l0, self.l0, g_abs, g_abs, g_abs)

    def shapes(self) -> ShapeFunctionSet:
        a = self.h * self.l0
        return ShapeFunctionSet(self.geometry(), a, a, a)


@dataclass(frozen=True)
class MacroCoefficients:
    """Assembled cell-average coefficients.

    Attributes:
        e: Fluid-gradient couplings e_i (dimensionless); the pore pressure
            enters descriptor equation i through the same factor.
        f: Elastic strain couplings (Pa).
        w: Viscous strain-rate couplings (Pa s).
        C: Elastic descriptor stiffness matrix (Pa), symmetric with
            positive diagonal.
        D: Viscous descriptor damping matrix (Pa s), symmetric with
            positive diagonal.
        m: Micro-inertiae <rho h_i^2> (kg/m), positive.
        phi_f: Fluid volume fraction.
        rho_bar: Cell-average density (kg/m^3).
        backend: Which assembly produced the entries.
    """

    e: np.ndarray
    f: np.ndarray
    w: np.ndarray
    C: np.ndarray
    D: np.ndarray
    m: np.ndarray
    phi_f: float
    rho_bar: float
    backend: Backend

    def __post_init__(self) -> None:
        for name, matrix in (("C", self.C), ("D", self.D)):
            scale = float(np.max(np.abs(matrix))) or 1.0
            if float(np.max(np.abs(matrix - matrix.T))) > 1e-10 * scale:
                raise SingularModelError(f"{name} must be symmetric")
            if np.any(np.diag(matrix) <= 0.0):
                raise SingularModelError(f"{name} must have a positive diagonal")
        if np.any(self.m <= 0.0):
            raise SingularModelError("micro-inertiae m_i must be positive")


def macro_coefficients(
    geometry: CellGeometry,
    shapes: ShapeFunctionSet,
    materials: MaterialParams,
    backend: Backend = FIRST_PRINCIPLES,
) -> MacroCoefficients:
    """Assemble the macro coefficients for a cell and material set.

    Args:
        geometry: Periodicity cell.
        shapes: Saw-tooth shape functions on the same cell.
        materials: Constituent properties.
        backend: "first-principles" works for any box cell; "paper" is
            defined for cubic cells only and raises
            UnsupportedGeometryError otherwise.
    """
    if backend not in _BACKENDS:
        raise ValidationError(f"backend must be one of {_BACKENDS}, got {backend!r}")
    if shapes.geometry != geometry:
        raise ValidationError("shapes were built on a different geometry")

    mc = _first_principles(geometry, shapes, materials)
    if backend == FIRST_PRINCIPLES:
        return mc

    spec = _as_cubic(geometry, shapes)
    # Published entries match the averages except the micro-inertia, whose
    # solid factor is g^3 instead of the complement 1 - (1 - g)^3.
    split_solid = spec.g ** 3
    split_fluid = (1.0 - spec.g) ** 3
    # diagonal^2 written as 3 l0^2 to keep the entry an exact product
    m_paper = spec.h ** 2 * (3.0 * spec.l0 ** 2) * (split_solid * materials.rho_s + split_fluid * materials.rho_f) / 3.0
    return MacroCoefficients(
        e=mc.e,
        f=mc.f,
        w=mc.w,
        C=mc.C,
        D=mc.D,
        m=np.full(3, m_paper),
        phi_f=mc.phi_f,
        rho_bar=mc.rho_bar,
        backend=PAPER,
    )


def cubic_macro_coefficients(
    spec: CubicSpec, materials: MaterialParams, backend: Backend = FIRST_PRINCIPLES
) -> MacroCoefficients:
    """Convenience wrapper building geometry and shapes from a CubicSpec."""
    return macro_coefficients(spec.geometry(), spec.shapes(), materials, backend)


def _first_principles(
    geometry: CellGeometry, shapes: ShapeFunctionSet, materials: MaterialParams
) -> MacroCoefficients:
    lam, mu = materials.lambda_s, materials.mu_s
    vs, vf = materials.mu_tilde_s, materials.mu_tilde_f

    e = np.array([cell.gradient_mean(shapes, i, FLUID) for i in range(3)])
    grad_solid = np.array([cell.gradient_mean(shapes, i, SOLID) for i in range(3)])

    # Axis 0 carries the axial strain; it couples through lambda + 2 mu,
    # the lateral axes through lambda alone (symmetric lateral couplings).
    f = np.array([(lam + 2.0 * mu) * grad_solid[0], lam * grad_solid[1], lam * grad_solid[2]])

    def viscous_mean(i: int, j: int) -> float:
        return vs * cell.gradient_product_mean(shapes, i, j, SOLID) + vf * cell.gradient_product_mean(
            shapes, i, j, FLUID
        )

    def viscous_grad_mean(i: int) -> float:
        return vs * cell.gradient_mean(shapes, i, SOLID) + vf * cell.gradient_mean(shapes, i, FLUID)

    w = np.array(
        [
            (4.0 / 3.0) * viscous_grad_mean(0),
            -(2.0 / 3.0) * viscous_grad_mean(1),
            -(2.0 / 3.0) * viscous_grad_mean(2),
        ]
    )

    C = np.empty((3, 3))
    D = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            if i == j:
                C[i, j] = (lam + 2.0 * mu) * cell.gradient_square_mean(shapes, i, SOLID)
                D[i, j] = (4.0 / 3.0) * viscous_mean(i, i)
            else:
                C[i, j] = lam * cell.gradient_product_mean(shapes, i, j, SOLID)
                D[i, j] = -(2.0 / 3.0) * viscous_mean(i, j)

    m = np.array(
        [
            materials.rho_s * cell.shape_square_mean(shapes, i, SOLID)
            + materials.rho_f * cell.shape_square_mean(shapes, i, FLUID)
            for i in range(3)
        ]
    )

    phi_f = geometry.fluid_fraction
    rho_bar = materials.rho_s * geometry.solid_fraction + materials.rho_f * phi_f
    return MacroCoefficients(e=e, f=f, w=w, C=C, D=D, m=m, phi_f=phi_f, rho_bar=rho_bar, backend=FIRST_PRINCIPLES)


def _as_cubic(geometry: CellGeometry, shapes: ShapeFunctionSet, rel_tol: float = 1e-12) -> CubicSpec:
    l0 = geometry.l1
    edges = geometry.edges
    splits = geometry.splits
    amps = shapes.amplitudes
    cubic = (
        all(abs(edge - l0) <= rel_tol * l0 for edge in edges)
        and all(abs(s - splits[0]) <= rel_tol * l0 for s in splits)
        and all(abs(a - amps[0]) <= rel_tol * amps[0] for a in amps)
    )
    if not cubic:
        raise UnsupportedGeometryError(
            "the published coefficient formulas are stated for a cubic cell with equal splits and amplitudes"
        )
    return CubicSpec(l0=l0, g=splits[0] / l0, h=amps[0] / l0)


@dataclass(frozen=True)
class ReducedCoefficients:
    """Scalar oscillator coefficients of the reduced settling model.

    alpha0 (1/s) and beta0 (1/s^2) are strictly positive; gamma0 (1/s^2)
    couples the macro strain and gamma1 (1/s) the strain rate.
    """

    alpha0: float
    beta0: float
    gamma0: float
    gamma1: float
    backend: Backend

    def __post_init__(self) -> None:
        if not (self.alpha0 > 0.0 and math.isfinite(self.alpha0)):
            raise SingularModelError(f"alpha0 must be positive, got {self.alpha0}")
        if not (self.beta0 > 0.0 and math.isfinite(self.beta0)):
            raise SingularModelError(f"beta0 must be positive, got {self.beta0}")

    @property
    def discriminant(self) -> float:
        return self.alpha0 * self.alpha0 - 4.0 * self.beta0

    def roots(self) -> tuple[complex, complex]:
        """Characteristic roots (fast, slow); complex in the oscillatory regime."""
        sq = cmath.sqrt(complex(self.discriminant))
        return ((-self.alpha0 - sq) / 2.0, (-self.alpha0 + sq) / 2.0)

    @property
    def relaxation_rate(self) -> float:
        """Slow rate beta0 / alpha0, the surviving rate of the l0 -> 0 limit."""
        return self.beta0 / self.alpha0

    def q0_infinity(self, eta: float) -> float:
        """Long-time descriptor value -eta * gamma0 / beta0 after settling."""
        return -eta * self.gamma0 / self.beta0


def reduce_macro_system(mc: MacroCoefficients) -> ReducedCoefficients:
    """Eliminate Q_1 and P from the descriptor system of a cubic cell.

    Uses the fluid-volume constraint to express Q_1 through Q_0, solves the
    axial descriptor equation for the pressure and substitutes both into
    the lateral descriptor equation.  The forcing terms fold into the
    strain couplings because the constraint right-hand side is -phi_F
    times the macro strain.
    """
    e = mc.e
    if e[0] == 0.0:
        raise SingularModelError("fluid-gradient coupling e_1 vanished; the volume constraint cannot fix Q1")
    s = e[1] + e[2]
    ratio = e[1] / e[0]

    inertia = mc.m[1] + e[1] * s * mc.m[0] / (e[0] * e[0])
    stiffness = (mc.C[1, 1] + mc.C[1, 2]) - ratio * (mc.C[0, 1] + mc.C[0, 2]) - (s / e[0]) * (
        mc.C[1, 0] - ratio * mc.C[0, 0]
    )
    damping = (mc.D[1, 1] + mc.D[1, 2]) - ratio * (mc.D[0, 1] + mc.D[0, 2]) - (s / e[0]) * (
        mc.D[1, 0] - ratio * mc.D[0, 0]
    )
    strain_gain = (mc.f[1] - ratio * mc.f[0]) - (mc.phi_f / e[0]) * (mc.C[1, 0] - ratio * mc.C[0, 0])
    rate_gain = (mc.w[1] - ratio * mc.w[0]) - (mc.phi_f / e[0]) * (mc.D[1, 0] - ratio * mc.D[0, 0])

    return ReducedCoefficients(
        alpha0=damping / inertia,
        beta0=stiffness / inertia,
        gamma0=-strain_gain / inertia,
        gamma1=-rate_gain / inertia,
        backend=mc.backend,
    )


def reduced_coefficients(
    spec: CubicSpec, materials: MaterialParams, backend: Backend = PAPER
) -> ReducedCoefficients:
    """Scalar oscillator coefficients for a cubic cell.

    The "paper" backend evaluates the published closed forms; the
    "first-principles" backend eliminates its own macro coefficients.  The
    two are reported side by side by the CLI and are not expected to agree
    numerically (the micro-inertia already differs between the backends).
    """
    if backend not in _BACKENDS:
        raise ValidationError(f"backend must be one of {_BACKENDS}, got {backend!r}")
    if materials.has_body_force:
        raise ValidationError(
            "the reduced settling model is formulated for zero body force; "
            f"got body_force={materials.body_force}"
        )
    if backend == FIRST_PRINCIPLES:
        return reduce_macro_system(cubic_macro_coefficients(spec, materials, FIRST_PRINCIPLES))

    g, h, l0 = spec.g, spec.h, spec.l0
    density_mix = g ** 3 * materials.rho_s + (1.0 - g) ** 3 * materials.rho_f
    viscosity_mix = g * materials.mu_tilde_s + (1.0 - g) * materials.mu_tilde_f
    l0_sq = l0 * l0
    return ReducedCoefficients(
        alpha0=24.0 * viscosity_mix / (l0_sq * density_mix),
        beta0=16.0 * g * materials.mu_s / (l0_sq * density_mix),
        gamma0=-8.0 * g * g * materials.mu_s / (h * l0_sq * density_mix),
        gamma1=(4.0 / (3.0 * h * l0_sq))
        * (-g * g * materials.mu_tilde_s + (1.0 - g) ** 2 * materials.mu_tilde_f)
        / density_mix,
        backend=PAPER,
    )


@dataclass(frozen=True)
class HomogenizedCoefficients:
    """Coefficients of the first-order model obtained in the l0 -> 0 limit.

    Numerically identical to the reduced coefficients at the reference cell
    size; only the ratios beta0/alpha0, gamma0/beta0 and the transient
    amplitude enter the homogenized solutions, and those are invariant
    under cell rescaling.
    """

    alpha0: float
    beta0: float
    gamma0: float
    gamma1: float
    backend: Backend
    reference_l0: float

    @property
    def relaxation_rate(self) -> float:
        return self.beta0 / self.alpha0

    def q0_infinity(self, eta: float) -> float:
        return -eta * self.gamma0 / self.beta0

    def settling_transient(self, eta: float, t0: float) -> float:
        """Transient amplitude of the settling solution.

        This is the prefactor of the (1 - exp(-beta0 t / alpha0)) term that
        makes the ramp solution satisfy Q0(0) = 0 exactly.
        """
        return eta * (self.alpha0 * self.gamma0 / (self.beta0 * self.beta0 * t0) - self.gamma1 / (self.beta0 * t0))


def homogenized_coefficients(
    spec: CubicSpec, materials: MaterialParams, backend: Backend = PAPER
) -> HomogenizedCoefficients:
    rc = reduced_coefficients(spec, materials, backend)
    return HomogenizedCoefficients(
        alpha0=rc.alpha0,
        beta0=rc.beta0,
        gamma0=rc.gamma0,
        gamma1=rc.gamma1,
        backend=rc.backend,
        reference_l0=spec.l0,
    )


def critical_length_closed_form(materials: MaterialParams, g: float, h: float) -> float:
    """Closed-form cell size separating the damping regimes.

    Derived from alpha0^2 = 4 beta0 with the published coefficients:
    l0* = 3 (g mu_tilde_s + (1-g) mu_tilde_f) / sqrt(g mu_s D) with the
    density mix D = g^3 rho_s + (1-g)^3 rho_f.  Linear in the combined
    viscosity, so doubling both viscosities doubles l0* exactly.
    """
    CubicSpec(l0=1.0, g=g, h=h)  # range validation only
    density_mix = g ** 3 * materials.rho_s + (1.0 - g) ** 3 * materials.rho_f
    viscosity_mix = g * materials.mu_tilde_s + (1.0 - g) * materials.mu_tilde_f
    return 3.0 * viscosity_mix / math.sqrt(g * materials.mu_s * density_mix)


def critical_length(
    materials: MaterialParams,
    g: float,
    h: float,
    bracket: tuple[float, float] = (1e-6, 1e6),
    rel_tol: float = 1e-12,
) -> float:
    """Critical cell size l0* found by bisection on the discriminant sign.

    The discriminant alpha0^2 - 4 beta0 of the published coefficients is
    positive below l0* (overdamped) and negative above (oscillatory); its
    sign flips exactly once.  The bisection result is cross-checked against
    the closed form to 1e-9 relative and returned.
    """

    def discriminant(l0: float) -> float:
        return reduced_coefficients(CubicSpec(l0=l0, g=g, h=h), materials, PAPER).discriminant

    lo, hi = bracket
    if not (0.0 < lo < hi):
        raise ValidationError(f"bracket must satisfy 0 < lo < hi, got {bracket}")
    f_lo, f_hi = discriminant(lo), discriminant(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0.0) == (f_hi > 0.0):
        raise BracketingError(
            f"no damping-regime change inside l0 bracket {bracket}: discriminant keeps sign {math.copysign(1, f_lo):+.0f}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= rel_tol * mid:
            break
        f_mid = discriminant(mid)
        if f_mid == 0.0:
            lo = hi = mid
            break
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo = mid
            f_lo = f_mid
        else:
            hi = mid
    found = 0.5 * (lo + hi)

    closed = critical_length_closed_form(materials, g, h)
    if abs(found - closed) > 1e-9 * closed:
        raise CompactaError(
            f"critical-length cross-check failed: bisection {found!r} vs closed form {closed!r}"
        )
    return found
