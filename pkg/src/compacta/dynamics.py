"""Settling and micro-vibration dynamics of the reduced ground model.

The macro displacement is the uniaxial ramp U1 = -eta x1 min(t, t0)/t0:
the ground compacts linearly during [0, t0] and holds still afterwards.
Under that history the lateral micro-descriptor Q0 obeys

    Q0'' + alpha0 Q0' + beta0 Q0 = gamma0 u + gamma1 u'      (full model)
    alpha0 Q0' + beta0 Q0 = gamma0 u + gamma1 u'             (small-cell limit)

with u the axial strain.  Both equations are solved in closed form on the
two phases (settling ramp, then constant strain), stitching the phases by
continuity of Q0 and Q0' (value only for the first-order limit).  The
integration constants are always derived from the initial and continuity
conditions; the published constant formulas are kept around purely as an
audit target and never drive the engine.

Q1 and the pore pressure are recovered algebraically: Q1 from the fluid
volume constraint, P from the axial descriptor balance with the lateral
balance as an independent consistency route.  Compaction drives P
negative in this sign convention (P enters the macro momentum balance
through +grad P).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .coefficients import (
    Backend,
    CubicSpec,
    HomogenizedCoefficients,
    MacroCoefficients,
    MaterialParams,
    ReducedCoefficients,
    critical_length,
    critical_length_closed_form,
    cubic_macro_coefficients,
    homogenized_coefficients,
    reduced_coefficients,
)
from .errors import RegimeError, SingularModelError, ValidationError
from .oracle import LinearOdeProblem, PiecewiseAffineForcing, halve_until_converged

Mode = Literal["overdamped", "oscillatory", "critical", "relaxation"]

OVERDAMPED: Mode = "overdamped"
OSCILLATORY: Mode = "oscillatory"
CRITICAL: Mode = "critical"
RELAXATION: Mode = "relaxation"

#: Relative discriminant band |alpha0^2 - 4 beta0| <= band * alpha0^2
#: inside which the repeated-root branch is used.
CRITICAL_BAND = 1e-9


@dataclass(frozen=True)
class SettlingScenario:
    """Uniaxial compaction history and body dimensions.

    Attributes:
        eta: Settling measure (dimensionless, >= 0); the surface drops by
            eta * L1 in total.
        t0: Settling duration (s).
        t_f: End of the observation window (s), beyond t0.
        extents: Body dimensions (L1, L2, L3) in metres.
    """

    eta: float
    t0: float
    t_f: float
    extents: tuple[float, float, float]

    def __post_init__(self) -> None:
        if not (self.eta >= 0.0 and math.isfinite(self.eta)):
            raise ValidationError(f"eta must be finite and non-negative, got {self.eta}")
        if not (self.t0 > 0.0 and math.isfinite(self.t0)):
            raise ValidationError(f"t0 must be a positive duration, got {self.t0}")
        if not (self.t_f > self.t0 and math.isfinite(self.t_f)):
            raise ValidationError(f"t_f must exceed t0={self.t0}, got {self.t_f}")
        if len(self.extents) != 3 or not all(x > 0.0 and math.isfinite(x) for x in self.extents):
            raise ValidationError(f"extents must be three positive lengths, got {self.extents}")

    @property
    def total_settlement(self) -> float:
        """Final drop of the top surface, eta * L1 (m)."""
        return self.eta * self.extents[0]

    def strain(self, t):
        """Axial macro strain u(t) = -eta min(t, t0)/t0."""
        t = np.asarray(t, dtype=float)
        return -self.eta * np.minimum(t, self.t0) / self.t0

    def strain_rate(self, t):
        """u'(t); the settling phase owns its end time, so u'(t0) = -eta/t0."""
        t = np.asarray(t, dtype=float)
        return np.where(t <= self.t0, -self.eta / self.t0, 0.0)

    def displacement(self, x1, t):
        """Macro displacement U1(x1, t) = strain * x1 (U2 = U3 = 0)."""
        return self.strain(t) * np.asarray(x1, dtype=float)

    def scale_warning(self, spec: CubicSpec) -> str | None:
        """Scale-separation note when the cell diagonal exceeds a tenth of
        the smallest body dimension."""
        ratio = spec.diagonal / min(self.extents)
        if ratio > 0.1:
            return (
                f"cell diagonal {spec.diagonal:.6g} m is {ratio:.3g} of the smallest body "
                "dimension; scale separation is doubtful"
            )
        return None


def strain_forcing(gamma0: float, gamma1: float, scenario: SettlingScenario) -> PiecewiseAffineForcing:
    """Right-hand side gamma0 u + gamma1 u' of the reduced equations.

    Affine in t during settling, constant afterwards; jumps at t0 by
    -gamma1 * (-eta/t0) because the strain rate switches off.
    """
    eta, t0 = scenario.eta, scenario.t0
    return PiecewiseAffineForcing(
        const_before=-eta * gamma1 / t0,
        slope_before=-eta * gamma0 / t0,
        t_break=t0,
        const_after=-eta * gamma0,
        slope_after=0.0,
    )


def _classify_mode(alpha: float, beta: float, critical_band: float) -> Mode:
    disc = alpha * alpha - 4.0 * beta
    if abs(disc) <= critical_band * alpha * alpha:
        return CRITICAL
    return OVERDAMPED if disc > 0.0 else OSCILLATORY


def damping_class(alpha0: float, beta0: float, critical_band: float = CRITICAL_BAND) -> Mode:
    """Damping class from the root discriminant alone."""
    return _classify_mode(alpha0, beta0, critical_band)


def _affine_particular(alpha: float, beta: float, rhs_const: float, rhs_slope: float) -> tuple[float, float]:
    # q_p = pc + ps t solves both the first- and second-order equations:
    # beta ps = rhs_slope, alpha ps + beta pc = rhs_const.
    ps = rhs_slope / beta
    return (rhs_const - alpha * ps) / beta, ps


def _fit_constants(mode: Mode, alpha: float, roots, value: float, slope: float) -> tuple[float, float]:
    """Constants of the homogeneous part matching qh(0)=value, qh'(0)=slope
    in local time; the relaxation mode matches the value only."""
    if mode == OVERDAMPED:
        r1, r2 = roots[0].real, roots[1].real
        c1 = (r2 * value - slope) / (r2 - r1)
        return c1, value - c1
    if mode == OSCILLATORY:
        omega = roots[1].imag
        return value, (slope + 0.5 * alpha * value) / omega
    if mode == CRITICAL:
        return value, slope + 0.5 * alpha * value
    return value, 0.0


@dataclass(frozen=True)
class ClosedFormSolution:
    """One phase of the response in closed form.

    The solution is particular plus homogeneous,

        q(t) = part_const + part_slope t + qh(t - t_offset),

    where qh depends on the mode: two real exponentials (overdamped), a
    decaying sine/cosine pair (oscillatory), the repeated-root pair
    (critical), or a single exponential (relaxation, first order).  The
    particular part is written in absolute time; the homogeneous part in
    time measured from the phase start, so post-settling solutions never
    evaluate growing exponentials of t0.

    Valid on [t_start, t_end]; evaluation does not clamp.
    """

    label: str
    mode: Mode
    order: int
    alpha: float
    beta: float
    rhs_const: float
    rhs_slope: float
    part_const: float
    part_slope: float
    roots: tuple[complex, complex]
    c1: float
    c2: float
    t_offset: float
    t_start: float
    t_end: float

    def evaluate(self, t) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Value, first and second derivative at t (array-aware)."""
        t = np.asarray(t, dtype=float)
        tau = t - self.t_offset
        if self.mode == OVERDAMPED:
            r1, r2 = self.roots[0].real, self.roots[1].real
            e1, e2 = np.exp(r1 * tau), np.exp(r2 * tau)
            qh = self.c1 * e1 + self.c2 * e2
            qhd = self.c1 * r1 * e1 + self.c2 * r2 * e2
        elif self.mode == OSCILLATORY:
            omega = self.roots[1].imag
            decay = np.exp(-0.5 * self.alpha * tau)
            cs, sn = np.cos(omega * tau), np.sin(omega * tau)
            qh = decay * (self.c1 * cs + self.c2 * sn)
            qhd = decay * (
                (omega * self.c2 - 0.5 * self.alpha * self.c1) * cs
                - (omega * self.c1 + 0.5 * self.alpha * self.c2) * sn
            )
        elif self.mode == CRITICAL:
            r = -0.5 * self.alpha
            er = np.exp(r * tau)
            qh = (self.c1 + self.c2 * tau) * er
            qhd = (self.c2 + r * (self.c1 + self.c2 * tau)) * er
        else:
            rate = self.beta / self.alpha
            er = np.exp(-rate * tau)
            qh = self.c1 * er
            qhd = -rate * qh
        if self.order == 2:
            # the homogeneous part satisfies qh'' = -alpha qh' - beta qh
            qhdd = -self.alpha * qhd - self.beta * qh
        else:
            qhdd = (self.beta / self.alpha) ** 2 * qh
        q = self.part_const + self.part_slope * t + qh
        qd = self.part_slope + qhd
        return q, qd, qhdd

    def forcing_value(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.rhs_const + self.rhs_slope * t

    def residual(self, t) -> np.ndarray:
        """Defect of the governing equation at t; zero up to roundoff."""
        q, qd, qdd = self.evaluate(t)
        if self.order == 2:
            return qdd + self.alpha * qd + self.beta * q - self.forcing_value(t)
        return self.alpha * qd + self.beta * q - self.forcing_value(t)


def _build_phase(
    label: str,
    mode: Mode,
    order: int,
    alpha: float,
    beta: float,
    roots,
    rhs_const: float,
    rhs_slope: float,
    value: float,
    slope: float,
    t_offset: float,
    t_start: float,
    t_end: float,
) -> ClosedFormSolution:
    pc, ps = _affine_particular(alpha, beta, rhs_const, rhs_slope)
    # target the homogeneous part with the particular part subtracted
    qp0 = pc + ps * t_offset
    c1, c2 = _fit_constants(mode, alpha, roots, value - qp0, slope - ps)
    return ClosedFormSolution(
        label=label,
        mode=mode,
        order=order,
        alpha=alpha,
        beta=beta,
        rhs_const=rhs_const,
        rhs_slope=rhs_slope,
        part_const=pc,
        part_slope=ps,
        roots=tuple(roots),
        c1=c1,
        c2=c2,
        t_offset=t_offset,
        t_start=t_start,
        t_end=t_end,
    )


def solve_phases(
    rc: ReducedCoefficients,
    scenario: SettlingScenario,
    critical_band: float = CRITICAL_BAND,
) -> tuple[ClosedFormSolution, ClosedFormSolution]:
    """Closed-form response of the second-order model on both phases.

    Phase 1 starts from rest (Q0 = Q0' = 0); phase 2 continues with both
    value and slope matched at t0.  The repeated-root branch is used
    inside the critical band, so the construction is total over the
    parameter space.
    """
    mode = _classify_mode(rc.alpha0, rc.beta0, critical_band)
    roots = rc.roots()
    forcing = strain_forcing(rc.gamma0, rc.gamma1, scenario)
    settling = _build_phase(
        "settling", mode, 2, rc.alpha0, rc.beta0, roots,
        forcing.const_before, forcing.slope_before,
        value=0.0, slope=0.0, t_offset=0.0, t_start=0.0, t_end=scenario.t0,
    )
    q_t0, qd_t0, _ = settling.evaluate(scenario.t0)
    post = _build_phase(
        "post-settling", mode, 2, rc.alpha0, rc.beta0, roots,
        forcing.const_after, forcing.slope_after,
        value=float(q_t0), slope=float(qd_t0),
        t_offset=scenario.t0, t_start=scenario.t0, t_end=scenario.t_f,
    )
    return settling, post


def homogenized_solutions(
    hc: HomogenizedCoefficients, scenario: SettlingScenario
) -> tuple[ClosedFormSolution, ClosedFormSolution]:
    """Closed-form response of the first-order small-cell limit.

    Only the value is continuous at t0 (single integration constant); the
    slope jumps with the forcing.
    """
    rate = hc.relaxation_rate
    roots = (complex(-rate), complex(-rate))
    forcing = strain_forcing(hc.gamma0, hc.gamma1, scenario)
    settling = _build_phase(
        "homogenized-settling", RELAXATION, 1, hc.alpha0, hc.beta0, roots,
        forcing.const_before, forcing.slope_before,
        value=0.0, slope=0.0, t_offset=0.0, t_start=0.0, t_end=scenario.t0,
    )
    q_t0, _, _ = settling.evaluate(scenario.t0)
    post = _build_phase(
        "homogenized-post", RELAXATION, 1, hc.alpha0, hc.beta0, roots,
        forcing.const_after, forcing.slope_after,
        value=float(q_t0), slope=0.0,
        t_offset=scenario.t0, t_start=scenario.t0, t_end=scenario.t_f,
    )
    return settling, post


@dataclass(frozen=True)
class RegimeReport:
    """Damping classification of the reduced model.

    decay_time is 1/|Re r_slow|; period is 2 pi / Im r in the oscillatory
    class and None otherwise.  critical_l0 locates the class boundary for
    the same split and amplitude ratios, defined by the published reduced
    coefficients (bisection value, closed form alongside).
    """

    regime: Mode
    backend: Backend
    l0: float
    alpha0: float
    beta0: float
    discriminant: float
    critical_l0: float
    critical_l0_closed_form: float
    decay_time: float
    period: float | None


def classify_regime(
    rc: ReducedCoefficients,
    spec: CubicSpec,
    materials: MaterialParams,
    critical_band: float = CRITICAL_BAND,
) -> RegimeReport:
    regime = _classify_mode(rc.alpha0, rc.beta0, critical_band)
    slow = rc.roots()[1]
    period = 2.0 * math.pi / abs(slow.imag) if regime == OSCILLATORY else None
    return RegimeReport(
        regime=regime,
        backend=rc.backend,
        l0=spec.l0,
        alpha0=rc.alpha0,
        beta0=rc.beta0,
        discriminant=rc.discriminant,
        critical_l0=critical_length(materials, spec.g, spec.h),
        critical_l0_closed_form=critical_length_closed_form(materials, spec.g, spec.h),
        decay_time=1.0 / abs(slow.real),
        period=period,
    )


def recover_q1(q0, t, mc: MacroCoefficients, scenario: SettlingScenario) -> np.ndarray:
    """Axial descriptor from the fluid volume constraint.

    Q1 = (phi_F eta min(t,t0)/t0 - (e2+e3) Q0)/e1; the constraint right
    side freezes at its t0 value once settling ends.
    """
    e = mc.e
    if e[0] == 0.0:
        raise SingularModelError("fluid-gradient coupling e_1 vanished; Q1 is undetermined")
    t = np.asarray(t, dtype=float)
    target = mc.phi_f * scenario.eta * np.minimum(t, scenario.t0) / scenario.t0
    return (target - (e[1] + e[2]) * np.asarray(q0, dtype=float)) / e[0]


@dataclass(frozen=True)
class PressureRecovery:
    """Pore pressure from the axial balance, with the lateral balance as an
    independent check; mismatch is the sup difference relative to the
    larger recovered magnitude with a 1 Pa floor."""

    primary: np.ndarray
    check: np.ndarray
    mismatch: float


def recover_pressure(
    t,
    q0,
    q0_dot,
    q0_ddot,
    mc: MacroCoefficients,
    scenario: SettlingScenario,
    drop_inertia: bool = False,
) -> PressureRecovery:
    """Recover P(t) from a lateral-descriptor history.

    Q1 and its rates come from the constraint (the strain acceleration is
    zero between the phase breakpoints, so Q1'' = -(e2+e3) Q0''/e1).  The
    primary route inverts the axial balance, the check the lateral one;
    they coincide exactly when Q0 solves the reduced equation, so the
    mismatch measures trajectory error rather than model error.  With
    drop_inertia the micro-inertia terms are omitted, which is the
    small-cell limit of both balances.
    """
    e, C, D = mc.e, mc.C, mc.D
    if e[0] == 0.0 or e[1] == 0.0:
        raise SingularModelError("pressure recovery needs nonzero fluid-gradient couplings e_1, e_2")
    t = np.asarray(t, dtype=float)
    q0 = np.asarray(q0, dtype=float)
    q0_dot = np.asarray(q0_dot, dtype=float)
    q0_ddot = np.asarray(q0_ddot, dtype=float)
    u = scenario.strain(t)
    ud = scenario.strain_rate(t)
    s = e[1] + e[2]
    q1 = (-mc.phi_f * u - s * q0) / e[0]
    q1_dot = (-mc.phi_f * ud - s * q0_dot) / e[0]
    q1_ddot = -s * q0_ddot / e[0]
    h1 = (
        mc.f[0] * u + mc.w[0] * ud
        + C[0, 0] * q1 + (C[0, 1] + C[0, 2]) * q0
        + D[0, 0] * q1_dot + (D[0, 1] + D[0, 2]) * q0_dot
    )
    h2 = (
        mc.f[1] * u + mc.w[1] * ud
        + C[1, 0] * q1 + (C[1, 1] + C[1, 2]) * q0
        + D[1, 0] * q1_dot + (D[1, 1] + D[1, 2]) * q0_dot
    )
    if not drop_inertia:
        h1 = h1 + mc.m[0] * q1_ddot
        h2 = h2 + mc.m[1] * q0_ddot
    primary = -h1 / e[0]
    check = -h2 / e[1]
    scale = max(float(np.max(np.abs(primary))), float(np.max(np.abs(check))), 1.0)
    mismatch = float(np.max(np.abs(primary - check))) / scale
    return PressureRecovery(primary=primary, check=check, mismatch=mismatch)


@dataclass(frozen=True)
class Trajectory:
    """Sampled response with the recovered fields.

    phase is 1 up to and including t0, 2 after.  provenance records
    whether Q0 came from the closed forms or the step integrator;
    oracle_gap is the closed-form vs integrator sup gap when both were
    computed (None otherwise).
    """

    times: np.ndarray
    q0: np.ndarray
    q0_dot: np.ndarray
    q1: np.ndarray
    pressure: np.ndarray
    pressure_check: np.ndarray
    pressure_mismatch: float
    phase: np.ndarray
    provenance: str
    oracle_gap: float | None
    warnings: tuple[str, ...]

    def constraint_residual(self, mc: MacroCoefficients, scenario: SettlingScenario) -> np.ndarray:
        target = mc.phi_f * scenario.eta * np.minimum(self.times, scenario.t0) / scenario.t0
        return mc.e[0] * self.q1 + (mc.e[1] + mc.e[2]) * self.q0 - target


def sample_times(scenario: SettlingScenario, samples: int) -> tuple[np.ndarray, int]:
    """Sample grid over [0, t_f] that contains t0 exactly.

    Returns (times, junction_index); samples counts the total points.
    """
    if samples < 3:
        raise ValidationError(f"need at least 3 samples to cover both phases, got {samples}")
    k = round((samples - 1) * scenario.t0 / scenario.t_f)
    k = min(max(k, 1), samples - 2)
    first = np.linspace(0.0, scenario.t0, k + 1)
    second = np.linspace(scenario.t0, scenario.t_f, samples - k)
    return np.concatenate((first, second[1:])), k


def _assemble(
    times: np.ndarray,
    junction: int,
    q0: np.ndarray,
    q0_dot: np.ndarray,
    q0_ddot: np.ndarray,
    mc: MacroCoefficients,
    scenario: SettlingScenario,
    provenance: str,
    oracle_gap: float | None,
    warnings: tuple[str, ...],
    drop_inertia: bool = False,
) -> Trajectory:
    q1 = recover_q1(q0, times, mc, scenario)
    pressure = recover_pressure(times, q0, q0_dot, q0_ddot, mc, scenario, drop_inertia=drop_inertia)
    phase = np.where(np.arange(len(times)) <= junction, 1, 2)
    return Trajectory(
        times=times,
        q0=q0,
        q0_dot=q0_dot,
        q1=q1,
        pressure=pressure.primary,
        pressure_check=pressure.check,
        pressure_mismatch=pressure.mismatch,
        phase=phase,
        provenance=provenance,
        oracle_gap=oracle_gap,
        warnings=warnings,
    )


def closed_form_trajectory(
    spec: CubicSpec,
    materials: MaterialParams,
    scenario: SettlingScenario,
    backend: Backend = "paper",
    samples: int = 2000,
    critical_band: float = CRITICAL_BAND,
) -> Trajectory:
    """Sampled closed-form response with Q1 and P recovered."""
    rc = reduced_coefficients(spec, materials, backend)
    mc = cubic_macro_coefficients(spec, materials, backend)
    settling, post = solve_phases(rc, scenario, critical_band)
    times, junction = sample_times(scenario, samples)
    q0 = np.empty_like(times)
    q0_dot = np.empty_like(times)
    q0_ddot = np.empty_like(times)
    head = slice(0, junction + 1)
    tail = slice(junction + 1, None)
    q0[head], q0_dot[head], q0_ddot[head] = settling.evaluate(times[head])
    q0[tail], q0_dot[tail], q0_ddot[tail] = post.evaluate(times[tail])
    warnings = tuple(w for w in (scenario.scale_warning(spec),) if w)
    return _assemble(times, junction, q0, q0_dot, q0_ddot, mc, scenario, "closed-form", None, warnings)


def closed_form_oracle_gap(
    rc: ReducedCoefficients,
    scenario: SettlingScenario,
    target: float = 1e-9,
    dt0: float | None = None,
    critical_band: float = CRITICAL_BAND,
) -> float:
    """Sup-norm gap between the closed forms and the converged integrator
    over [0, t_f], relative to the trajectory sup-norm."""
    settling, post = solve_phases(rc, scenario, critical_band)
    forcing = strain_forcing(rc.gamma0, rc.gamma1, scenario)
    problem = LinearOdeProblem(
        order=2,
        alpha=rc.alpha0,
        beta=rc.beta0,
        forcing=forcing,
        initial=(0.0, 0.0),
        t_start=0.0,
        t_end=scenario.t_f,
        dt=dt0 if dt0 is not None else scenario.t0 / 100.0,
    )
    result = halve_until_converged(problem, target=target)
    before = result.times <= scenario.t0
    q_cf = np.empty_like(result.times)
    q_cf[before] = settling.evaluate(result.times[before])[0]
    q_cf[~before] = post.evaluate(result.times[~before])[0]
    scale = float(np.max(np.abs(result.q)))
    gap = float(np.max(np.abs(q_cf - result.q)))
    return gap / scale if scale > 0.0 else gap


def homogenized_oracle_gap(
    hc: HomogenizedCoefficients,
    scenario: SettlingScenario,
    target: float = 1e-9,
    dt0: float | None = None,
) -> float:
    """Same check for the first-order limit model."""
    settling, post = homogenized_solutions(hc, scenario)
    forcing = strain_forcing(hc.gamma0, hc.gamma1, scenario)
    problem = LinearOdeProblem(
        order=1,
        alpha=hc.alpha0,
        beta=hc.beta0,
        forcing=forcing,
        initial=(0.0,),
        t_start=0.0,
        t_end=scenario.t_f,
        dt=dt0 if dt0 is not None else scenario.t0 / 100.0,
    )
    result = halve_until_converged(problem, target=target)
    before = result.times <= scenario.t0
    q_cf = np.empty_like(result.times)
    q_cf[before] = settling.evaluate(result.times[before])[0]
    q_cf[~before] = post.evaluate(result.times[~before])[0]
    scale = float(np.max(np.abs(result.q)))
    gap = float(np.max(np.abs(q_cf - result.q)))
    return gap / scale if scale > 0.0 else gap


def count_sign_changes(values: np.ndarray) -> int:
    """Strict sign alternations, ignoring exact zeros."""
    signs = np.sign(np.asarray(values, dtype=float))
    signs = signs[signs != 0.0]
    if signs.size < 2:
        return 0
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def deviation_sign_changes(values, limit: float, floor_rel: float = 1e-12) -> int:
    """Sign alternations of values - limit with sub-roundoff noise snapped
    to zero.

    Oscillation shows up as the transient alternating around the settled
    value, not as the raw signal crossing zero, so the count is taken on
    the deviation; deviations below floor_rel times the signal scale are
    treated as exact zeros to keep last-bit noise from registering.
    """
    values = np.asarray(values, dtype=float)
    dev = values - limit
    scale = max(abs(limit), float(np.max(np.abs(values))) if values.size else 0.0)
    if scale > 0.0:
        dev = np.where(np.abs(dev) <= floor_rel * scale, 0.0, dev)
    return count_sign_changes(dev)


@dataclass(frozen=True)
class ConstantsAudit:
    """Published integration constants evaluated verbatim vs the engine.

    The published settling pair (a1, a2) is plugged into the settling
    solution and its start defects |Q0(0)|, |Q0'(0)| are reported; the
    published post pair (b1, b2) is checked for value/slope continuity at
    t0 against the published settling curve; the published transient
    amplitude a3 of the first-order limit is checked at t=0.  Complex
    entries appear in the oscillatory class where the root gap is
    imaginary.  The derived_* defects repeat the checks for the
    engine-fitted constants and are zero up to roundoff by construction.
    No judgement is attached: the numbers are the report.
    """

    backend: Backend
    regime: Mode
    published_a1: complex
    published_a2: complex
    published_start_value_defect: float
    published_start_slope_defect: float
    published_b1: complex
    published_b2: complex
    published_junction_value_defect: float
    published_junction_slope_defect: float
    published_a3: float
    published_a3_start_defect: float
    derived_start_value_defect: float
    derived_start_slope_defect: float
    derived_junction_value_defect: float
    derived_junction_slope_defect: float
    derived_a3_start_defect: float


def audit_published_constants(
    rc: ReducedCoefficients,
    scenario: SettlingScenario,
    critical_band: float = CRITICAL_BAND,
) -> ConstantsAudit:
    """Evaluate the published constant formulas and report their defects.

    Raises RegimeError in the critical band: the published formulas carry
    the root gap sqrt(alpha0^2 - 4 beta0) in denominators and are
    undefined at the repeated root.
    """
    mode = _classify_mode(rc.alpha0, rc.beta0, critical_band)
    if mode == CRITICAL:
        raise RegimeError(
            "published constant formulas divide by the root gap and are undefined at critical damping"
        )
    al, be, ga, g1 = rc.alpha0, rc.beta0, rc.gamma0, rc.gamma1
    eta, t0 = scenario.eta, scenario.t0
    sq = cmath.sqrt(complex(rc.discriminant))
    r1, r2 = rc.roots()
    gg = ga * al - be * g1
    a1 = eta * (al * al * ga - 2.0 * be * ga - al * be * g1 - sq * gg) / (2.0 * be * be * t0 * sq)
    a2 = eta * (-2.0 * be * ga + (al + sq) * gg) / (2.0 * be * be * t0 * sq)
    pc, ps = _affine_particular(al, be, -eta * g1 / t0, -eta * ga / t0)
    start_value = pc + a1 + a2
    start_slope = ps + a1 * r1 + a2 * r2

    k = al * ga / be - g1
    b1 = 2.0 * ga - k * (-al + sq)
    b2 = -2.0 * ga + k * (-al - sq)
    pref = eta / (2.0 * be * t0 * sq)
    decay1, decay2 = cmath.exp(r1 * t0), cmath.exp(r2 * t0)
    # published settling curve at t0 and the published post curve at t0;
    # both carry the same a1/a2 tail terms
    settle_value = pc + ps * t0 + a1 * decay1 + a2 * decay2
    settle_slope = ps + a1 * r1 * decay1 + a2 * r2 * decay2
    post_value = -eta * ga / be + pref * (b1 + b2) + a1 * decay1 + a2 * decay2
    post_slope = pref * (b1 * r1 + b2 * r2) + a1 * r1 * decay1 + a2 * r2 * decay2

    a3 = eta * (al * ga / (be * be * t0) - g1 / (be * t0))
    # published limit solution: -eta (gamma0/beta0) t/t0 + a3 (1 - e^(-t beta0/alpha0));
    # at t = 0 the ramp and the transient factor both vanish regardless of a3
    a3_start = -eta * (ga / be) * (0.0 / t0) + a3 * (1.0 - math.exp(-(be / al) * 0.0))

    settling, post = solve_phases(rc, scenario, critical_band)
    d_q0, d_qd0, _ = settling.evaluate(0.0)
    s_q, s_qd, _ = settling.evaluate(t0)
    p_q, p_qd, _ = post.evaluate(t0)
    rate = be / al
    h_settling = _build_phase(
        "homogenized-settling", RELAXATION, 1, al, be,
        (complex(-rate), complex(-rate)),
        -eta * g1 / t0, -eta * ga / t0,
        value=0.0, slope=0.0, t_offset=0.0, t_start=0.0, t_end=t0,
    )
    h_q0 = h_settling.evaluate(0.0)[0]

    return ConstantsAudit(
        backend=rc.backend,
        regime=mode,
        published_a1=a1,
        published_a2=a2,
        published_start_value_defect=abs(start_value),
        published_start_slope_defect=abs(start_slope),
        published_b1=b1,
        published_b2=b2,
        published_junction_value_defect=abs(post_value - settle_value),
        published_junction_slope_defect=abs(post_slope - settle_slope),
        published_a3=a3,
        published_a3_start_defect=abs(a3_start),
        derived_start_value_defect=abs(float(d_q0)),
        derived_start_slope_defect=abs(float(d_qd0)),
        derived_junction_value_defect=abs(float(p_q) - float(s_q)),
        derived_junction_slope_defect=abs(float(p_qd) - float(s_qd)),
        derived_a3_start_defect=abs(float(h_q0)),
    )


FAST_BRANCH_NOTE = (
    "the fast root diverges as the cell shrinks and its branch has no counterpart in the "
    "first-order limit model; its coefficient vanishes with the cell size, so the branch "
    "is unobservable away from the initial instant"
)


@dataclass(frozen=True)
class LimitRow:
    """Convergence measures at one cell size."""

    l0: float
    fast_root: float
    slow_root: float
    root_gap: float
    supnorm_gap: float
    a2_gap: float
    fast_branch_supnorm: float


@dataclass(frozen=True)
class LimitReport:
    """Small-cell convergence study against the first-order limit.

    root_gap: |slow root + beta0/alpha0| (the limit rate).
    supnorm_gap: sup |Q0_full - Q0_limit| over the settling phase.
    a2_gap: relative gap between the engine's slow-branch coefficient and
        the limit model's transient coefficient.
    fast_branch_supnorm: sup of the fast-branch term over the late
        settling window [0.1 t0, t0].
    Fitted orders are log-log slopes over the sequence.
    """

    backend: Backend
    rows: tuple[LimitRow, ...]
    slow_root_limit: float
    fitted_order_root: float
    fitted_order_supnorm: float
    note: str = FAST_BRANCH_NOTE


def _limit_row(
    l0: float,
    materials: MaterialParams,
    g: float,
    h: float,
    scenario: SettlingScenario,
    backend: Backend,
    rate: float,
    h_values: np.ndarray,
    a3: float,
    a3_scale: float,
    times: np.ndarray,
    late: float,
) -> LimitRow:
    rc = reduced_coefficients(CubicSpec(l0=l0, g=g, h=h), materials, backend)
    mode = _classify_mode(rc.alpha0, rc.beta0, CRITICAL_BAND)
    if mode != OVERDAMPED:
        raise ValidationError(
            f"l0={l0} is {mode}; the convergence study needs the overdamped class "
            "(below the critical cell size)"
        )
    settling, _ = solve_phases(rc, scenario)
    fast, slow = settling.roots[0].real, settling.roots[1].real
    gap = float(np.max(np.abs(settling.evaluate(times)[0] - h_values)))
    return LimitRow(
        l0=l0,
        fast_root=fast,
        slow_root=slow,
        root_gap=abs(slow + rate),
        supnorm_gap=gap,
        a2_gap=abs(settling.c2 - (-a3)) / a3_scale,
        # |c1 e^(fast t)| is largest at the window's left edge
        fast_branch_supnorm=abs(settling.c1) * math.exp(fast * late),
    )


def asymptotic_limit_report(
    materials: MaterialParams,
    g: float,
    h: float,
    scenario: SettlingScenario,
    l0_sequence: tuple[float, ...],
    backend: Backend = "paper",
    samples: int = 2000,
    jobs: int = 1,
) -> LimitReport:
    """Quantify convergence of the full model to the first-order limit.

    Needs at least three strictly decreasing positive cell sizes, all in
    the overdamped class (the oscillatory class has no small-cell limit
    to converge to); otherwise a ValidationError names the offender.
    Rows are independent; with jobs > 1 they are evaluated by a worker
    pool and collected into their sequence slots, so the report is
    deterministic either way.
    """
    seq = tuple(float(v) for v in l0_sequence)
    if len(seq) < 3:
        raise ValidationError(f"need at least 3 cell sizes to fit an order, got {len(seq)}")
    if any(not (v > 0.0 and math.isfinite(v)) for v in seq):
        raise ValidationError(f"cell sizes must be positive and finite, got {seq}")
    if any(b >= a for a, b in zip(seq, seq[1:])):
        raise ValidationError(f"cell sizes must be strictly decreasing, got {seq}")

    hc = homogenized_coefficients(CubicSpec(l0=seq[-1], g=g, h=h), materials, backend)
    rate = hc.relaxation_rate
    h_settling, _ = homogenized_solutions(hc, scenario)
    a3 = hc.settling_transient(scenario.eta, scenario.t0)
    a3_scale = abs(a3) if a3 != 0.0 else 1.0
    times = np.linspace(0.0, scenario.t0, samples)
    late = 0.1 * scenario.t0
    shared = (materials, g, h, scenario, backend, rate, h_settling.evaluate(times)[0],
              a3, a3_scale, times, late)

    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor, as_completed

        rows: list[LimitRow | None] = [None] * len(seq)
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(_limit_row, l0, *shared): i for i, l0 in enumerate(seq)}
            for future in as_completed(futures):
                rows[futures[future]] = future.result()
    else:
        rows = [_limit_row(l0, *shared) for l0 in seq]

    log_l0 = np.log([r.l0 for r in rows])

    def fitted_order(values) -> float:
        vals = np.asarray(values, dtype=float)
        if np.any(vals <= 0.0):
            return math.nan
        return float(np.polyfit(log_l0, np.log(vals), 1)[0])

    return LimitReport(
        backend=backend,
        rows=tuple(rows),
        slow_root_limit=-rate,
        fitted_order_root=fitted_order([r.root_gap for r in rows]),
        fitted_order_supnorm=fitted_order([r.supnorm_gap for r in rows]),
    )
