"""Fixed-step reference integrator for the reduced settling equations.

Deliberately plain: classical fourth-order Runge-Kutta with a constant
step, no adaptivity and no external solver, so results are simple to audit
and bit-reproducible.  Error control is by Richardson comparison: every
integration is run at dt and dt/2 and the maximum pointwise difference on
the coarse grid is reported as the self-consistency gap.

The forcing is affine in t on each side of a single breakpoint (the end of
settling) and may jump there in value and slope.  The step is adjusted so
the breakpoint falls exactly on the grid and the two sides are integrated
as separate stitched runs; every RK4 step then sees a smooth right-hand
side and the method keeps its full order.  The grid may extend slightly
past the requested end time to keep the steps uniform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DivergenceError, OracleConvergenceError, ValidationError

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


@dataclass(frozen=True)
class PiecewiseAffineForcing:
    """Forcing affine on each side of t_break; the breakpoint belongs to
    the "before" side, matching the convention that the settling phase owns
    its end time."""

    const_before: float
    slope_before: float
    t_break: float
    const_after: float
    slope_after: float

    @classmethod
    def constant(cls, value: float) -> "PiecewiseAffineForcing":
        return cls(value, 0.0, 0.0, value, 0.0)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(
            t <= self.t_break,
            self.const_before + self.slope_before * t,
            self.const_after + self.slope_after * t,
        )

    def jump(self) -> float:
        """Value jump across the breakpoint (after minus before)."""
        before = self.const_before + self.slope_before * self.t_break
        after = self.const_after + self.slope_after * self.t_break
        return after - before


@dataclass(frozen=True)
class LinearOdeProblem:
    """Initial value problem q'' + alpha q' + beta q = f(t), or the
    first-order variant alpha q' + beta q = f(t).

    Attributes:
        order: 1 or 2.
        alpha, beta: Constant coefficients; alpha must be nonzero for
            order 1.
        forcing: Piecewise affine right-hand side.
        initial: Initial state, (q0,) for order 1 or (q0, qdot0).
        t_start, t_end: Time span.
        dt: Requested step; the effective step aligns the forcing break to
            the grid.
    """

    order: int
    alpha: float
    beta: float
    forcing: PiecewiseAffineForcing
    initial: tuple[float, ...]
    t_start: float
    t_end: float
    dt: float

    def __post_init__(self) -> None:
        if self.order not in (1, 2):
            raise ValidationError(f"order must be 1 or 2, got {self.order}")
        if len(self.initial) != self.order:
            raise ValidationError(f"initial state needs {self.order} components, got {len(self.initial)}")
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValidationError(f"dt must be positive and finite, got {self.dt}")
        if not self.t_end > self.t_start:
            raise ValidationError(f"t_end must exceed t_start, got [{self.t_start}, {self.t_end}]")
        if self.order == 1 and self.alpha == 0.0:
            raise ValidationError("order-1 problems need alpha != 0")

    def aligned_grid(self) -> tuple[float, int, int]:
        """Effective (dt, steps_before_break, steps_after_break).

        When the breakpoint lies strictly inside the span the step is the
        nearest divisor of the first segment, so the break is a grid point;
        the second segment is rounded up to whole steps.  Otherwise the
        step divides the span exactly and one segment covers everything.
        """
        span = self.t_end - self.t_start
        tb = self.forcing.t_break
        if self.t_start < tb < self.t_end:
            n_before = max(1, round((tb - self.t_start) / self.dt))
            dt = (tb - self.t_start) / n_before
            n_after = max(1, math.ceil((self.t_end - tb) / dt - 1e-9))
            return dt, n_before, n_after
        n = max(1, round(span / self.dt))
        return span / n, n, 0


@dataclass(frozen=True)
class OracleResult:
    """Integration output on the coarse grid.

    ``states`` holds the dt/2 solution sampled at the dt grid points (the
    better of the two runs); the gap fields quantify the dt vs dt/2
    disagreement, absolute and relative to the solution sup-norm.
    """

    times: np.ndarray
    states: np.ndarray
    dt: float
    gap_abs: float
    gap_rel: float

    @property
    def q(self) -> np.ndarray:
        return self.states[:, 0]


@njit(cache=True)
def _rk4_second(q0, v0, t_start, dt, n, alpha, beta, c, s):
    out = np.empty((n + 1, 2))
    out[0, 0] = q0
    out[0, 1] = v0
    q = q0
    v = v0
    half = 0.5 * dt
    sixth = dt / 6.0
    bad = -1
    for k in range(n):
        t = t_start + k * dt
        f1 = c + s * t
        f2 = c + s * (t + half)
        f3 = c + s * (t + dt)
        k1q = v
        k1v = f1 - alpha * v - beta * q
        q2 = q + half * k1q
        v2 = v + half * k1v
        k2q = v2
        k2v = f2 - alpha * v2 - beta * q2
        q3 = q + half * k2q
        v3 = v + half * k2v
        k3q = v3
        k3v = f2 - alpha * v3 - beta * q3
        q4 = q + dt * k3q
        v4 = v + dt * k3v
        k4q = v4
        k4v = f3 - alpha * v4 - beta * q4
        q = q + sixth * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        v = v + sixth * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        out[k + 1, 0] = q
        out[k + 1, 1] = v
        if bad < 0 and not (math.isfinite(q) and math.isfinite(v)):
            bad = k + 1
            break
    return out, bad


@njit(cache=True)
def _rk4_first(q0, t_start, dt, n, alpha, beta, c, s):
    out = np.empty((n + 1, 1))
    out[0, 0] = q0
    q = q0
    half = 0.5 * dt
    sixth = dt / 6.0
    bad = -1
    for k in range(n):
        t = t_start + k * dt
        f1 = c + s * t
        f2 = c + s * (t + half)
        f3 = c + s * (t + dt)
        k1 = (f1 - beta * q) / alpha
        k2 = (f2 - beta * (q + half * k1)) / alpha
        k3 = (f2 - beta * (q + half * k2)) / alpha
        k4 = (f3 - beta * (q + dt * k3)) / alpha
        q = q + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1, 0] = q
        if bad < 0 and not math.isfinite(q):
            bad = k + 1
            break
    return out, bad


def _run_segment(problem: LinearOdeProblem, state, t_start: float, dt: float, n: int, c: float, s: float):
    if problem.order == 2:
        out, bad = _rk4_second(state[0], state[1], t_start, dt, n, problem.alpha, problem.beta, c, s)
    else:
        out, bad = _rk4_first(state[0], t_start, dt, n, problem.alpha, problem.beta, c, s)
    if bad >= 0:
        t_bad = t_start + bad * dt
        raise DivergenceError(f"non-finite state at t={t_bad!r} (step {bad} of {n})", first_bad_time=t_bad)
    return out


def _run(problem: LinearOdeProblem, dt: float, n_before: int, n_after: int) -> np.ndarray:
    fo = problem.forcing
    if n_after == 0:
        # Single segment; pick the side of the breakpoint the span lies on.
        before = problem.t_end <= fo.t_break
        c = fo.const_before if before else fo.const_after
        s = fo.slope_before if before else fo.slope_after
        return _run_segment(problem, problem.initial, problem.t_start, dt, n_before, c, s)
    first = _run_segment(problem, problem.initial, problem.t_start, dt, n_before, fo.const_before, fo.slope_before)
    second = _run_segment(problem, first[-1], fo.t_break, dt, n_after, fo.const_after, fo.slope_after)
    return np.concatenate((first, second[1:]))


def integrate(problem: LinearOdeProblem) -> OracleResult:
    """Integrate at the aligned step and at half that step.

    Returns the half-step solution on the coarse grid together with the
    Richardson gap between the two runs.  Raises DivergenceError naming the
    first time a non-finite state appeared.
    """
    dt, n_before, n_after = problem.aligned_grid()
    coarse = _run(problem, dt, n_before, n_after)
    fine = _run(problem, 0.5 * dt, 2 * n_before, 2 * n_after)[::2]
    times = problem.t_start + dt * np.arange(n_before + n_after + 1)
    gap_abs = float(np.max(np.abs(coarse - fine)))
    scale = float(np.max(np.abs(fine)))
    gap_rel = gap_abs / scale if scale > 0.0 else 0.0
    return OracleResult(times=times, states=fine, dt=dt, gap_abs=gap_abs, gap_rel=gap_rel)


def halve_until_converged(
    problem: LinearOdeProblem, target: float = 1e-10, max_halvings: int = 20
) -> OracleResult:
    """Halve the step until the relative Richardson gap is at most target.

    A trial whose step is still too coarse for stability (non-finite
    states) counts as not converged and halving continues.  After
    ``max_halvings`` halvings an OracleConvergenceError carrying the last
    gap is raised.
    """
    if not (target >= 0.0 and math.isfinite(target)):
        raise ValidationError(f"target must be a finite non-negative tolerance, got {target}")
    dt = problem.dt
    last_gap: float | None = None
    for _ in range(max_halvings + 1):
        try:
            result = integrate(replace(problem, dt=dt))
        except DivergenceError:
            last_gap = math.inf
            dt *= 0.5
            continue
        if result.gap_rel <= target:
            return result
        last_gap = result.gap_rel
        dt *= 0.5
    raise OracleConvergenceError(
        f"step halving hit the cap of {max_halvings} without reaching {target:.1e}; "
        f"last self-consistency gap {last_gap:.3e}",
        last_gap=last_gap,
    )
