"""Adaptive stiff integrator: a linearly implicit Rosenbrock 2(3) pair.

This is the modified Rosenbrock method of Shampine and Reichelt (the
method class behind MATLAB's ode23s): an L-stable second-order step
with an embedded third-order error estimate.  Each step factors
W = I - h d J once and performs three triangular solves, so the cost
per step is one Jacobian, one LU, and three or four right-hand-side
evaluations.  Accepted nodes store the state derivative, which gives a
free cubic Hermite interpolant for dense output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

_D = 1.0 / (2.0 + math.sqrt(2.0))
_E32 = 6.0 + math.sqrt(2.0)
_EPS = float(np.finfo(float).eps)

# Step size controller limits (standard safety-factor controller).
_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


class StepSizeUnderflow(RuntimeError):
    """The controller drove the step below the representable minimum."""


class NonFiniteState(RuntimeError):
    """The right-hand side or the state became NaN/Inf."""


class OutOfRange(ValueError):
    """A query time lies outside the integrated span."""


@dataclass
class IntegratorStats:
    n_steps: int = 0
    n_rejected: int = 0
    n_rhs: int = 0
    n_jac: int = 0
    n_lu: int = 0


@dataclass(eq=False)
class Trajectory:
    """Adaptive-step solution: states and derivatives at accepted nodes."""

    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    stats: IntegratorStats = field(default_factory=IntegratorStats)


def _fd_jacobian(rhs, t, y, f0, thresh, stats):
    n = y.size
    jac = np.empty((n, n))
    dy = math.sqrt(_EPS) * np.maximum(np.abs(y), thresh)
    for j in range(n):
        yp = y.copy()
        yp[j] += dy[j]
        jac[:, j] = (np.asarray(rhs(t, yp)) - f0) / dy[j]
        stats.n_rhs += 1
    return jac


def _initial_step(rhs, t0, y0, f0, tf, rtol, atol, stats):
    """Starting step heuristic based on the first two derivative samples."""
    span = tf - t0
    scale = atol + rtol * np.abs(y0)
    d0 = np.linalg.norm(y0 / scale) / math.sqrt(max(y0.size, 1))
    d1 = np.linalg.norm(f0 / scale) / math.sqrt(max(y0.size, 1))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = np.asarray(rhs(t0 + h0, y0 + h0 * f0))
    stats.n_rhs += 1
    d2 = np.linalg.norm((f1 - f0) / scale) / math.sqrt(max(y0.size, 1)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, 1e-3 * h0)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 3.0)
    return min(100.0 * h0, h1, span)


def integrate(rhs, x0, t0: float, tf: float, rtol: float = 1e-3,
              atol: float = 1e-6, jacobian=None, first_step: float | None = None,
              max_steps: int = 1_000_000) -> Trajectory:
    """Integrate x' = rhs(t, x) from t0 to tf with embedded error control.

    Parameters
    ----------
    rhs : callable(t, x) -> array
        Right-hand side.
    x0 : array
        Initial state (finite).
    t0, tf : float
        Time span, tf > t0.
    rtol, atol : float
        Local error is controlled to atol + rtol*|x| componentwise.
        Defaults match the tolerances the experiments were run with.
    jacobian : callable(t, x) -> matrix, optional
        State Jacobian.  Approximated by forward differences when
        absent.
    first_step : float, optional
        Override the automatic starting step.

    Raises
    ------
    StepSizeUnderflow
        When stiffness or an unresolvable discontinuity drives the step
        below 16*eps*max(|t|, |tf|).
    NonFiniteState
        When the state or right-hand side blows up.
    """
    if not (tf > t0):
        raise ValueError(f"need tf > t0, got [{t0}, {tf}]")
    if rtol <= 0.0 or atol <= 0.0:
        raise ValueError("rtol and atol must be positive")
    y = np.array(x0, dtype=float).ravel()
    if not np.all(np.isfinite(y)):
        raise ValueError("initial state has non-finite entries")

    stats = IntegratorStats()
    thresh = atol / rtol
    t = t0
    f0 = np.asarray(rhs(t, y), dtype=float)
    stats.n_rhs += 1
    if not np.all(np.isfinite(f0)):
        raise NonFiniteState(f"rhs not finite at t={t}")

    h = first_step if first_step is not None else _initial_step(
        rhs, t0, y, f0, tf, rtol, atol, stats)

    times = [t]
    states = [y.copy()]
    derivs = [f0.copy()]

    while t < tf:
        if stats.n_steps + stats.n_rejected >= max_steps:
            raise RuntimeError(f"exceeded {max_steps} steps at t={t}")
        hmin = 16.0 * _EPS * max(abs(t), abs(tf))
        remaining = tf - t

        if jacobian is not None:
            jac = np.asarray(jacobian(t, y), dtype=float)
            stats.n_jac += 1
        else:
            jac = _fd_jacobian(rhs, t, y, f0, thresh, stats)
            stats.n_jac += 1
        if not np.all(np.isfinite(jac)):
            raise NonFiniteState(f"jacobian not finite at t={t}")

        # numerical df/dt, needed by the Rosenbrock formulas for
        # non-autonomous systems
        tdelta = math.sqrt(_EPS) * max(abs(t), abs(h))
        ft = (np.asarray(rhs(t + tdelta, y)) - f0) / tdelta
        stats.n_rhs += 1
        if not np.all(np.isfinite(ft)):
            raise NonFiniteState(f"rhs not finite near t={t}")

        rejected_here = False
        nonfinite_seen = False
        while True:
            h_use = min(h, remaining)
            clamped = h_use >= remaining
            if h_use < hmin:
                if nonfinite_seen:
                    raise NonFiniteState(
                        f"state blew up near t={t} (step underflow)")
                raise StepSizeUnderflow(f"step size {h_use:.3e} below "
                                        f"{hmin:.3e} at t={t}")

            w = np.eye(y.size) - (h_use * _D) * jac
            try:
                lu = lu_factor(w)
            except np.linalg.LinAlgError:
                lu = None
            stats.n_lu += 1
            if lu is None:
                errnorm = math.inf
            else:
                hdt = (h_use * _D) * ft
                k1 = lu_solve(lu, f0 + hdt)
                f1 = np.asarray(rhs(t + 0.5 * h_use, y + (0.5 * h_use) * k1))
                k2 = lu_solve(lu, f1 - k1) + k1
                ynew = y + h_use * k2
                f2 = np.asarray(rhs(t + h_use, ynew))
                k3 = lu_solve(lu, f2 - _E32 * (k2 - f1) - 2.0 * (k1 - f0) + hdt)
                stats.n_rhs += 2
                err = (h_use / 6.0) * (k1 - 2.0 * k2 + k3)
                scale = atol + rtol * np.maximum(np.abs(y), np.abs(ynew))
                with np.errstate(invalid="ignore"):
                    errnorm = float(np.max(np.abs(err) / scale))
                if not math.isfinite(errnorm):
                    errnorm = math.inf

            if errnorm <= 1.0:
                stats.n_steps += 1
                t = tf if clamped else t + h_use
                y = ynew
                f0 = f2
                if not np.all(np.isfinite(f0)):
                    raise NonFiniteState(f"rhs not finite at t={t}")
                times.append(t)
                states.append(y.copy())
                derivs.append(f0.copy())
                if errnorm == 0.0:
                    factor = _MAX_FACTOR
                else:
                    factor = min(_MAX_FACTOR, max(
                        _MIN_FACTOR, _SAFETY * errnorm ** (-1.0 / 3.0)))
                if rejected_here:
                    factor = min(factor, 1.0)
                h = h_use * factor
                break

            stats.n_rejected += 1
            rejected_here = True
            if errnorm == math.inf:
                nonfinite_seen = True
                factor = 0.1
            else:
                factor = min(0.9, max(0.1, _SAFETY * errnorm ** (-1.0 / 3.0)))
            h = h_use * factor

    return Trajectory(times=np.array(times), states=np.array(states),
                      derivs=np.array(derivs), stats=stats)


def sample(traj: Trajectory, query_times) -> np.ndarray:
    """States at the query times, by cubic Hermite interpolation.

    Queries must lie within the integrated span; a query at a stored
    node returns the stored state exactly.
    """
    q = np.atleast_1d(np.asarray(query_times, dtype=float))
    dim = traj.states.shape[1]
    if q.size == 0:
        return np.empty((0, dim))
    t = traj.times
    if q.min() < t[0] or q.max() > t[-1]:
        raise OutOfRange(f"queries must lie in [{t[0]}, {t[-1]}]")

    idx = np.clip(np.searchsorted(t, q, side="right") - 1, 0, len(t) - 2)
    tl = t[idx]
    hseg = t[idx + 1] - tl
    s = (q - tl) / hseg
    s2 = s * s
    s3 = s2 * s
    h00 = 2.0 * s3 - 3.0 * s2 + 1.0
    h10 = s3 - 2.0 * s2 + s
    h01 = -2.0 * s3 + 3.0 * s2
    h11 = s3 - s2
    return (h00[:, None] * traj.states[idx]
            + (hseg * h10)[:, None] * traj.derivs[idx]
            + h01[:, None] * traj.states[idx + 1]
            + (hseg * h11)[:, None] * traj.derivs[idx + 1])
