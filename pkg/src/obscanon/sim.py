"""Fixed-step RK4 simulation of a plant driven by a Luenberger observer."""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, ShapeError, UndefinedRateError


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled plant/observer run.

    ``errors`` holds the integrated estimation error ``x - xhat`` and
    ``error_norms`` its Euclidean norms.  For unstable plants these are far
    more accurate than ``states - estimates``, which cancels catastrophically
    once ``|x|`` dwarfs the error.
    """

    dt: float
    times: np.ndarray
    states: np.ndarray
    estimates: np.ndarray
    error_norms: np.ndarray
    errors: np.ndarray | None = None

    def __len__(self):
        return self.times.size

    def write_csv(self, fh):
        """Write ``t,err_norm,x_1..x_n,xhat_1..xhat_n`` rows to an open text file."""
        n = self.states.shape[1]
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(
            ["t", "err_norm"]
            + [f"x_{i + 1}" for i in range(n)]
            + [f"xhat_{i + 1}" for i in range(n)]
        )
        for k in range(len(self)):
            vals = [self.times[k], self.error_norms[k], *self.states[k], *self.estimates[k]]
            w.writerow([format(float(v), ".17g") for v in vals])


def rk4_step(f, x, h):
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _integrate(f, z0, dt, steps):
    out = np.empty((steps + 1, z0.size))
    out[0] = z0
    z = z0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, steps + 1):
            z = rk4_step(f, z, dt)
            if not np.all(np.isfinite(z)):
                raise DivergenceError(k)
            out[k] = z
    return out


def _check(sys, L, dt, steps, *vecs):
    if not dt > 0:
        raise ValueError("dt must be positive")
    if steps < 1:
        raise ValueError("steps must be at least 1")
    L = np.asarray(L, dtype=np.float64).reshape(-1)
    if L.size != sys.n:
        raise ShapeError(f"gain has {L.size} entries, system order is {sys.n}")
    out = []
    for v in vecs:
        v = np.asarray(v, dtype=np.float64).reshape(-1)
        if v.size != sys.n:
            raise ShapeError(f"initial vector has {v.size} entries, expected {sys.n}")
        out.append(v)
    return L, out


def simulate(sys, L, x0, xhat0, dt, steps):
    """Integrate ``x' = A x`` and ``xhat' = (A - L C) xhat + L C x`` with u = 0.

    The coupled system is stepped in the coordinates ``(x, e)`` with
    ``e = x - xhat`` and ``e' = (A - L C) e``; RK4 commutes with this linear
    change of variables, so the iterates are those of the ``(x, xhat)``
    system, but the error keeps full relative precision when the plant
    grows.  Returns ``steps + 1`` samples starting at t = 0.
    """
    L, (x0, xhat0) = _check(sys, L, dt, steps, x0, xhat0)
    n = sys.n
    A = np.asarray(sys.A)
    Acl = A - np.outer(L, np.asarray(sys.C).reshape(-1))

    def f(z):
        return np.concatenate((A @ z[:n], Acl @ z[n:]))

    z = _integrate(f, np.concatenate((x0, x0 - xhat0)), dt, steps)
    states, errors = z[:, :n], z[:, n:]
    return Trajectory(
        dt=float(dt),
        times=dt * np.arange(steps + 1),
        states=states,
        estimates=states - errors,
        error_norms=np.linalg.norm(errors, axis=1),
        errors=errors,
    )


def simulate_error(sys, L, e0, dt, steps):
    """Integrate the error dynamics ``e' = (A - L C) e`` directly."""
    L, (e0,) = _check(sys, L, dt, steps, e0)
    Acl = np.asarray(sys.A) - np.outer(L, np.asarray(sys.C).reshape(-1))
    return _integrate(lambda e: Acl @ e, e0, dt, steps)


def estimate_decay_rate(traj, t_start=None, t_end=None):
    """Least-squares slope of ``log(err_norm)`` against time.

    The window defaults to the second half of the trajectory.
    """
    t = traj.times
    if t_start is None:
        t_start = t[0] + 0.5 * (t[-1] - t[0])
    if t_end is None:
        t_end = t[-1]
    if not t_start < t_end:
        raise ValueError("t_start must precede t_end")
    tol = 1e-9 * traj.dt
    mask = (t >= t_start - tol) & (t <= t_end + tol)
    if mask.sum() < 2:
        raise ValueError("window holds fewer than two samples")
    e = traj.error_norms[mask]
    if np.any(e <= 0):
        raise UndefinedRateError("estimation error vanishes inside the window")
    slope, _ = np.polyfit(t[mask], np.log(e), 1)
    return float(slope)
