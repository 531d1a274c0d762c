"""Fixed-step RK4 integration with conservation monitors."""
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import numeric, realization, uspace
from .errors import NonFinite


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    monitors: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def drift(self, name, relative=True):
        """Largest deviation of a monitor from its initial value."""
        v = np.asarray(self.monitors[name])
        d = np.abs(v - v[0]).max()
        if relative:
            d /= max(1.0, np.abs(v[0]).max())
        return float(d)

    def max_drift(self, prefix, relative=True):
        names = [k for k in self.monitors if k.startswith(prefix)]
        return max((self.drift(k, relative) for k in names), default=0.0)

    def columns(self):
        d = self.states.shape[1]
        names = ["t"] + [f"x{i}" for i in range(1, d + 1)]
        return names + list(self.monitors)

    def rows(self):
        cols = [self.times[:, None], self.states]
        cols += [np.asarray(v, dtype=float).reshape(len(self.times), -1) for v in self.monitors.values()]
        return np.hstack(cols)

    def write_csv(self, fh):
        w = csv.writer(fh)
        w.writerow(self.columns())
        for row in self.rows():
            w.writerow([repr(float(v)) for v in row])


@dataclass
class PairedTrajectory:
    first: Trajectory
    second: Trajectory
    gap: np.ndarray

    @property
    def max_gap(self):
        return float(np.max(self.gap, initial=0.0))


def rk4_step(f, x, h):
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate(rhs, x0, t_end, dt, monitor=None):
    """Classical fixed-step RK4 from t = 0 to ``t_end``.

    ``monitor(x)`` returns a dict of scalars, evaluated at every stored state.
    The last step is shortened if ``t_end`` is not a multiple of ``dt``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    f = getattr(rhs, "eval", rhs)
    x = np.asarray(x0, dtype=float).copy()
    steps = math.ceil(t_end / dt - 1e-9) if t_end > 0 else 0
    times = np.empty(steps + 1)
    states = np.empty((steps + 1, x.size))
    times[0], states[0] = 0.0, x
    t = 0.0
    for k in range(1, steps + 1):
        h = min(dt, t_end - t)
        with np.errstate(over="ignore", invalid="ignore"):
            x = rk4_step(f, x, h)
        if not np.all(np.isfinite(x)):
            raise NonFinite(f"state became non-finite after t = {t:g}", last_time=t)
        t = t_end if k == steps else k * dt
        times[k], states[k] = t, x
    monitors = {}
    if monitor is not None:
        samples = [monitor(s) for s in states]
        for name in samples[0]:
            monitors[name] = np.array([s[name] for s in samples])
    return Trajectory(times, states, monitors)


def volterra_monitor(m, n_invariants=None, eigenvalues=True):
    k = m if n_invariants is None else n_invariants

    def monitor(u):
        out = {f"H{i}": uspace.invariant_h(u, i) for i in range(1, k + 1)}
        if eigenvalues:
            ev = numeric.eigenvalues_symmetric(uspace.lax_pair(u).L)
            out.update({f"lambda{i}": v for i, v in enumerate(ev, 1)})
        return out

    return monitor


def integrate_volterra(u0, t_end, dt, n_invariants=None):
    """Integrate the lattice and monitor H_1..H_k plus the spectrum of L.

    Signs of the u_i are preserved by the flow, so the spectrum (which needs the
    symmetric Lax form) is monitored only when u0 lies in the closed positive
    orthant; otherwise only the trace invariants are tracked.
    """
    u0 = np.asarray(u0, dtype=float)
    eig = bool(np.all(u0 >= 0))
    traj = integrate(uspace.volterra_rhs, u0, t_end, dt, volterra_monitor(u0.size, n_invariants, eig))
    traj.meta["eigenvalue_monitor"] = eig
    if not eig:
        traj.meta["eigenvalue_monitor_reason"] = "initial state off the positive orthant"
    return traj


def integrate_qp_vs_u(x0, t_end, dt):
    """chi_1 in (q, p) against the lattice flow from realize(x0); gap per step."""
    x0 = np.asarray(x0, dtype=float)
    n = x0.size // 2
    qp = integrate(realization.hamiltonian_field(n), x0, t_end, dt)
    uu = integrate(uspace.volterra_rhs, realization.realize(x0), t_end, dt)
    gap = np.array([np.abs(realization.realize(a) - b).max() for a, b in zip(qp.states, uu.states)])
    return PairedTrajectory(qp, uu, gap)


def _toda_flat(n):
    def rhs(z):
        da, db = uspace.toda_rhs(z[: n - 1], z[n - 1:])
        return np.concatenate((da, db))
    return rhs


def henon_flat(u):
    t = uspace.henon_map(u)
    return np.concatenate((t.a, t.b))


def integrate_henon_vs_u(u0, t_end, dt):
    """Toda lattice from henon(u0) against henon of the lattice trajectory."""
    u0 = np.asarray(u0, dtype=float)
    n = (u0.size + 1) // 2
    uu = integrate(uspace.volterra_rhs, u0, t_end, dt)
    toda = integrate(_toda_flat(n), henon_flat(u0), t_end, dt)
    gap = np.array([np.abs(henon_flat(a) - b).max() for a, b in zip(uu.states, toda.states)])
    return PairedTrajectory(toda, uu, gap)
