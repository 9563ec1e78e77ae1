"""The Kepler system: H = p^2/2 - gamma/|q| on R^6.

Conserved set: the momentum vector M = p x q, the Lenz vector
A = p x M + gamma q/|q|, and the energy H.  The map (p, q) -> (M, A, H)
projects phase space onto a five-dimensional Poisson manifold whose level
surfaces of H are classified by the sign of the energy.

Sign constants.  With the chart convention {p_i, q_j} = +delta_ij the
bracket relations come out as

    {M_i, M_j} = eps_ijk M_k,   {M_i, A_j} = eps_ijk A_k,
    {A_i, A_j} = LENZ_LENZ_SIGN * 2 H eps_ijk M_k,

and direct expansion gives the quadratic relation

    (A, A) = gamma^2 + QUADRATIC_RELATION_SIGN * 2 (M, M) H.

Both constants were determined by a bootstrap evaluation (see the test
suite, which recomputes and asserts them) and are frozen here.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .config import TOL
from .errors import SingularChartPoint
from .integrate import (
    FLAG_COLLISION,
    ConservationReport,
    Trajectory,
    adaptive,
    monitor,
    rk4,
)
from .poisson import Observable, chart_canonical

__all__ = [
    "QUADRATIC_RELATION_SIGN",
    "LENZ_LENZ_SIGN",
    "KeplerState",
    "P5Point",
    "EnergyRegime",
    "LevelSurface",
    "kepler_chart",
    "kepler_observables",
    "hamiltonian",
    "project_to_p5",
    "classify_level_surface",
    "orbit_conservation_report",
    "radial_period",
]

QUADRATIC_RELATION_SIGN = +1
LENZ_LENZ_SIGN = -1


@dataclass(frozen=True)
class KeplerState:
    """Phase-space point (p, q) with coupling gamma > 0; |q| > 0 required."""

    p: np.ndarray
    q: np.ndarray
    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float).reshape(3))
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float).reshape(3))
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if np.linalg.norm(self.q) <= TOL.collision_radius:
            raise SingularChartPoint("state at the collision locus |q| = 0")

    def as_point(self) -> np.ndarray:
        return np.concatenate([self.p, self.q]).astype(complex)


@dataclass(frozen=True)
class P5Point:
    """Image of a state under the projection (p, q) -> (M, A, H).

    (M, A) = 0 holds identically and is enforced here; the quadratic
    relation (A, A) = gamma^2 + QUADRATIC_RELATION_SIGN * 2 (M, M) H needs
    the coupling and is asserted by the callers that know it.
    """

    M: np.ndarray
    A: np.ndarray
    H: float

    def __post_init__(self):
        scale = max(1.0, float(np.abs(self.M).max()), float(np.abs(self.A).max()))
        if abs(float(self.M @ self.A)) > 1e-10 * scale ** 2:
            raise ValueError("(M, A) must vanish")


class EnergyRegime(enum.Enum):
    NEGATIVE_ENERGY = "negative"
    ZERO_ENERGY = "zero"
    POSITIVE_ENERGY = "positive"


@dataclass(frozen=True)
class LevelSurface:
    """Symplectic leaf of the reduced space at fixed energy E.

    E < 0: product of two spheres, both of radius gamma/sqrt(2|E|), split by
    the combinations M -+ A/sqrt(2|E|).
    E = 0: tangent bundle of a sphere of radius gamma, (A, A) = gamma^2.
    E > 0: hyperboloid leaf cut out by (M, A) = 0 and the quadratic relation
    restated as (A, A) - 2E (M, M) = gamma^2; no sphere radius applies.
    """

    regime: EnergyRegime
    energy: float
    gamma: float
    sphere_radius: float = None


def hamiltonian(p, q, gamma: float) -> float:
    r = np.linalg.norm(q)
    if r <= TOL.collision_radius:
        raise SingularChartPoint("collision: |q| below threshold")
    return 0.5 * float(np.dot(p, p)) - gamma / r


def _momentum(p, q):
    return np.cross(p, q)


def _lenz(p, q, gamma):
    return np.cross(p, _momentum(p, q)) + gamma * q / np.linalg.norm(q)


def kepler_chart():
    """Canonical chart on R^6, coordinates (p1, p2, p3, q1, q2, q3)."""
    return chart_canonical(3)


def kepler_observables(gamma: float):
    """Observables M1..M3, A1..A3, H on the canonical chart, exact gradients."""

    def split(z):
        return np.real(z[:3]), np.real(z[3:])

    obs = []
    for k in range(3):
        def m_fn(z, k=k):
            p, q = split(z)
            return complex(_momentum(p, q)[k])

        def m_grad(z, k=k):
            p, q = split(z)
            g = np.zeros(6, dtype=complex)
            # M_k = eps_kab p_a q_b
            for a in range(3):
                for b in range(3):
                    e = _eps(k, a, b)
                    if e:
                        g[a] += e * q[b]
                        g[3 + b] += e * p[a]
            return g

        obs.append(Observable(name=f"M{k + 1}", fn=m_fn, grad=m_grad))

    for k in range(3):
        def a_fn(z, k=k):
            p, q = split(z)
            return complex(_lenz(p, q, gamma)[k])

        def a_grad(z, k=k):
            p, q = split(z)
            r = np.linalg.norm(q)
            g = np.zeros(6, dtype=complex)
            # A = p (p.q) - q |p|^2 + gamma q / |q|
            pq = p @ q
            for l in range(3):
                g[l] = (k == l) * pq + p[k] * q[l] - 2.0 * p[l] * q[k]
                g[3 + l] = (p[k] * p[l] - (k == l) * (p @ p)
                            + gamma * ((k == l) / r - q[k] * q[l] / r ** 3))
            return g

        obs.append(Observable(name=f"A{k + 1}", fn=a_fn, grad=a_grad))

    def h_fn(z):
        p, q = split(z)
        return complex(hamiltonian(p, q, gamma))

    def h_grad(z):
        p, q = split(z)
        r = np.linalg.norm(q)
        return np.concatenate([p, gamma * q / r ** 3]).astype(complex)

    obs.append(Observable(name="H", fn=h_fn, grad=h_grad))
    return obs


def _eps(i, j, k):
    return (i - j) * (j - k) * (k - i) // 2


def project_to_p5(state: KeplerState) -> P5Point:
    """(p, q) -> (M, A, H).  (M, A) = 0 holds identically."""
    p, q, gamma = state.p, state.q, state.gamma
    return P5Point(
        M=_momentum(p, q),
        A=_lenz(p, q, gamma),
        H=hamiltonian(p, q, gamma),
    )


def classify_level_surface(E: float, gamma: float = 1.0) -> LevelSurface:
    """Classify the energy-E leaf of the reduced five-dimensional space."""
    if E < 0:
        return LevelSurface(EnergyRegime.NEGATIVE_ENERGY, E, gamma,
                            sphere_radius=gamma / np.sqrt(2.0 * abs(E)))
    if E == 0:
        return LevelSurface(EnergyRegime.ZERO_ENERGY, E, gamma,
                            sphere_radius=gamma)
    return LevelSurface(EnergyRegime.POSITIVE_ENERGY, E, gamma)


def _collision_guard(z) -> str:
    if np.linalg.norm(np.real(z[3:])) < TOL.collision_radius:
        return FLAG_COLLISION
    return None


def orbit_conservation_report(state0: KeplerState, t_max: float,
                              tol: float = 1e-10) -> ConservationReport:
    """Integrate the orbit adaptively and report drifts of M, A, H.

    The report flags a collision if the orbit reaches |q| = 0 (integration is
    truncated there).  The frozen sign constants are appended to the flags
    for the record.
    """
    chart = kepler_chart()
    obs = kepler_observables(state0.gamma)
    H = obs[-1]
    traj = adaptive(chart, H, state0.as_point(), t_max, tol,
                    guard=_collision_guard)
    report = monitor(traj, obs)
    report.flags = report.flags + (
        f"quadratic-relation-sign:{QUADRATIC_RELATION_SIGN:+d}",
        f"lenz-lenz-sign:{LENZ_LENZ_SIGN:+d}",
    )
    return report


def integrate_orbit(state0: KeplerState, t_max: float,
                    tol: float = 1e-10) -> Trajectory:
    chart = kepler_chart()
    H = kepler_observables(state0.gamma)[-1]
    return adaptive(chart, H, state0.as_point(), t_max, tol,
                    guard=_collision_guard)


def radial_period(state0: KeplerState, t_max: float, dt: float = None) -> float:
    """Radial period detected from sign changes of p.q along a fine rk4 orbit.

    Uses successive downward-to-upward crossings of the apsis function
    p.q = d(|q|^2)/dt / 2, refined by linear interpolation on a dense grid.
    Only meaningful for bound orbits.
    """
    E = project_to_p5(state0).H
    if E >= 0:
        raise ValueError("radial period needs a bound orbit (E < 0)")
    T_est = 2.0 * np.pi * state0.gamma / (2.0 * abs(E)) ** 1.5
    if dt is None:
        dt = T_est / 4000.0
    chart = kepler_chart()
    H = kepler_observables(state0.gamma)[-1]
    traj = rk4(chart, H, state0.as_point(), min(t_max, 2.5 * T_est), dt,
               guard=_collision_guard)
    ts = traj.times
    pq = np.real(np.einsum("ij,ij->i", traj.states[:, :3], traj.states[:, 3:]))
    crossings = []
    for i in range(1, len(ts)):
        if pq[i - 1] < 0.0 <= pq[i]:
            frac = -pq[i - 1] / (pq[i] - pq[i - 1])
            crossings.append(ts[i - 1] + frac * (ts[i] - ts[i - 1]))
    if len(crossings) < 2:
        raise RuntimeError("fewer than two perihelion passages detected")
    return crossings[1] - crossings[0]
