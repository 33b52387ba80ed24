"""Entanglement witnesses and thermal entanglability for two-qubit populations.

The central quantity is the witness ``f(q) = 4 q1 q4 - (q2 - q3)^2`` on
population vectors ordered as (|00>, |01>, |10>, |11>).  A negative value
means some rotation inside the degenerate energy subspace produces a
negative partial transpose, i.e. the populations can be entangled without
touching the bath.  Thermal entanglability reduces to evaluating the witness
at a single distinguished extreme point of the future thermal cone, the one
with level ordering (2, 1, 3, 4).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    PI_STAR,
    BetaOrdering,
    GibbsContext,
    PopVector,
    is_two_qubit_context,
    make_context,
)
from .majorization import batch_tight_points, extreme_point, future_cone

#: strictness band around f = 0; the boundary counts as non-entanglable
TAU_F = 1e-12

#: golden-ratio conjugate, the branch point of the hot-system extreme state
PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _as_probs(q, d: int = 4) -> np.ndarray:
    a = q.probs if isinstance(q, PopVector) else np.asarray(q, dtype=float)
    if a.shape != (d,):
        raise ValueError(f"expected a length-{d} population vector, got shape {a.shape}")
    return a


def witness_f(q) -> float:
    """Witness 4 q1 q4 - (q2 - q3)^2; negative iff subspace entanglable."""
    a = _as_probs(q)
    return float(4.0 * a[0] * a[3] - (a[1] - a[2]) ** 2)


def witness_batch(Q: np.ndarray) -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    return 4.0 * Q[:, 0] * Q[:, 3] - (Q[:, 1] - Q[:, 2]) ** 2


def min_ppt_eigenvalue(q, theta: float) -> float:
    """Smallest partial-transpose eigenvalue of the (|00>, |11>) block after
    rotating the degenerate subspace by ``theta``.

    This is the only part of the spectrum that can turn negative, and it
    equals the global minimum whenever it is negative; the global minimum
    over theta sits at sin^2 2theta = 1.
    """
    a = _as_probs(q)
    s2 = math.sin(2.0 * theta) ** 2
    return 0.5 * (a[0] + a[3] - math.sqrt((a[1] - a[2]) ** 2 * s2 + (a[0] - a[3]) ** 2))


def is_subspace_entanglable(q) -> bool:
    """Strictly negative witness beyond the tolerance band."""
    return witness_f(q) < -TAU_F


def max_negativity(q) -> float:
    """Largest negativity reachable by a subspace rotation of ``q``; zero
    whenever the witness is non-negative."""
    a = _as_probs(q)
    if witness_f(a) >= 0.0:
        return 0.0
    return 0.5 * (math.hypot(a[0] - a[3], a[1] - a[2]) - (a[0] + a[3]))


@dataclass(frozen=True)
class WitnessReport:
    """Entanglability verdicts for one state in one thermal context."""

    f_value: float
    f_star: float
    in_E: bool
    in_TE: bool
    max_negativity: float
    optimal_theta: float
    pi_star_point: PopVector


def is_thermally_entanglable(p: PopVector, ctx: GibbsContext) -> WitnessReport:
    """Decide thermal entanglability of a two-qubit population vector.

    Exact decision: the state can be entangled by some thermal process iff
    the witness is negative at the cone's (2,1,3,4) extreme point.
    """
    if not is_two_qubit_context(ctx):
        raise ValueError("context is not a two-qubit (0, E, E, 2E) spectrum")
    p_star = extreme_point(p, ctx, PI_STAR)
    f_star = witness_f(p_star)
    neg, _ = max_negativity_over_cone(p, ctx)
    return WitnessReport(
        f_value=witness_f(p),
        f_star=f_star,
        in_E=is_subspace_entanglable(p),
        in_TE=f_star < -TAU_F,
        max_negativity=neg,
        optimal_theta=math.pi / 4.0,
        pi_star_point=p_star,
    )


def fstar_batch(P: np.ndarray, gammas: np.ndarray) -> np.ndarray:
    """Witness at the (2,1,3,4) extreme point for every row (finite beta)."""
    return witness_batch(batch_tight_points(P, gammas, PI_STAR))


def tne_bruteforce(p: PopVector, ctx: GibbsContext) -> bool:
    """Independent oracle: non-entanglable iff the witness is non-negative at
    all 24 cone extreme points (all 24 permutations of ``p`` when beta is 0)."""
    if p.dim != 4 or ctx.dim != 4:
        raise ValueError("brute-force check requires d = 4")
    if ctx.beta == 0.0:
        for perm in itertools.permutations(range(4)):
            if witness_f(p.probs[list(perm)]) < -TAU_F:
                return False
        return True
    for perm in itertools.permutations(range(1, 5)):
        q = extreme_point(p, ctx, BetaOrdering(perm))
        if witness_f(q) < -TAU_F:
            return False
    return True


# ---------------------------------------------------------------------------
# Negativity maximization over the future thermal cone
# ---------------------------------------------------------------------------

def _project_simplex(w: np.ndarray) -> np.ndarray:
    u = np.sort(w)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, w.size + 1)
    rho = np.nonzero(u + (1.0 - css) / k > 0)[0][-1]
    lam = (1.0 - css[rho]) / (rho + 1.0)
    return np.clip(w + lam, 0.0, None)


def _negativity_grad(q: np.ndarray):
    u, v = q[0] - q[3], q[1] - q[2]
    r = math.hypot(u, v)
    g = np.array([u / r - 1.0, v / r, -v / r, -u / r - 1.0]) * 0.5
    return g


def max_negativity_over_cone(p: PopVector, ctx: GibbsContext, *,
                             step_tol: float = 1e-8, max_iter: int = 400):
    """Maximize reachable negativity over the future thermal cone of ``p``.

    Multi-start projected gradient ascent over barycentric weights of the
    cone's extreme points, one start per vertex.  Returns ``(value, state)``.
    """
    cone = future_cone(p, ctx)
    V = cone.points
    k = V.shape[0]

    def objective(w):
        return max_negativity(V.T @ w)

    best_val = -1.0
    best_w = None
    for start in range(k):
        w = np.zeros(k)
        w[start] = 1.0
        val = objective(w)
        step = 0.25
        for _ in range(max_iter):
            q = V.T @ w
            if witness_f(q) >= 0.0:
                break  # flat region; this start cannot ascend
            g = V @ _negativity_grad(q)
            improved = False
            while step >= step_tol:
                w_new = _project_simplex(w + step * g)
                val_new = objective(w_new)
                if val_new > val + 1e-15:
                    w, val = w_new, val_new
                    improved = True
                    step *= 1.5
                    break
                step *= 0.5
            if not improved:
                break
        if val > best_val:
            best_val, best_w = val, w
    state = PopVector(np.clip(V.T @ best_w, 0.0, None))
    return best_val, state


# ---------------------------------------------------------------------------
# Critical ambient temperatures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CriticalTemps:
    """Critical ambient inverse temperatures for an initially thermal state."""

    beta_c1: float | None
    beta_c2: float | None
    approx_c1: float
    approx_c2: float


def fstar_thermal_cooler(delta: float, delta_s: float) -> float:
    """Witness at the (2,1,3,4) extreme point for a system colder than the
    bath (ambient weight ``delta`` > system weight ``delta_s``)."""
    zs = (1.0 + delta_s) ** 2
    u = delta - delta_s
    return (4.0 * delta_s**2 * (1.0 - u) - u**2) / zs**2


def fstar_thermal_hotter(delta: float, delta_s: float) -> float:
    """Witness at the (2,1,3,4) extreme point for a system hotter than the
    bath, on the branch valid for ambient weight below the golden ratio."""
    zs = (1.0 + delta_s) ** 2
    u = delta_s - delta
    return (-(u**2) * (1.0 + delta_s) ** 2
            + 4.0 * delta**2 * (1.0 + delta_s - (1.0 - delta_s) * delta - delta**2)) / zs**2


def _bisect(fn, lo, hi, rtol=1e-12, max_iter=200):
    flo = fn(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= rtol * max(abs(lo), abs(hi), 1e-30):
            return mid
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def critical_temps_thermal(beta_s: float, gap: float) -> CriticalTemps:
    """Critical ambient temperatures for a thermal initial state.

    ``beta_c1`` (hot bath side) comes from the closed form; ``beta_c2``
    (cold bath side) from bracketed bisection of the hot-system branch,
    absent when no root exists.  The large-``beta_s`` approximations
    ``beta_s -/+ log(3)/gap`` are always reported.
    """
    if gap <= 0:
        raise ValueError("gap must be positive")
    if beta_s < 0:
        raise ValueError("beta_s must be non-negative")
    delta_s = math.exp(-beta_s * gap)

    delta_c1 = delta_s * (1.0 + 2.0 * math.sqrt(1.0 + delta_s**2) - 2.0 * delta_s)
    beta_c1 = -math.log(delta_c1) / gap if delta_c1 < 1.0 else None

    beta_c2 = None
    hi = min(delta_s, PHI)
    lo = hi * 1e-14
    if delta_s > 0 and fstar_thermal_hotter(lo, delta_s) < 0 < fstar_thermal_hotter(hi, delta_s):
        root = _bisect(lambda d: fstar_thermal_hotter(d, delta_s), lo, hi)
        beta_c2 = -math.log(root) / gap

    log3 = math.log(3.0) / gap
    return CriticalTemps(beta_c1=beta_c1, beta_c2=beta_c2,
                         approx_c1=beta_s - log3, approx_c2=beta_s + log3)


def critical_temps_general(p: PopVector, gap: float, beta_range, n_scan: int) -> list:
    """Locate all ambient inverse temperatures at which the (2,1,3,4)
    extreme-point witness of ``p`` changes sign, by scan plus bisection."""
    if p.dim != 4:
        raise ValueError("requires a 4-level state")
    lo, hi = float(beta_range[0]), float(beta_range[1])
    if not (hi > lo) or n_scan < 2:
        raise ValueError("empty scan range")
    energies = (0.0, gap, gap, 2.0 * gap)

    def h(beta):
        ctx = make_context(energies, beta)
        return witness_f(extreme_point(p, ctx, PI_STAR))

    betas = np.linspace(lo, hi, n_scan)
    gammas = np.array([make_context(energies, b).gamma for b in betas])
    vals = fstar_batch(np.tile(p.probs, (n_scan, 1)), gammas)

    roots = []
    for i in range(n_scan - 1):
        if vals[i] == 0.0:
            roots.append(float(betas[i]))
        elif vals[i] * vals[i + 1] < 0:
            roots.append(_bisect(h, float(betas[i]), float(betas[i + 1]), rtol=1e-9))
    if vals[-1] == 0.0:
        roots.append(float(betas[-1]))
    return roots


def qubit_qutrit_witnesses(p) -> tuple:
    """Witness pair for a qubit-qutrit system with level layout
    (0, E, E, 2E, 2E, 3E); the state is entanglable if either is negative."""
    a = _as_probs(p, d=6)
    f1 = 4.0 * a[0] * min(a[3], a[4]) - (a[1] - a[2]) ** 2
    f2 = 4.0 * a[5] * min(a[1], a[2]) - (a[3] - a[4]) ** 2
    return float(f1), float(f2)
