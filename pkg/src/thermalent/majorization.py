"""Thermomajorization curves, the induced preorder, and future thermal cones.

A curve is the concave piecewise-linear function through the cumulative
(Gibbs weight, population) sums taken in the state's level ordering.  State
``p`` can reach ``q`` by a thermal process iff p's curve dominates q's
everywhere; the reachable set is a polytope whose extreme points are the
tight-majorized states, one per level ordering.

Zero Gibbs weights (infinite beta) produce zero-width curve segments; these
are kept as an explicit vertical jump at x=0 so that zero-temperature
comparisons stay exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .core import BetaOrdering, GibbsContext, PopVector, beta_order

#: comparison tolerance for curve dominance and extreme-point dedup
TAU_CMP = 1e-10

#: largest dimension for which all d! orderings are enumerated
MAX_ENUM_DIM = 8


@dataclass(frozen=True)
class ThermoCurve:
    """Piecewise-linear majorization curve stored as elbow points.

    ``xs[0], ys[0] == 0, 0``; a duplicated ``x == 0`` entry encodes the
    vertical jump contributed by populated levels of zero Gibbs weight.
    """

    xs: np.ndarray = field(compare=False)
    ys: np.ndarray = field(compare=False)

    @property
    def jump_top(self) -> float:
        """Curve value immediately to the right of x=0 (0 unless a jump exists)."""
        return float(self.ys[1]) if self.xs[1] == 0.0 else 0.0

    def _eval_arrays(self):
        if self.xs[1] == 0.0:
            return self.xs[1:], self.ys[1:]
        return self.xs, self.ys

    def evaluate_upper(self, x):
        """Interpolate, resolving the x=0 jump to its upper value."""
        xe, ye = self._eval_arrays()
        return np.interp(x, xe, ye)

    def evaluate(self, x: float) -> float:
        """Curve value at ``x`` in [0, 1]; exactly 0 at x=0."""
        if x < -1e-12 or x > 1 + 1e-12:
            raise ValueError(f"x={x} outside [0, 1]")
        x = min(max(x, 0.0), 1.0)
        if x == 0.0:
            return 0.0
        return float(self.evaluate_upper(x))


def evaluate(curve: ThermoCurve, x: float) -> float:
    return curve.evaluate(x)


def _merge_elbows(xs, ys):
    # collapse zero-width runs to their top point, keeping the (0,0) origin
    mx = [0.0]
    my = [0.0]
    for x, y in zip(xs, ys):
        if mx[-1] == x and not (len(mx) == 1):
            my[-1] = y
        elif x == 0.0:
            mx.append(0.0)
            my.append(y)
        else:
            mx.append(x)
            my.append(y)
    return np.array(mx), np.array(my)


def curve(p: PopVector, ctx: GibbsContext) -> ThermoCurve:
    """Thermomajorization curve of ``p`` in the context ``ctx``."""
    order = beta_order(p, ctx).zero_based()
    xs = np.cumsum(ctx.gamma[order])
    ys = np.cumsum(p.probs[order])
    mx, my = _merge_elbows(xs, ys)
    mx.setflags(write=False)
    my.setflags(write=False)
    return ThermoCurve(xs=mx, ys=my)


def thermo_majorizes(p: PopVector, q: PopVector, ctx: GibbsContext,
                     tol: float = TAU_CMP) -> bool:
    """True iff p's curve dominates q's at every elbow of either curve."""
    if p.dim != q.dim or p.dim != ctx.dim:
        raise ValueError("dimension mismatch")
    cp = curve(p, ctx)
    cq = curve(q, ctx)
    if cp.jump_top < cq.jump_top - tol:
        return False
    xs = np.union1d(cp.xs, cq.xs)
    xs = xs[xs > 0]
    return bool(np.all(cp.evaluate_upper(xs) >= cq.evaluate_upper(xs) - tol))


def extreme_point(p: PopVector, ctx: GibbsContext, target: BetaOrdering) -> PopVector:
    """Tight-majorized state whose ordering is ``target``.

    Its curve elbows sit on p's curve at the cumulative Gibbs weights of the
    target ordering; populations are the consecutive height differences,
    returned in level order.
    """
    if target.dim != p.dim or p.dim != ctx.dim:
        raise ValueError("dimension mismatch")
    t0 = target.zero_based()
    cp = curve(p, ctx)
    xt = np.cumsum(ctx.gamma[t0])
    yt = cp.evaluate_upper(xt)
    dy = np.diff(yt, prepend=0.0)
    out = np.empty(p.dim)
    out[t0] = dy
    return PopVector(np.clip(out, 0.0, None))


@dataclass(frozen=True)
class ThermalCone:
    """Future thermal cone: the states reachable from ``origin``."""

    origin: PopVector
    ctx: GibbsContext
    extremes: tuple  # ((BetaOrdering, PopVector), ...) deduplicated

    @property
    def points(self) -> np.ndarray:
        return np.array([v.probs for _, v in self.extremes])

    def contains(self, q: PopVector) -> bool:
        return cone_contains(self, q)


def _dedup_lex(points, tol):
    """Indices of cluster representatives under sorted lexicographic merging."""
    pts = np.asarray(points)
    order = np.lexsort(pts.T[::-1])
    keep = []
    rep = None
    for i in order:
        if rep is None or np.max(np.abs(pts[i] - rep)) > tol:
            keep.append(i)
            rep = pts[i]
    return sorted(keep)


def future_cone(p: PopVector, ctx: GibbsContext) -> ThermalCone:
    """Enumerate all d! tight-majorized states and keep the distinct ones."""
    d = p.dim
    if d != ctx.dim:
        raise ValueError("dimension mismatch")
    if d > MAX_ENUM_DIM:
        raise ValueError(f"dimension {d} too large for {d}! enumeration")
    labelled = []
    for perm in itertools.permutations(range(1, d + 1)):
        order = BetaOrdering(perm)
        labelled.append((order, extreme_point(p, ctx, order)))
    keep = _dedup_lex([v.probs for _, v in labelled], TAU_CMP)
    return ThermalCone(origin=p, ctx=ctx, extremes=tuple(labelled[i] for i in keep))


def cone_contains(cone: ThermalCone, q: PopVector) -> bool:
    """Membership via dominance of the origin's curve (transitivity makes
    this equivalent to checking every extreme point)."""
    return thermo_majorizes(cone.origin, q, cone.ctx)


# ---------------------------------------------------------------------------
# Vectorized batch machinery (finite beta), shared by the witness and volume
# code paths.  Rows of P are states; gammas is a matching (n, d) array or a
# single shared (d,) Gibbs vector.
# ---------------------------------------------------------------------------

def batch_curves(P: np.ndarray, gammas: np.ndarray):
    """Per-row ordering and cumulative-sum elbows for a batch of states."""
    P = np.asarray(P, dtype=float)
    G = np.broadcast_to(np.asarray(gammas, dtype=float), P.shape)
    order = np.argsort(-(P / G), axis=1, kind="stable")
    X = np.cumsum(np.take_along_axis(G, order, axis=1), axis=1)
    Y = np.cumsum(np.take_along_axis(P, order, axis=1), axis=1)
    return order, X, Y


def batch_eval(X: np.ndarray, Y: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Evaluate each row's piecewise-linear curve at that row's targets.

    Computed as a sum of clamped per-segment contributions, which avoids a
    per-row searchsorted.
    """
    n, d = X.shape
    X0 = np.concatenate([np.zeros((n, 1)), X[:, :-1]], axis=1)
    W = X - X0
    S = np.diff(np.concatenate([np.zeros((n, 1)), Y], axis=1), axis=1) / W
    reach = np.clip(T[:, :, None] - X0[:, None, :], 0.0, W[:, None, :])
    return np.einsum("nts,ns->nt", reach, S)


def batch_tight_points(P: np.ndarray, gammas: np.ndarray, target: BetaOrdering,
                       chunk: int = 200_000) -> np.ndarray:
    """Extreme point of every row's cone for one shared target ordering."""
    P = np.asarray(P, dtype=float)
    t0 = target.zero_based()
    out = np.empty_like(P)
    G_all = np.broadcast_to(np.asarray(gammas, dtype=float), P.shape)
    for lo in range(0, P.shape[0], chunk):
        hi = min(lo + chunk, P.shape[0])
        Pb, Gb = P[lo:hi], G_all[lo:hi]
        _, X, Y = batch_curves(Pb, Gb)
        Xt = np.cumsum(Gb[:, t0], axis=1)
        Yt = batch_eval(X, Y, Xt)
        dY = np.diff(Yt, prepend=0.0, axis=1)
        block = np.empty_like(Pb)
        block[:, t0] = dY
        out[lo:hi] = np.clip(block, 0.0, None)
    return out


def batch_majorizes(origin: PopVector, Q: np.ndarray, ctx: GibbsContext,
                    tol: float = TAU_CMP, chunk: int = 200_000) -> np.ndarray:
    """Dominance of a fixed origin's curve over each row of ``Q``.

    By concavity it suffices to test at each row's own elbows.
    """
    if ctx.beta_is_infinite:
        raise ValueError("batch dominance requires finite beta")
    c = curve(origin, ctx)
    Q = np.asarray(Q, dtype=float)
    ok = np.empty(Q.shape[0], dtype=bool)
    for lo in range(0, Q.shape[0], chunk):
        hi = min(lo + chunk, Q.shape[0])
        _, X, Y = batch_curves(Q[lo:hi], ctx.gamma)
        Lp = np.interp(X, c.xs, c.ys)
        ok[lo:hi] = np.all(Lp >= Y - tol, axis=1)
    return ok
