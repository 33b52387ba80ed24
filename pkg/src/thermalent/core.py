"""States, Gibbs contexts and level orderings for energy-incoherent systems.

Everything here is immutable after construction and safe to share between
workers.  Level indices in public interfaces are 1-based, matching the usual
physics convention for labelling energy levels; internal numpy work is
0-based.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

#: normalization tolerance for probability vectors
TAU_NORM = 1e-10

#: inverse-temperature value representing the zero-temperature limit
INF_BETA = math.inf


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


def deg_tolerance(energies) -> float:
    """Absolute tolerance used to group nearly-equal energy values."""
    emax = max((abs(e) for e in energies), default=0.0)
    return 1e-9 * emax if emax > 0 else 1e-12


@dataclass(frozen=True)
class GibbsContext:
    """Energy spectrum plus an ambient inverse temperature.

    ``gamma`` holds the equilibrium populations exp(-beta*E_i)/Z.  ``beta``
    may be ``math.inf``, in which case ``gamma`` is uniform over the
    minimal-energy levels and exactly zero elsewhere.
    """

    energies: tuple
    beta: float
    gamma: np.ndarray = field(compare=False)

    @property
    def dim(self) -> int:
        return len(self.energies)

    @property
    def beta_is_infinite(self) -> bool:
        return math.isinf(self.beta)

    def to_json(self) -> str:
        beta = "inf" if self.beta_is_infinite else self.beta
        return json.dumps({"energies": list(self.energies), "beta": beta})


def make_context(energies, beta) -> GibbsContext:
    """Build a Gibbs context from level energies and inverse temperature.

    Populations are computed with the max-shift trick so that large
    ``beta*E`` products do not overflow.  ``beta=math.inf`` selects the
    zero-temperature limit: uniform weight on the minimal-energy levels.
    """
    energies = tuple(float(e) for e in energies)
    if not energies:
        raise ValueError("energies must be non-empty")
    if any(not math.isfinite(e) for e in energies):
        raise ValueError("energies must be finite")
    beta = float(beta)
    if math.isnan(beta) or beta < 0:
        raise ValueError(f"beta must be >= 0 or inf, got {beta}")

    e = np.array(energies)
    if math.isinf(beta):
        tol = deg_tolerance(energies)
        ground = np.abs(e - e.min()) <= tol
        gamma = ground / ground.sum()
    else:
        logw = -beta * e
        w = np.exp(logw - logw.max())
        gamma = w / w.sum()
    return GibbsContext(energies=energies, beta=beta, gamma=_readonly(gamma))


def two_qubit_context(beta, gap: float = 1.0) -> GibbsContext:
    """Context of two non-interacting qubits with a common gap: (0, E, E, 2E)."""
    if gap <= 0:
        raise ValueError("gap must be positive")
    return make_context((0.0, gap, gap, 2.0 * gap), beta)


def is_two_qubit_context(ctx: GibbsContext) -> bool:
    """True when the spectrum has the (c, c+E, c+E, c+2E) two-qubit shape."""
    if ctx.dim != 4:
        return False
    e = np.array(ctx.energies) - ctx.energies[0]
    gap = e[1]
    if gap <= 0:
        return False
    tol = deg_tolerance(ctx.energies) + 1e-12
    return bool(abs(e[2] - gap) <= tol and abs(e[3] - 2 * gap) <= tol)


@dataclass(frozen=True)
class PopVector:
    """A point of the probability simplex: populations of energy levels."""

    probs: np.ndarray

    def __init__(self, probs):
        p = np.array(probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a non-empty 1-d sequence")
        if p.min() < -TAU_NORM:
            raise ValueError(f"negative probability {p.min()}")
        p = np.clip(p, 0.0, None)
        if abs(p.sum() - 1.0) > TAU_NORM:
            raise ValueError(f"probabilities sum to {p.sum()}, not 1")
        object.__setattr__(self, "probs", _readonly(p))

    @property
    def dim(self) -> int:
        return self.probs.size

    def normalized(self) -> "PopVector":
        """Rescale to unit sum (for opt-in renormalization of raw input)."""
        p = np.clip(np.asarray(self.probs, dtype=float), 0.0, None)
        return PopVector(p / p.sum())

    def __eq__(self, other):
        return isinstance(other, PopVector) and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(self.probs.tobytes())

    def to_json(self) -> str:
        return json.dumps({"probs": self.probs.tolist()})


def pop_vector(probs, renorm: bool = False) -> PopVector:
    """Validate (optionally renormalize) raw numbers into a ``PopVector``."""
    if renorm:
        p = np.clip(np.array(probs, dtype=float), 0.0, None)
        s = p.sum()
        if s <= 0:
            raise ValueError("cannot renormalize an all-zero vector")
        return PopVector(p / s)
    return PopVector(probs)


@dataclass(frozen=True)
class BetaOrdering:
    """Permutation (pi(1), ..., pi(d)) listing levels by non-increasing p/gamma."""

    perm: tuple

    def __post_init__(self):
        perm = tuple(int(i) for i in self.perm)
        d = len(perm)
        if sorted(perm) != list(range(1, d + 1)):
            raise ValueError(f"{perm} is not a permutation of 1..{d}")
        object.__setattr__(self, "perm", perm)

    @property
    def dim(self) -> int:
        return len(self.perm)

    def zero_based(self) -> np.ndarray:
        return np.array(self.perm, dtype=int) - 1


PI_STAR = BetaOrdering((2, 1, 3, 4))


def beta_order(p: PopVector, ctx: GibbsContext) -> BetaOrdering:
    """Order levels by non-increasing population-to-Gibbs ratio.

    Ties break by ascending level index (a stable sort).  At infinite beta,
    levels with zero Gibbs weight but non-zero population rank first (among
    themselves by descending population); unpopulated zero-weight levels
    rank last.
    """
    if p.dim != ctx.dim:
        raise ValueError(f"dimension mismatch: state {p.dim}, context {ctx.dim}")
    probs = p.probs
    gamma = ctx.gamma

    if ctx.beta_is_infinite and (gamma == 0).any():
        keys = []
        for i in range(ctx.dim):
            if gamma[i] == 0 and probs[i] > 0:
                keys.append((0, -probs[i], i))
            elif gamma[i] > 0:
                keys.append((1, -probs[i] / gamma[i], i))
            else:
                keys.append((2, 0.0, i))
        order = sorted(range(ctx.dim), key=lambda i: keys[i])
        return BetaOrdering(tuple(i + 1 for i in order))

    ratios = probs / gamma
    order = np.argsort(-ratios, kind="stable")
    return BetaOrdering(tuple(int(i) + 1 for i in order))


@dataclass(frozen=True)
class SubspaceDecomposition:
    """Partition of basis levels into groups of (near-)equal total energy."""

    groups: dict

    def sizes(self) -> tuple:
        return tuple(len(v) for _, v in sorted(self.groups.items()))

    def group_at(self, energy: float, tol: float = 1e-9) -> tuple:
        for e, idx in self.groups.items():
            if abs(e - energy) <= tol:
                return idx
        raise KeyError(f"no subspace at energy {energy}")


def decompose_subspaces(local_gaps) -> SubspaceDecomposition:
    """Group tensor-product basis levels of non-interacting subsystems by total energy.

    Each subsystem is given by its excited-level gaps above its ground state;
    a bare number is shorthand for a single-gap qubit.  Basis levels are
    indexed 1-based in row-major (first subsystem most significant) order.
    """
    ladders = []
    for gaps in local_gaps:
        if isinstance(gaps, (int, float)):
            gaps = (gaps,)
        ladders.append((0.0,) + tuple(float(g) for g in gaps))
    if not ladders:
        raise ValueError("need at least one subsystem")

    totals = [sum(combo) for combo in itertools.product(*ladders)]
    tol = deg_tolerance(totals)

    order = sorted(range(len(totals)), key=lambda i: (totals[i], i))
    groups: dict = {}
    current: list = []
    anchor = None
    for i in order:
        if anchor is None or abs(totals[i] - anchor) > tol:
            if current:
                groups[anchor] = tuple(sorted(j + 1 for j in current))
            current = [i]
            anchor = totals[i]
        else:
            current.append(i)
    if current:
        groups[anchor] = tuple(sorted(j + 1 for j in current))
    return SubspaceDecomposition(groups=groups)


def state_from_json(text):
    """Parse ``{"probs": [...], "energies": [...], "beta": number | "inf"}``.

    Returns ``(PopVector | None, GibbsContext | None)`` depending on which
    keys are present.
    """
    obj = json.loads(text) if isinstance(text, str) else dict(text)
    pop = PopVector(obj["probs"]) if "probs" in obj else None
    ctx = None
    if "energies" in obj:
        if "beta" not in obj:
            raise ValueError("energies given without beta")
        beta = obj["beta"]
        if isinstance(beta, str):
            if beta.lower() not in ("inf", "infinity"):
                raise ValueError(f"unrecognized beta value {beta!r}")
            beta = math.inf
        ctx = make_context(obj["energies"], beta)
    return pop, ctx
