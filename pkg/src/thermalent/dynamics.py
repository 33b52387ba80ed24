"""Density-matrix level protocols: cavity preconditioning, two-level
partial thermalizations, and the catalytic activation example.

The cavity protocol couples one qubit resonantly to a thermal bosonic mode
(truncated at ``n_max`` photons), picks the interaction time that maximizes
population transfer into the degenerate energy subspace, then applies the
optimal subspace rotation and reports the negativity of the resulting state.
Everything is evolved exactly inside the excitation-conserving 2x2 blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import GibbsContext, PopVector, two_qubit_context
from .entangle import is_thermally_entanglable, max_negativity, witness_f
from .majorization import thermo_majorizes

HERM_TOL = 1e-12
TRACE_TOL = 1e-10
POS_TOL = 1e-10


@dataclass(frozen=True)
class DensityMatrix:
    """Validated density matrix: Hermitian, unit trace, positive."""

    dim: int
    entries: np.ndarray = field(compare=False)

    def __init__(self, entries):
        m = np.array(entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("entries must be a square matrix")
        if np.abs(m - m.conj().T).max() > HERM_TOL:
            raise ValueError("matrix is not Hermitian")
        tr = m.trace().real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace is {tr}, not 1")
        if np.linalg.eigvalsh(m).min() < -POS_TOL:
            raise ValueError("matrix has a significantly negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "dim", m.shape[0])
        object.__setattr__(self, "entries", m)

    @classmethod
    def from_populations(cls, probs) -> "DensityMatrix":
        return cls(np.diag(np.asarray(probs, dtype=complex)))

    def populations(self) -> np.ndarray:
        return self.entries.diagonal().real.copy()


def partial_transpose(entries: np.ndarray, dims: tuple, subsystem: int = 0) -> np.ndarray:
    """Partial transpose of a bipartite matrix over one factor."""
    da, db = dims
    m = np.asarray(entries, dtype=complex).reshape(da, db, da, db)
    if subsystem == 0:
        m = m.transpose(2, 1, 0, 3)
    elif subsystem == 1:
        m = m.transpose(0, 3, 2, 1)
    else:
        raise ValueError("subsystem must be 0 or 1")
    return m.reshape(da * db, da * db)


def negativity(entries: np.ndarray, dims: tuple = (2, 2)) -> float:
    """Sum of the absolute values of negative partial-transpose eigenvalues."""
    eig = np.linalg.eigvalsh(partial_transpose(entries, dims))
    return float(-eig[eig < 0].sum())


def apply_subspace_rotation(q, theta: float, phi: float = 0.0) -> DensityMatrix:
    """Rotate the degenerate middle block of diagonal populations ``q``.

    Produces the explicit 4x4 matrix with coherence only between |01> and
    |10>; the phase ``phi`` never affects spectra.
    """
    a = q.probs if isinstance(q, PopVector) else np.asarray(q, dtype=float)
    if a.shape != (4,):
        raise ValueError("expected a length-4 population vector")
    c2, s2 = math.cos(theta) ** 2, math.sin(theta) ** 2
    coh = 0.5 * (a[2] - a[1]) * math.sin(2.0 * theta) * np.exp(1j * phi)
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = a[0]
    m[1, 1] = a[1] * c2 + a[2] * s2
    m[2, 2] = a[1] * s2 + a[2] * c2
    m[1, 2] = coh
    m[2, 1] = np.conj(coh)
    m[3, 3] = a[3]
    return DensityMatrix(m)


# ---------------------------------------------------------------------------
# Cavity preconditioning protocol
# ---------------------------------------------------------------------------

#: lowest product beta*E the truncated mode supports by default
MIN_BETA_E = 0.2

TAIL_TOL = 1e-8


@dataclass(frozen=True)
class JCConfig:
    """Configuration of the two-step cavity protocol."""

    initial: str            # "00" (both ground) or "11" (both excited)
    beta_E: float           # product of inverse temperature and gap
    n_max: int = 20         # Fock-space truncation
    coupling: float = 1.0   # qubit-mode coupling; sets the time unit
    time_grid: int = 2048   # scan resolution for the interaction time
    t_max: float = 20.0 * math.pi

    def __post_init__(self):
        if self.initial not in ("00", "11"):
            raise ValueError("initial must be '00' or '11'")
        if self.beta_E <= 0:
            raise ValueError("beta_E must be positive")
        if self.n_max < 1 or self.coupling <= 0 or self.time_grid < 16:
            raise ValueError("invalid cavity configuration")


def suggest_n_max(beta_E: float, tail: float = TAIL_TOL) -> int:
    """Smallest truncation whose thermal tail mass stays below ``tail``."""
    return max(1, math.ceil(math.log(tail) / -beta_E) + 1)


def thermal_mode_weights(beta_E: float, n_max: int) -> np.ndarray:
    """Truncated geometric photon-number distribution of the thermal mode."""
    delta = math.exp(-beta_E)
    tail = delta ** (n_max + 1)
    if tail >= TAIL_TOL:
        raise ValueError(
            f"truncated tail mass {tail:.2e} >= {TAIL_TOL}; "
            f"increase n_max to at least {suggest_n_max(beta_E)}")
    w = delta ** np.arange(n_max + 1)
    return w / w.sum()


def _transfer_prob(t, weights: np.ndarray, coupling: float, initial: str):
    """Probability that the coupled qubit flips after interacting for ``t``.

    From |0>: sum_n w_n sin^2(sqrt(n) g t) over occupied levels; from |1>:
    sum_n w_n sin^2(sqrt(n+1) g t).  Exact within each excitation block.
    """
    n = np.arange(weights.size)
    freq = np.sqrt(n) if initial == "00" else np.sqrt(n + 1)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s = np.sin(np.outer(t, freq) * coupling) ** 2
    out = s @ weights
    return out if out.size > 1 else float(out[0])


def _golden_max(fn, a: float, b: float, tol: float = 1e-10) -> float:
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - inv * (b - a)
    x2 = a + inv * (b - a)
    f1, f2 = fn(x1), fn(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv * (b - a)
            f2 = fn(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv * (b - a)
            f1 = fn(x1)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class JCResult:
    optimal_time: float
    ground_pop: float      # residual population of the initial product state
    negativity: float
    final_pops: PopVector  # two-qubit populations before the entangling rotation


def jc_protocol(cfg: JCConfig) -> JCResult:
    """Optimal-time cavity preconditioning followed by the entangling rotation.

    Scans the interaction time, refines the best grid point by golden
    section, and reports the negativity of the rotated final state.
    """
    weights = thermal_mode_weights(cfg.beta_E, cfg.n_max)
    ts = np.linspace(0.0, cfg.t_max, cfg.time_grid)
    vals = _transfer_prob(ts, weights, cfg.coupling, cfg.initial)
    k = int(np.argmax(vals))
    dt = ts[1] - ts[0]
    lo = max(0.0, ts[k] - dt)
    hi = min(cfg.t_max, ts[k] + dt)
    t_opt = _golden_max(lambda t: _transfer_prob(t, weights, cfg.coupling, cfg.initial), lo, hi)
    transfer = _transfer_prob(t_opt, weights, cfg.coupling, cfg.initial)

    residual = 1.0 - transfer
    if cfg.initial == "00":
        pops = PopVector([residual, transfer, 0.0, 0.0])
    else:
        pops = PopVector([0.0, 0.0, transfer, residual])
    return JCResult(optimal_time=float(t_opt), ground_pop=float(residual),
                    negativity=max_negativity(pops), final_pops=pops)


def jc_joint_evolution(initial_qubit: int, beta_E: float, n_max: int, t: float,
                       coupling: float = 1.0) -> DensityMatrix:
    """Exact joint qubit+mode state after interacting for time ``t``.

    Basis |q, n> with index q*(n_max+1) + n.  Used to cross-check the
    block-wise transfer probabilities and the excitation-conserving block
    structure.
    """
    if initial_qubit not in (0, 1):
        raise ValueError("initial_qubit must be 0 or 1")
    weights = thermal_mode_weights(beta_E, n_max)
    nm = n_max + 1
    u = np.eye(2 * nm, dtype=complex)
    for n in range(n_max):
        th = coupling * math.sqrt(n + 1) * t
        i, j = nm + n, n + 1          # |1, n> and |0, n+1>
        u[i, i] = u[j, j] = math.cos(th)
        u[i, j] = u[j, i] = -1j * math.sin(th)
    rho0 = np.zeros((2 * nm, 2 * nm), dtype=complex)
    off = initial_qubit * nm
    rho0[off:off + nm, off:off + nm] = np.diag(weights)
    return DensityMatrix(u @ rho0 @ u.conj().T)


# ---------------------------------------------------------------------------
# Two-level partial thermalizations (Markovian building blocks)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThermalizationSchedule:
    """Sequence of ((i, j), strength) two-level partial thermalizations.

    Level pairs are 1-based; each strength lambda in [0, 1] corresponds to
    evolving the detailed-balanced pair generator for time -log(1-lambda)/r.
    """

    steps: tuple

    def __init__(self, steps):
        norm = []
        for pair, lam in steps:
            i, j = int(pair[0]), int(pair[1])
            lam = float(lam)
            if i == j:
                raise ValueError(f"pair ({i}, {j}) must couple two distinct levels")
            if not 0.0 <= lam <= 1.0:
                raise ValueError(f"strength {lam} outside [0, 1]")
            norm.append(((i, j), lam))
        object.__setattr__(self, "steps", tuple(norm))

    def __len__(self):
        return len(self.steps)


def _pair_ground_share(ctx: GibbsContext, i0: int, j0: int) -> float:
    """Equilibrium share of level ``i0`` within the (i0, j0) pair."""
    de = ctx.energies[j0] - ctx.energies[i0]
    if ctx.beta_is_infinite:
        return 0.5 if de == 0 else (1.0 if de > 0 else 0.0)
    return 1.0 / (1.0 + math.exp(-ctx.beta * de))


def _apply_step(p: np.ndarray, ctx: GibbsContext, pair, lam: float) -> np.ndarray:
    i, j = pair
    if not (1 <= i <= ctx.dim and 1 <= j <= ctx.dim):
        raise ValueError(f"pair {pair} outside 1..{ctx.dim}")
    i0, j0 = i - 1, j - 1
    share = _pair_ground_share(ctx, i0, j0)
    s = p[i0] + p[j0]
    out = p.copy()
    out[i0] = (1.0 - lam) * p[i0] + lam * share * s
    out[j0] = (1.0 - lam) * p[j0] + lam * (1.0 - share) * s
    return out


def apply_schedule(p: PopVector, ctx: GibbsContext,
                   schedule: ThermalizationSchedule) -> list:
    """Run a schedule of partial thermalizations; returns the trajectory
    (initial state included)."""
    if p.dim != ctx.dim:
        raise ValueError("dimension mismatch")
    traj = [p]
    cur = p.probs.copy()
    for pair, lam in schedule.steps:
        cur = _apply_step(cur, ctx, pair, lam)
        traj.append(PopVector(cur))
    return traj


@dataclass(frozen=True)
class MtpSearchResult:
    best_f: float
    schedule: ThermalizationSchedule
    best_state: PopVector
    evaluations: int


def mtp_entangle_search(p: PopVector, ctx: GibbsContext, strategy: str = "greedy",
                        budget: int = 10_000) -> MtpSearchResult:
    """Search partial-thermalization schedules that minimize the witness.

    An explicit under-approximation of Markovian reachability: moves are
    restricted to two-level partial thermalizations with discretized
    strengths.  ``budget`` caps the number of candidate evaluations.
    """
    if p.dim != 4 or ctx.dim != 4:
        raise ValueError("search is defined for 4-level systems")
    if budget < 1:
        raise ValueError("budget must be positive")
    if strategy not in ("greedy", "beam"):
        raise ValueError("strategy must be 'greedy' or 'beam'")
    pairs = [(i, j) for i in range(1, 5) for j in range(i + 1, 5)]
    lams = [k / 10.0 for k in range(1, 11)]
    actions = [(pair, lam) for pair in pairs for lam in lams]
    width = 1 if strategy == "greedy" else 8

    best_f = witness_f(p)
    best_sched: tuple = ()
    best_state = p.probs
    beams = [(witness_f(p), p.probs, ())]
    evals = 0
    while evals < budget:
        candidates = []
        for _, state, sched in beams:
            for pair, lam in actions:
                nxt = _apply_step(state, ctx, pair, lam)
                fval = witness_f(nxt)
                evals += 1
                candidates.append((fval, nxt, sched + (((pair), lam),)))
                if fval < best_f - 1e-15:
                    best_f, best_state, best_sched = fval, nxt, sched + ((pair, lam),)
                if evals >= budget:
                    break
            if evals >= budget:
                break
        candidates.sort(key=lambda c: c[0])
        frontier = candidates[:width]
        if not frontier or frontier[0][0] >= beams[0][0] - 1e-15:
            break  # converged: no strict improvement available
        beams = frontier
    return MtpSearchResult(best_f=best_f,
                           schedule=ThermalizationSchedule(best_sched),
                           best_state=PopVector(best_state),
                           evaluations=evals)


# ---------------------------------------------------------------------------
# Catalytic activation, verified in exact arithmetic
# ---------------------------------------------------------------------------

class CatalysisError(AssertionError):
    """A regression in the exact catalysis bookkeeping."""


#: two-qubit system populations (|00>, |01>, |10>, |11>)
CATALYSIS_SYSTEM = (Fraction(2, 5), Fraction(1, 4), Fraction(33, 100), Fraction(1, 50))

#: qubit catalyst populations (|0>, |1>)
CATALYSIS_CATALYST = (Fraction(73, 100), Fraction(27, 100))

#: expected system populations after the catalytic cycle
CATALYSIS_EXPECTED = (Fraction(949, 2000), Fraction(613, 5000),
                      Fraction(771, 2500), Fraction(189, 2000))


def _catalysis_unitary() -> list:
    """Permutation unitary on |abc>: swaps |001> <-> |010| and cycles
    |011> -> |101> -> |110> -> |011>, acting only inside degenerate
    total-energy subspaces."""
    target = {1: 2, 2: 1, 3: 5, 5: 6, 6: 3}
    u = [[0] * 8 for _ in range(8)]
    for src in range(8):
        u[target.get(src, src)][src] = 1
    return u


def _matmul_exact(a, b):
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


@dataclass(frozen=True)
class CatalysisReport:
    passed: bool
    unitary_commutes: bool
    catalyst_restored: bool
    system_matches: bool
    initial_in_tne: bool
    final_in_te: bool
    system_final: tuple
    catalyst_final: tuple


def verify_catalysis(strict: bool = True) -> CatalysisReport:
    """Replay the catalytic activation in exact rational arithmetic.

    Builds system x catalyst, applies the block-permutation unitary, traces
    out the catalyst, and checks: the catalyst returns exactly, the system
    lands exactly on the published populations, the unitary commutes with
    the joint Hamiltonian, and the infinite-temperature verdict flips from
    non-entanglable to entanglable.
    """
    rho = CATALYSIS_SYSTEM
    omega = CATALYSIS_CATALYST
    joint = [[Fraction(0)] * 8 for _ in range(8)]
    for ab in range(4):
        for c in range(2):
            joint[2 * ab + c][2 * ab + c] = rho[ab] * omega[c]

    u = _catalysis_unitary()
    u_t = [list(row) for row in zip(*u)]
    h = [[Fraction(0)] * 8 for _ in range(8)]
    for idx in range(8):
        a, b, c = (idx >> 2) & 1, (idx >> 1) & 1, idx & 1
        h[idx][idx] = Fraction(a + b + c)
    commutes = _matmul_exact(u, h) == _matmul_exact(h, u)

    sigma = _matmul_exact(_matmul_exact(u, joint), u_t)
    sys_final = tuple(sigma[2 * ab][2 * ab] + sigma[2 * ab + 1][2 * ab + 1]
                      for ab in range(4))
    cat_final = tuple(sum(sigma[2 * ab + c][2 * ab + c] for ab in range(4))
                      for c in range(2))

    catalyst_restored = cat_final == omega
    system_matches = sys_final == CATALYSIS_EXPECTED

    ctx0 = two_qubit_context(0.0)
    initial_in_tne = not is_thermally_entanglable(
        PopVector([float(x) for x in rho]), ctx0).in_TE
    final_in_te = is_thermally_entanglable(
        PopVector([float(x) for x in sys_final]), ctx0).in_TE

    passed = commutes and catalyst_restored and system_matches and initial_in_tne and final_in_te
    report = CatalysisReport(
        passed=passed, unitary_commutes=commutes, catalyst_restored=catalyst_restored,
        system_matches=system_matches, initial_in_tne=initial_in_tne,
        final_in_te=final_in_te, system_final=sys_final, catalyst_final=cat_final)
    if strict and not passed:
        raise CatalysisError(f"catalysis regression: {report}")
    return report


def trajectory_in_cone(p: PopVector, ctx: GibbsContext, trajectory) -> bool:
    """Oracle: every trajectory state is reachable from ``p`` (curve test)."""
    return all(thermo_majorizes(p, q, ctx) for q in trajectory)
