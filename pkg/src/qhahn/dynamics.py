"""Exact simulation of the q-Hahn TASEP.

Particles on Z, labeled 1,2,... from right to left, update in parallel in
discrete time: a particle whose front gap is m jumps right by j with the
q-binomial probability table for gap m (particle 1 uses the infinite-gap
law under step initial data).  State is stored as front gaps plus the
position of particle 1, so one update costs O(active front).

All randomness is drawn from counter-based streams (see _rng): the uniform
feeding particle k at step t has a fixed stream address, which makes the
pure-python reference stepper and the compiled ensemble engine produce
bit-identical trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._rng import RngStream, stream_key
from .errors import (
    DomainError,
    InvariantError,
    NormalizationError,
    WindowError,
)
from .qspecial import QSeriesConfig, log_q_pochhammer_infinite
from .scaling import ModelParams

__all__ = [
    "INFINITE",
    "JumpTable",
    "JumpTableCache",
    "ParticleState",
    "StepIC",
    "StationaryIC",
    "SimulationResult",
    "jump_weights",
    "gap_law_table",
    "sample_jump",
    "step",
    "simulate",
    "simulate_ensemble",
    "measure_current",
    "height_and_current",
    "q_laplace_observable",
    "crossings_from_positions",
]

INFINITE = math.inf

_GAP_SENTINEL = 1 << 62  # stands for an infinite front gap in engine arrays


@dataclass
class JumpTable:
    """Normalized weights and cdf of one jump law (or of the stationary
    gap law).  For finite m the support is exactly {0..m}; for INFINITE the
    table is truncated once the retained mass exceeds 1 - tail_tol and the
    remainder is recorded in tail_mass."""

    m: float  # gap value, or INFINITE
    weights: np.ndarray
    cdf: np.ndarray
    tail_mass: float = 0.0
    tail_hits: int = field(default=0, compare=False)

    def __len__(self):
        return len(self.weights)


def _log1p_cumsum(a: float, q: float, n: int) -> np.ndarray:
    """Prefix sums L[i] = sum_{k<i} log(1 - a q^k) for i = 0..n."""
    out = np.zeros(n + 1)
    if n and a != 0.0:
        out[1:] = np.cumsum(np.log1p(-a * q ** np.arange(n)))
    return out


def jump_weights(params: ModelParams, m, tail_tol: float = 1e-15) -> JumpTable:
    """Jump law of a particle with front gap m, computed in log space from
    finite q-Pochhammer prefix sums.

    mu == nu collapses the law to a point mass at 0 and is returned as that
    valid table.  A normalization drift beyond 1e-10 raises
    NormalizationError (the q-binomial theorem guarantees unit mass).
    """
    q, mu, nu = params.q, params.mu, params.nu
    if mu == 0.0:
        raise DomainError("mu must be positive for a jump law")
    if m is not INFINITE and (m < 0 or m != int(m)):
        raise DomainError(f"gap must be a nonnegative integer or INFINITE, got {m}")

    if mu == nu:
        n = 1 if m is INFINITE else int(m) + 1
        w = np.zeros(n)
        w[0] = 1.0
        return JumpTable(m=m, weights=w, cdf=np.cumsum(w), tail_mass=0.0)

    ratio = nu / mu
    if m is INFINITE:
        cfg = QSeriesConfig(q=q, tol=min(tail_tol, 1e-14))
        log_pref = log_q_pochhammer_infinite(mu, cfg) - (
            log_q_pochhammer_infinite(nu, cfg) if nu > 0 else 0.0
        )
        # support needed until mass mu^j drops the tail below tail_tol
        n_max = max(8, int(math.log(tail_tol * (1 - mu) * 0.01) / math.log(mu)) + 4)
        lr = _log1p_cumsum(ratio, q, n_max)[:-1]
        lqq = _log1p_cumsum(q, q, n_max)[:-1]
        j = np.arange(n_max)
        w = np.exp(j * math.log(mu) + lr + log_pref - lqq)
        cdf = np.cumsum(w)
        cut = int(np.searchsorted(cdf, 1.0 - tail_tol, side="left")) + 1
        cut = min(cut, n_max)
        w = w[:cut]
        cdf = cdf[:cut]
        tail = max(0.0, 1.0 - cdf[-1])
        if abs(cdf[-1] + tail - 1.0) > 1e-10:
            raise NormalizationError(
                f"infinite jump table mass {cdf[-1] + tail} deviates from 1"
            )
        return JumpTable(m=INFINITE, weights=w, cdf=cdf, tail_mass=tail)

    m = int(m)
    lr = _log1p_cumsum(ratio, q, m)  # (nu/mu; q)_j
    lmu = _log1p_cumsum(mu, q, m)  # (mu; q)_i
    lnu = _log1p_cumsum(nu, q, m)  # (nu; q)_i
    lqq = _log1p_cumsum(q, q, m)  # (q; q)_i
    j = np.arange(m + 1)
    logw = (
        j * math.log(mu)
        + lr[j]
        + lmu[m - j]
        - lnu[m]
        + lqq[m]
        - lqq[j]
        - lqq[m - j]
    )
    w = np.exp(logw)
    total = w.sum()
    if abs(total - 1.0) > 1e-10:
        raise NormalizationError(f"jump table for m={m} sums to {total}")
    return JumpTable(m=m, weights=w, cdf=np.cumsum(w), tail_mass=0.0)


def gap_law_table(params: ModelParams, alpha: float, tail_tol: float = 1e-15) -> JumpTable:
    """Stationary gap law P(G=k) = ((alpha;q)_inf/(alpha nu;q)_inf)
    * ((nu;q)_k/(q;q)_k) alpha^k, truncated with tail below tail_tol."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0,1), got {alpha}")
    q, nu = params.q, params.nu
    cfg = QSeriesConfig(q=q, tol=min(tail_tol, 1e-14))
    log_pref = log_q_pochhammer_infinite(alpha, cfg) - (
        log_q_pochhammer_infinite(alpha * nu, cfg) if nu > 0 else 0.0
    )
    terms = []
    term = math.exp(log_pref)
    cum = 0.0
    k = 0
    nu_qk = nu
    q_k1 = q
    while True:
        terms.append(term)
        cum += term
        r = alpha * (1.0 - nu_qk) / (1.0 - q_k1)
        if r < 1.0 and term * r / (1.0 - r) < tail_tol:
            break
        if k > 100_000:
            raise NormalizationError("gap law truncation failed to converge")
        term *= alpha * (1.0 - nu_qk) / (1.0 - q_k1)
        nu_qk *= q
        q_k1 *= q
        k += 1
    w = np.array(terms)
    cdf = np.cumsum(w)
    tail = max(0.0, 1.0 - cdf[-1])
    if abs(cdf[-1] + tail - 1.0) > 1e-10:
        raise NormalizationError("gap law mass deviates from 1")
    return JumpTable(m=INFINITE, weights=w, cdf=cdf, tail_mass=tail)


def invert_cdf(cdf: np.ndarray, u: float) -> int:
    """Inverse-cdf lookup: smallest j with u < cdf[j], by binary search."""
    return int(np.searchsorted(cdf, u, side="right"))


def sample_jump(table: JumpTable, rng: RngStream) -> int:
    """Draw one jump by inverse cdf.  A draw beyond a truncated table's
    last bucket (possible only for INFINITE tables, probability below
    tail_tol) returns the last tabulated value and counts a tail hit."""
    j = invert_cdf(table.cdf, rng.next())
    if j >= len(table.weights):
        table.tail_hits += 1
        j = len(table.weights) - 1
    return j


class JumpTableCache:
    """Shared read-only cache of jump tables, plus the dense row matrix
    used by the samplers.

    Exact tables are built lazily per gap value up to m_cap.  Sampling
    paths map any gap above m_dense to the INFINITE row: m_dense is chosen
    so that (i) the infinite law's truncated support length never exceeds
    m_dense (the clip j <= m can then never trigger) and (ii) the measured
    total-variation distance between the exact law at m_dense and the
    truncated infinite law is below 1e-18, i.e. the substitution is exact
    at double precision.
    """

    def __init__(self, params: ModelParams, tail_tol: float = 1e-15, m_cap: int = 4096):
        self.params = params
        self.tail_tol = tail_tol
        self.m_cap = m_cap
        self._tables: dict[int, JumpTable] = {}
        self._infinite: JumpTable | None = None
        self._dense: tuple[np.ndarray, np.ndarray, int] | None = None

    def infinite(self) -> JumpTable:
        if self._infinite is None:
            self._infinite = jump_weights(self.params, INFINITE, self.tail_tol)
        return self._infinite

    def get(self, m) -> JumpTable:
        if (isinstance(m, float) and math.isinf(m)) or m > self.m_cap:
            return self.infinite()
        m = int(m)
        table = self._tables.get(m)
        if table is None:
            table = jump_weights(self.params, m, self.tail_tol)
            self._tables[m] = table
        return table

    def dense_rows(self):
        """(cdf2d, row_len, m_dense): row m (m <= m_dense) is the exact
        law at gap m, row m_dense+1 is the truncated infinite law; rows are
        padded with 2.0 so a binary search never leaves the support."""
        if self._dense is None:
            inf_table = self.infinite()
            # the truncated infinite law itself carries ~tail_tol of mass
            # error, so that is the resolution floor of the comparison
            tv_floor = max(1e-18, 10.0 * self.tail_tol)
            m_dense = max(64, len(inf_table))
            while m_dense < self.m_cap:
                tv = self._tv_against_infinite(m_dense)
                if tv < tv_floor:
                    break
                m_dense *= 2
            m_dense = min(m_dense, self.m_cap)
            width = max(m_dense + 1, len(inf_table))
            cdf2d = np.full((m_dense + 2, width), 2.0)
            row_len = np.empty(m_dense + 2, dtype=np.int64)
            for m in range(m_dense + 1):
                t = self.get(m)
                cdf2d[m, : len(t)] = t.cdf
                row_len[m] = len(t)
            cdf2d[m_dense + 1, : len(inf_table)] = inf_table.cdf
            row_len[m_dense + 1] = len(inf_table)
            self._dense = (cdf2d, row_len, m_dense)
        return self._dense

    def _tv_against_infinite(self, m: int) -> float:
        exact = jump_weights(self.params, m, self.tail_tol)
        inf_w = self.infinite().weights
        n = min(len(exact.weights), len(inf_w))
        tv = 0.5 * (
            np.abs(exact.weights[:n] - inf_w[:n]).sum()
            + exact.weights[n:].sum()
            + inf_w[n:].sum()
            + self.infinite().tail_mass
        )
        return tv


@dataclass
class ParticleState:
    """Positions encoded as front gaps: gaps[k-1] = X_k - X_{k+1} - 1 for
    k = 1..N-1, together with x1 = X_1.  active_front is the largest label
    that has ever had a positive front gap (labels beyond it are frozen in
    the step wedge; particle 1 is always active)."""

    time: int
    n_particles: int
    gaps: np.ndarray
    x1: int
    active_front: int = 1

    def positions(self) -> np.ndarray:
        """X_1 > X_2 > ... > X_N reconstructed from x1 and the gaps."""
        pos = np.empty(self.n_particles, dtype=np.int64)
        pos[0] = self.x1
        if self.n_particles > 1:
            pos[1:] = self.x1 - np.cumsum(self.gaps + 1)
        return pos

    def check_invariants(self):
        if np.any(self.gaps < 0):
            raise InvariantError("negative gap: order preservation violated")


@dataclass(frozen=True)
class StepIC:
    """Particles initially at X_N(0) = -N for N = 1, 2, ..."""


@dataclass(frozen=True)
class StationaryIC:
    """Front gaps drawn i.i.d. from the stationary gap law with the given
    fugacity; particle 1 placed at -1."""

    alpha: float


_IC_SLOT = (1 << 32) - 1  # draw epoch reserved for initial conditions


def initial_state(params: ModelParams, N: int, ic, rng: RngStream | None = None) -> ParticleState:
    if N < 1:
        raise DomainError(f"need at least one particle, got N={N}")
    if isinstance(ic, StepIC):
        return ParticleState(
            time=0, n_particles=N, gaps=np.zeros(max(N - 1, 0), dtype=np.int64),
            x1=-1, active_front=1,
        )
    if isinstance(ic, StationaryIC):
        if rng is None:
            raise DomainError("stationary initial data needs an RngStream")
        table = gap_law_table(params, ic.alpha)
        slots = np.arange(max(N - 1, 0), dtype=np.uint64)
        us = rng.at_many(_IC_SLOT, slots)
        gaps = np.searchsorted(table.cdf, us, side="right").astype(np.int64)
        np.minimum(gaps, len(table.weights) - 1, out=gaps)
        positive = np.nonzero(gaps > 0)[0]
        af = int(positive[-1]) + 2 if len(positive) else 1
        return ParticleState(time=0, n_particles=N, gaps=gaps, x1=-1,
                             active_front=min(af, N))
    raise DomainError(f"unknown initial condition {ic!r}")


def step(state: ParticleState, params: ModelParams, cache: JumpTableCache,
         rng: RngStream) -> ParticleState:
    """One parallel update.

    Every jump is drawn against the particle's pre-step front gap; the
    stream address of particle k's uniform at step t is (t, k-1), so frozen
    particles (gap 0, deterministic jump 0) are skipped without shifting
    anyone else's randomness.
    """
    N = state.n_particles
    t = state.time
    cdf2d, row_len, m_dense = cache.dense_rows()
    inf_row = m_dense + 1
    gaps = state.gaps.copy()
    limit = min(state.active_front + 1, N)

    j_prev = 0
    newlast = 0
    x1 = state.x1
    for i in range(limit):
        if i == 0:
            m_row = inf_row
            m = _GAP_SENTINEL
        else:
            m = int(gaps[i - 1])
            m_row = inf_row if m > m_dense else m
        if i > 0 and m == 0:
            j = 0
        else:
            u = rng.at(t, i)
            j = int(np.searchsorted(cdf2d[m_row], u, side="right"))
            if j >= row_len[m_row]:
                cache.infinite().tail_hits += 1
                j = int(row_len[m_row]) - 1
            if i > 0 and j > m:
                j = m
        if i == 0:
            x1 += j
        else:
            g_new = m + j_prev - j
            if g_new < 0:
                raise InvariantError(
                    f"negative gap for particle {i + 1} at step {t}"
                )
            gaps[i - 1] = g_new
            if g_new > 0 and i > newlast:
                newlast = i
        j_prev = j
    if limit < N:
        gaps[limit - 1] += j_prev
        if gaps[limit - 1] > 0 and limit > newlast:
            newlast = limit
    active_front = max(1, min(newlast + 1, N))
    return ParticleState(
        time=t + 1, n_particles=N, gaps=gaps, x1=x1, active_front=active_front
    )


@dataclass
class SimulationResult:
    x_target: int
    state: ParticleState
    bond_crossings: np.ndarray | None
    monitor_bonds: np.ndarray | None
    tail_hits: int
    requested_tau: float
    realized_tau: int


def crossings_from_positions(pos0: np.ndarray, pos1: np.ndarray, bonds: np.ndarray) -> np.ndarray:
    """Number of particles that jumped over each bond (b, b+1): since the
    dynamics is totally asymmetric and order-preserving, this is the count
    of particles ending above b minus the count starting above b."""
    s0 = np.sort(pos0)
    s1 = np.sort(pos1)
    above1 = len(s1) - np.searchsorted(s1, bonds, side="right")
    above0 = len(s0) - np.searchsorted(s0, bonds, side="right")
    return (above1 - above0).astype(np.int64)


def simulate(params: ModelParams, N: int, tau_steps: int, ic=StepIC(),
             seed: int = 0, replica: int = 0,
             monitor_bonds: np.ndarray | None = None,
             cache: JumpTableCache | None = None,
             engine: str = "compiled") -> SimulationResult:
    """Run one replica for tau_steps parallel updates and report the
    target particle's position, the final state and (optionally) the
    crossing counts of monitored bonds.

    engine="python" runs the reference stepper; "compiled" runs the same
    update loop jitted (trajectories are bit-identical); frozen-wedge
    checks run in both.
    """
    if tau_steps < 0:
        raise DomainError(f"tau_steps must be nonnegative, got {tau_steps}")
    cache = cache or JumpTableCache(params)
    rng = RngStream(seed, replica)
    state0 = initial_state(params, N, ic, rng)
    pos0 = state0.positions() if monitor_bonds is not None else None

    if engine == "compiled":
        from ._engine import run_replica_arrays

        cdf2d, row_len, m_dense = cache.dense_rows()
        g = np.empty(N, dtype=np.int64)
        g[0] = _GAP_SENTINEL
        if N > 1:
            g[1:] = state0.gaps
        x1, tail_hits, front = run_replica_arrays(
            np.uint64(rng.key), g, state0.x1, tau_steps, cdf2d, row_len, m_dense
        )
        gaps = g[1:].copy()
        state = ParticleState(
            time=tau_steps, n_particles=N, gaps=gaps, x1=int(x1),
            active_front=int(front),
        )
        state.check_invariants()
        tails = int(tail_hits)
    elif engine == "python":
        tails_before = cache.infinite().tail_hits
        state = state0
        for _ in range(tau_steps):
            state = step(state, params, cache, rng)
            if isinstance(ic, StepIC) and state.active_front > state.time + 1:
                raise InvariantError("active front outran the step wedge")
        state.check_invariants()
        tails = cache.infinite().tail_hits - tails_before
    else:
        raise DomainError(f"unknown engine {engine!r}")

    crossings = None
    if monitor_bonds is not None:
        crossings = crossings_from_positions(pos0, state.positions(), monitor_bonds)
    x_target = int(state.positions()[-1])
    return SimulationResult(
        x_target=x_target, state=state, bond_crossings=crossings,
        monitor_bonds=monitor_bonds, tail_hits=tails,
        requested_tau=float(tau_steps), realized_tau=tau_steps,
    )


def simulate_ensemble(params: ModelParams, N: int, tau_steps: int,
                      seed: int, replicas: int,
                      cache: JumpTableCache | None = None,
                      replica_offset: int = 0) -> tuple[np.ndarray, int]:
    """Positions X_N(tau) for `replicas` independent step-IC replicas.

    Replica r uses the stream keyed by (seed, replica_offset + r); results
    do not depend on execution order or batching.  Returns (positions,
    total tail hits).
    """
    from ._engine import run_step_ensemble

    cache = cache or JumpTableCache(params)
    cdf2d, row_len, m_dense = cache.dense_rows()
    keys = np.array(
        [stream_key(seed, replica_offset + r) for r in range(replicas)],
        dtype=np.uint64,
    )
    xs, tails = run_step_ensemble(keys, N, tau_steps, cdf2d, row_len, m_dense)
    return xs, int(tails)


def q_laplace_observable(params: ModelParams, X: int, N: int, zeta: float,
                         cfg: QSeriesConfig | None = None) -> float:
    """1 / (zeta q^(X+N); q)_inf for zeta < 0; always in (0, 1)."""
    if zeta >= 0.0:
        raise DomainError(f"zeta must be negative, got {zeta}")
    cfg = cfg or QSeriesConfig(q=params.q, tol=1e-14)
    a = zeta * params.q ** (X + N)
    return math.exp(-log_q_pochhammer_infinite(a, cfg))


def height_and_current(state: ParticleState, j: int):
    """Height h(j, t) and the particle current through j.

    The height is accumulated from an empty anchor above the first
    particle using differences -1 across occupied sites and +1 across
    vacant sites, then cross-checked against the direct count of particles
    in [j, infinity): (h(j) - j)/2 must equal that count.
    """
    pos = state.positions()
    if j <= pos[-1]:
        raise WindowError(
            f"site {j} at or below the lowest represented particle {pos[-1]}"
        )
    anchor = int(pos[0]) + 1  # no particles at or above anchor
    if j >= anchor:
        h = j  # every site above the anchor is vacant: slope +1
    else:
        h = anchor
        occupied = set(int(p) for p in pos)
        site = anchor - 1
        while site >= j:
            h += 1 if site in occupied else -1
            site -= 1
    current = int(np.sum(pos >= j))
    if (h - j) != 2 * current:
        raise InvariantError("height/current identity violated")
    return h, current


def measure_current(params: ModelParams, alpha: float, n_sites: int,
                    n_steps: int, seed: int, n_replicas: int = 16):
    """Empirical density and per-bond crossing frequency of the stationary
    dynamics, with standard errors from independent replicas.

    Each replica lays down i.i.d. stationary gaps on a segment of at least
    n_sites sites plus buffers, evolves n_steps parallel updates, and
    measures on a label window separated from both segment ends by more
    than the information cone (one label per step), which is re-checked on
    the crossing labels at runtime.
    """
    from ._engine import run_replica_arrays

    if n_sites < 10 * (n_steps + 4):
        raise DomainError(
            "segment too short for the requested horizon: need n_sites >= "
            f"10*(n_steps+4), got {n_sites}"
        )
    cache = JumpTableCache(params)
    cdf2d, row_len, m_dense = cache.dense_rows()
    gap_table = gap_law_table(params, alpha)
    buffer_labels = n_steps + 2

    rho_hats = np.empty(n_replicas)
    j_hats = np.empty(n_replicas)
    site_steps = 0
    for r in range(n_replicas):
        rng = RngStream(seed, r)
        # lay down gaps until the segment spans the requested sites
        gaps = []
        span = 0
        k = 0
        while span < n_sites:
            chunk = rng.at_many(_IC_SLOT, np.arange(k, k + 1024, dtype=np.uint64))
            draws = np.searchsorted(gap_table.cdf, chunk, side="right")
            draws = np.minimum(draws, len(gap_table.weights) - 1)
            gaps.append(draws)
            span += int((draws + 1).sum())
            k += 1024
        front_gaps = np.concatenate(gaps).astype(np.int64)
        cum = np.cumsum(front_gaps + 1)
        L = 1 + int(np.searchsorted(cum, n_sites)) + 1
        L = min(L, len(front_gaps) + 1)
        g = np.empty(L, dtype=np.int64)
        g[0] = _GAP_SENTINEL
        g[1:] = front_gaps[: L - 1]

        x1 = 0
        pos0 = np.empty(L, dtype=np.int64)
        pos0[0] = x1
        pos0[1:] = x1 - np.cumsum(g[1:] + 1)

        x1_f, _tails, _front = run_replica_arrays(
            np.uint64(rng.key), g, x1, n_steps, cdf2d, row_len, m_dense
        )
        pos1 = np.empty(L, dtype=np.int64)
        pos1[0] = x1_f
        pos1[1:] = x1_f - np.cumsum(g[1:] + 1)

        top = buffer_labels + 1  # 1-based label anchor, cone-safe
        bot = L - buffer_labels
        if bot - top < 8:
            raise DomainError("segment too short after buffers")
        # density from the label/span ratio between uncorrupted anchors
        x_hi = int(pos1[top - 1])
        x_lo = int(pos1[bot - 1])
        rho_hats[r] = (bot - top) / (x_hi - x_lo)

        # bonds capped at the top anchor's INITIAL position: no particle
        # that starts above the anchor can ever cross such a bond, so all
        # crossers carry labels >= top, outside the information cone
        b_hi = int(pos0[top - 1]) - 1
        b_lo = int(pos1[bot - 1])
        if b_hi <= b_lo:
            raise DomainError("segment too short for a bond window")
        bonds = np.arange(b_lo, b_hi + 1, dtype=np.int64)
        crossings = crossings_from_positions(pos0, pos1, bonds)
        crossers = np.nonzero((pos1 > pos0) & (pos0 <= b_hi) & (pos1 > b_lo))[0]
        if len(crossers) and int(crossers.min()) + 1 <= n_steps + 1:
            raise InvariantError("information cone reached a measured bond")
        j_hats[r] = crossings.sum() / (len(bonds) * n_steps)
        site_steps += len(bonds) * n_steps

    rho_hat = float(rho_hats.mean())
    j_hat = float(j_hats.mean())
    stderr_rho = float(rho_hats.std(ddof=1) / math.sqrt(n_replicas))
    stderr_j = float(j_hats.std(ddof=1) / math.sqrt(n_replicas))
    return {
        "rho_hat": rho_hat,
        "j_hat": j_hat,
        "stderr_rho": stderr_rho,
        "stderr_j": stderr_j,
        "site_steps": site_steps,
        "replicas": n_replicas,
    }
