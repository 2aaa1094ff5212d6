"""Max-min rate solvers: two bisection schemes, two baselines, an oracle.

The optimization problem: choose per-user compression ratios and transmit
powers to maximize the minimum equivalent rate, subject to a shared budget on
transmit-plus-computation power, non-negative powers, and ratios within the
load curve's domain.

Both search schemes reduce the coupled problem to a one-dimensional
feasibility bisection on the target rate tau:

* ``solve_method1`` fixes transmit powers proportional to inverse channel
  gain (a shared received-power level beta sampled on a grid) and solves the
  ratios from the equal-rate condition at each candidate tau.
* ``solve_method2`` fixes the ratio vector on the load curve's knot values
  (Cartesian product across users) and solves the transmit powers from the
  equal-rate condition; for a fixed ratio vector this inner bisection is
  exact, since equalizing all user rates is optimal.

``solve_equal_power`` and ``solve_non_semantic`` are the comparison
baselines, and ``solve_oracle`` densifies the ratio grid for small instances
to validate the two schemes from below.

Everything is deterministic: candidate ties break toward the earliest
candidate (smallest beta, lexicographically first ratio vector).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

import numpy as np

from .model import (
    Allocation,
    ChannelState,
    CompLoadCurve,
    Method,
    SolveReport,
    SystemParams,
    channel_capacity,
    comp_power,
    derive_allocation,
    equivalent_rate,
    zero_allocation,
)

__all__ = [
    "BUDGET_RTOL",
    "BisectionOutcome",
    "EtaCandidateSet",
    "bisect_tau",
    "eta_from_tau",
    "p_t_from_tau",
    "beta_range",
    "beta_grid",
    "enumerate_eta_vectors",
    "method1_power_sum",
    "method2_power_sum",
    "solve_method1",
    "solve_method2",
    "solve_equal_power",
    "solve_non_semantic",
    "solve_oracle",
    "ORACLE_MAX_USERS",
]

_LN2 = math.log(2.0)

# A power sum within this relative distance of the budget counts as exactly
# on-budget and is classified feasible; bisection then keeps converging
# instead of stopping early, which matters where the power sum is flat in tau
# (no compression active) and "on budget" does not pin down the optimum.
BUDGET_RTOL = 1e-12

ORACLE_MAX_USERS = 3

# Candidate vectors per numpy batch in the fixed-ratio solvers.
_CHUNK = 16384


@dataclass(frozen=True)
class BisectionOutcome:
    """Result of one feasibility bisection.

    ``tau_bps`` is the highest point tested feasible (the surviving lower
    bound). ``converged`` is False only when the initial lower bound itself
    was infeasible.
    """

    tau_bps: float
    iterations: int
    converged: bool


def bisect_tau(
    feasible_at: Callable[[float], bool], lo: float, hi: float, epsilon: float
) -> BisectionOutcome:
    """Feasibility bisection for the largest feasible value in [lo, hi].

    ``feasible_at`` must be monotone: true below some threshold, false above.
    Loops while ``hi - lo > epsilon``, keeping ``lo`` feasible and ``hi``
    infeasible, and returns the final lower bound. If ``feasible_at(lo)`` is
    already false the outcome is ``converged=False`` with ``tau_bps=lo``.
    """
    lo = float(lo)
    hi = float(hi)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("bisection bounds must be finite")
    if not lo < hi:
        raise ValueError("bisection requires lo < hi")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not feasible_at(lo):
        return BisectionOutcome(tau_bps=lo, iterations=0, converged=False)
    iterations = 0
    while hi - lo > epsilon:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break  # interval narrower than float resolution
        iterations += 1
        if feasible_at(mid):
            lo = mid
        else:
            hi = mid
    return BisectionOutcome(tau_bps=lo, iterations=iterations, converged=True)


def eta_from_tau(
    tau: float,
    p_t: float,
    h: float,
    params: SystemParams,
    eta_floor: float,
) -> float | None:
    """Ratio a user needs to hit rate tau at fixed transmit power.

    Solves the equal-rate condition for the compression ratio. Ratios above
    1 are clamped to 1 (the user overshoots tau at zero compute cost);
    ratios below ``eta_floor`` fall outside the load curve's domain and
    return None (infeasible).
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    eta = channel_capacity(p_t, h, params) / tau
    if eta > 1.0:
        return 1.0
    if eta < eta_floor:
        return None
    return eta


def p_t_from_tau(tau: float, eta: float, h: float, params: SystemParams) -> float:
    """Transmit power a user needs to hit rate tau at fixed ratio eta.

    Inverse of capacity followed by the equivalent-rate division: feeding the
    result back through those reproduces tau. Exponents beyond 1024 doublings
    saturate to +inf, which callers treat as beyond any budget.
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    if not 0 < eta <= 1:
        raise ValueError("compression ratio must lie in (0, 1]")
    if h <= 0:
        raise ValueError("channel gain must be positive")
    exponent = tau * eta / params.bandwidth_hz
    if exponent > 1024.0:
        return math.inf
    try:
        growth = math.expm1(exponent * _LN2)
    except OverflowError:
        return math.inf
    return growth * params.noise_power_w / h


def beta_range(channel: ChannelState, params: SystemParams) -> float:
    """Upper end of the received-power range: budget over the inverse-gain sum.

    Valid received-power levels are [0, beta_max]; at beta_max the whole
    budget goes to transmission.
    """
    inv_gain_sum = float(np.sum(1.0 / channel.gains))
    return params.p_max_w / inv_gain_sum


def beta_grid(beta_max: float, m: int) -> np.ndarray:
    """m equidistant received-power samples on [0, beta_max], ends included."""
    if int(m) != m or m < 2:
        raise ValueError("need at least 2 grid samples")
    if not beta_max > 0:
        raise ValueError("beta_max must be positive")
    return np.linspace(0.0, beta_max, int(m))


@dataclass(frozen=True)
class EtaCandidateSet:
    """Per-user candidate ratios for the fixed-ratio scheme: all knot values."""

    per_user_values: tuple[float, ...]

    def __post_init__(self) -> None:
        vals = self.per_user_values
        if not vals or vals[0] != 1.0:
            raise ValueError("candidate ratios must start at 1")
        for i in range(1, len(vals)):
            if not vals[i] < vals[i - 1]:
                raise ValueError("candidate ratios must be strictly decreasing")
        if vals[-1] <= 0:
            raise ValueError("candidate ratios must be positive")

    @classmethod
    def from_curve(cls, curve: CompLoadCurve) -> "EtaCandidateSet":
        return cls(curve.candidate_etas)


def enumerate_eta_vectors(
    curve: CompLoadCurve, n_users: int
) -> Iterator[tuple[float, ...]]:
    """All ratio vectors over the knot candidates, lexicographic order.

    Yields the Cartesian product of the candidate set across users:
    (S+1)^n_users vectors, starting at all-ones. The caller is responsible
    for bounding n_users; the count grows exponentially.
    """
    cands = EtaCandidateSet.from_curve(curve).per_user_values
    return itertools.product(cands, repeat=n_users)


# ---------------------------------------------------------------------------
# Proportional-received-power scheme (grid over beta, ratios from tau)
# ---------------------------------------------------------------------------


def _beta_power_sum(
    p_t: list[float],
    caps: list[float],
    curve: CompLoadCurve,
    params: SystemParams,
    tau: float,
) -> float:
    """Total power at target tau with fixed per-user transmit powers.

    Each user's ratio follows from the equal-rate condition (capacity over
    tau, clamped at 1); a ratio below the curve domain makes the whole
    candidate infeasible, reported as +inf.
    """
    floor = curve.eta_floor
    p0 = params.p0_w_per_load
    total = 0.0
    for i in range(len(p_t)):
        eta = caps[i] / tau
        if eta > 1.0:
            eta = 1.0
        elif eta < floor:
            return math.inf
        total += p_t[i] + curve.load_at(eta) * p0
    return total


def method1_power_sum(
    channel: ChannelState,
    curve: CompLoadCurve,
    params: SystemParams,
    beta: float,
    tau: float,
) -> float:
    """Budget predicate body for the proportional-power scheme.

    Exactly the power sum the solver's inner bisection evaluates at
    (beta, tau); exposed so tests can certify the winning candidate.
    """
    gains = [float(g) for g in channel.gains]
    p_t = [beta / g for g in gains]
    caps = [channel_capacity(p_t[i], gains[i], params) for i in range(len(gains))]
    return _beta_power_sum(p_t, caps, curve, params, tau)


def solve_method1(
    channel: ChannelState, curve: CompLoadCurve, params: SystemParams
) -> SolveReport:
    """Grid search over the shared received-power level with inner bisection.

    For each sampled beta, transmit powers are beta over the gain (equal
    received power, hence equal capacity up to rounding) and tau is bisected
    against the power budget. The best tau across the grid wins; ties break
    toward the smaller beta.
    """
    gains = [float(g) for g in channel.gains]
    n = len(gains)
    betas = beta_grid(beta_range(channel, params), params.m_beta_samples)
    budget_tol = params.p_max_w * (1.0 + BUDGET_RTOL)
    best_tau = -math.inf
    best: tuple[float, list[float], list[float]] | None = None
    iters_total = 0
    for beta_raw in betas:
        beta = float(beta_raw)
        p_t = [beta / g for g in gains]
        caps = [channel_capacity(p_t[i], gains[i], params) for i in range(n)]
        outcome = bisect_tau(
            lambda tau: _beta_power_sum(p_t, caps, curve, params, tau) <= budget_tol,
            params.tau_lo_init,
            params.tau_hi_init,
            params.epsilon,
        )
        iters_total += outcome.iterations
        if outcome.converged and outcome.tau_bps > best_tau:
            best_tau = outcome.tau_bps
            best = (beta, p_t, caps)
    if best is None:
        return SolveReport(
            method=Method.METHOD1,
            tau_bps=0.0,
            allocation=zero_allocation(n),
            feasible=False,
            outer_candidates_evaluated=len(betas),
            bisection_iterations_total=iters_total,
        )
    beta, p_t, caps = best
    etas = []
    for i in range(n):
        eta = caps[i] / best_tau
        etas.append(1.0 if eta > 1.0 else eta)
    alloc = derive_allocation(etas, p_t, channel, curve, params)
    return SolveReport(
        method=Method.METHOD1,
        tau_bps=best_tau,
        allocation=alloc,
        feasible=True,
        outer_candidates_evaluated=len(betas),
        bisection_iterations_total=iters_total,
        winning_beta=beta,
    )


# ---------------------------------------------------------------------------
# Fixed-ratio family (knot candidates, oracle grids); batched bisection
# ---------------------------------------------------------------------------


def _fixed_eta_power_sums(
    eta_mat: np.ndarray,
    p_c_mat: np.ndarray,
    gains: np.ndarray,
    params: SystemParams,
    taus: np.ndarray,
) -> np.ndarray:
    """Row-wise total power for ratio vectors eta_mat at per-row targets taus.

    Transmit powers invert the equal-rate condition per user; overflow
    saturates to +inf, marking the row infeasible at that tau.
    """
    with np.errstate(over="ignore"):
        exponent = taus[:, None] * eta_mat / params.bandwidth_hz
        growth = np.expm1(exponent * _LN2)
        p_t = growth * params.noise_power_w / gains[None, :]
        return np.sum(p_t + p_c_mat, axis=1)


def method2_power_sum(
    channel: ChannelState,
    curve: CompLoadCurve,
    params: SystemParams,
    eta_values: Iterable[float],
    tau: float,
) -> float:
    """Budget predicate body for a fixed ratio vector at target tau.

    Same arithmetic as the batched inner bisection (single-row batch), so
    tests can certify winning candidates bit for bit.
    """
    eta_vec = [float(e) for e in eta_values]
    if len(eta_vec) != channel.n_users:
        raise ValueError("ratio vector length must match the user count")
    for e in eta_vec:
        if not curve.eta_floor <= e <= 1.0:
            raise ValueError(f"ratio {e!r} outside curve domain")
    eta_mat = np.array([eta_vec])
    p_c_mat = _comp_power_matrix(eta_mat, curve, params)
    taus = np.array([float(tau)])
    return float(_fixed_eta_power_sums(eta_mat, p_c_mat, channel.gains, params, taus)[0])


def _comp_power_matrix(
    eta_mat: np.ndarray, curve: CompLoadCurve, params: SystemParams
) -> np.ndarray:
    # np.interp evaluates the identical slope-point formula as load_at, so
    # batched and scalar computation powers agree bit for bit.
    loads = np.interp(eta_mat, curve._etas_asc, curve._loads_asc)
    return loads * params.p0_w_per_load


def _batch_bisect_fixed_eta(
    eta_mat: np.ndarray,
    p_c_mat: np.ndarray,
    gains: np.ndarray,
    params: SystemParams,
    budget_tol: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run every row's tau bisection in lockstep.

    Per row this reproduces the scalar loop of :func:`bisect_tau` with the
    budget predicate: keep the lower bound feasible, halve until the width
    drops below epsilon. Returns (tau, converged, iterations) per row.
    """
    n_rows = eta_mat.shape[0]
    lo = np.full(n_rows, float(params.tau_lo_init))
    hi = np.full(n_rows, float(params.tau_hi_init))
    eps = params.epsilon

    p_lo = _fixed_eta_power_sums(eta_mat, p_c_mat, gains, params, lo)
    alive = p_lo <= budget_tol
    iters = np.zeros(n_rows, dtype=np.int64)
    stalled = np.zeros(n_rows, dtype=bool)
    active = alive & ~stalled & ((hi - lo) > eps)
    while np.any(active):
        mid = 0.5 * (lo + hi)
        stall_now = active & ((mid <= lo) | (mid >= hi))
        stalled |= stall_now
        act = active & ~stall_now
        p_mid = _fixed_eta_power_sums(eta_mat, p_c_mat, gains, params, mid)
        feasible = p_mid <= budget_tol
        lo = np.where(act & feasible, mid, lo)
        hi = np.where(act & ~feasible, mid, hi)
        iters[act] += 1
        active = alive & ~stalled & ((hi - lo) > eps)
    tau = np.where(alive, lo, float(params.tau_lo_init))
    return tau, alive, iters


def _best_fixed_eta(
    channel: ChannelState,
    curve: CompLoadCurve,
    params: SystemParams,
    vectors: Iterable[tuple[float, ...]],
) -> tuple[tuple[float, tuple[float, ...]] | None, int, int]:
    """Bisect every ratio vector; return (best, candidates seen, iterations).

    ``best`` is (tau, vector) for the highest converged tau, ties resolved
    toward the earliest vector in enumeration order.
    """
    gains = channel.gains
    budget_tol = params.p_max_w * (1.0 + BUDGET_RTOL)
    best: tuple[float, tuple[float, ...]] | None = None
    n_seen = 0
    iters_total = 0
    it = iter(vectors)
    while True:
        chunk = list(itertools.islice(it, _CHUNK))
        if not chunk:
            break
        eta_mat = np.array(chunk, dtype=np.float64)
        p_c_mat = _comp_power_matrix(eta_mat, curve, params)
        tau, alive, iters = _batch_bisect_fixed_eta(
            eta_mat, p_c_mat, gains, params, budget_tol
        )
        n_seen += len(chunk)
        iters_total += int(iters.sum())
        if np.any(alive):
            masked = np.where(alive, tau, -math.inf)
            k = int(np.argmax(masked))  # first occurrence wins ties
            if best is None or masked[k] > best[0]:
                best = (float(masked[k]), chunk[k])
    return best, n_seen, iters_total


def _fixed_eta_report(
    method: Method,
    channel: ChannelState,
    curve: CompLoadCurve,
    params: SystemParams,
    vectors: Iterable[tuple[float, ...]],
) -> SolveReport:
    best, n_seen, iters_total = _best_fixed_eta(channel, curve, params, vectors)
    if best is None:
        return SolveReport(
            method=method,
            tau_bps=0.0,
            allocation=zero_allocation(channel.n_users),
            feasible=False,
            outer_candidates_evaluated=n_seen,
            bisection_iterations_total=iters_total,
        )
    tau, eta_vec = best
    p_t = [
        p_t_from_tau(tau, eta_vec[n], float(channel.gains[n]), params)
        for n in range(channel.n_users)
    ]
    alloc = derive_allocation(eta_vec, p_t, channel, curve, params)
    return SolveReport(
        method=method,
        tau_bps=tau,
        allocation=alloc,
        feasible=True,
        outer_candidates_evaluated=n_seen,
        bisection_iterations_total=iters_total,
    )


def solve_method2(
    channel: ChannelState,
    curve: CompLoadCurve,
    params: SystemParams,
    shared_eta: bool = False,
) -> SolveReport:
    """Exhaustive search over knot-valued ratio vectors with exact inner step.

    With the ratio vector fixed the computation power is fixed, and the
    remaining max-min power allocation is solved exactly (to epsilon) by
    bisecting tau against the budget: equalizing every user's rate is
    optimal there. ``shared_eta=True`` restricts the search to one common
    ratio for all users instead of the full Cartesian product.
    """
    if shared_eta:
        cands = EtaCandidateSet.from_curve(curve).per_user_values
        vectors: Iterable[tuple[float, ...]] = (
            (v,) * channel.n_users for v in cands
        )
    else:
        vectors = enumerate_eta_vectors(curve, channel.n_users)
    return _fixed_eta_report(Method.METHOD2, channel, curve, params, vectors)


def _oracle_candidates(
    curve: CompLoadCurve, grid_points_per_segment: int
) -> tuple[float, ...]:
    """Knot ratios plus equidistant interior points per segment, descending."""
    cands = [1.0]
    for s in range(curve.num_segments):
        e_hi = curve.knots[s][0]
        e_lo = curve.knots[s + 1][0]
        if grid_points_per_segment > 0:
            interior = np.linspace(e_hi, e_lo, grid_points_per_segment + 2)[1:-1]
            cands.extend(float(v) for v in interior)
        cands.append(e_lo)
    return tuple(cands)


def solve_oracle(
    channel: ChannelState,
    curve: CompLoadCurve,
    params: SystemParams,
    grid_points_per_segment: int = 10,
) -> SolveReport:
    """Brute-force lower bound on the optimum for small instances.

    Runs the exact fixed-ratio inner solve over a dense per-user ratio grid
    (all knots plus ``grid_points_per_segment`` interior points per segment).
    With zero grid points the candidate set collapses to the knot set and the
    result coincides with ``solve_method2``. Cost grows as grid^n_users, so
    instances are capped at ``ORACLE_MAX_USERS`` users.
    """
    if channel.n_users > ORACLE_MAX_USERS:
        raise ValueError(
            f"oracle is limited to {ORACLE_MAX_USERS} users "
            f"(got {channel.n_users}); cost grows exponentially"
        )
    if grid_points_per_segment < 0:
        raise ValueError("grid_points_per_segment must be non-negative")
    cands = _oracle_candidates(curve, grid_points_per_segment)
    vectors = itertools.product(cands, repeat=channel.n_users)
    return _fixed_eta_report(Method.ORACLE, channel, curve, params, vectors)


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def _golden_max(f: Callable[[float], float], a: float, b: float, tol: float) -> float:
    """Golden-section maximizer on [a, b]; returns the bracket midpoint."""
    width = b - a
    if width <= tol:
        return 0.5 * (a + b)
    c = a + _INVPHI2 * width
    d = a + _INVPHI * width
    yc = f(c)
    yd = f(d)
    while width > tol:
        if yc > yd:
            b, d, yd = d, c, yc
            width = b - a
            c = a + _INVPHI2 * width
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            width = b - a
            d = a + _INVPHI * width
            yd = f(d)
    return 0.5 * (a + b)


def _best_user_ratio(
    h: float, curve: CompLoadCurve, params: SystemParams, budget_w: float
) -> tuple[float, float]:
    """Maximize one user's rate over the ratio, within a power budget.

    The rate as a function of the ratio is smooth inside each load-curve
    segment but kinked at breakpoints, so each segment (cut down to where
    computation power fits the budget) is searched separately with
    golden-section, and all segment optima, knots and budget boundaries are
    compared. Returns (ratio, rate).
    """

    def rate_at(eta: float) -> float:
        p_c = comp_power(curve, eta, params)
        p_t = budget_w - p_c
        if p_t < 0:
            p_t = 0.0  # only reachable by rounding at the budget boundary
        return equivalent_rate(channel_capacity(p_t, h, params), eta)

    p0 = params.p0_w_per_load
    best_eta = 1.0
    best_rate = rate_at(1.0)
    loads = [k[1] for k in curve.knots]
    for s in range(curve.num_segments):
        e_hi = curve.knots[s][0]
        e_lo = curve.knots[s + 1][0]
        if p0 > 0:
            load_cap = budget_w / p0
            if loads[s] > load_cap:
                break  # this and all lower segments exceed the budget
            if loads[s + 1] > load_cap:
                # cut the segment at the ratio where computation power
                # exhausts the budget; clamp against rounding drift past
                # the segment bounds
                cut = (load_cap - curve.intercepts[s]) / curve.slopes[s]
                e_lo = min(max(cut, curve.knots[s + 1][0]), e_hi)
        for eta in (e_lo, _golden_max(rate_at, e_lo, e_hi, 1e-9)):
            r = rate_at(eta)
            if r > best_rate:
                best_rate = r
                best_eta = eta
    return best_eta, best_rate


def solve_equal_power(
    channel: ChannelState, curve: CompLoadCurve, params: SystemParams
) -> SolveReport:
    """Baseline: split the budget equally, optimize each user independently.

    Every user gets p_max/N and picks the ratio maximizing its own rate
    (transmit power is whatever the ratio's computation power leaves over).
    The scheme's value is the worst user's optimum.
    """
    n = channel.n_users
    budget = params.p_max_w / n
    if budget <= 0:
        return SolveReport(
            method=Method.EQUAL_POWER,
            tau_bps=0.0,
            allocation=zero_allocation(n),
            feasible=False,
            outer_candidates_evaluated=n,
            bisection_iterations_total=0,
        )
    etas = []
    p_ts = []
    for i in range(n):
        eta, _ = _best_user_ratio(float(channel.gains[i]), curve, params, budget)
        p_c = comp_power(curve, eta, params)
        p_t = budget - p_c
        if p_t < 0:
            p_t = 0.0
        etas.append(eta)
        p_ts.append(p_t)
    alloc = derive_allocation(etas, p_ts, channel, curve, params)
    return SolveReport(
        method=Method.EQUAL_POWER,
        tau_bps=alloc.tau_bps,
        allocation=alloc,
        feasible=True,
        outer_candidates_evaluated=n,
        bisection_iterations_total=0,
    )


def solve_non_semantic(channel: ChannelState, params: SystemParams) -> SolveReport:
    """Baseline: no compression, power inversely proportional to the gain.

    All users see the same received power, hence equal rates, and the whole
    budget goes to transmission.
    """
    beta_max = beta_range(channel, params)
    gains = [float(g) for g in channel.gains]
    p_t = [beta_max / g for g in gains]
    rates = [
        equivalent_rate(channel_capacity(p_t[i], gains[i], params), 1.0)
        for i in range(len(gains))
    ]
    n = len(gains)
    alloc = Allocation(
        eta=np.ones(n),
        p_t_w=np.array(p_t),
        p_c_w=np.zeros(n),
        rates_bps=np.array(rates),
        tau_bps=min(rates),
    )
    return SolveReport(
        method=Method.NON_SEMANTIC,
        tau_bps=alloc.tau_bps,
        allocation=alloc,
        feasible=True,
        outer_candidates_evaluated=1,
        bisection_iterations_total=0,
    )
