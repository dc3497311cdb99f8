"""Alternating optimization over power, blocklength and RIS phase.

One outer iteration refreshes the MRT precoders for the current phase and
then solves, in order, the power, blocklength and phase sub-problems with
the couplings frozen. A phase update is kept only if, after the precoders
are refreshed for it, the scalarized objective has not gone up; this keeps
the precoders matched to the phase at all times and the objective
monotone.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .beamform import Allocation, coupling_set, mrt_precoders, sinr_all
from .channel import ChannelSet, derive_rng
from .config import SystemConfig
from .solver import SubproblemContext, solve_cbl, solve_phase, solve_power, tchebyshev_mu, weighted_rate
from .solver.pgrad import project_box_sum

__all__ = ["IterationRecord", "SolveReport", "tchebyshev_mu", "utopia_points", "run_alternating",
           "baseline_random_phase", "baseline_shannon", "round_blocklengths", "initial_allocation"]


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    mu: float
    L_total: float
    m_total: float
    power_objective: float = float("nan")
    cbl_objective: float = float("nan")
    phase_objective: float = float("nan")
    phase_accepted: bool = True


@dataclass
class SolveReport:
    final_allocation: Allocation
    trace: list
    converged: bool
    iterations: int
    wall_time: float
    utopia_L: float | None
    utopia_m: float
    alpha: float
    precoders: np.ndarray = field(repr=False)
    rounded_blocklength: np.ndarray = field(default=None)
    rounded_L_total: float = float("nan")  # solver-mode bits at the integer blocklengths

    @property
    def mu(self) -> float:
        return self.trace[-1].mu

    @property
    def L_total(self) -> float:
        return self.trace[-1].L_total

    @property
    def m_total(self) -> float:
        return float(self.final_allocation.blocklength.sum())

    @property
    def mu_trace(self) -> np.ndarray:
        return np.array([rec.mu for rec in self.trace])


def round_blocklengths(m, lower, budget: int) -> np.ndarray:
    """Largest-remainder integer rounding with sum <= budget and m >= lower."""
    m = np.asarray(m, dtype=float)
    base = np.maximum(np.floor(m + 1e-9), np.asarray(lower)).astype(int)
    target = int(min(budget, max(base.sum(), round(float(m.sum())))))
    extra = target - int(base.sum())
    if extra > 0:
        order = np.argsort(-(m - base), kind="stable")
        base[order[:extra]] += 1
    return base


def initial_allocation(config: SystemConfig, seed: int = 0) -> Allocation:
    """Uniform power, uniform blocklengths, all-ones (or random) phases."""
    k, n = config.users, config.ris_elements
    power = np.full(k, config.p_total / k)
    m = np.maximum(np.asarray(config.min_cbl, dtype=float), config.max_cbl / k)
    m = project_box_sum(m, config.min_cbl, config.max_cbl)
    if config.random_phase_init:
        phase = np.exp(1j * derive_rng(seed, 7).uniform(-np.pi, np.pi, n))
    else:
        phase = np.ones(n, dtype=complex)
    return Allocation(power, m, phase)


def _context(config, channels, phase, utopia_L, alpha):
    w = mrt_precoders(channels, phase)
    cpl = coupling_set(channels, w)
    return SubproblemContext(cpl, config, utopia_L, float(config.min_cbl_total), alpha), w


def _alternate(config: SystemConfig, channels: ChannelSet, alpha: float, utopia_L, start: Allocation,
               optimize_phase: bool = True) -> SolveReport:
    t0 = time.perf_counter()
    p, m, theta = start.power.copy(), start.blocklength.copy(), start.phase.copy()
    ctx, w = _context(config, channels, theta, utopia_L, alpha)

    def score(c, pp, mm, th):
        bits = c.bits(pp, mm, th)
        return c.mu(bits, float(mm.sum())), bits

    mu, bits = score(ctx, p, m, theta)
    trace = [IterationRecord(0, mu, bits, float(m.sum()))]
    converged = False
    for it in range(1, config.ao_max_iter + 1):
        p = solve_power(ctx, m, theta, p)
        power_obj = ctx.bits(p, m, theta)
        m = solve_cbl(ctx, p, theta, m)
        cbl_obj, _ = score(ctx, p, m, theta)
        accepted = True
        phase_obj = float("nan")
        if optimize_phase:
            cand = solve_phase(ctx, p, m, theta)
            if not np.array_equal(cand, theta):
                cand_ctx, cand_w = _context(config, channels, cand, utopia_L, alpha)
                cand_mu, _ = score(cand_ctx, p, m, cand)
                if cand_mu <= cbl_obj:
                    theta, ctx, w = cand, cand_ctx, cand_w
                else:
                    accepted = False
            phase_obj = weighted_rate(ctx.couplings, p, m, theta, config.noise_power)
        new_mu, bits = score(ctx, p, m, theta)
        trace.append(IterationRecord(it, new_mu, bits, float(m.sum()), power_obj, cbl_obj, phase_obj, accepted))
        delta = abs(mu - new_mu)
        if ctx.rate_only:
            delta /= max(abs(new_mu), 1e-12)
        mu = new_mu
        if delta < config.ao_tol:
            converged = True
            break

    alloc = Allocation(p, m, theta)
    rounded = round_blocklengths(m, config.min_cbl, config.max_cbl)
    return SolveReport(
        final_allocation=alloc,
        trace=trace,
        converged=converged,
        iterations=len(trace) - 1,
        wall_time=time.perf_counter() - t0,
        utopia_L=utopia_L,
        utopia_m=float(config.min_cbl_total),
        alpha=alpha,
        precoders=w,
        rounded_blocklength=rounded,
        rounded_L_total=ctx.bits(p, rounded.astype(float), theta),
    )


def utopia_points(config: SystemConfig, channels: ChannelSet, seed: int = 0, phase=None):
    """Best attainable total rate and total blocklength, each on its own.

    Returns ``(L_star, m_star)``; ``m_star`` is simply the sum of the
    per-user minimum blocklengths, ``L_star`` comes from the alternating
    loop run with the rate objective only. A fixed ``phase`` holds the RIS
    still during that run (used by the random-phase baseline).
    """
    start = initial_allocation(config, seed)
    if phase is not None:
        start = Allocation(start.power, start.blocklength, np.asarray(phase, dtype=complex))
    report = _alternate(config, channels, 1.0, None, start, optimize_phase=phase is None)
    l_star = report.L_total
    if not l_star > 0:
        raise SolverError(f"utopia rate is not positive ({l_star:.4g}); scenario cannot carry data")
    return l_star, float(config.min_cbl_total)


def run_alternating(config: SystemConfig, channels: ChannelSet, alpha: float | None = None, seed: int = 0,
                    utopia=None) -> SolveReport:
    """Run the full scalarized alternating optimization.

    Args:
        alpha: Tchebyshev weight on the rate objective; defaults to ``config.alpha``.
        seed: only used when ``config.random_phase_init`` is set.
        utopia: precomputed ``(L_star, m_star)`` for this channel realization.
    """
    alpha = config.alpha if alpha is None else alpha
    l_star, _ = utopia if utopia is not None else utopia_points(config, channels, seed)
    return _alternate(config, channels, alpha, l_star, initial_allocation(config, seed))


def random_phase(n: int, seed: int) -> np.ndarray:
    return np.exp(1j * derive_rng(seed, 11).uniform(-np.pi, np.pi, n))


def baseline_random_phase(config: SystemConfig, channels: ChannelSet, alpha: float | None = None, seed: int = 0,
                          utopia=None, phase=None) -> SolveReport:
    """Same pipeline with the RIS held at a uniformly random unit-modulus phase.

    The phase stays fixed everywhere, including the utopia run, so the
    baseline balances its objectives against what it can itself reach.
    ``phase`` overrides the random draw (a zero vector removes the RIS).
    """
    alpha = config.alpha if alpha is None else alpha
    theta = random_phase(config.ris_elements, seed) if phase is None else np.asarray(phase, dtype=complex)
    l_star, _ = utopia if utopia is not None else utopia_points(config, channels, seed, phase=theta)
    start = initial_allocation(config, seed)
    start = Allocation(start.power, start.blocklength, theta)
    return _alternate(config, channels, alpha, l_star, start, optimize_phase=False)


def baseline_shannon(config: SystemConfig, channels: ChannelSet, allocation: Allocation,
                     precoders=None) -> float:
    """Infinite-blocklength bits sum_k m_k log2(1 + gamma_k) over the same channel uses."""
    if precoders is None:
        precoders = mrt_precoders(channels, allocation.phase)
    cpl = coupling_set(channels, precoders)
    sinr = sinr_all(cpl, allocation.power, allocation.phase, config.noise_power)
    return float(np.sum(allocation.blocklength * np.log2(1.0 + sinr)))
