"""Channel blocklength allocation for fixed powers and phases.

The rate is linear in m apart from the concave dispersion penalty
Q^{-1}(eps) sqrt(m V) and the log2(m) credit. Each SCA round replaces the
penalty by its tangent upper bound at the current m^i,

    Q^{-1} sqrt(m V) <= Q^{-1} sqrt(m^i V) / 2 (1 + m / m^i),

which leaves a separable concave rate. The scalarized problem
min_m max(f_rate(m), f_cbl(sum m)) then reduces to a convex search over the
total s = sum m, with the best split for each s found by water-filling.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .. import fbl
from ..beamform import sinr_from_gains
from .context import SubproblemContext


def sqrt_bound(m, m_ref, scale=1.0):
    """Tangent upper bound of ``scale * sqrt(m)`` taken at ``m_ref``."""
    m = np.asarray(m, dtype=float)
    return scale * np.sqrt(m_ref) / 2.0 * (1.0 + m / m_ref)


def _split(coef, lower, total):
    """argmax sum_k coef_k m_k + log2 m_k  s.t. sum m = total, m >= lower."""
    lower = np.asarray(lower, dtype=float)
    if total <= lower.sum() * (1 + 1e-15):
        return lower.copy()

    def alloc(lam):
        with np.errstate(divide="ignore"):
            free = 1.0 / (fbl.LN2 * (lam - coef))
        return np.maximum(lower, free)

    lam_hi = float(np.max(coef + 1.0 / (fbl.LN2 * lower)))  # everyone at the floor
    lam_lo = float(np.max(coef))
    # bracket strictly above max(coef) where the sum exceeds the target
    gap = lam_hi - lam_lo
    lo = lam_lo + gap
    while alloc(lo).sum() <= total:
        gap *= 0.5
        lo = lam_lo + gap
        if gap < 1e-300:
            break
    lam = brentq(lambda v: alloc(v).sum() - total, lo, lam_hi, xtol=1e-14, rtol=1e-15, maxiter=500)
    m = alloc(lam)
    # remove the root-finding residual on the unclipped entries
    free = m > lower
    if np.any(free):
        m[free] += (total - m.sum()) / free.sum()
    return np.maximum(m, lower)


def _solve_surrogate(context, coef, const, lower, budget):
    """Minimize the surrogate scalarized objective over (m, s)."""
    m_star = context.utopia_m

    def bits(m):
        return float(np.sum(coef * m + np.log2(m) + const))

    def score(s):
        m = _split(coef, lower, s)
        l_val = bits(m)
        if context.rate_only:
            return -l_val, m
        f1 = context.alpha * (context.utopia_L - l_val) / context.utopia_L
        f2 = (1.0 - context.alpha) * (s - m_star) / m_star
        # tiny augmentation picks the rate-favoured end of flat optima
        return max(f1, f2) + 1e-10 * (f1 + f2), m

    lo, hi = float(lower.sum()), float(budget)
    candidates = [lo, hi]
    if hi > lo:
        res = minimize_scalar(lambda s: score(s)[0], bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-9 * hi})
        candidates.append(float(res.x))
    best = min(candidates, key=lambda s: score(s)[0])
    return score(best)[1]


def solve_cbl(context: SubproblemContext, power, phase, init_m) -> np.ndarray:
    """Optimize continuous blocklengths for fixed power and phase.

    Rounds stop when the scalarized objective changes by less than
    ``sca_tol`` or after ``sca_max_iter`` rounds; the objective is
    nonincreasing across rounds.

    Raises:
        ValueError: if ``init_m`` violates the blocklength constraints.
    """
    cfg = context.config
    lower = np.asarray(cfg.min_cbl, dtype=float)
    m = np.asarray(init_m, dtype=float)
    if np.any(m < lower - 1e-9) or m.sum() > cfg.max_cbl + 1e-9:
        raise ValueError(f"infeasible initial blocklengths {m}")
    m = np.maximum(m, lower)

    gains = context.couplings.gains(phase)
    sinr = sinr_from_gains(gains, np.asarray(power, dtype=float), cfg.noise_power)
    cap = fbl.shannon_capacity(sinr)
    qinv = fbl.q_inverse(np.asarray(cfg.target_errors))
    root_v = np.sqrt(fbl.dispersion(sinr, cfg.solver_dispersion))

    def objective(mm):
        bits = float(np.sum(mm * cap - qinv * root_v * np.sqrt(mm) + np.log2(mm)))
        return context.mu(bits, float(mm.sum()))

    current = objective(m)
    for _ in range(cfg.sca_max_iter):
        # bound: qinv root_v sqrt(m) <= qinv root_v sqrt(m_i)/2 + qinv root_v m/(2 sqrt(m_i))
        coef = cap - qinv * root_v / (2.0 * np.sqrt(m))
        const = -qinv * root_v * np.sqrt(m) / 2.0
        m_new = _solve_surrogate(context, coef, const, lower, cfg.max_cbl)
        value = objective(m_new)
        if value > current:
            break
        change = abs(current - value)
        if context.rate_only:
            change /= max(abs(current), 1e-12)
        m, current = m_new, value
        if change < cfg.sca_tol:
            break
    return m
