"""Transmit power allocation by successive convex approximation.

With blocklengths and phases fixed the total rate splits into a difference
of two concave functions of p,

    L+(p) = sum_k m_k log2(I_k(p) + p_k g_kk) + log2 m_k
    L-(p) = sum_k m_k log2(I_k(p)) + sqrt(m_k) Q^{-1}(eps_k) / ln 2

and each round maximizes L+ minus the linearization of L- over the power
budget.
"""
from __future__ import annotations

import numpy as np

from .. import fbl
from ..beamform import interference
from .context import SubproblemContext
from .pgrad import project_capped_simplex, projected_gradient_ascent


def _received(gains, power, noise_power):
    return power @ gains + noise_power


def l_minus(power, context: SubproblemContext, blocklength, phase) -> float:
    gains = context.couplings.gains(phase)
    cfg = context.config
    m = np.asarray(blocklength, dtype=float)
    inter = interference(gains, np.asarray(power, dtype=float), cfg.noise_power)
    penalty = np.sqrt(m) * fbl.q_inverse(np.asarray(cfg.target_errors)) / fbl.LN2
    return float(np.sum(m * np.log2(inter) + penalty))


def _grad_l_minus(gains, power, m, noise_power):
    off = gains * (1.0 - np.eye(gains.shape[0]))
    inter = power @ off + noise_power
    return off @ (m / (inter * fbl.LN2))


def grad_L_minus_power(power, context: SubproblemContext, blocklength, phase) -> np.ndarray:
    """Gradient of L- with respect to p.

    Component j is sum_{k != j} m_k g[j, k] / (I_k ln 2).
    """
    gains = context.couplings.gains(phase)
    return _grad_l_minus(gains, np.asarray(power, dtype=float),
                         np.asarray(blocklength, dtype=float), context.config.noise_power)


def solve_power(context: SubproblemContext, blocklength, phase, init_power) -> np.ndarray:
    """Maximize the total rate over the power budget for fixed m and theta.

    SCA rounds stop when the relative change of the total rate drops below
    ``sca_tol`` or after ``sca_max_iter`` rounds. The true objective never
    decreases from round to round: a round that fails to improve it is
    discarded. Besides ``init_power`` the rounds are also started from the
    uniform split and from each single-user allocation, since the rate is
    not concave in p; the best end point wins.

    Raises:
        ValueError: if ``init_power`` is infeasible.
    """
    cfg = context.config
    p_tot = cfg.p_total
    p = np.asarray(init_power, dtype=float)
    if np.any(p < 0) or p.sum() > p_tot * (1 + 1e-9):
        raise ValueError(f"infeasible initial power {p} (budget {p_tot})")
    m = np.asarray(blocklength, dtype=float)
    k = m.size
    starts = [p, np.full(k, p_tot / k)] + [p_tot * row for row in np.eye(k)]
    best, best_value = None, -np.inf
    for start in starts:
        cand, value = _sca(context, m, phase, start)
        if value > best_value:
            best, best_value = cand, value
    return best


def _sca(context, m, phase, p):
    cfg = context.config
    p_tot = cfg.p_total
    gains = context.couplings.gains(phase)
    sigma2 = cfg.noise_power
    log2m = np.log2(m)

    current = context.bits(p, m, phase)
    # work in x = p / p_total so the feasible set is the unit capped simplex
    for _ in range(cfg.sca_max_iter):
        lin = p_tot * _grad_l_minus(gains, p, m, sigma2)
        x0 = p / p_tot

        def surrogate(x):
            return float(np.sum(m * np.log2(_received(gains, p_tot * x, sigma2)) + log2m) - lin @ x)

        def ascent(x):
            rec = _received(gains, p_tot * x, sigma2)
            return p_tot * (gains @ (m / (rec * fbl.LN2))) - lin

        x, _, _ = projected_gradient_ascent(
            surrogate, ascent, lambda v: project_capped_simplex(v, 1.0), x0,
            step=1.0 / max(np.max(np.abs(ascent(x0))), 1e-12),
            tol=cfg.inner_tol, max_iter=cfg.inner_max_iter,
        )
        p_new = p_tot * x
        value = context.bits(p_new, m, phase)
        if value < current:
            break
        change = abs(value - current) / max(abs(current), 1e-12)
        p, current = p_new, value
        if change < cfg.sca_tol:
            break
    return p, current
