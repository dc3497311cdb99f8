"""RIS phase design by fractional programming.

The weighted sum rate sum_k m_k log2(1 + gamma_k) is lifted with two sets
of auxiliaries: kappa (Lagrangian dual transform, optimum kappa_k = gamma_k)
and xi (quadratic transform). For fixed auxiliaries the problem in theta is
the concave QCQP

    max  -theta^H Q theta + 2 Re(theta^H q)   s.t. |theta_n| <= 1,

solved here by projected gradient ascent. When that relaxation settles with
some |theta_n| < 1, mapping to the unit circle can cost a lot, so a second
stage repeats the rounds with the QCQP solved on the circle itself by the
minorize-maximize update theta <- exp(j arg((lambda I - Q) theta + q)).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from ..beamform import CouplingSet, sinr_from_gains
from .context import SubproblemContext
from .pgrad import project_disc, project_unit_circle, projected_gradient_ascent


@dataclass(frozen=True)
class PhaseAux:
    kappa: np.ndarray
    xi: np.ndarray
    quad_matrix: np.ndarray
    quad_vector: np.ndarray


_SCREEN_ROUNDS = 5


def weighted_rate(couplings: CouplingSet, power, blocklength, phase, noise_power: float) -> float:
    """sum_k m_k log2(1 + gamma_k), the part of the rate that depends on theta."""
    sinr = sinr_from_gains(couplings.gains(phase), np.asarray(power, dtype=float), noise_power)
    return float(np.sum(np.asarray(blocklength) * np.log2(1.0 + sinr)))


def update_kappa(couplings: CouplingSet, power, phase, noise_power: float) -> np.ndarray:
    """Optimal dual-transform auxiliaries: the current SINRs."""
    return sinr_from_gains(couplings.gains(phase), np.asarray(power, dtype=float), noise_power)


def dual_objective(couplings, power, blocklength, phase, kappa, noise_power) -> float:
    """sum_k m_k (ln(1+kappa) - kappa + (1+kappa) |A_k|^2 / B_k), in nats."""
    p = np.asarray(power, dtype=float)
    gains = couplings.gains(phase)
    signal = p * np.diag(gains)
    total = p @ gains + noise_power
    kappa = np.asarray(kappa, dtype=float)
    return float(np.sum(np.asarray(blocklength) * (np.log1p(kappa) - kappa + (1 + kappa) * signal / total)))


def fp_objective(couplings, power, blocklength, phase, kappa, xi, noise_power) -> float:
    """Quadratic-transform objective sum_k 2 sqrt(m_k (1+kappa_k)) Re(xi_k^* A_k) - |xi_k|^2 B_k."""
    p = np.asarray(power, dtype=float)
    amps = couplings.amplitudes(phase)
    a = np.sqrt(p) * np.diag(amps)
    b = p @ np.abs(amps) ** 2 + noise_power
    weight = np.sqrt(np.asarray(blocklength) * (1 + np.asarray(kappa)))
    return float(np.sum(2 * weight * np.real(np.conj(xi) * a) - np.abs(xi) ** 2 * b))


def update_xi(couplings: CouplingSet, power, blocklength, phase, kappa, noise_power: float) -> np.ndarray:
    """Closed-form maximizer of the quadratic transform in xi."""
    p = np.asarray(power, dtype=float)
    amps = couplings.amplitudes(phase)
    total = p @ np.abs(amps) ** 2 + noise_power
    weight = np.sqrt(p * np.asarray(blocklength) * (1 + np.asarray(kappa)))
    return weight * np.diag(amps) / total


def build_quadratic(couplings: CouplingSet, power, blocklength, kappa, xi) -> PhaseAux:
    p = np.asarray(power, dtype=float)
    k, _, n = couplings.r.shape
    xi2 = np.abs(xi) ** 2
    # Q = sum_k |xi_k|^2 sum_j p_j r_jk r_jk^H
    scaled = (np.sqrt(p)[:, None, None] * np.sqrt(xi2)[None, :, None] * couplings.r).reshape(k * k, n)
    quad = scaled.T @ np.conj(scaled)
    quad = 0.5 * (quad + quad.conj().T)
    own = np.sqrt(p * (1 + np.asarray(kappa)) * np.asarray(blocklength)) * np.conj(xi)
    r_own = couplings.r[np.arange(k), np.arange(k)]  # r[k, k]
    cross = (p[:, None] * np.conj(couplings.d))[:, :, None] * couplings.r  # p_j d*_jk r_jk
    vec = own @ r_own - np.einsum("k,jkn->n", xi2, cross)
    return PhaseAux(np.asarray(kappa, dtype=float), np.asarray(xi), quad, vec)


def qcqp_objective(aux: PhaseAux, phase) -> float:
    return float(np.real(-np.vdot(phase, aux.quad_matrix @ phase) + 2 * np.vdot(phase, aux.quad_vector)))


def solve_qcqp(aux: PhaseAux, init_phase, tol: float = 1e-8, max_iter: int = 500):
    """Maximize -theta^H Q theta + 2 Re(theta^H q) over the unit discs."""
    quad, vec = aux.quad_matrix, aux.quad_vector
    lip = 2.0 * max(float(np.linalg.eigvalsh(quad)[-1]), 1e-300)
    theta, value, _ = projected_gradient_ascent(
        lambda th: qcqp_objective(aux, th),
        lambda th: 2.0 * (vec - quad @ th),
        project_disc,
        np.asarray(init_phase, dtype=complex),
        step=1.0 / lip, tol=tol, max_iter=max_iter,
    )
    return theta, value


def solve_qcqp_unit(aux: PhaseAux, init_phase, tol: float = 1e-8, max_iter: int = 500):
    """Same objective with |theta_n| = 1; monotone MM fixed-point iteration."""
    quad, vec = aux.quad_matrix, aux.quad_vector
    shifted = float(np.linalg.eigvalsh(quad)[-1]) * np.eye(quad.shape[0]) - quad
    theta = project_unit_circle(np.asarray(init_phase, dtype=complex))
    value = qcqp_objective(aux, theta)
    for _ in range(max_iter):
        cand = project_unit_circle(shifted @ theta + vec)
        new = qcqp_objective(aux, cand)
        if new < value:
            break
        change = abs(new - value) / max(abs(value), 1e-300)
        theta, value = cand, new
        if change < tol:
            break
    return theta, value


def _extrapolate(rate_of, theta, fp_theta, fp_rate, t0: float = 2.0, max_tries: int = 40,
                 project=project_disc):
    """Step-lengthening along the FP update theta -> fp_theta.

    At high SINR the quadratic transform is a very tight minorizer and each
    FP round moves theta only slightly; the update direction stays useful,
    so longer steps along it are tried while the true weighted rate keeps
    improving. The search starts at ``t0`` (the previous round's step),
    halving first if that overshoots. Returns ``(theta, rate, step)``.
    """
    step = fp_theta - theta
    best, best_rate, best_t = fp_theta, fp_rate, 1.0
    t = max(t0, 2.0)
    for _ in range(max_tries):  # back off until something beats the plain FP point
        cand = project(theta + t * step)
        rate = rate_of(cand)
        if rate > best_rate:
            best, best_rate, best_t = cand, rate, t
            break
        t *= 0.5
        if t < 2.0:
            return best, best_rate, best_t
    for _ in range(max_tries):
        t *= 2.0
        cand = project(theta + t * step)
        rate = rate_of(cand)
        if rate <= best_rate:
            break
        best, best_rate, best_t = cand, rate, t
    return best, best_rate, best_t


def solve_phase(context: SubproblemContext, power, blocklength, init_phase,
                extrapolate: bool = True) -> np.ndarray:
    """Maximize the weighted sum rate over unit-modulus phases.

    Each round updates kappa and xi in closed form and solves the QCQP on
    the relaxed unit discs; with ``extrapolate`` the round's update is then
    lengthened while the weighted rate improves. Rounds stop when the
    weighted rate changes by less than ``phase_tol`` (relative) or after
    ``phase_max_iter`` rounds. The result is mapped to the unit circle and
    refined by rounds whose QCQP keeps |theta_n| = 1. It is returned only if
    it does not lower the weighted rate of ``init_phase``; otherwise
    ``init_phase`` is returned.

    The problem is nonconvex, so ``phase_restarts`` extra random starts are
    screened with a few rounds each; the best of them is refined alongside
    ``init_phase`` and the better result is kept.
    """
    cfg = context.config
    cpl = context.couplings
    sigma2 = cfg.noise_power
    theta0 = np.asarray(init_phase, dtype=complex)
    if np.any(np.abs(theta0) > 1 + 1e-9):
        raise ValueError("initial phase outside the unit disc")
    p = np.asarray(power, dtype=float)
    m = np.asarray(blocklength, dtype=float)

    def rate_of(th):
        return weighted_rate(cpl, p, m, th, sigma2)

    def refine(start, rounds):
        theta, _ = _fp_rounds(cpl, p, m, start, cfg, rate_of, solve_qcqp, project_disc, extrapolate, rounds)
        theta, rate = _fp_rounds(cpl, p, m, project_unit_circle(theta), cfg, rate_of, solve_qcqp_unit,
                                 project_unit_circle, extrapolate, rounds)
        rotated, new_rate = _best_rotation(rate_of, theta, rate)
        if new_rate > rate:
            theta, rate = _fp_rounds(cpl, p, m, rotated, cfg, rate_of, solve_qcqp_unit,
                                     project_unit_circle, extrapolate, rounds)
        return theta, rate

    # random starts get a short screening run; only the most promising one is refined fully
    candidates = [theta0]
    screened = [refine(s, _SCREEN_ROUNDS) for s in restart_phases(theta0.size, cfg.phase_restarts)]
    if screened:
        candidates.append(max(screened, key=lambda pair: pair[1])[0])
    best, best_rate = None, -np.inf
    for start in candidates:
        theta, rate = refine(start, cfg.phase_max_iter)
        if rate > best_rate:
            best, best_rate = theta, rate
    if best_rate < rate_of(theta0):
        return theta0.copy()
    return best


def _best_rotation(rate_of, theta, rate, grid: int = 32):
    """Best common rotation theta * exp(j phi).

    When the direct links are weak next to the RIS paths the rate is nearly
    flat along this direction and the FP rounds crawl; a 1-D search settles it.
    """
    phis = 2 * np.pi * np.arange(grid) / grid
    vals = [rate_of(theta * np.exp(1j * phi)) for phi in phis]
    i = int(np.argmax(vals))
    width = 2 * np.pi / grid
    res = minimize_scalar(lambda phi: -rate_of(theta * np.exp(1j * phi)),
                          bounds=(phis[i] - width, phis[i] + width), method="bounded",
                          options={"xatol": 1e-12})
    cand = theta * np.exp(1j * res.x)
    cand_rate = rate_of(cand)
    if cand_rate > rate:
        return cand, cand_rate
    return theta, rate


def restart_phases(n: int, count: int) -> list:
    """Fixed pseudo-random unit-modulus starting points (same for every call)."""
    rng = np.random.default_rng([n, count])
    return [np.exp(1j * rng.uniform(-np.pi, np.pi, n)) for _ in range(count)]


def _fp_rounds(cpl, p, m, theta, cfg, rate_of, qcqp, project, extrapolate, rounds):
    sigma2 = cfg.noise_power
    rate = rate_of(theta)
    t = 2.0
    for _ in range(rounds):
        kappa = update_kappa(cpl, p, theta, sigma2)
        xi = update_xi(cpl, p, m, theta, kappa, sigma2)
        aux = build_quadratic(cpl, p, m, kappa, xi)
        fp_theta, _ = qcqp(aux, theta, tol=cfg.inner_tol, max_iter=cfg.inner_max_iter)
        new_rate = rate_of(fp_theta)
        if extrapolate:
            fp_theta, new_rate, t = _extrapolate(rate_of, theta, fp_theta, new_rate, t0=t, project=project)
        if new_rate < rate:  # guards the circle stage, whose QCQP is solved only locally
            break
        change = (new_rate - rate) / max(abs(rate), 1e-300)
        theta, rate = fp_theta, new_rate
        if change < cfg.phase_tol:
            break
    return theta, rate
