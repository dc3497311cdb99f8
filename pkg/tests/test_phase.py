import numpy as np
import pytest

from conftest import context_for, moderate_instance, synthetic_channels
from risfbl import fbl
from risfbl.config import SystemConfig
from risfbl.solver import (build_quadratic, dual_objective, fp_objective, solve_phase, solve_qcqp,
                           solve_qcqp_unit, update_kappa, update_xi, weighted_rate)
from risfbl.solver.phase import qcqp_objective


def instance(seed, users=3, ris=6):
    cfg, ch, rng = moderate_instance(seed, users=users, ris=ris)
    theta = np.exp(1j * rng.uniform(-np.pi, np.pi, ris)) * rng.uniform(0.3, 1.0, ris)
    ctx = context_for(cfg, ch, np.ones(ris, complex))
    p = rng.dirichlet(np.ones(users)) * cfg.p_total
    m = rng.uniform(10, 60, users)
    return cfg, ctx, p, m, theta, rng


@pytest.mark.parametrize("seed", range(5))
def test_kappa_substitution_identity(seed):
    cfg, ctx, p, m, theta, _ = instance(seed)
    kappa = update_kappa(ctx.couplings, p, theta, cfg.noise_power)
    dual = dual_objective(ctx.couplings, p, m, theta, kappa, cfg.noise_power)
    assert dual == pytest.approx(fbl.LN2 * weighted_rate(ctx.couplings, p, m, theta, cfg.noise_power), rel=1e-9)
    # any other kappa lower-bounds the rate
    other = dual_objective(ctx.couplings, p, m, theta, kappa * 1.3, cfg.noise_power)
    assert other <= dual


@pytest.mark.parametrize("seed", range(5))
def test_xi_is_stationary_and_tight(seed):
    cfg, ctx, p, m, theta, rng = instance(seed)
    cpl, s2 = ctx.couplings, cfg.noise_power
    kappa = update_kappa(cpl, p, theta, s2)
    xi = update_xi(cpl, p, m, theta, kappa, s2)
    f0 = fp_objective(cpl, p, m, theta, kappa, xi, s2)
    assert f0 == pytest.approx(dual_objective(cpl, p, m, theta, kappa, s2) - np.sum(m * (np.log1p(kappa) - kappa)),
                               rel=1e-9)
    scale = abs(f0)
    h = 1e-6 * np.max(np.abs(xi))
    for k in range(xi.size):
        for direction in (1.0, 1j):
            e = np.zeros_like(xi)
            e[k] = h * direction
            d = (fp_objective(cpl, p, m, theta, kappa, xi + e, s2)
                 - fp_objective(cpl, p, m, theta, kappa, xi - e, s2)) / (2 * h)
            assert abs(d) * np.max(np.abs(xi)) < 1e-6 * scale


@pytest.mark.parametrize("seed", range(5))
def test_quadratic_form_matches_fp_objective(seed):
    cfg, ctx, p, m, theta, rng = instance(seed)
    cpl, s2 = ctx.couplings, cfg.noise_power
    kappa = update_kappa(cpl, p, theta, s2)
    xi = update_xi(cpl, p, m, theta, kappa, s2)
    aux = build_quadratic(cpl, p, m, kappa, xi)
    q = aux.quad_matrix
    np.testing.assert_allclose(q, q.conj().T)
    assert np.linalg.eigvalsh(q)[0] >= -1e-12 * np.linalg.eigvalsh(q)[-1]
    # the difference is a theta-free constant
    offsets = []
    for _ in range(4):
        t = np.exp(1j * rng.uniform(-np.pi, np.pi, theta.size)) * rng.uniform(0, 1, theta.size)
        offsets.append(fp_objective(cpl, p, m, t, kappa, xi, s2) - qcqp_objective(aux, t))
    np.testing.assert_allclose(offsets, offsets[0], rtol=1e-9, atol=1e-9 * abs(offsets[0]))


def test_qcqp_disc_against_cvxpy():
    cp = pytest.importorskip("cvxpy")
    cfg, ctx, p, m, theta, _ = instance(7)
    cpl, s2 = ctx.couplings, cfg.noise_power
    kappa = update_kappa(cpl, p, theta, s2)
    aux = build_quadratic(cpl, p, m, kappa, update_xi(cpl, p, m, theta, kappa, s2))
    scale = np.linalg.eigvalsh(aux.quad_matrix)[-1]
    q, v = aux.quad_matrix / scale, aux.quad_vector / scale
    n = theta.size
    q_real = np.block([[q.real, -q.imag], [q.imag, q.real]])
    q_real = 0.5 * (q_real + q_real.T)
    x = cp.Variable(2 * n)
    objective = -cp.quad_form(x, cp.psd_wrap(q_real)) + 2 * (v.real @ x[:n] + v.imag @ x[n:])
    prob = cp.Problem(cp.Maximize(objective), [cp.norm(cp.vstack([x[:n], x[n:]]), axis=0) <= 1])
    prob.solve()
    _, ours = solve_qcqp(aux, theta, tol=1e-12, max_iter=5000)
    assert ours / scale >= prob.value - 1e-5 * abs(prob.value)


def test_qcqp_unit_is_monotone_and_unit_modulus():
    cfg, ctx, p, m, theta, _ = instance(8)
    cpl, s2 = ctx.couplings, cfg.noise_power
    kappa = update_kappa(cpl, p, theta, s2)
    aux = build_quadratic(cpl, p, m, kappa, update_xi(cpl, p, m, theta, kappa, s2))
    start = np.exp(1j * np.angle(theta))
    t, val = solve_qcqp_unit(aux, start)
    np.testing.assert_allclose(np.abs(t), 1.0)
    assert val >= qcqp_objective(aux, start)


@pytest.mark.parametrize("seed", range(6))
def test_single_user_co_phasing(seed):
    rng = np.random.default_rng(seed)
    cfg = SystemConfig().replace(users=1)
    n = 9
    scale = np.sqrt(cfg.noise_power / cfg.p_total * 10 / n)
    ch = synthetic_channels(rng, 1, 4, n, scale, scale * 0.5)
    ctx = context_for(cfg, ch, np.exp(1j * rng.uniform(-np.pi, np.pi, n)))
    cpl = ctx.couplings
    start = np.ones(n, complex)
    theta = solve_phase(ctx, np.array([cfg.p_total]), np.array([50.0]), start)
    optimum = abs(cpl.d[0, 0]) + np.sum(np.abs(cpl.r[0, 0]))
    assert abs(cpl.amplitudes(theta)[0, 0]) == pytest.approx(optimum, rel=1e-6)
    np.testing.assert_allclose(np.abs(theta), 1.0)


def test_solve_phase_never_worse_and_validates():
    cfg, ctx, p, m, theta, _ = instance(9)
    start = np.exp(1j * np.angle(theta))
    out = solve_phase(ctx, p, m, start)
    rate = lambda t: weighted_rate(ctx.couplings, p, m, t, cfg.noise_power)  # noqa: E731
    assert rate(out) >= rate(start)
    np.testing.assert_allclose(np.abs(out), 1.0)
    with pytest.raises(ValueError):
        solve_phase(ctx, p, m, 2 * start)


def test_restarts_are_deterministic():
    cfg, ctx, p, m, theta, _ = instance(10)
    start = np.ones(theta.size, complex)
    np.testing.assert_array_equal(solve_phase(ctx, p, m, start), solve_phase(ctx, p, m, start))
