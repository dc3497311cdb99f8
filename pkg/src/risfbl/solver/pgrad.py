"""Projections onto the three feasible sets and a projected-gradient ascent."""
import numpy as np


def project_simplex(x, total: float):
    """Euclidean projection onto {y >= 0, sum y = total}."""
    x = np.asarray(x, dtype=float)
    x = x - x.max()  # the projection is shift invariant; this keeps huge inputs exact
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - total
    idx = np.arange(1, x.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    tau = css[rho] / (rho + 1.0)
    return np.maximum(x - tau, 0.0)


def project_capped_simplex(x, total: float):
    """Projection onto {y >= 0, sum y <= total}."""
    y = np.maximum(np.asarray(x, dtype=float), 0.0)
    if y.sum() <= total:
        return y
    return project_simplex(x, total)


def project_box_sum(x, lower, total: float, iters: int = 200):
    """Projection onto {y >= lower, sum y <= total} by bisection on the shift."""
    x = np.asarray(x, dtype=float)
    lower = np.broadcast_to(np.asarray(lower, dtype=float), x.shape)
    y = np.maximum(x, lower)
    if y.sum() <= total:
        return y
    lo, hi = 0.0, float(np.max(x - lower))
    for _ in range(iters):
        tau = 0.5 * (lo + hi)
        if np.maximum(x - tau, lower).sum() > total:
            lo = tau
        else:
            hi = tau
    return np.maximum(x - hi, lower)


def project_disc(theta):
    """Per-element projection onto |theta_n| <= 1."""
    theta = np.asarray(theta, dtype=complex)
    mod = np.abs(theta)
    return np.where(mod > 1.0, theta / np.maximum(mod, 1e-300), theta)


def project_unit_circle(theta):
    """Per-element projection onto |theta_n| = 1; zeros map to phase 0."""
    theta = np.asarray(theta, dtype=complex)
    mod = np.abs(theta)
    return np.where(mod > 0, theta / np.where(mod > 0, mod, 1.0), 1.0 + 0j)


def _inner(a, b) -> float:
    return float(np.real(np.vdot(a, b)))


def projected_gradient_ascent(fun, grad, project, x0, step: float = 1.0, armijo: float = 1e-4,
                              shrink: float = 0.5, tol: float = 1e-8, max_iter: int = 500):
    """Maximize a concave ``fun`` over a convex set given by ``project``.

    ``grad(x)`` must return the ascent direction g with
    ``fun(x + dx) ~ fun(x) + Re<g, dx>`` (for complex x this is twice the
    Wirtinger derivative with respect to conj(x)). Step sizes start from a
    Barzilai-Borwein estimate and are backtracked until the Armijo condition
    holds. Stops on relative objective change below ``tol``.

    Returns:
        (x, fun(x), iterations)
    """
    x = project(x0)
    f = fun(x)
    g = grad(x)
    t = step
    it = 0
    for it in range(1, max_iter + 1):
        while True:
            x_new = project(x + t * g)
            dx = x_new - x
            f_new = fun(x_new)
            if f_new >= f + armijo * _inner(g, dx) or t < 1e-20:
                break
            t *= shrink
        if t < 1e-20 or not np.any(dx):
            break
        g_new = grad(x_new)
        change = abs(f_new - f)
        x, f_old, f = x_new, f, f_new
        # BB1 step for the next round: <s, s> / -<s, y> with y the change in ascent direction
        s_y = -_inner(dx, g_new - g)
        g = g_new
        t = _inner(dx, dx) / s_y if s_y > 0 else t * 2.0
        if change <= tol * max(abs(f_old), abs(f), 1e-300):
            break
    return x, f, it
