import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from risfbl.solver.pgrad import (project_box_sum, project_capped_simplex, project_disc, project_simplex,
                                 project_unit_circle, projected_gradient_ascent)

vec = arrays(np.float64, st.integers(1, 8), elements=st.floats(-10, 10))


def _closest_among(x, y, samples):
    d = np.linalg.norm(x - y)
    return all(np.linalg.norm(x - z) >= d - 1e-9 for z in samples)


@settings(max_examples=100, deadline=None)
@given(vec, st.floats(0.1, 5))
def test_simplex_projection(x, total):
    y = project_simplex(x, total)
    assert np.all(y >= 0) and y.sum() == pytest.approx(total)
    rng = np.random.default_rng(0)
    samples = rng.dirichlet(np.ones(x.size), 200) * total
    assert _closest_among(x, y, samples)


@settings(max_examples=100, deadline=None)
@given(vec, st.floats(0.1, 5))
def test_capped_simplex_projection(x, total):
    y = project_capped_simplex(x, total)
    assert np.all(y >= 0) and y.sum() <= total * (1 + 1e-12)
    rng = np.random.default_rng(1)
    samples = rng.dirichlet(np.ones(x.size + 1), 200)[:, :-1] * total
    assert _closest_among(x, y, samples)


@settings(max_examples=100, deadline=None)
@given(vec)
def test_box_sum_projection(x):
    lower = np.full(x.size, 1.0)
    total = 2.0 * x.size
    y = project_box_sum(x, lower, total)
    assert np.all(y >= lower - 1e-12) and y.sum() <= total + 1e-9
    rng = np.random.default_rng(2)
    samples = lower + rng.dirichlet(np.ones(x.size + 1), 200)[:, :-1] * (total - lower.sum())
    assert _closest_among(x, y, samples)


def test_simplex_projection_huge_inputs():
    np.testing.assert_allclose(project_simplex(np.array([7.79e26, 1.2e25]), 1.0), [1.0, 0.0])
    np.testing.assert_allclose(project_capped_simplex(np.array([1e30, 1e30]), 2.0), [1.0, 1.0])


def test_disc_and_circle():
    z = np.array([2.0 + 0j, 0.3j, 0.0, -1 - 1j])
    np.testing.assert_allclose(project_disc(z), [1.0, 0.3j, 0.0, (-1 - 1j) / np.sqrt(2)])
    np.testing.assert_allclose(project_unit_circle(z), [1.0, 1j, 1.0, (-1 - 1j) / np.sqrt(2)])


def test_pga_box_quadratic():
    # max -|x - c|^2 over the capped simplex: answer is the projection of c
    c = np.array([0.9, 0.6, -0.2])
    x, f, _ = projected_gradient_ascent(lambda x: -np.sum((x - c) ** 2), lambda x: -2 * (x - c),
                                        lambda v: project_capped_simplex(v, 1.0), np.zeros(3), tol=1e-14)
    np.testing.assert_allclose(x, project_capped_simplex(c, 1.0), atol=1e-7)


def test_pga_complex_disc():
    q = np.array([0.5 + 0.5j, 3.0, -2j])
    x, _, _ = projected_gradient_ascent(lambda t: -np.sum(np.abs(t) ** 2) + 2 * np.real(np.vdot(t, q)),
                                        lambda t: 2 * (q - t), project_disc, np.zeros(3, complex), tol=1e-14)
    np.testing.assert_allclose(x, project_disc(q), atol=1e-7)
