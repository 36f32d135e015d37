import math

import numpy as np
import pytest

from qgspec.coupling import BoundaryData, build_coupling, vertex_residual
from qgspec.errors import InvalidArgumentError
from qgspec.star import (
    bound_state_count,
    secular_roots,
    star_bound_states,
    star_secular_residual,
    vertex_matrix,
)


def test_three_edges_single_state():
    s = star_bound_states(3, 1.0)
    assert len(s.kappas) == 1
    assert s.energies[0] == pytest.approx(-1 / 3, abs=1e-12)


def test_four_edges_single_state():
    s = star_bound_states(4, 1.0)
    assert s.energies == pytest.approx([-1.0], abs=1e-12)


@pytest.mark.parametrize("ell", [0.3, 1.0, 4.0])
def test_two_edges_empty(ell):
    assert star_bound_states(2, ell).kappas == []


@pytest.mark.parametrize("args", [(1, 1.0), (0, 1.0), (3, 0.0), (3, -2.0)])
def test_invalid_arguments(args):
    with pytest.raises(InvalidArgumentError):
        star_bound_states(*args)


def test_residual_examples():
    assert abs(star_secular_residual(3, 1.0, 1 / math.sqrt(3))) < 1e-12
    assert abs(star_secular_residual(4, 1.0, 1.0)) < 1e-12
    assert abs(star_secular_residual(3, 1.0, 1.0)) > 0.1


def test_residual_is_vectorised():
    r = star_secular_residual(5, 1.0, np.array([0.1, 0.2]))
    assert r.shape == (2,)


@pytest.mark.parametrize("n", range(2, 13))
def test_counting_law(n):
    want = n // 2 if n % 2 else (n - 1) // 2
    assert bound_state_count(n) == want
    s = star_bound_states(n)
    assert len(s.kappas) == want
    assert all(a > b for a, b in zip(s.kappas, s.kappas[1:]))
    assert all(k > 0 for k in s.kappas)
    assert (len(s.kappas) == 0) == (n <= 2)


@pytest.mark.parametrize("n", range(3, 11))
def test_closed_form_against_root_sweep(n):
    s = star_bound_states(n, 1.0)
    roots = secular_roots(n, 1.0)
    assert len(roots) == len(s.kappas)
    np.testing.assert_allclose(roots, s.kappas, rtol=1e-11)
    for kap in s.kappas:
        assert abs(star_secular_residual(n, 1.0, kap)) < 1e-10


@pytest.mark.parametrize("n", range(3, 9))
@pytest.mark.parametrize("ell", [0.25, 2.0, 7.5])
def test_scaling_in_ell(n, ell):
    base = star_bound_states(n, 1.0).kappas
    scaled = star_bound_states(n, ell).kappas
    for a, b in zip(base, scaled):
        assert b == pytest.approx(a / ell, rel=1e-14)


@pytest.mark.parametrize("n", range(3, 9))
def test_bound_states_solve_the_vertex_condition(n):
    # each closed-form kappa makes the amplitude system singular, and the
    # null vector gives boundary data satisfying the coupling
    c = build_coupling("minusR", n, 1.0)
    for kap in star_bound_states(n).kappas:
        _, sv, vh = np.linalg.svd(vertex_matrix(n, 1.0, kap))
        assert sv[-1] < 1e-10 * max(1.0, sv[0])
        vec = vh[-1].conj()
        assert vertex_residual(c, BoundaryData(vec, -kap * vec)) < 1e-10


def test_vertex_matrix_regular_off_roots():
    sv = np.linalg.svd(vertex_matrix(3, 1.0, 1.0), compute_uv=False)
    assert sv[-1] > 1e-2
