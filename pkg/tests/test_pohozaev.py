"""Weighted-moment identities and the M+/M- averaging operators."""

import numpy as np
import pytest

from fraclap.geometry import (CircleGrid, LineGrid, TailModel,
                              field_from_function)
from fraclap.pohozaev import (m_adjoint_check, m_kernel_minus, m_kernel_plus,
                              m_minus, m_plus, m_plus_even_matrix,
                              m_plus_mellin_symbol, plane_field_from_function,
                              residual_circle, residual_circle_t,
                              residual_line, residual_plane)


def _sphere_valued_line_field(grid):
    # smooth finite-energy profile with values on the unit circle
    tail = TailModel(1.0, [0.0, -1.0], [0.0, -1.0], [2.0, 0.0], [-2.0, 0.0])
    return field_from_function(
        grid, lambda x: np.stack([2 * x / (1 + x * x),
                                  (1 - x * x) / (1 + x * x)]), tail=tail)


def test_residual_line_identity():
    g = LineGrid(200.0, 2 ** 13)
    u = _sphere_valued_line_field(g)
    rep = residual_line(u, (0.5, 1.0, 2.0))
    assert np.max(rep.relative_residual()) < 1e-4
    assert rep.hypothesis_residual < 1e-4


def test_residual_line_guards():
    g = LineGrid(50.0, 512)
    bare = field_from_function(g, lambda x: 1.0 / (1.0 + x * x))
    with pytest.raises(ValueError):
        residual_line(bare, (1.0,))
    u = _sphere_valued_line_field(g)
    with pytest.raises(ValueError):
        residual_line(u, (1.0, -2.0))
    circ = field_from_function(CircleGrid(8), np.sin)
    with pytest.raises(TypeError):
        residual_line(circ, (1.0,))


def test_residual_circle_identity_map():
    g = CircleGrid(256)
    u = field_from_function(g, lambda t: np.stack([np.cos(t), np.sin(t)]))
    rep = residual_circle(u)
    assert rep.moment_gap < 1e-14
    assert rep.moment_dot < 1e-14
    assert np.allclose(rep.u_plus, [0.5, 0.0], atol=1e-14)
    assert np.allclose(rep.u_minus, [0.0, 0.5], atol=1e-14)
    assert rep.hypothesis_residual < 1e-10


def test_residual_circle_t_variant():
    g = CircleGrid(256)
    u = field_from_function(g, lambda t: np.stack([np.cos(t), np.sin(t)]))
    rep = residual_circle_t(u, (0.5, 1.0))
    assert np.max(np.abs(rep.residual)) < 1e-12
    with pytest.raises(ValueError):
        residual_circle_t(u, (0.0,))
    line = field_from_function(LineGrid(1.0, 16), lambda x: x)
    with pytest.raises(TypeError):
        residual_circle(line)


def test_residual_plane_linear_map():
    # u = (x, y): radial and angular derivative energies agree pointwise
    u = plane_field_from_function(8.0, 128, lambda x, y: np.stack([x, y], axis=-1))
    rep = residual_plane(u, (0.0, 0.0), (0.5, 1.0))
    assert np.max(np.abs(rep.residual)) == 0.0
    assert rep.hypothesis_residual < 1e-10


def test_residual_plane_rejects_wide_weight():
    u = plane_field_from_function(8.0, 64, lambda x, y: np.stack([x, y], axis=-1))
    with pytest.raises(ValueError):
        residual_plane(u, (0.0, 0.0), (20.0,))


def test_kernel_values_and_parity():
    assert np.isclose(m_kernel_plus(0.0), np.sqrt(np.pi), rtol=1e-15)
    assert m_kernel_minus(0.0) == 0.0
    x = np.linspace(0.1, 30.0, 57)
    assert np.allclose(m_kernel_plus(-x), m_kernel_plus(x), rtol=1e-14)
    assert np.allclose(m_kernel_minus(-x), -m_kernel_minus(x), rtol=1e-14)
    # 3/2-power decay at infinity
    big = 1e6
    assert abs(m_kernel_plus(big)) < 2 * big ** -1.5 * np.sqrt(np.pi)


def test_m_operators_impose_parity_exactly():
    g = LineGrid(40.0, 1024)
    w = field_from_function(g, lambda x: np.exp(-((x - 0.7) ** 2)),
                            tail=TailModel.even(4.0, 0.0))
    t_grid = LineGrid(8.0, 64)
    ref = t_grid.reflected_indices()
    plus = m_plus(w, t_grid)
    minus = m_minus(w, t_grid)
    assert np.array_equal(plus.samples, plus.samples[ref])
    assert np.array_equal(minus.samples, -minus.samples[ref])


def test_m_operator_guards():
    g = LineGrid(40.0, 1024)
    bare = field_from_function(g, lambda x: np.exp(-x * x))
    with pytest.raises(ValueError):
        m_plus(bare, LineGrid(8.0, 64))
    w = field_from_function(g, lambda x: np.exp(-x * x),
                            tail=TailModel.even(4.0, 0.0))
    with pytest.raises(ValueError):
        m_minus(w, CircleGrid(16))  # node at zero


def test_m_plus_adjoint_pairing():
    g = LineGrid(60.0, 2 ** 12)
    w1 = field_from_function(g, lambda x: 1.0 / (1.0 + x * x) ** 2,
                             tail=TailModel.even(4.0, 1.0))
    w2 = field_from_function(g, lambda x: np.exp(-x * x),
                             tail=TailModel.even(4.0, 0.0))
    r1, r2 = m_adjoint_check(w1, w2)
    assert abs(r1 - r2) < 1e-6 * max(1.0, abs(r1))
    with pytest.raises(ValueError):
        m_adjoint_check(w1, field_from_function(LineGrid(50.0, 2 ** 12),
                                                lambda x: np.exp(-x * x),
                                                tail=TailModel.even(4.0, 0.0)))


def test_mellin_symbol_values():
    sym0, sym10 = m_plus_mellin_symbol([0.0, 10.0], n_quad=1200, lam_max=40.0)
    assert abs(sym0.imag) < 1e-10
    assert np.isclose(sym0.real, 5.01325655, atol=1e-6)
    # fast decay in the Mellin frequency, but no zero
    assert 0 < abs(sym10) < 1e-4


def test_even_matrix_injectivity_small():
    out = m_plus_even_matrix(n_bumps=24, n_quad=200, c_min=1e-3, c_max=1e3)
    assert out["sigma_min"] > 0.0
    assert out["sigma_max"] > out["sigma_min"]
    assert np.isfinite(out["cond"])
    assert out["n_bumps"] == 24
