import numpy as np
import pytest

from dodlab.mesh import (
    make_mesh,
    make_uniform_mesh,
    mapped_nodes,
    mass_diagonal,
    project_initial_condition,
)
from dodlab.quadrature import NodeKind, make_rule


def test_51_cell_reference_grid():
    mesh = make_mesh((0, 1), 50, 25, 0.3)
    assert mesh.n_cells == 51
    dx = 1 / 50
    np.testing.assert_allclose(mesh.cell_widths[25], 0.3 * dx)
    np.testing.assert_allclose(mesh.cell_widths[26], 0.7 * dx)
    others = np.delete(mesh.cell_widths, [25, 26])
    np.testing.assert_allclose(others, dx)


def test_symmetric_half_split():
    mesh = make_mesh((0, 1), 4, 2, 0.5)
    np.testing.assert_allclose(mesh.cell_widths[2], mesh.cell_widths[3])
    np.testing.assert_allclose(mesh.cell_widths[2], 0.125)


def test_widths_sum_to_domain_length_for_tiny_cut():
    mesh = make_mesh((0, 1), 10, 5, 1e-6)
    assert abs(mesh.cell_widths.sum() - 1.0) < 1e-12
    np.testing.assert_allclose(mesh.vertices[-1], 1.0, atol=1e-12)


def test_uniform_mesh_has_no_cut():
    mesh = make_uniform_mesh((0, 2), 8)
    assert mesh.cut_index is None
    np.testing.assert_allclose(mesh.cell_widths, 0.25)


def test_rejects_bad_cut_parameters():
    with pytest.raises(ValueError):
        make_mesh((0, 1), 10, 5, 0.0)
    with pytest.raises(ValueError):
        make_mesh((0, 1), 10, 5, 0.6)
    with pytest.raises(ValueError):
        make_mesh((0, 1), 3, 1, 0.3)
    # cut next to the periodic boundary is not supported
    with pytest.raises(ValueError):
        make_mesh((0, 1), 10, 0, 0.3)
    with pytest.raises(ValueError):
        make_mesh((0, 1), 10, 9, 0.3)


@pytest.mark.parametrize("kind", [NodeKind.GAUSS_LEGENDRE, NodeKind.GAUSS_LOBATTO_LEGENDRE])
def test_mapped_nodes_stay_in_their_cells(kind):
    mesh = make_mesh((0, 1), 10, 4, 0.2)
    rule = make_rule(kind, 4)
    xs = mapped_nodes(mesh, rule)
    v = mesh.vertices
    for i in range(mesh.n_cells):
        assert np.all(xs[i] >= v[i] - 1e-14)
        assert np.all(xs[i] <= v[i + 1] + 1e-14)
        if kind is NodeKind.GAUSS_LEGENDRE:
            assert np.all(xs[i] > v[i]) and np.all(xs[i] < v[i + 1])


def test_projection_of_constant():
    mesh = make_mesh((0, 1), 12, 6, 0.4)
    rule = make_rule("gll", 3)
    u = project_initial_condition(mesh, rule, lambda x: np.ones_like(x))
    np.testing.assert_array_equal(u, np.ones(13 * 4))


def test_projection_of_identity_on_single_gll_cell():
    mesh = make_uniform_mesh((0, 1), 1)
    rule = make_rule("gll", 1)
    u = project_initial_condition(mesh, rule, lambda x: x)
    np.testing.assert_allclose(u, [0.0, 1.0], atol=1e-15)


def test_projection_matches_direct_evaluation():
    mesh = make_mesh((0, 1), 50, 25, 0.3)
    rule = make_rule("gl", 3)
    u = project_initial_condition(mesh, rule, lambda x: np.sin(2 * np.pi * x))
    ref = np.sin(2 * np.pi * mapped_nodes(mesh, rule)).ravel()
    np.testing.assert_array_equal(u, ref)


def test_mass_norm_of_constant_equals_domain_measure():
    mesh = make_mesh((0, 2), 10, 5, 1e-3)
    rule = make_rule("gl", 2)
    m = mass_diagonal(mesh, rule)
    assert abs(np.sqrt(m.sum()) - np.sqrt(2.0)) < 1e-12
