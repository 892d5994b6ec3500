import numpy as np
import pytest

from layered_fsi import ConfigurationError, GeometryConfig, MeshError
from layered_fsi.mesh import build_fluid_mesh, build_interface_maps, build_solid_mesh


def test_fluid_counts():
    m = build_fluid_mesh(GeometryConfig(nz=2, nr_f=2))
    assert m.n_elements == 4
    assert m.n_nodes == 25
    assert m.n_p_nodes == 9


def test_interface_node_count():
    g = GeometryConfig(nz=8, nr_f=8)
    assert build_fluid_mesh(g).nodes_with("interface").size == 17


@pytest.mark.parametrize("kw", [dict(nz=1), dict(nr_f=1), dict(nr_s=0), dict(L=0.0), dict(H=-1.0)])
def test_invalid_geometry(kw):
    with pytest.raises(ConfigurationError):
        GeometryConfig(**kw).validate()


def test_all_errors_reported():
    with pytest.raises(ConfigurationError) as exc:
        GeometryConfig(nz=1, R=-2.0).validate()
    assert len(exc.value.errors) == 2


def test_solid_mesh_spans_wall():
    g = GeometryConfig(nz=2, nr_s=1, H=1.0)
    s = build_solid_mesh(g)
    assert s.n_elements == 2
    assert s.coords[:, 1].min() == 1.0 and s.coords[:, 1].max() == 2.0
    assert s.nodes_with("interface").size == build_fluid_mesh(g).nodes_with("interface").size


def test_corner_tags():
    m = build_fluid_mesh(GeometryConfig(nz=2, nr_f=2))
    corner = m.node(0, 0)
    assert {"axis", "inlet"} <= m.tags_of(corner)
    top_right = m.node(4, 4)
    assert {"interface", "outlet"} <= m.tags_of(top_right)


def test_element_areas_positive():
    m = build_solid_mesh(GeometryConfig(L=2.0, nz=3, nr_s=2, H=0.5))
    np.testing.assert_allclose(m.element_areas(), 2.0 / 3 * 0.25)


def test_interface_maps():
    g = GeometryConfig(nz=2, nr_f=2, nr_s=1)
    f, s = build_fluid_mesh(g), build_solid_mesh(g)
    maps = build_interface_maps(f, s)
    assert maps.n_interface == 5
    assert maps.dirichlet.sum() == 2 and maps.dirichlet[0] and maps.dirichlet[-1]
    np.testing.assert_array_equal(maps.pinned, s.dof(0, s.nodes_with("interface")))
    np.testing.assert_array_equal(np.sort(maps.triples[:, 1]), np.arange(5))
    np.testing.assert_allclose(f.coords[f.nodes_with("interface")], s.coords[s.nodes_with("interface")])


def test_perturbed_interface_rejected():
    g = GeometryConfig(nz=2, nr_f=2, nr_s=1)
    f, s = build_fluid_mesh(g), build_solid_mesh(g)
    coords = s.coords.copy()
    coords[s.nodes_with("interface")[2], 0] += 1e-6
    bad = type(s)(**{**s.__dict__, "coords": coords})
    with pytest.raises(MeshError):
        build_interface_maps(f, bad)
