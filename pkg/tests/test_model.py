"""Data-model invariants: boundary depths, traversal helpers, JSON shape."""

import pytest

from cjtk import CityModel, CityObject, Geometry, Transform, boundary_depth
from cjtk.errors import CjtkError
from cjtk.model import (FIRST_LEVEL_TYPES, SECOND_LEVEL_TYPES, Semantics,
                        iter_boundary_indices, iter_rings, map_boundaries,
                        nesting_depth)

from helpers import CUBE_SHELL, as_model, cube_tree, tree_of


@pytest.mark.parametrize("kind,depth", [
    ("MultiPoint", 1),
    ("MultiLineString", 2),
    ("MultiSurface", 3),
    ("CompositeSurface", 3),
    ("Solid", 4),
    ("MultiSolid", 5),
    ("CompositeSolid", 5),
])
def test_boundary_depth_per_kind(kind, depth):
    assert boundary_depth(kind) == depth


def test_boundary_depth_rejects_unknown_kind():
    with pytest.raises(CjtkError) as exc:
        boundary_depth("Hypercube")
    assert exc.value.code == "UNKNOWN_GEOMETRY_KIND"


def test_nesting_depth_measures_deepest_branch():
    assert nesting_depth(7) == 0
    assert nesting_depth([]) == 1
    assert nesting_depth([1, 2, 3]) == 1
    assert nesting_depth(CUBE_SHELL) == 3
    assert nesting_depth([CUBE_SHELL]) == 4
    assert nesting_depth([[0], [[1]]]) == 3


def test_iter_boundary_indices_document_order():
    assert list(iter_boundary_indices([[[0, 3], [2]], [[1]]])) == [0, 3, 2, 1]


def test_map_boundaries_keeps_shape():
    src = [[[0, 1], [2]], [[3]]]
    assert map_boundaries(src, lambda i: i * 10) == [[[0, 10], [20]], [[30]]]


def test_iter_rings_solid_paths():
    rings = dict(iter_rings("Solid", [CUBE_SHELL]))
    assert set(rings) == {f"0/{i}/0" for i in range(6)}
    assert rings["0/0/0"] == [0, 3, 2, 1]


def test_iter_rings_skips_non_surface_kinds():
    assert list(iter_rings("MultiPoint", [0, 1, 2])) == []
    assert list(iter_rings("MultiLineString", [[0, 1], [2, 3]])) == []


def test_second_level_types_point_at_first_level_parents():
    assert set(SECOND_LEVEL_TYPES.values()) <= FIRST_LEVEL_TYPES


def test_transform_apply():
    tr = Transform(scale=[0.001, 0.001, 0.001], translate=[100.0, 200.0, 5.0])
    assert tr.apply([1000, 2000, 3000]) == (101.0, 202.0, 8.0)


def test_real_vertex_applies_transform_and_checks_range():
    model = as_model(cube_tree())
    assert model.real_vertex(0) == (0.0, 0.0, 0.0)
    model.transform = Transform(scale=[2.0, 2.0, 2.0], translate=[1.0, 1.0, 1.0])
    assert model.real_vertex(0) == (1.0, 1.0, 1.0)
    with pytest.raises(CjtkError) as exc:
        model.real_vertex(99)
    assert exc.value.code == "VERTEX_INDEX_OUT_OF_RANGE"


def test_city_object_json_always_carries_geometry():
    out = CityObject(type="Building").to_json()
    assert out == {"type": "Building", "geometry": []}


def test_city_object_json_keeps_unknown_members():
    co = CityObject.from_json({"type": "Building", "geometry": [],
                               "address": {"Country": "NL"}})
    assert co.extra == {"address": {"Country": "NL"}}
    assert co.to_json()["address"] == {"Country": "NL"}


def test_geometry_instance_json_members():
    geom = Geometry(type="GeometryInstance", boundaries=[372], template=0,
                    transformation_matrix=[2.0, 0, 0, 0, 0, 2.0, 0, 0,
                                           0, 0, 2.0, 0, 0, 0, 0, 1.0])
    out = geom.to_json()
    assert set(out) == {"type", "template", "boundaries",
                        "transformationMatrix"}
    assert geom.is_instance()


def test_semantics_extra_members_round_trip():
    sem = Semantics.from_json({"surfaces": [{"type": "RoofSurface"}],
                               "values": [0], "note": "kept"})
    assert sem.extra == {"note": "kept"}
    assert sem.to_json()["note"] == "kept"


def test_first_level_ids():
    tree = cube_tree()
    tree["CityObjects"]["p-1"] = {
        "type": "BuildingPart", "parents": ["b-1"], "geometry": []}
    tree["CityObjects"]["b-1"]["children"] = ["p-1"]
    model = as_model(tree)
    assert model.first_level_ids() == ["b-1"]


def test_iter_geometries_yields_ids_and_indices():
    model = as_model(cube_tree(oid="x-1"))
    triples = list(model.iter_geometries())
    assert [(oid, gi) for oid, gi, _ in triples] == [("x-1", 0)]
    assert triples[0][2].type == "Solid"


def test_model_defaults():
    model = CityModel()
    assert model.version == "1.0"
    assert model.appearance is None
    assert model.metadata == {} and model.extensions == {}
    assert tree_of(model) == {"type": "CityJSON", "version": "1.0",
                              "CityObjects": {}, "vertices": []}
