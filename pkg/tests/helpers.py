"""Shared builders for test models.

Everything here produces plain JSON trees (dicts) or parses them through
the public codec, so the tests exercise the same entry points users do.
"""

import copy
import json

from cjtk import codec

CUBE_SHELL = [
    [[0, 3, 2, 1]], [[4, 5, 6, 7]], [[0, 1, 5, 4]],
    [[1, 2, 6, 5]], [[2, 3, 7, 6]], [[3, 0, 4, 7]],
]

CUBE_SEMANTICS = {
    "surfaces": [{"type": "GroundSurface"}, {"type": "RoofSurface"},
                 {"type": "WallSurface"}],
    "values": [[0, 1, 2, 2, 2, 2]],
}


def cube_vertices(ox=0.0, oy=0.0, oz=0.0, s=10.0):
    """Corner rows of an axis-aligned cube, bottom ring then top ring."""
    return [
        [ox, oy, oz], [ox + s, oy, oz], [ox + s, oy + s, oz], [ox, oy + s, oz],
        [ox, oy, oz + s], [ox + s, oy, oz + s], [ox + s, oy + s, oz + s],
        [ox, oy + s, oz + s],
    ]


def shifted_shell(offset):
    return [[[i + offset for i in ring] for ring in face]
            for face in CUBE_SHELL]


def cube_tree(oid="b-1", cotype="Building", origin=(0.0, 0.0, 0.0),
              size=10.0, lod=2, semantics=False, **root_members):
    """A complete one-object document tree holding a single cube solid."""
    geom = {"type": "Solid", "lod": lod,
            "boundaries": [copy.deepcopy(CUBE_SHELL)]}
    if semantics:
        geom["semantics"] = copy.deepcopy(CUBE_SEMANTICS)
    tree = {
        "type": "CityJSON",
        "version": "1.0",
        "CityObjects": {oid: {"type": cotype, "geometry": [geom]}},
        "vertices": cube_vertices(*origin, size),
    }
    tree.update(root_members)
    return tree


def as_model(tree):
    model, _ = codec.parse(json.dumps(tree))
    return model


def as_text(tree):
    return json.dumps(tree)


def tree_of(model):
    return json.loads(codec.dumps(model))


def codes_of(findings):
    return sorted({f.code for f in findings})
