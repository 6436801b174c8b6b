"""In-memory city model.

The model mirrors the JSON encoding closely: city objects live in a flat
dict keyed by identifier, geometries reference rows of one shared vertex
pool through nested integer arrays, and an optional transform maps those
integer rows back to real-world coordinates.  Keeping the shapes identical
to the wire format makes reading and writing cheap and keeps every
operation honest about what actually gets stored.

Models are treated as values: operations elsewhere in the package return
new models and never alter their argument.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterator

from .errors import CjtkError

VERSION = "1.0"

# Object types of the data model, split by level.  First-level objects may
# appear on their own; second-level objects only make sense as children of
# the listed first-level type.
FIRST_LEVEL_TYPES = {
    "Bridge",
    "Building",
    "CityFurniture",
    "CityObjectGroup",
    "GenericCityObject",
    "LandUse",
    "PlantCover",
    "Railway",
    "Road",
    "SolitaryVegetationObject",
    "TINRelief",
    "TransportSquare",
    "Tunnel",
    "WaterBody",
}

SECOND_LEVEL_TYPES = {
    "BridgeConstructionElement": "Bridge",
    "BridgeInstallation": "Bridge",
    "BridgePart": "Bridge",
    "BuildingInstallation": "Building",
    "BuildingPart": "Building",
    "TunnelInstallation": "Tunnel",
    "TunnelPart": "Tunnel",
}

COBJECT_TYPES = FIRST_LEVEL_TYPES | set(SECOND_LEVEL_TYPES)

# Nesting depth of the boundaries array per geometry kind, counting list
# levels above the integer vertex references.
GEOMETRY_DEPTH = {
    "MultiPoint": 1,
    "MultiLineString": 2,
    "MultiSurface": 3,
    "CompositeSurface": 3,
    "Solid": 4,
    "MultiSolid": 5,
    "CompositeSolid": 5,
}

SURFACE_KINDS = {"MultiSurface", "CompositeSurface", "Solid", "MultiSolid",
                 "CompositeSolid"}

SEMANTIC_SURFACE_TYPES = {
    "RoofSurface",
    "GroundSurface",
    "WallSurface",
    "ClosureSurface",
    "OuterCeilingSurface",
    "OuterFloorSurface",
    "Window",
    "Door",
    "WaterSurface",
    "WaterGroundSurface",
    "WaterClosureSurface",
    "TrafficArea",
    "AuxiliaryTrafficArea",
}


def boundary_depth(kind: str) -> int:
    """Required boundaries nesting depth for a geometry kind."""
    try:
        return GEOMETRY_DEPTH[kind]
    except KeyError:
        raise CjtkError("UNKNOWN_GEOMETRY_KIND",
                        f"{kind!r} is not a geometry kind") from None


@dataclass
class Transform:
    """Quantization parameters: real = stored * scale + translate."""

    scale: list[float]
    translate: list[float]

    def apply(self, vertex) -> tuple[float, float, float]:
        return (
            vertex[0] * self.scale[0] + self.translate[0],
            vertex[1] * self.scale[1] + self.translate[1],
            vertex[2] * self.scale[2] + self.translate[2],
        )

    def to_json(self) -> dict:
        return {"scale": list(self.scale), "translate": list(self.translate)}

    @classmethod
    def from_json(cls, obj: dict) -> "Transform":
        return cls(scale=list(obj["scale"]), translate=list(obj["translate"]))


@dataclass
class Semantics:
    """Semantic surface annotations for one geometry.

    ``surfaces`` holds one dict per distinct surface (``type`` plus any
    attributes); ``values`` mirrors the boundaries array with the ring and
    index levels cut off and stores per-surface indices into ``surfaces``
    (or None for a surface with no semantics).
    """

    surfaces: list[dict]
    values: list
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"surfaces": self.surfaces, "values": self.values}
        out.update(self.extra)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Semantics":
        return cls(surfaces=obj.get("surfaces"), values=obj.get("values"),
                   extra={k: v for k, v in obj.items()
                          if k not in ("surfaces", "values")})


@dataclass
class Geometry:
    """One geometry of a city object.

    For ordinary geometries ``boundaries`` is the nested index array whose
    depth matches GEOMETRY_DEPTH[type].  For a GeometryInstance it is a
    single-element list holding the reference-point vertex, and ``template``
    plus ``transformation_matrix`` (16 numbers, row-major) say which template
    to place and how.  ``material`` and ``texture`` are carried opaquely.
    """

    type: str
    lod: float | int | None = None
    boundaries: list = field(default_factory=list)
    semantics: Semantics | None = None
    material: dict | None = None
    texture: dict | None = None
    template: int | None = None
    transformation_matrix: list[float] | None = None
    extra: dict = field(default_factory=dict)

    _KNOWN = frozenset({"type", "lod", "boundaries", "semantics", "material",
                        "texture", "template", "transformationMatrix"})

    def is_instance(self) -> bool:
        return self.type == "GeometryInstance"

    def to_json(self) -> dict:
        out: dict[str, Any] = {"type": self.type}
        if self.lod is not None:
            out["lod"] = self.lod
        if self.is_instance():
            out["template"] = self.template
            out["boundaries"] = self.boundaries
            out["transformationMatrix"] = self.transformation_matrix
            out.update(self.extra)
            return out
        out["boundaries"] = self.boundaries
        if self.semantics is not None:
            out["semantics"] = self.semantics.to_json()
        if self.material is not None:
            out["material"] = self.material
        if self.texture is not None:
            out["texture"] = self.texture
        out.update(self.extra)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Geometry":
        g = cls(type=obj["type"], lod=obj.get("lod"),
                boundaries=obj.get("boundaries", []))
        if obj.get("semantics") is not None:
            g.semantics = Semantics.from_json(obj["semantics"])
        g.material = obj.get("material")
        g.texture = obj.get("texture")
        g.template = obj.get("template")
        g.transformation_matrix = obj.get("transformationMatrix")
        g.extra = {k: v for k, v in obj.items() if k not in cls._KNOWN}
        return g


@dataclass
class TemplateBank:
    """Shared geometry templates and their own (real-valued) vertex pool."""

    templates: list[Geometry] = field(default_factory=list)
    vertices: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "templates": [g.to_json() for g in self.templates],
            "vertices-templates": self.vertices,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TemplateBank":
        return cls(
            templates=[Geometry.from_json(g) for g in obj.get("templates", [])],
            vertices=obj.get("vertices-templates", []),
        )


@dataclass
class CityObject:
    """One city object: type, attributes, geometries, family links."""

    type: str
    attributes: dict = field(default_factory=dict)
    geometry: list[Geometry] = field(default_factory=list)
    parents: list[str] = field(default_factory=list)
    children: list[str] = field(default_factory=list)
    extent: list[float] | None = None
    # Members we do not model (e.g. address) survive round-trips here.
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out: dict[str, Any] = {"type": self.type}
        if self.attributes:
            out["attributes"] = self.attributes
        if self.extent is not None:
            out["geographicalExtent"] = self.extent
        if self.children:
            out["children"] = self.children
        if self.parents:
            out["parents"] = self.parents
        out["geometry"] = [g.to_json() for g in self.geometry]
        out.update(self.extra)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "CityObject":
        known = {"type", "attributes", "geographicalExtent", "children",
                 "parents", "geometry"}
        return cls(
            type=obj["type"],
            attributes=dict(obj.get("attributes") or {}),
            geometry=[Geometry.from_json(g) for g in obj.get("geometry") or []],
            parents=list(obj.get("parents") or []),
            children=list(obj.get("children") or []),
            extent=obj.get("geographicalExtent"),
            extra={k: v for k, v in obj.items() if k not in known},
        )


@dataclass
class CityModel:
    """A complete city model, the in-memory twin of one JSON document."""

    city_objects: dict[str, CityObject] = field(default_factory=dict)
    vertices: list = field(default_factory=list)
    transform: Transform | None = None
    templates: TemplateBank | None = None
    appearance: dict | None = None
    metadata: dict = field(default_factory=dict)
    extensions: dict = field(default_factory=dict)
    version: str = VERSION
    extra: dict = field(default_factory=dict)

    # -- vertex access -------------------------------------------------

    def real_vertex(self, i: int) -> tuple[float, float, float]:
        """Vertex i in real-world coordinates (transform applied if set)."""
        if not isinstance(i, int) or not 0 <= i < len(self.vertices):
            raise CjtkError("VERTEX_INDEX_OUT_OF_RANGE",
                            f"index {i!r} outside pool of {len(self.vertices)}")
        v = self.vertices[i]
        if self.transform is not None:
            return self.transform.apply(v)
        return (v[0], v[1], v[2])

    def real_vertices(self) -> list[tuple[float, float, float]]:
        return [self.real_vertex(i) for i in range(len(self.vertices))]

    # -- traversal -----------------------------------------------------

    def iter_geometries(self) -> Iterator[tuple[str, int, Geometry]]:
        """(object id, geometry index, geometry) over the whole model."""
        for oid, obj in self.city_objects.items():
            for gi, g in enumerate(obj.geometry):
                yield oid, gi, g

    def first_level_ids(self) -> list[str]:
        return [oid for oid, co in self.city_objects.items()
                if co.type in FIRST_LEVEL_TYPES]


# -- boundary array helpers ---------------------------------------------


def nesting_depth(boundaries) -> int:
    """Measured nesting depth of an array; bare integers count as depth 0.

    Reported depth is the deepest branch; an empty list counts one level.
    """
    if not isinstance(boundaries, list):
        return 0
    if not boundaries:
        return 1
    return 1 + max(nesting_depth(b) for b in boundaries)


def iter_boundary_indices(boundaries) -> Iterator[int]:
    """All vertex indices in a boundaries array, in document order."""
    if isinstance(boundaries, list):
        for b in boundaries:
            yield from iter_boundary_indices(b)
    else:
        yield boundaries


def map_boundaries(boundaries, fn: Callable[[int], int]):
    """Same-shaped boundaries array with fn applied to every index."""
    if isinstance(boundaries, list):
        return [map_boundaries(b, fn) for b in boundaries]
    return fn(boundaries)


def iter_rings(kind: str, boundaries) -> Iterator[tuple[str, list]]:
    """Every (path, ring) of a surface-bearing geometry.

    A ring is an innermost index list; the path is the slash-joined list of
    positions leading to it inside the boundaries array.
    """
    if kind not in SURFACE_KINDS:
        return
    # Depth of a ring is 1; peel levels until the children are rings.
    level = GEOMETRY_DEPTH[kind]

    def walk(node, depth, where):
        if depth == 2:
            for i, r in enumerate(node):
                if isinstance(r, list):
                    yield (f"{where}/{i}" if where else str(i)), r
        else:
            for i, child in enumerate(node):
                if isinstance(child, list):
                    yield from walk(child, depth - 1,
                                    f"{where}/{i}" if where else str(i))

    yield from walk(boundaries, level, "")


def iter_indices_of_model(model: CityModel) -> Iterator[int]:
    for _, _, g in model.iter_geometries():
        yield from iter_boundary_indices(g.boundaries)
