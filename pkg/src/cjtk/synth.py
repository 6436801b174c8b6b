"""Deterministic synthetic city scenes, emitted as models or as CityGML.

A scene is a plain description — cuboid buildings with sizes, positions
and attributes — that two emitters consume: ``scene_to_model`` builds the
in-memory model directly, and ``scene_to_citygml`` writes the equivalent
XML.  Both emitters walk the scene in the same order and derive the faces
from the same helper, so importing the XML yields a model deep-equal to
the directly built one.  That twin property is what makes the generator
useful for exercising the importer and for honest size comparisons
between the two encodings of one identical scene.

Everything is seeded: the same arguments always produce the same scene,
the same JSON bytes, and the same XML bytes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .model import CityModel, CityObject, Geometry, Semantics

_FUNCTIONS = ["residential", "commercial", "industrial", "agricultural",
              "educational", "mixed-use"]
_ROOFS = ["flat", "gable", "hip", "shed", "mansard"]
_STREETS = ["Kerkstraat", "Molenweg", "Dorpsstraat", "Hoofdweg",
            "Stationsplein", "Wilhelminalaan", "Beukenlaan", "Ringdijk"]
_CITIES = ["Delft", "Leiden", "Gouda", "Utrecht", "Arnhem", "Zwolle"]
_DESCRIPTION = ("Surveyed volume reconstructed from airborne laser "
                "scanning tiles; footprint traced on the cadastral map and "
                "extruded to the median ridge height of the roof segment.")
_REMARKS = [
    "Roof edge manually corrected after a field visit flagged an overhang "
    "that the point cloud classifier had merged with the adjacent tree "
    "canopy; dormers below the sampling threshold were left out.",
    "Footprint inherited from the municipal large-scale base map revision; "
    "the party wall with the neighbouring parcel was snapped to the shared "
    "cadastral boundary rather than the scanned facade.",
    "Ground level taken from the terrain model median inside the footprint "
    "buffer; basement light wells and exterior stairs are excluded from "
    "the volume by convention.",
    "Reconstruction used the winter scanning campaign only, so vegetation "
    "occlusion is minimal; the flat-roof gravel ballast raises the ridge "
    "estimate by a few centimetres at most.",
]


@dataclass
class Box:
    """One cuboid building (or building part)."""

    bid: str
    x: float
    y: float
    z: float
    w: float
    d: float
    h: float
    attributes: dict = field(default_factory=dict)
    parts: list["Box"] = field(default_factory=list)


@dataclass
class Scene:
    """A reproducible city description."""

    boxes: list[Box] = field(default_factory=list)
    crs: int | None = 7415


def make_scene(seed: int = 0, buildings: int = 12, clusters: int = 3,
               part_every: int = 0, crs: int | None = 7415,
               rich_attributes: bool = True,
               origin: tuple[float, float] = (85000.0, 446000.0)) -> Scene:
    """Seeded scene of cuboid buildings grouped into spatial clusters.

    ``part_every`` > 0 turns every n-th building into a two-part building
    (the volume split in half, each half a BuildingPart).  Coordinates are
    full-precision floats (well past nine significant digits).
    """
    rng = random.Random(seed)
    centers = [(origin[0] + 250.0 * (i % 4) + rng.uniform(0, 40),
                origin[1] + 250.0 * (i // 4) + rng.uniform(0, 40))
               for i in range(max(1, clusters))]
    scene = Scene(crs=crs)
    for i in range(buildings):
        cx, cy = centers[i % len(centers)]
        w = rng.uniform(6.0, 16.0)
        d = rng.uniform(6.0, 16.0)
        h = rng.uniform(3.0, 15.0)
        box = Box(bid=f"b{i}",
                  x=cx + rng.uniform(-60.0, 60.0),
                  y=cy + rng.uniform(-60.0, 60.0),
                  z=rng.uniform(-0.5, 2.5), w=w, d=d, h=h,
                  attributes=_attributes(rng, h, rich_attributes))
        if part_every and (i + 1) % part_every == 0:
            half = box.w / 2
            box.parts = [
                Box(bid=f"{box.bid}-p0", x=box.x, y=box.y, z=box.z,
                    w=half, d=box.d, h=box.h),
                Box(bid=f"{box.bid}-p1", x=box.x + half, y=box.y, z=box.z,
                    w=half, d=box.d, h=box.h * rng.uniform(0.5, 0.9)),
            ]
        scene.boxes.append(box)
    return scene


def _attributes(rng: random.Random, height: float, rich: bool) -> dict:
    # The base payload stays flat so the CityGML emitter can express every
    # attribute (core members plus generic string/int/double attributes);
    # the rich payload adds nested records only the JSON side can carry.
    attrs = {
        "function": rng.choice(_FUNCTIONS),
        "roofType": rng.choice(_ROOFS),
        "yearOfConstruction": rng.randint(1880, 2019),
        "storeysAboveGround": max(1, int(height // 3)),
        "measuredHeight": {"value": round(height, 2), "uom": "m"},
        "district": f"D{rng.randint(1, 24):02d}",
        "owner": f"{rng.choice(_CITIES)} municipal housing corporation "
                 f"lot {rng.randint(100, 999)}",
        "heatDemand": round(rng.uniform(20.0, 220.0), 1),
    }
    if rich:
        attrs.update({
            "usage": rng.choice(_FUNCTIONS),
            "address": {
                "street": rng.choice(_STREETS),
                "number": rng.randint(1, 220),
                "postalCode": f"{rng.randint(1000, 9999)} "
                              f"{chr(rng.randint(65, 90))}"
                              f"{chr(rng.randint(65, 90))}",
                "city": rng.choice(_CITIES),
            },
            "description": _DESCRIPTION,
            "remarks": rng.choice(_REMARKS),
            "energyLabel": rng.choice(["A", "B", "C", "D", "E", "F", "G"]),
            "identificatie": "NL.IMBAG.Pand."
                             f"{rng.randint(10 ** 15, 10 ** 16 - 1)}",
            "status": rng.choice(["in use", "under construction",
                                  "planned", "out of use"]),
            "numberOfDwellings": rng.randint(0, 12),
            "parcelArea": round(rng.uniform(80.0, 900.0), 1),
            "roofHeight": round(height + rng.uniform(-0.4, 0.4), 3),
            "groundHeight": round(rng.uniform(-1.0, 3.0), 3),
            "lastUpdate": f"{rng.randint(2009, 2019)}-"
                          f"{rng.randint(1, 12):02d}-"
                          f"{rng.randint(1, 28):02d}",
            "source": {
                "method": rng.choice(["lidar extrusion",
                                      "photogrammetric reconstruction",
                                      "terrestrial survey"]),
                "provider": rng.choice(_CITIES) + " geodata office",
                "accuracySigmaM": round(rng.uniform(0.05, 0.5), 3),
            },
        })
    return attrs


# ---------------------------------------------------------------------------
# the canonical cuboid decomposition shared by both emitters
# ---------------------------------------------------------------------------


def box_faces(box: Box) -> list[list[tuple[float, float, float]]]:
    """The six faces of a cuboid, each an open ring of four corners.

    Order: ground, roof, then the four walls counterclockwise starting
    south.  Both emitters rely on this exact ordering.
    """
    x0, y0, z0 = box.x, box.y, box.z
    x1, y1, z1 = box.x + box.w, box.y + box.d, box.z + box.h
    return [
        [(x0, y0, z0), (x0, y1, z0), (x1, y1, z0), (x1, y0, z0)],   # ground
        [(x0, y0, z1), (x1, y0, z1), (x1, y1, z1), (x0, y1, z1)],   # roof
        [(x0, y0, z0), (x1, y0, z0), (x1, y0, z1), (x0, y0, z1)],   # south
        [(x1, y0, z0), (x1, y1, z0), (x1, y1, z1), (x1, y0, z1)],   # east
        [(x1, y1, z0), (x0, y1, z0), (x0, y1, z1), (x1, y1, z1)],   # north
        [(x0, y1, z0), (x0, y0, z0), (x0, y0, z1), (x0, y1, z1)],   # west
    ]


_FACE_SEMANTICS = Semantics(
    surfaces=[{"type": "GroundSurface"}, {"type": "RoofSurface"},
              {"type": "WallSurface"}],
    values=[[0, 1, 2, 2, 2, 2]],
)


# ---------------------------------------------------------------------------
# direct model emitter
# ---------------------------------------------------------------------------


def scene_to_model(scene: Scene) -> CityModel:
    """Build the model straight from the scene, pooling vertices exactly."""
    pool: dict[tuple, int] = {}
    rows: list[list[float]] = []

    def vid(point: tuple) -> int:
        idx = pool.get(point)
        if idx is None:
            idx = len(rows)
            pool[point] = idx
            rows.append(list(point))
        return idx

    def solid(box: Box) -> Geometry:
        shell = [[[vid(p) for p in face]] for face in box_faces(box)]
        return Geometry(type="Solid", lod=2, boundaries=[shell],
                        semantics=Semantics(
                            surfaces=[dict(s)
                                      for s in _FACE_SEMANTICS.surfaces],
                            values=[list(v) for v in _FACE_SEMANTICS.values]))

    objects: dict[str, CityObject] = {}
    for box in scene.boxes:
        co = CityObject(type="Building", attributes=dict(box.attributes))
        objects[box.bid] = co
        if box.parts:
            for part in box.parts:
                objects[part.bid] = CityObject(
                    type="BuildingPart", attributes=dict(part.attributes),
                    geometry=[solid(part)], parents=[box.bid])
                co.children.append(part.bid)
        else:
            co.geometry.append(solid(box))

    metadata = {"referenceSystem": f"EPSG:{scene.crs}"} if scene.crs else {}
    return CityModel(city_objects=objects, vertices=rows, metadata=metadata)


# ---------------------------------------------------------------------------
# CityGML emitter
# ---------------------------------------------------------------------------

_GML_HEAD = (
    '<?xml version="1.0" encoding="UTF-8"?>\n'
    '<core:CityModel'
    ' xmlns:core="http://www.opengis.net/citygml/2.0"'
    ' xmlns:bldg="http://www.opengis.net/citygml/building/2.0"'
    ' xmlns:gen="http://www.opengis.net/citygml/generics/2.0"'
    ' xmlns:gml="http://www.opengis.net/gml"'
    ' xmlns:xlink="http://www.w3.org/1999/xlink">\n')

_SURFACE_CLASS = ["GroundSurface", "RoofSurface", "WallSurface"]
_FACE_CLASS = [0, 1, 2, 2, 2, 2]


def scene_to_citygml(scene: Scene) -> str:
    """The same scene as minimal CityGML 2.0.

    Buildings carry an lod2Solid whose shell holds the polygons inline;
    the boundedBy semantic surfaces reference those polygons through
    XLink, mirroring how the direct emitter shares semantics records.
    """
    out = [_GML_HEAD]
    if scene.crs:
        out.append('  <gml:boundedBy><gml:Envelope '
                   f'srsName="urn:ogc:def:crs:EPSG::{scene.crs}"/>'
                   '</gml:boundedBy>\n')
    for box in scene.boxes:
        out.append('  <core:cityObjectMember>\n')
        out.append(_building(box, indent="    "))
        out.append('  </core:cityObjectMember>\n')
    out.append('</core:CityModel>\n')
    return "".join(out)


def _building(box: Box, indent: str, cotype: str = "Building") -> str:
    tag = "bldg:" + cotype
    lines = [f'{indent}<{tag} gml:id="{box.bid}">\n']
    lines.append(_attribute_xml(box.attributes, indent + "  "))
    if box.parts:
        for part in box.parts:
            lines.append(f'{indent}  <bldg:consistsOfBuildingPart>\n')
            lines.append(_building(part, indent + "    ", "BuildingPart"))
            lines.append(f'{indent}  </bldg:consistsOfBuildingPart>\n')
    else:
        lines.append(_solid_xml(box, indent + "  "))
        lines.append(_bounded_by_xml(box, indent + "  "))
    lines.append(f'{indent}</{tag}>\n')
    return "".join(lines)


def _attribute_xml(attrs: dict, indent: str) -> str:
    lines = []
    for name in ("class", "function", "usage", "roofType",
                 "yearOfConstruction", "storeysAboveGround",
                 "storeysBelowGround"):
        if name in attrs:
            lines.append(f"{indent}<bldg:{name}>{attrs[name]}"
                         f"</bldg:{name}>\n")
    if "measuredHeight" in attrs:
        mh = attrs["measuredHeight"]
        lines.append(f'{indent}<bldg:measuredHeight uom="{mh["uom"]}">'
                     f'{_num(mh["value"])}</bldg:measuredHeight>\n')
    for name, value in attrs.items():
        if name in ("class", "function", "usage", "roofType",
                    "yearOfConstruction", "storeysAboveGround",
                    "storeysBelowGround", "measuredHeight"):
            continue
        kind, text = _generic_kind(value)
        if kind is None:
            continue
        lines.append(f'{indent}<gen:{kind} name="{name}">'
                     f'<gen:value>{text}</gen:value></gen:{kind}>\n')
    return "".join(lines)


def _generic_kind(value):
    if isinstance(value, bool):
        return None, None
    if isinstance(value, str):
        return "stringAttribute", _escape(value)
    if isinstance(value, int):
        return "intAttribute", str(value)
    if isinstance(value, float):
        return "doubleAttribute", _num(value)
    return None, None


def _escape(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


def _num(x: float) -> str:
    return repr(int(x)) if isinstance(x, float) and x.is_integer() else repr(x)


def _solid_xml(box: Box, indent: str) -> str:
    lines = [f'{indent}<bldg:lod2Solid>\n'
             f'{indent}  <gml:Solid>\n'
             f'{indent}    <gml:exterior>\n'
             f'{indent}      <gml:CompositeSurface>\n']
    for fi, face in enumerate(box_faces(box)):
        ring = " ".join(_num(c) for p in face + [face[0]] for c in p)
        lines.append(
            f'{indent}        <gml:surfaceMember>\n'
            f'{indent}          <gml:Polygon gml:id="{box.bid}-f{fi}">\n'
            f'{indent}            <gml:exterior><gml:LinearRing>'
            f'<gml:posList>{ring}</gml:posList>'
            f'</gml:LinearRing></gml:exterior>\n'
            f'{indent}          </gml:Polygon>\n'
            f'{indent}        </gml:surfaceMember>\n')
    lines.append(f'{indent}      </gml:CompositeSurface>\n'
                 f'{indent}    </gml:exterior>\n'
                 f'{indent}  </gml:Solid>\n'
                 f'{indent}</bldg:lod2Solid>\n')
    return "".join(lines)


def _bounded_by_xml(box: Box, indent: str) -> str:
    by_class: dict[int, list[int]] = {}
    for fi, ci in enumerate(_FACE_CLASS):
        by_class.setdefault(ci, []).append(fi)
    lines = []
    for ci in sorted(by_class):
        members = "".join(
            f'{indent}        <gml:surfaceMember '
            f'xlink:href="#{box.bid}-f{fi}"/>\n'
            for fi in by_class[ci])
        lines.append(
            f'{indent}<bldg:boundedBy>\n'
            f'{indent}  <bldg:{_SURFACE_CLASS[ci]}>\n'
            f'{indent}    <bldg:lod2MultiSurface>\n'
            f'{indent}      <gml:MultiSurface>\n'
            f'{members}'
            f'{indent}      </gml:MultiSurface>\n'
            f'{indent}    </bldg:lod2MultiSurface>\n'
            f'{indent}  </bldg:{_SURFACE_CLASS[ci]}>\n'
            f'{indent}</bldg:boundedBy>\n')
    return "".join(lines)
