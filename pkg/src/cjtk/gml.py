"""Scoped CityGML 2.0 importer.

The XML encoding allows the same geometry to be written in many ways: a
ring can be one posList, repeated pos elements, or a coordinates blob;
polygons can sit inside the solid shell with the semantic surfaces
pointing at them through XLink, or live inside the semantic surfaces with
the shell holding the links; features nest instead of being listed flat.
This importer canonicalizes all of that into the flat, pooled, indexed
representation, so every supported spelling of the same city yields a
deep-equal model.

Scope (fixed at build time): Building with BuildingPart and the semantic
boundary surfaces, SolitaryVegetationObject, and a generic fallback for
other features; gml:Solid, gml:MultiSurface and gml:CompositeSurface built
from polygons with exterior/interior linear rings; coordinate spellings
posList, repeated pos, and coordinates.  LoD comes from the element names
(lod1Solid, lod2MultiSurface, ...); interior (LoD4) models are rejected.
Appearances and terrain are out of scope; anything skipped lands in the
import report, never on the floor.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .errors import GmlImportError
from .model import CityModel, CityObject, Geometry, Semantics

XLINK_HREF = "{http://www.w3.org/1999/xlink}href"

_SEMANTIC_SURFACES = {
    "RoofSurface", "GroundSurface", "WallSurface", "ClosureSurface",
    "OuterCeilingSurface", "OuterFloorSurface", "Window", "Door",
}

_BUILDING_ATTRS = {
    "class": str, "function": str, "usage": str, "roofType": str,
    "yearOfConstruction": int, "yearOfDemolition": int,
    "storeysAboveGround": int, "storeysBelowGround": int,
    "measuredHeight": float,
}

_VEGETATION_ATTRS = {
    "class": str, "function": str, "usage": str, "species": str,
    "height": float, "trunkDiameter": float, "crownDiameter": float,
}

_GENERIC_ATTR_CASTS = {
    "stringAttribute": str,
    "intAttribute": int,
    "doubleAttribute": float,
    "dateAttribute": str,
    "uriAttribute": str,
    "measureAttribute": float,
}

_EPSG_SUFFIX = re.compile(r"EPSG:+(\d+)$")


def _local(tag) -> str:
    return tag.rsplit("}", 1)[-1] if isinstance(tag, str) else ""


@dataclass
class GmlDocument:
    """A parsed CityGML tree plus the gml:id index used to chase XLinks."""

    root: ET.Element
    id_index: dict = field(default_factory=dict)

    @classmethod
    def from_text(cls, text: str) -> "GmlDocument":
        try:
            root = ET.fromstring(text)
        except ET.ParseError as exc:
            line, column = exc.position
            raise GmlImportError(
                "XML_SYNTAX_ERROR",
                f"not well-formed XML at line {line}, column {column}: "
                f"{exc.msg.split(':')[0] if hasattr(exc, 'msg') else exc}")
        index = {}
        for elem in root.iter():
            for key, value in elem.attrib.items():
                if _local(key) == "id":
                    index.setdefault(value, elem)
        return cls(root, index)


def resolve_xlink(doc: GmlDocument, href: str) -> ET.Element:
    """Element for an in-document reference of the form "#<gml-id>"."""
    if not href.startswith("#"):
        raise GmlImportError("EXTERNAL_XLINK",
                             f"only in-document references are supported, "
                             f"got {href!r}")
    target = doc.id_index.get(href[1:])
    if target is None:
        raise GmlImportError("UNRESOLVED_XLINK",
                             f"no element carries gml:id {href[1:]!r}")
    return target


class VertexPool:
    """Exact-match pooling of coordinate triples."""

    def __init__(self):
        self.rows: list[list[float]] = []
        self._index: dict[tuple, int] = {}

    def add(self, point: tuple[float, float, float]) -> int:
        key = tuple(point)
        idx = self._index.get(key)
        if idx is None:
            idx = len(self.rows)
            self._index[key] = idx
            self.rows.append(list(key))
        return idx


def normalize_ring(ring_elem: ET.Element, pool: VertexPool) -> list[int]:
    """Index list of one LinearRing, any spelling, closure stripped."""
    points = _ring_points(ring_elem)
    if points and points[0] == points[-1]:
        points = points[:-1]
    if len(set(points)) < 3:
        raise GmlImportError("RING_TOO_SHORT",
                             f"a ring needs at least 3 distinct points, "
                             f"got {len(set(points))}")
    return [pool.add(p) for p in points]


def _ring_points(ring_elem: ET.Element) -> list[tuple]:
    dim = int(ring_elem.get("srsDimension", "0") or 0)
    pos_children = []
    for child in ring_elem:
        name = _local(child.tag)
        if name == "posList":
            tokens = (child.text or "").split()
            d = int(child.get("srsDimension", "0") or 0) or dim or 3
            return _group(tokens, d)
        if name == "pos":
            pos_children.append(child)
        elif name == "coordinates":
            cs = child.get("cs", ",")
            ts = child.get("ts", " ")
            text = (child.text or "").strip()
            points = []
            for chunk in text.replace("\n", ts).split(ts):
                if not chunk:
                    continue
                points.extend(_group(chunk.split(cs), dim or 3))
            return points
    if pos_children:
        points = []
        for child in pos_children:
            tokens = (child.text or "").split()
            d = int(child.get("srsDimension", "0") or 0) or dim or 3
            points.extend(_group(tokens, d))
        return points
    raise GmlImportError("BAD_COORDINATE_TOKEN",
                         "ring carries no posList/pos/coordinates")


def _group(tokens: list[str], dim: int) -> list[tuple]:
    if dim not in (2, 3):
        raise GmlImportError("BAD_COORDINATE_TOKEN",
                             f"unsupported coordinate dimension {dim}")
    try:
        values = [float(t) for t in tokens]
    except ValueError as exc:
        bad = str(exc).rsplit(":", 1)[-1].strip()
        raise GmlImportError("BAD_COORDINATE_TOKEN",
                             f"cannot read coordinate token {bad}")
    if not values or len(values) % dim:
        raise GmlImportError("BAD_COORDINATE_TOKEN",
                             f"coordinate count {len(values)} does not "
                             f"divide into {dim}-tuples")
    rows = [tuple(values[i:i + dim]) for i in range(0, len(values), dim)]
    if dim == 2:
        rows = [(x, y, 0.0) for x, y in rows]
    return rows


@dataclass
class ImportReport:
    """What came in, what was skipped."""

    features: dict = field(default_factory=dict)
    surfaces: int = 0
    vertices: int = 0
    crs: str | None = None
    skipped: list = field(default_factory=list)

    def skip(self, element: str, reason: str) -> None:
        self.skipped.append({"element": element, "reason": reason})

    def to_json_lines(self) -> list[dict]:
        head = {"record": "summary",
                "features": dict(sorted(self.features.items())),
                "surfaces": self.surfaces, "vertices": self.vertices}
        if self.crs:
            head["crs"] = self.crs
        return [head] + [{"record": "skipped", **entry}
                         for entry in self.skipped]


def import_citygml(text: str) -> tuple[CityModel, ImportReport]:
    """CityModel plus report from one CityGML 2.0 document."""
    doc = GmlDocument.from_text(text)
    if _local(doc.root.tag) != "CityModel":
        raise GmlImportError("NOT_CITYGML",
                             f"root element is {_local(doc.root.tag)!r}, "
                             "expected CityModel")
    importer = _Importer(doc)
    return importer.run()


class _Importer:
    def __init__(self, doc: GmlDocument):
        self.doc = doc
        self.pool = VertexPool()
        self.objects: dict[str, CityObject] = {}
        self.report = ImportReport()
        self.counters: dict[str, int] = {}
        # polygon element identity -> (semantic type, attributes, owner key)
        self.claims: dict[int, tuple] = {}

    # -- driver ---------------------------------------------------------

    def run(self) -> tuple[CityModel, ImportReport]:
        crs = self._single_crs()
        for member in self.doc.root:
            name = _local(member.tag)
            if name in ("cityObjectMember", "featureMember"):
                for feature in member:
                    self._feature(feature)
            elif name == "boundedBy":
                continue  # the document envelope; its srsName is read above
            else:
                self.report.skip(name, "unsupported document member")
        metadata = {"referenceSystem": f"EPSG:{crs}"} if crs else {}
        model = CityModel(city_objects=self.objects,
                          vertices=self.pool.rows, metadata=metadata)
        self.report.vertices = len(self.pool.rows)
        if crs:
            self.report.crs = f"EPSG:{crs}"
        return model, self.report

    def _single_crs(self):
        codes = set()
        for elem in self.doc.root.iter():
            srs = elem.get("srsName")
            if not srs:
                continue
            m = _EPSG_SUFFIX.search(srs)
            if not m:
                raise GmlImportError("NON_EPSG_CRS",
                                     f"cannot read an EPSG code out of "
                                     f"{srs!r}")
            codes.add(int(m.group(1)))
        if len(codes) > 1:
            raise GmlImportError("MIXED_CRS",
                                 f"document mixes reference systems "
                                 f"{sorted(codes)}; all geometries must "
                                 "share one")
        return codes.pop() if codes else None

    def _fresh_id(self, elem: ET.Element, cotype: str) -> str:
        for key, value in elem.attrib.items():
            if _local(key) == "id":
                return value
        self.counters[cotype] = self.counters.get(cotype, 0) + 1
        return f"{cotype}_{self.counters[cotype]}"

    # -- features ---------------------------------------------------------

    def _feature(self, elem: ET.Element, parent: str | None = None):
        name = _local(elem.tag)
        if name == "Building" or name == "BuildingPart":
            self._building(elem, name, parent)
        elif name == "SolitaryVegetationObject":
            self._simple_feature(elem, "SolitaryVegetationObject",
                                 _VEGETATION_ATTRS, parent)
        elif name == "GenericCityObject":
            self._simple_feature(elem, "GenericCityObject", {}, parent)
        else:
            # Fallback: keep the feature rather than dropping it, noted in
            # the report.
            self.report.skip(name, "unknown feature imported as "
                                   "GenericCityObject")
            self._simple_feature(elem, "GenericCityObject", {}, parent)

    def _count(self, cotype: str) -> None:
        self.report.features[cotype] = self.report.features.get(cotype, 0) + 1

    def _building(self, elem: ET.Element, cotype: str, parent: str | None):
        oid = self._fresh_id(elem, cotype)
        co = CityObject(type=cotype)
        self.objects[oid] = co
        self._count(cotype)
        if parent:
            co.parents.append(parent)
            self.objects[parent].children.append(oid)

        surfaces = self._register_boundaries(elem)
        direct_parts = []
        for child in elem:
            name = _local(child.tag)
            if name in ("consistsOfBuildingPart",):
                for part in child:
                    if _local(part.tag) == "BuildingPart":
                        direct_parts.append(part)
            elif name in _BUILDING_ATTRS:
                co.attributes[name] = self._scalar(child, _BUILDING_ATTRS[name])
            elif name in _GENERIC_ATTR_CASTS:
                self._generic_attribute(co, child, name)
            elif name.startswith("lod"):
                geom = self._lod_geometry(child, oid)
                if geom is not None:
                    co.geometry.append(geom)
            elif name == "boundedBy":
                pass  # consumed by _register_boundaries
            elif name == "address":
                self.report.skip("address", "addresses are not imported")
            else:
                self.report.skip(name, "unsupported building member")

        if not co.geometry and surfaces:
            co.geometry.append(self._surfaces_geometry(surfaces, oid))
        for part in direct_parts:
            self._feature(part, parent=oid)

    def _simple_feature(self, elem: ET.Element, cotype: str, attr_casts: dict,
                        parent: str | None):
        oid = self._fresh_id(elem, cotype)
        co = CityObject(type=cotype)
        self.objects[oid] = co
        self._count(cotype)
        if parent:
            co.parents.append(parent)
            self.objects[parent].children.append(oid)
        for child in elem:
            name = _local(child.tag)
            if name in attr_casts:
                co.attributes[name] = self._scalar(child, attr_casts[name])
            elif name in _GENERIC_ATTR_CASTS:
                self._generic_attribute(co, child, name)
            elif name.startswith("lod"):
                geom = self._lod_geometry(child, oid)
                if geom is not None:
                    co.geometry.append(geom)
            else:
                self.report.skip(name, f"unsupported {cotype} member")

    def _scalar(self, elem: ET.Element, cast):
        text = (elem.text or "").strip()
        try:
            value = cast(text)
        except ValueError:
            value = text
        uom = elem.get("uom")
        if uom:
            return {"value": value, "uom": uom}
        return value

    def _generic_attribute(self, co: CityObject, elem: ET.Element, kind: str):
        name = elem.get("name")
        if not name:
            self.report.skip(kind, "generic attribute without a name")
            return
        cast = _GENERIC_ATTR_CASTS[kind]
        for child in elem:
            if _local(child.tag) == "value":
                text = (child.text or "").strip()
                try:
                    value = cast(text)
                except ValueError:
                    value = text
                uom = child.get("uom")
                if kind == "measureAttribute" and uom:
                    co.attributes[name] = {"value": value, "uom": uom}
                else:
                    co.attributes[name] = value
                return
        self.report.skip(kind, f"generic attribute {name!r} without a value")

    # -- semantic surfaces -------------------------------------------------

    def _register_boundaries(self, feature: ET.Element) -> list[ET.Element]:
        """Claim polygons for the feature's boundedBy surfaces.

        Returns the surface feature elements in document order, so a
        building without an explicit geometry can still assemble one
        MultiSurface out of them.
        """
        surfaces = []
        for bounded in feature.findall("./*"):
            if _local(bounded.tag) != "boundedBy":
                continue
            for surf in bounded:
                stype = _local(surf.tag)
                if stype == "Envelope":
                    continue  # a feature bbox, not a boundary surface
                if stype not in _SEMANTIC_SURFACES:
                    self.report.skip(stype, "unsupported boundary surface")
                    continue
                surfaces.append(surf)
                for poly in self._surface_polygons(surf):
                    self.claims.setdefault(
                        id(poly), (stype, {}, id(surf)))
        return surfaces

    def _surface_polygons(self, surf: ET.Element) -> list[ET.Element]:
        """Polygons of one semantic surface: inline and href'd alike."""
        out = []
        for elem in surf.iter():
            if _local(elem.tag) == "Polygon":
                out.append(elem)
            href = elem.get(XLINK_HREF)
            if href is not None:
                target = resolve_xlink(self.doc, href)
                if _local(target.tag) == "Polygon":
                    out.append(target)
        return out

    # -- geometries ---------------------------------------------------------

    def _lod_geometry(self, holder: ET.Element, oid: str):
        name = _local(holder.tag)
        m = re.match(r"lod(\d)", name)
        lod = int(m.group(1)) if m else None
        if lod == 4:
            raise GmlImportError(
                "LOD4_UNSUPPORTED",
                f"{name} on {oid}: interior (LoD4) models are not supported")
        if lod is None:
            self.report.skip(name, "unrecognized geometry holder")
            return None
        body = None
        for child in holder:
            body = child
            break
        if body is None:
            href = holder.get(XLINK_HREF)
            if href is not None:
                body = resolve_xlink(self.doc, href)
        if body is None:
            self.report.skip(name, "empty geometry holder")
            return None
        kind = _local(body.tag)
        if kind == "Solid":
            return self._solid(body, lod, oid)
        if kind in ("MultiSurface", "CompositeSurface"):
            return self._surface_collection(body, kind, lod, oid)
        self.report.skip(kind, f"unsupported geometry of {oid}")
        return None

    def _solid(self, solid: ET.Element, lod, oid: str) -> Geometry:
        shells = []
        tracker = _SemanticsTracker()
        for child in solid:
            name = _local(child.tag)
            if name not in ("exterior", "interior"):
                self.report.skip(name, f"unsupported solid member of {oid}")
                continue
            shell_polys = []
            for polygon in self._collect_polygons(child):
                shell_polys.append(self._polygon(polygon, tracker))
            if shell_polys:
                shells.append(shell_polys)
        return tracker.attach(Geometry(type="Solid", lod=lod,
                                       boundaries=shells),
                              shape=[len(s) for s in shells])

    def _surface_collection(self, body: ET.Element, kind: str, lod,
                            oid: str) -> Geometry:
        tracker = _SemanticsTracker()
        polys = [self._polygon(p, tracker)
                 for p in self._collect_polygons(body)]
        return tracker.attach(Geometry(type=kind, lod=lod, boundaries=polys))

    def _surfaces_geometry(self, surfaces: list[ET.Element],
                           oid: str) -> Geometry:
        """MultiSurface assembled from boundedBy surfaces alone."""
        tracker = _SemanticsTracker()
        polys = []
        lod = None
        for surf in surfaces:
            for child in surf:
                name = _local(child.tag)
                m = re.match(r"lod(\d)", name)
                if not m:
                    continue
                if int(m.group(1)) == 4:
                    raise GmlImportError(
                        "LOD4_UNSUPPORTED",
                        f"{name} on {oid}: interior (LoD4) models are "
                        "not supported")
                lod = int(m.group(1)) if lod is None else lod
                for polygon in self._collect_polygons(child):
                    polys.append(self._polygon(polygon, tracker))
        return tracker.attach(
            Geometry(type="MultiSurface", lod=lod if lod is not None else 2,
                     boundaries=polys))

    def _collect_polygons(self, container: ET.Element) -> list[ET.Element]:
        """Polygons under a shell/collection, resolving member links,
        preserving document order."""
        out = []

        def walk(elem):
            for child in elem:
                name = _local(child.tag)
                if name == "Polygon":
                    out.append(child)
                elif name in ("surfaceMember", "surfaceMembers", "exterior",
                              "interior", "CompositeSurface", "MultiSurface"):
                    href = child.get(XLINK_HREF)
                    if href is not None and len(child) == 0:
                        target = resolve_xlink(self.doc, href)
                        if _local(target.tag) == "Polygon":
                            out.append(target)
                        else:
                            walk(target)
                    else:
                        walk(child)
                else:
                    self.report.skip(name, "unsupported surface member")

        walk(container)
        return out

    def _polygon(self, polygon: ET.Element, tracker) -> list[list[int]]:
        rings = []
        for child in polygon:
            name = _local(child.tag)
            if name in ("exterior", "interior"):
                for ring in child:
                    if _local(ring.tag) == "LinearRing":
                        rings.append(normalize_ring(ring, self.pool))
                    else:
                        self.report.skip(_local(ring.tag),
                                         "unsupported ring type")
            else:
                self.report.skip(name, "unsupported polygon member")
        self.report.surfaces += 1
        tracker.note(self.claims.get(id(polygon)))
        return rings


class _SemanticsTracker:
    """Assigns semantic-surface indices in polygon-consumption order.

    Surfaces get their index the first time one of their polygons is
    consumed, so a file whose boundedBy surfaces are reordered — but whose
    shell walks the polygons in the same order — produces identical
    semantics arrays.
    """

    def __init__(self):
        self.surfaces: list[dict] = []
        self.by_owner: dict[int, int] = {}
        self.values: list = []

    def note(self, claim) -> None:
        if claim is None:
            self.values.append(None)
            return
        stype, attrs, owner = claim
        idx = self.by_owner.get(owner)
        if idx is None:
            idx = len(self.surfaces)
            self.by_owner[owner] = idx
            self.surfaces.append({"type": stype, **attrs})
        self.values.append(idx)

    def attach(self, geom: Geometry,
               shape: list[int] | None = None) -> Geometry:
        """Hang the collected semantics on the geometry.

        ``shape`` re-nests the flat per-polygon values into per-shell lists
        for solids (one entry per shell, its value = that shell's polygon
        count).
        """
        if not self.surfaces:
            return geom
        values = self.values
        if shape is not None:
            nested, pos = [], 0
            for count in shape:
                nested.append(values[pos:pos + count])
                pos += count
            values = nested
        geom.semantics = Semantics(surfaces=self.surfaces, values=values)
        return geom
