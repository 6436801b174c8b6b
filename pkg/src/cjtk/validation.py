"""Two-layer validation: structural rules and referential consistency.

Structure answers "is each piece well-formed on its own": known object
types, boundary arrays of the right nesting depth for their geometry kind,
rings with at least three distinct corners, a numeric lod on every
geometry, 16-number transformation matrices, template indices that exist,
an EPSG reference system, a well-shaped transform and extent.

Consistency answers "do the pieces agree with each other": parents and
children listing one another, semantic values mirroring the shape of the
boundaries they annotate, no duplicate identifiers, no duplicate or
unreferenced vertices (warnings), and every boundary index inside the
vertex pool.

`validate` composes the layers and, when extensions are supplied, the
extension checks.  `validate_text` adds the syntax layer in front, so a
report always begins at the first stage that fails: syntax errors suppress
structure findings, structure errors suppress consistency findings, and so
on.  Each finding carries its stage, a path, a code, and a severity;
reports are sorted by (path, code).
"""

from __future__ import annotations

import math
import re

from .codec import parse
from .errors import ERROR, WARNING, CjtkError, Finding
from .extensions import Extension, validate_extended
from .model import (COBJECT_TYPES, GEOMETRY_DEPTH, SECOND_LEVEL_TYPES,
                    SEMANTIC_SURFACE_TYPES, SURFACE_KINDS, CityModel, Geometry,
                    iter_rings, nesting_depth)

_EPSG_RE = re.compile(r"^EPSG:\d+$")


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) \
        and math.isfinite(x)


# ---------------------------------------------------------------------------
# structure
# ---------------------------------------------------------------------------


def validate_structure(model: CityModel) -> list[Finding]:
    out: list[Finding] = []

    def err(path, code, message):
        out.append(Finding(path, code, ERROR, message, "structure"))

    def warn(path, code, message):
        out.append(Finding(path, code, WARNING, message, "structure"))

    for oid, co in model.city_objects.items():
        base = f"CityObjects/{oid}"
        if co.type not in COBJECT_TYPES and not co.type.startswith("+"):
            err(f"{base}/type", "UNKNOWN_COTYPE",
                f"{co.type!r} is not a known city object type")
        for gi, geom in enumerate(co.geometry):
            _check_geometry(model, geom, f"{base}/geometry/{gi}", err, warn)

    if model.transform is not None:
        tr = model.transform
        if (len(tr.scale) != 3 or len(tr.translate) != 3
                or not all(_finite(x) for x in tr.scale + tr.translate)
                or any(s <= 0 for s in tr.scale)):
            err("transform", "BAD_TRANSFORM",
                "transform needs 3 positive scales and 3 finite translations")

    crs = (model.metadata or {}).get("referenceSystem")
    if crs is not None and (not isinstance(crs, str) or not _EPSG_RE.match(crs)):
        err("metadata/referenceSystem", "INVALID_CRS",
            f"{crs!r} is not of the form EPSG:<code>")

    extent = (model.metadata or {}).get("geographicalExtent")
    if extent is not None:
        ok = (isinstance(extent, list) and len(extent) == 6
              and all(_finite(x) for x in extent)
              and all(extent[i] <= extent[i + 3] for i in range(3)))
        if not ok:
            err("metadata/geographicalExtent", "INVALID_EXTENT",
                "extent must be [minx,miny,minz,maxx,maxy,maxz] with "
                "min <= max per axis")

    for oid, co in model.city_objects.items():
        if co.extent is not None:
            ok = (isinstance(co.extent, list) and len(co.extent) == 6
                  and all(_finite(x) for x in co.extent)
                  and all(co.extent[i] <= co.extent[i + 3] for i in range(3)))
            if not ok:
                out.append(Finding(f"CityObjects/{oid}/geographicalExtent",
                                   "INVALID_EXTENT", ERROR,
                                   "extent must be six finite numbers with "
                                   "min <= max per axis", "structure"))
    out.sort()
    return out


def _check_geometry(model: CityModel, geom: Geometry, base: str, err, warn):
    if geom.is_instance():
        n = len(model.templates.templates) if model.templates else 0
        if not isinstance(geom.template, int) or not 0 <= geom.template < n:
            err(f"{base}/template", "TEMPLATE_INDEX_OUT_OF_RANGE",
                f"template {geom.template!r} not in 0..{n - 1}")
        m = geom.transformation_matrix
        if (not isinstance(m, list) or len(m) != 16
                or not all(_finite(x) for x in m)):
            err(f"{base}/transformationMatrix", "BAD_MATRIX",
                "transformationMatrix must hold 16 finite numbers in "
                "row-major order")
        if (not isinstance(geom.boundaries, list) or len(geom.boundaries) != 1
                or not isinstance(geom.boundaries[0], int)):
            err(f"{base}/boundaries", "BAD_GEOMETRY_SHAPE",
                "an instance points at exactly one reference vertex")
        return

    if geom.type not in GEOMETRY_DEPTH:
        err(f"{base}/type", "UNKNOWN_COTYPE",
            f"{geom.type!r} is not a geometry kind")
        return
    if not isinstance(geom.lod, (int, float)) or isinstance(geom.lod, bool):
        err(f"{base}/lod", "MISSING_REQUIRED_MEMBER",
            "every geometry carries a numeric lod")

    want = GEOMETRY_DEPTH[geom.type]
    got = nesting_depth(geom.boundaries)
    if got != want:
        err(f"{base}/boundaries", "BAD_GEOMETRY_SHAPE",
            f"{geom.type} boundaries nest {want} deep, found {got}")
        return
    if geom.type in SURFACE_KINDS:
        for where, ring in iter_rings(geom.type, geom.boundaries):
            if len(ring) < 3:
                err(f"{base}/boundaries/{where}", "BAD_GEOMETRY_SHAPE",
                    "a ring needs at least 3 vertex indices")
            elif ring[0] == ring[-1]:
                err(f"{base}/boundaries/{where}", "BAD_GEOMETRY_SHAPE",
                    "rings are implicitly closed; the first vertex must "
                    "not be repeated at the end")
    if geom.semantics is not None and geom.semantics.surfaces:
        for si, surf in enumerate(geom.semantics.surfaces):
            stype = surf.get("type")
            if (isinstance(stype, str) and stype not in SEMANTIC_SURFACE_TYPES
                    and not stype.startswith("+")):
                warn(f"{base}/semantics/surfaces/{si}", "UNKNOWN_SEMANTIC_TYPE",
                     f"{stype!r} is not a standard semantic surface type")


# ---------------------------------------------------------------------------
# consistency
# ---------------------------------------------------------------------------


def validate_consistency(model: CityModel) -> list[Finding]:
    out: list[Finding] = []

    def err(path, code, message):
        out.append(Finding(path, code, ERROR, message, "consistency"))

    def warn(path, code, message):
        out.append(Finding(path, code, WARNING, message, "consistency"))

    ids = model.city_objects.keys()

    # 1. parent/child links agree in both directions.
    for oid, co in model.city_objects.items():
        for child in co.children:
            if child not in ids:
                err(f"CityObjects/{oid}/children", "PARENT_CHILD_MISMATCH",
                    f"child {child!r} does not exist")
            elif oid not in model.city_objects[child].parents:
                err(f"CityObjects/{oid}/children", "PARENT_CHILD_MISMATCH",
                    f"{child!r} does not list {oid!r} among its parents")
        for parent in co.parents:
            if parent not in ids:
                err(f"CityObjects/{oid}/parents", "PARENT_CHILD_MISMATCH",
                    f"parent {parent!r} does not exist")
            elif oid not in model.city_objects[parent].children:
                err(f"CityObjects/{oid}/parents", "PARENT_CHILD_MISMATCH",
                    f"{parent!r} does not list {oid!r} among its children")
        if co.type in SECOND_LEVEL_TYPES and not co.parents:
            warn(f"CityObjects/{oid}/parents", "MISSING_PARENT",
                 f"{co.type} normally belongs to a parent object")

    # 2. semantic values mirror the boundaries they annotate.
    for oid, gi, geom in model.iter_geometries():
        if geom.semantics is None or geom.is_instance():
            continue
        base = f"CityObjects/{oid}/geometry/{gi}/semantics"
        if geom.type not in GEOMETRY_DEPTH or GEOMETRY_DEPTH[geom.type] < 3:
            continue
        levels = GEOMETRY_DEPTH[geom.type] - 2
        nsurf = len(geom.semantics.surfaces)
        problem = _semantics_problem(geom.boundaries, geom.semantics.values,
                                     levels, nsurf)
        if problem:
            err(base, "SEMANTICS_SHAPE_MISMATCH", problem)

    # 3. duplicate identifiers cannot occur inside one JSON object, but a
    #    programmatically merged model may carry a marker for them; the
    #    decoder raises instead (see codec.parse).

    # 4. duplicate and unreferenced vertices (warnings).
    seen: dict[tuple, int] = {}
    for vi, v in enumerate(model.vertices):
        key = tuple(v)
        if key in seen:
            warn(f"vertices/{vi}", "DUPLICATE_VERTEX",
                 f"same coordinates as vertex {seen[key]}")
        else:
            seen[key] = vi
    used = set(_used_indices(model))
    for vi in range(len(model.vertices)):
        if vi not in used:
            warn(f"vertices/{vi}", "ORPHAN_VERTEX",
                 "vertex is referenced by no geometry")
    tverts = model.templates.vertices if model.templates else []
    tused = set()
    if model.templates:
        for t in model.templates.templates:
            tused.update(_boundary_indices(t.boundaries))
    for vi in range(len(tverts)):
        if vi not in tused:
            warn(f"geometry-templates/vertices-templates/{vi}", "ORPHAN_VERTEX",
                 "template vertex is referenced by no template")

    # 5. every boundary index addresses an existing vertex.
    limit = len(model.vertices)
    for oid, gi, geom in model.iter_geometries():
        for idx in _boundary_indices(geom.boundaries):
            if not isinstance(idx, int) or isinstance(idx, bool) \
                    or not 0 <= idx < limit:
                err(f"CityObjects/{oid}/geometry/{gi}/boundaries",
                    "VERTEX_INDEX_OUT_OF_RANGE",
                    f"index {idx!r} not in 0..{limit - 1}")
                break
    if model.templates:
        for ti, t in enumerate(model.templates.templates):
            for idx in _boundary_indices(t.boundaries):
                if not isinstance(idx, int) or isinstance(idx, bool) \
                        or not 0 <= idx < len(tverts):
                    err(f"geometry-templates/templates/{ti}/boundaries",
                        "VERTEX_INDEX_OUT_OF_RANGE",
                        f"index {idx!r} not in 0..{len(tverts) - 1}")
                    break

    out.sort()
    return out


def _used_indices(model: CityModel):
    for _, _, geom in model.iter_geometries():
        yield from _boundary_indices(geom.boundaries)


def _boundary_indices(node):
    if isinstance(node, list):
        for child in node:
            yield from _boundary_indices(child)
    else:
        yield node


def _semantics_problem(boundaries, values, levels: int, nsurf: int):
    """values must nest `levels` deep and mirror boundaries above ring level;
    leaves are surface indices or null."""
    def walk(b, v, depth, where):
        if depth == 0:
            if v is None:
                return None
            if not isinstance(v, int) or isinstance(v, bool):
                return f"values/{where}: expected a surface index or null"
            if not 0 <= v < nsurf:
                return f"values/{where}: surface index {v} not in 0..{nsurf - 1}"
            return None
        if not isinstance(v, list) or len(v) != len(b):
            return (f"values/{where}: expected {len(b)} entries mirroring "
                    "the boundaries")
        for i, (bb, vv) in enumerate(zip(b, v)):
            problem = walk(bb, vv, depth - 1, f"{where}/{i}" if where else str(i))
            if problem:
                return problem
        return None

    if values is None:
        return None
    return walk(boundaries, values, levels, "")


# ---------------------------------------------------------------------------
# composition
# ---------------------------------------------------------------------------


def validate(model: CityModel,
             extensions: list[Extension] | None = None) -> list[Finding]:
    """Structure first; consistency only on structurally sound models;
    extension checks last."""
    findings = validate_structure(model)
    if not any(f.severity == ERROR for f in findings):
        findings += validate_consistency(model)
        if extensions is not None \
                and not any(f.severity == ERROR for f in findings):
            findings += validate_extended(model, extensions)
    findings.sort()
    return findings


def validate_text(text: str,
                  extensions: list[Extension] | None = None) -> list[Finding]:
    """Full pipeline for raw bytes/text: syntax, then the model layers."""
    try:
        model, _ = parse(text)
    except CjtkError as exc:
        return [Finding(exc.path or "", exc.code, ERROR, exc.message, "syntax")]
    return validate(model, extensions)


def errors_of(findings: list[Finding]) -> list[Finding]:
    return [f for f in findings if f.severity == ERROR]


def warnings_of(findings: list[Finding]) -> list[Finding]:
    return [f for f in findings if f.severity == WARNING]


def is_valid(findings: list[Finding]) -> bool:
    return not errors_of(findings)
