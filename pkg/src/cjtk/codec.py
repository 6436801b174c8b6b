"""Reading and writing the JSON text encoding.

The reader fails fast, with a slash-separated path from the document root,
on anything that breaks the shape of the encoding: bad JSON syntax, a
wrong or missing type tag, missing required members, members of the wrong
type, boundary arrays whose nesting does not match their geometry kind,
and duplicate keys (duplicate city-object identifiers in particular).
Checks that need whole-model reasoning (index ranges, family links,
semantics coherence) belong to the validator, which reports findings
instead of raising.

The writer emits members in one canonical order so output is stable
across runs: type, version, metadata, extensions, transform, CityObjects,
vertices, appearance, geometry-templates, then any retained unknown
members.  Minified mode uses no whitespace; integers print without a
decimal point and reals with their shortest round-trip form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .errors import CodecError
from .model import (
    GEOMETRY_DEPTH,
    CityModel,
    CityObject,
    Geometry,
    TemplateBank,
    Transform,
)

_REQUIRED = ("version", "CityObjects", "vertices")


@dataclass
class ParseDiagnostics:
    """Non-fatal observations made while reading a document."""

    warnings: list = field(default_factory=list)
    unknown_members: list = field(default_factory=list)


# -- reading ----------------------------------------------------------------


def _collecting_pairs_hook(duplicates: dict):
    """object_pairs_hook recording which dicts carried duplicate keys."""

    def hook(pairs):
        d = dict(pairs)
        if len(d) != len(pairs):
            seen: set = set()
            dups = []
            for k, _ in pairs:
                if k in seen and k not in dups:
                    dups.append(k)
                seen.add(k)
            duplicates[id(d)] = dups
        return d

    return hook


def _raise_duplicates(root, duplicates: dict) -> None:
    # Resolve each offending dict back to its document path; report the
    # first offence in path order.  The CityObjects dict gets its own code
    # because its keys are object identifiers.
    paths: dict[int, str] = {}
    stack = [(root, "")]
    while stack:
        node, path = stack.pop()
        if isinstance(node, dict):
            paths[id(node)] = path
            for k, v in node.items():
                stack.append((v, f"{path}/{k}" if path else str(k)))
        elif isinstance(node, list):
            for i, v in enumerate(node):
                stack.append((v, f"{path}/{i}"))
    offences = []
    for did, keys in duplicates.items():
        where = paths.get(did, "?")
        for k in keys:
            offences.append((f"{where}/{k}" if where else str(k), where, k))
    offences.sort()
    path, where, key = offences[0]
    if where == "CityObjects":
        raise CodecError("DUPLICATE_ID",
                         f"identifier {key!r} appears more than once", path=path)
    raise CodecError("DUPLICATE_KEY", f"key {key!r} appears more than once",
                     path=path)


def parse(text: str) -> tuple[CityModel, ParseDiagnostics]:
    """Parse a document string; returns the model plus diagnostics."""
    duplicates: dict[int, list[str]] = {}
    try:
        root = json.loads(text, object_pairs_hook=_collecting_pairs_hook(duplicates))
    except json.JSONDecodeError as e:
        raise CodecError("SYNTAX_ERROR", e.msg, line=e.lineno, column=e.colno) from e
    if not isinstance(root, dict):
        raise CodecError("NOT_CITYJSON", "document root is not an object")
    if duplicates:
        _raise_duplicates(root, duplicates)
    return model_from_json(root)


def loads(text: str) -> CityModel:
    return parse(text)[0]


def load(source) -> CityModel:
    """Parse from a path or an open text file."""
    if hasattr(source, "read"):
        return loads(source.read())
    with open(source, encoding="utf-8") as fp:
        return loads(fp.read())


def _require(cond: bool, code: str, message: str, path: str) -> None:
    if not cond:
        raise CodecError(code, message, path=path)


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _check_boundary_shape(node, depth: int, path: str) -> None:
    if depth == 0:
        _require(isinstance(node, int) and not isinstance(node, bool),
                 "BAD_GEOMETRY_SHAPE",
                 f"vertex reference {node!r} is not an integer", path)
        return
    _require(isinstance(node, list), "BAD_GEOMETRY_SHAPE",
             f"expected {depth} more array level(s)", path)
    for i, sub in enumerate(node):
        _check_boundary_shape(sub, depth - 1, f"{path}/{i}")


def _check_geometry(obj, path: str) -> None:
    _require(isinstance(obj, dict), "WRONG_MEMBER_TYPE",
             "geometry must be an object", path)
    _require("type" in obj, "MISSING_REQUIRED_MEMBER", "geometry has no type",
             f"{path}/type")
    kind = obj["type"]
    lod = obj.get("lod")
    _require(lod is None or _is_number(lod), "WRONG_MEMBER_TYPE",
             "lod must be a number", f"{path}/lod")
    if kind == "GeometryInstance":
        for member in ("template", "boundaries", "transformationMatrix"):
            _require(member in obj, "MISSING_REQUIRED_MEMBER",
                     f"geometry instance needs {member!r}", f"{path}/{member}")
        _check_boundary_shape(obj["boundaries"], 1, f"{path}/boundaries")
        _require(len(obj["boundaries"]) == 1, "BAD_GEOMETRY_SHAPE",
                 "instance boundaries hold exactly one reference point",
                 f"{path}/boundaries")
        return
    _require("boundaries" in obj, "MISSING_REQUIRED_MEMBER",
             "geometry has no boundaries", f"{path}/boundaries")
    if kind in GEOMETRY_DEPTH:
        _check_boundary_shape(obj["boundaries"], GEOMETRY_DEPTH[kind],
                              f"{path}/boundaries")
    sem = obj.get("semantics")
    if sem is not None:
        _require(isinstance(sem, dict) and isinstance(sem.get("surfaces"), list)
                 and isinstance(sem.get("values"), list), "WRONG_MEMBER_TYPE",
                 "semantics needs surfaces and values arrays",
                 f"{path}/semantics")


def _check_vertices(vertices, path: str) -> None:
    for i, v in enumerate(vertices):
        _require(isinstance(v, list) and len(v) == 3 and all(map(_is_number, v)),
                 "BAD_GEOMETRY_SHAPE", "vertex must hold exactly three numbers",
                 f"{path}/{i}")


def model_from_json(root: dict) -> tuple[CityModel, ParseDiagnostics]:
    diag = ParseDiagnostics()
    if root.get("type") != "CityJSON":
        raise CodecError("NOT_CITYJSON", f"type member is {root.get('type')!r}, "
                         "expected 'CityJSON'", path="type")
    for key in _REQUIRED:
        _require(key in root, "MISSING_REQUIRED_MEMBER",
                 f"required member {key!r} is absent", key)
    version = root["version"]
    if not isinstance(version, str) or not version.startswith("1.0"):
        raise CodecError("WRONG_MEMBER_TYPE",
                         f"version {version!r} is not a 1.0 release", path="version")
    _require(isinstance(root["CityObjects"], dict), "WRONG_MEMBER_TYPE",
             "CityObjects must be an object", "CityObjects")
    _require(isinstance(root["vertices"], list), "WRONG_MEMBER_TYPE",
             "vertices must be an array", "vertices")
    _check_vertices(root["vertices"], "vertices")

    model = CityModel(version=version, vertices=root["vertices"])
    for oid, obj in root["CityObjects"].items():
        path = f"CityObjects/{oid}"
        _require(isinstance(obj, dict), "WRONG_MEMBER_TYPE",
                 "city object must be an object", path)
        _require("type" in obj, "MISSING_REQUIRED_MEMBER",
                 "city object has no type", f"{path}/type")
        _require(isinstance(obj.get("attributes", {}), dict), "WRONG_MEMBER_TYPE",
                 "attributes must be an object", f"{path}/attributes")
        for member in ("parents", "children"):
            links = obj.get(member, [])
            _require(isinstance(links, list)
                     and all(isinstance(x, str) for x in links),
                     "WRONG_MEMBER_TYPE", f"{member} must be an array of ids",
                     f"{path}/{member}")
        geoms = obj.get("geometry", [])
        _require(isinstance(geoms, list), "WRONG_MEMBER_TYPE",
                 "geometry must be an array", f"{path}/geometry")
        for g_i, g in enumerate(geoms):
            _check_geometry(g, f"{path}/geometry/{g_i}")
        co = CityObject.from_json(obj)
        for g in co.geometry:
            diag.unknown_members.extend(f"{path}/…/{k}" for k in g.extra)
        diag.unknown_members.extend(f"{path}/{k}" for k in co.extra)
        model.city_objects[oid] = co

    if "transform" in root:
        t = root["transform"]
        ok = (isinstance(t, dict)
              and isinstance(t.get("scale"), list) and len(t["scale"]) == 3
              and isinstance(t.get("translate"), list) and len(t["translate"]) == 3
              and all(map(_is_number, t["scale"] + t["translate"])))
        _require(ok, "WRONG_MEMBER_TYPE",
                 "transform needs 3-element scale and translate", "transform")
        model.transform = Transform.from_json(t)
    if "geometry-templates" in root:
        bank = root["geometry-templates"]
        _require(isinstance(bank, dict), "WRONG_MEMBER_TYPE",
                 "geometry-templates must be an object", "geometry-templates")
        for g_i, g in enumerate(bank.get("templates", [])):
            _check_geometry(g, f"geometry-templates/templates/{g_i}")
        _check_vertices(bank.get("vertices-templates", []),
                        "geometry-templates/vertices-templates")
        model.templates = TemplateBank.from_json(bank)
    if "appearance" in root:
        _require(isinstance(root["appearance"], dict), "WRONG_MEMBER_TYPE",
                 "appearance must be an object", "appearance")
        model.appearance = root["appearance"]
    if "metadata" in root:
        _require(isinstance(root["metadata"], dict), "WRONG_MEMBER_TYPE",
                 "metadata must be an object", "metadata")
        model.metadata = root["metadata"]
    if "extensions" in root:
        _require(isinstance(root["extensions"], dict), "WRONG_MEMBER_TYPE",
                 "extensions must be an object", "extensions")
        model.extensions = root["extensions"]

    known = {"type", "version", "CityObjects", "vertices", "transform",
             "geometry-templates", "appearance", "metadata", "extensions"}
    model.extra = {k: v for k, v in root.items() if k not in known}
    diag.unknown_members.extend(sorted(model.extra))
    return model, diag


# -- writing ----------------------------------------------------------------


def model_to_json(model: CityModel) -> dict:
    """Canonically ordered plain-dict form of a model."""
    out: dict[str, Any] = {"type": "CityJSON", "version": model.version}
    if model.metadata:
        out["metadata"] = model.metadata
    if model.extensions:
        out["extensions"] = model.extensions
    if model.transform is not None:
        out["transform"] = model.transform.to_json()
    out["CityObjects"] = {oid: co.to_json() for oid, co in model.city_objects.items()}
    out["vertices"] = model.vertices
    if model.appearance is not None:
        out["appearance"] = model.appearance
    if model.templates is not None:
        out["geometry-templates"] = model.templates.to_json()
    out.update(model.extra)
    return out


def dumps(model: CityModel, pretty: bool = False) -> str:
    root = model_to_json(model)
    if pretty:
        return json.dumps(root, indent=2, ensure_ascii=False)
    return json.dumps(root, separators=(",", ":"), ensure_ascii=False)


def dump(model: CityModel, target, pretty: bool = False) -> None:
    """Write to a path or an open text file."""
    text = dumps(model, pretty=pretty)
    if hasattr(target, "write"):
        target.write(text)
        return
    with open(target, "w", encoding="utf-8") as fp:
        fp.write(text)
