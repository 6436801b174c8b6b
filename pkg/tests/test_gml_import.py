"""CityGML importer: spelling variants, scoped features, error codes."""

import pytest

from cjtk import import_citygml
from cjtk.errors import GmlImportError
from cjtk.validation import validate

from gmlvariants import (CUBE_FACES, CUBE_VARIANTS, SQUARE_VARIANTS,
                         _cube_inline, _document, _polygon_xml)
from helpers import tree_of

_GEN_NS = (' xmlns:core="http://www.opengis.net/citygml/2.0"'
           ' xmlns:bldg="http://www.opengis.net/citygml/building/2.0"'
           ' xmlns:veg="http://www.opengis.net/citygml/vegetation/2.0"'
           ' xmlns:gen="http://www.opengis.net/citygml/generics/2.0"'
           ' xmlns:gml="http://www.opengis.net/gml"'
           ' xmlns:xlink="http://www.w3.org/1999/xlink"')


def gen_document(body: str) -> str:
    return (f'<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<core:CityModel{_GEN_NS}>\n{body}\n</core:CityModel>\n')


def solid_xml(dx=0.0) -> str:
    faces = [[(x + dx, y, z) for x, y, z in face] for face in CUBE_FACES]
    members = "".join("<gml:surfaceMember>" + _polygon_xml(face)
                      + "</gml:surfaceMember>" for face in faces)
    return ('<gml:Solid><gml:exterior><gml:CompositeSurface>'
            f'{members}</gml:CompositeSurface></gml:exterior></gml:Solid>')


# ---------------------------------------------------------------------------
# spelling variants collapse onto one model
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(SQUARE_VARIANTS))
def test_square_variants_import_identically(name):
    reference, _ = import_citygml(SQUARE_VARIANTS["poslist-one-line"]())
    model, report = import_citygml(SQUARE_VARIANTS[name]())
    assert tree_of(model) == tree_of(reference)
    assert report.features == {"Building": 1}
    assert report.surfaces == 1
    assert validate(model) == []


def test_square_canonical_shape():
    model, _ = import_citygml(SQUARE_VARIANTS["poslist-one-line"]())
    geom = model.city_objects["sq-1"].geometry[0]
    assert geom.type == "MultiSurface" and geom.lod == 2
    assert geom.boundaries == [[[0, 1, 2, 3]]]
    assert model.vertices == [[0.0, 0.0, 0.0], [8.0, 0.0, 0.0],
                              [8.0, 5.0, 0.0], [0.0, 5.0, 0.0]]


@pytest.mark.parametrize("name", sorted(CUBE_VARIANTS))
def test_cube_variants_import_identically(name):
    reference, _ = import_citygml(
        CUBE_VARIANTS["inline-shell-xlinked-surfaces"]())
    model, _ = import_citygml(CUBE_VARIANTS[name]())
    assert tree_of(model) == tree_of(reference)
    assert validate(model) == []


def test_cube_canonical_shape():
    model, report = import_citygml(
        CUBE_VARIANTS["inline-shell-xlinked-surfaces"]())
    geom = model.city_objects["cube-1"].geometry[0]
    assert geom.type == "Solid" and geom.lod == 2
    assert len(model.vertices) == 8
    assert geom.boundaries[0][0] == [[0, 1, 2, 3]]
    assert geom.semantics.surfaces == [{"type": "GroundSurface"},
                                       {"type": "RoofSurface"},
                                       {"type": "WallSurface"}]
    assert geom.semantics.values == [[0, 1, 2, 2, 2, 2]]
    assert report.surfaces == 6


def test_inlined_and_xlinked_twins_are_equal():
    inlined, _ = import_citygml(
        CUBE_VARIANTS["inline-shell-xlinked-surfaces"]())
    xlinked, _ = import_citygml(
        CUBE_VARIANTS["xlinked-shell-inline-surfaces"]())
    assert tree_of(inlined) == tree_of(xlinked)


# ---------------------------------------------------------------------------
# features, attributes, structure
# ---------------------------------------------------------------------------


def test_building_with_part_and_attributes():
    body = f'''  <core:cityObjectMember>
    <bldg:Building gml:id="b-1">
      <bldg:function>residential</bldg:function>
      <bldg:yearOfConstruction>1931</bldg:yearOfConstruction>
      <bldg:measuredHeight uom="m">9.8</bldg:measuredHeight>
      <gen:stringAttribute name="district">
        <gen:value>Oud-West</gen:value>
      </gen:stringAttribute>
      <gen:intAttribute name="dwellings"><gen:value>4</gen:value></gen:intAttribute>
      <gen:doubleAttribute name="parcelArea"><gen:value>120.5</gen:value></gen:doubleAttribute>
      <gen:measureAttribute name="heatDemand"><gen:value uom="kWh">1520.0</gen:value></gen:measureAttribute>
      <bldg:lod2Solid>{solid_xml()}</bldg:lod2Solid>
      <bldg:consistsOfBuildingPart>
        <bldg:BuildingPart gml:id="b-1-p1">
          <bldg:lod2Solid>{solid_xml(dx=2.0)}</bldg:lod2Solid>
        </bldg:BuildingPart>
      </bldg:consistsOfBuildingPart>
    </bldg:Building>
  </core:cityObjectMember>'''
    model, report = import_citygml(gen_document(body))
    assert set(model.city_objects) == {"b-1", "b-1-p1"}
    main = model.city_objects["b-1"]
    part = model.city_objects["b-1-p1"]
    assert main.children == ["b-1-p1"] and part.parents == ["b-1"]
    assert part.type == "BuildingPart"
    assert main.attributes == {
        "function": "residential",
        "yearOfConstruction": 1931,
        "measuredHeight": {"value": 9.8, "uom": "m"},
        "district": "Oud-West",
        "dwellings": 4,
        "parcelArea": 120.5,
        "heatDemand": {"value": 1520.0, "uom": "kWh"},
    }
    assert report.features == {"Building": 1, "BuildingPart": 1}
    assert validate(model) == []


def test_vegetation_feature_and_uom_scalar():
    body = '''  <core:cityObjectMember>
    <veg:SolitaryVegetationObject gml:id="t-1">
      <veg:species>Tilia x europaea</veg:species>
      <veg:height uom="m">12.0</veg:height>
    </veg:SolitaryVegetationObject>
  </core:cityObjectMember>'''
    model, _ = import_citygml(gen_document(body))
    tree = model.city_objects["t-1"]
    assert tree.type == "SolitaryVegetationObject"
    assert tree.attributes == {"species": "Tilia x europaea",
                               "height": {"value": 12.0, "uom": "m"}}


def test_unknown_feature_becomes_generic_and_is_reported():
    body = ('  <core:cityObjectMember>'
            '<bldg:WeirdTower gml:id="w-1"/></core:cityObjectMember>')
    model, report = import_citygml(gen_document(body))
    assert model.city_objects["w-1"].type == "GenericCityObject"
    assert {"element": "WeirdTower",
            "reason": "unknown feature imported as GenericCityObject"} \
        in report.skipped


def test_unnamed_feature_gets_a_counter_id():
    text = SQUARE_VARIANTS["poslist-one-line"]().replace(
        ' gml:id="sq-1"', "")
    model, _ = import_citygml(text)
    assert set(model.city_objects) == {"Building_1"}


def test_boundedby_only_building_is_assembled():
    # No lodXSolid on the building itself: the semantic surfaces carry
    # the polygons and the importer assembles one MultiSurface.
    full = CUBE_VARIANTS["xlinked-shell-inline-surfaces"]()
    head, _, tail = full.partition("<bldg:lod2Solid>")
    _, _, rest = tail.partition("</bldg:lod2Solid>")
    model, _ = import_citygml(head + rest)
    geom = model.city_objects["cube-1"].geometry[0]
    assert geom.type == "MultiSurface" and geom.lod == 2
    assert len(geom.boundaries) == 6
    assert geom.semantics.values == [0, 1, 2, 2, 2, 2]
    assert validate(model) == []


def test_address_and_envelope_are_quietly_handled():
    body = f'''  <core:cityObjectMember>
    <bldg:Building gml:id="b-1">
      <gml:boundedBy>
        <gml:Envelope srsName="urn:ogc:def:crs:EPSG::7415">
          <gml:lowerCorner>0 0 0</gml:lowerCorner>
          <gml:upperCorner>1 1 1</gml:upperCorner>
        </gml:Envelope>
      </gml:boundedBy>
      <bldg:address><core:Address/></bldg:address>
      <bldg:lod2Solid>{solid_xml()}</bldg:lod2Solid>
    </bldg:Building>
  </core:cityObjectMember>'''
    model, report = import_citygml(gen_document(body))
    assert model.metadata == {"referenceSystem": "EPSG:7415"}
    assert report.crs == "EPSG:7415"
    reasons = {entry["element"] for entry in report.skipped}
    assert "Envelope" not in reasons
    assert "address" in reasons
    assert validate(model) == []


@pytest.mark.parametrize("srs", ["EPSG:7415", "urn:ogc:def:crs:EPSG::7415"])
def test_epsg_spellings(srs):
    text = SQUARE_VARIANTS["poslist-one-line"]().replace(
        "<gml:MultiSurface>", f'<gml:MultiSurface srsName="{srs}">')
    model, _ = import_citygml(text)
    assert model.metadata["referenceSystem"] == "EPSG:7415"


def test_lod0_holder_is_recognized():
    text = SQUARE_VARIANTS["poslist-one-line"]().replace(
        "lod2MultiSurface", "lod0FootPrint")
    model, _ = import_citygml(text)
    assert model.city_objects["sq-1"].geometry[0].lod == 0


def test_report_json_lines():
    body = ('  <core:cityObjectMember>'
            '<bldg:WeirdTower gml:id="w-1"/></core:cityObjectMember>')
    _, report = import_citygml(gen_document(body))
    lines = report.to_json_lines()
    assert lines[0]["record"] == "summary"
    assert lines[0]["features"] == {"GenericCityObject": 1}
    assert all(line["record"] == "skipped" for line in lines[1:])


# ---------------------------------------------------------------------------
# error codes
# ---------------------------------------------------------------------------


def expect_code(text, code):
    with pytest.raises(GmlImportError) as exc:
        import_citygml(text)
    assert exc.value.code == code


def test_xml_syntax_error():
    expect_code("<core:CityModel>", "XML_SYNTAX_ERROR")


def test_not_citygml():
    expect_code("<Garage/>", "NOT_CITYGML")


def test_unresolved_xlink():
    text = _cube_inline().replace('xlink:href="#c-f0"',
                                  'xlink:href="#ghost"')
    expect_code(text, "UNRESOLVED_XLINK")


def test_external_xlink():
    text = _cube_inline().replace('xlink:href="#c-f0"',
                                  'xlink:href="city.xml#c-f0"')
    expect_code(text, "EXTERNAL_XLINK")


def test_mixed_crs():
    text = SQUARE_VARIANTS["poslist-one-line"]()
    text = text.replace("<gml:MultiSurface>",
                        '<gml:MultiSurface srsName="EPSG:7415">')
    text = text.replace("<gml:Polygon>",
                        '<gml:Polygon srsName="urn:ogc:def:crs:EPSG::28992">')
    expect_code(text, "MIXED_CRS")


def test_non_epsg_crs():
    text = SQUARE_VARIANTS["poslist-one-line"]().replace(
        "<gml:MultiSurface>",
        '<gml:MultiSurface srsName="urn:ogc:def:crs:OGC:1.3:CRS84">')
    expect_code(text, "NON_EPSG_CRS")


def test_ring_too_short():
    poly = _polygon_xml([(0, 0, 0), (1, 0, 0)], closed=False)
    body = (f'  <core:cityObjectMember><bldg:Building gml:id="b">'
            f'<bldg:lod2MultiSurface><gml:MultiSurface><gml:surfaceMember>'
            f'{poly}</gml:surfaceMember></gml:MultiSurface>'
            f'</bldg:lod2MultiSurface></bldg:Building>'
            f'</core:cityObjectMember>')
    expect_code(_document(body), "RING_TOO_SHORT")


def test_closure_does_not_count_as_a_corner():
    poly = _polygon_xml([(0, 0, 0), (1, 0, 0)], closed=True)
    body = (f'  <core:cityObjectMember><bldg:Building gml:id="b">'
            f'<bldg:lod2MultiSurface><gml:MultiSurface><gml:surfaceMember>'
            f'{poly}</gml:surfaceMember></gml:MultiSurface>'
            f'</bldg:lod2MultiSurface></bldg:Building>'
            f'</core:cityObjectMember>')
    expect_code(_document(body), "RING_TOO_SHORT")


@pytest.mark.parametrize("ring_inner", [
    "<gml:posList>0 0 zero 1 0 0 1 1 0</gml:posList>",   # bad token
    "<gml:posList>0 0 0 1 0 0 1 1</gml:posList>",        # 8 % 3 != 0
    "",                                                   # no spelling at all
])
def test_bad_coordinate_tokens(ring_inner):
    poly = _polygon_xml([], ring_inner=ring_inner)
    body = (f'  <core:cityObjectMember><bldg:Building gml:id="b">'
            f'<bldg:lod2MultiSurface><gml:MultiSurface><gml:surfaceMember>'
            f'{poly}</gml:surfaceMember></gml:MultiSurface>'
            f'</bldg:lod2MultiSurface></bldg:Building>'
            f'</core:cityObjectMember>')
    expect_code(_document(body), "BAD_COORDINATE_TOKEN")


def test_lod4_rejected():
    text = SQUARE_VARIANTS["poslist-one-line"]().replace(
        "lod2MultiSurface", "lod4MultiSurface")
    expect_code(text, "LOD4_UNSUPPORTED")
