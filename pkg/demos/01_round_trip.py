"""Parse a CityJSON document, poke at the model, write it back out."""

from cjtk import codec

DOC = """{
  "type": "CityJSON",
  "version": "1.0",
  "CityObjects": {
    "villa": {
      "type": "Building",
      "attributes": {"roofType": "gable", "yearOfConstruction": 1931},
      "geometry": [{
        "type": "MultiSurface", "lod": 2,
        "boundaries": [[[0, 1, 2, 3]]]
      }]
    }
  },
  "vertices": [[0.0, 0.0, 0.0], [9.0, 0.0, 0.0],
               [9.0, 6.0, 0.0], [0.0, 6.0, 0.0]]
}"""

model, diagnostics = codec.parse(DOC)
print("objects:", list(model.city_objects))
villa = model.city_objects["villa"]
print("type:", villa.type)
print("attributes:", villa.attributes)
geometry = villa.geometry[0]
print("geometry:", geometry.type, "lod", geometry.lod)
print("first ring, as coordinates:")
for index in geometry.boundaries[0][0]:
    print("  ", model.real_vertex(index))

minified = codec.dumps(model)
print("\nminified bytes:", len(minified))
print("pretty:")
print(codec.dumps(model, pretty=True))

again, _ = codec.parse(minified)
print("round-trip identical:", codec.dumps(again) == minified)
