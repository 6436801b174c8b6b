"""Geometry templates: one shape, many placements, tiny files."""

import json

from cjtk import codec, geomops

# A 1x1x1 kiosk template, instanced three times at different corners of
# the block; the last one is doubled by its transformation matrix.
DOC = {
    "type": "CityJSON",
    "version": "1.0",
    "CityObjects": {},
    "vertices": [[0.0, 0.0, 0.0], [40.0, 0.0, 0.0], [40.0, 25.0, 0.0]],
    "geometry-templates": {
        "templates": [{
            "type": "MultiSurface", "lod": 1,
            "boundaries": [[[0, 1, 2, 3]], [[4, 5, 6, 7]]],
        }],
        "vertices-templates": [
            [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 1.0],
            [1.0, 1.0, 1.0], [0.0, 1.0, 1.0],
        ],
    },
}

IDENTITY = [1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]
DOUBLE = [2.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0,
          0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 1.0]

for i, matrix in enumerate([IDENTITY, IDENTITY, DOUBLE]):
    DOC["CityObjects"][f"kiosk-{i}"] = {
        "type": "CityFurniture",
        "geometry": [{"type": "GeometryInstance", "template": 0,
                      "boundaries": [i], "transformationMatrix": matrix}],
    }

model, _ = codec.parse(json.dumps(DOC))
print("document bytes:", len(codec.dumps(model)))
print("extent over all instances:", geomops.compute_extent(model))

geometry, vertices = geomops.instantiate_template(model, "kiosk-2", 0)
print("\nkiosk-2 expanded to an explicit", geometry.type,
      "with", len(vertices), "vertices:")
for row in vertices:
    print("  ", row)
