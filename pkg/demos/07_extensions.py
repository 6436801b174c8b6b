"""Extensions: declare new '+' members, then validate against their schema."""

import json

from cjtk import codec, extensions, validation

NOISE = {
    "type": "CityJSON_Extension",
    "name": "Noise",
    "uri": "https://example.org/noise.ext.json",
    "version": "0.1",
    "extraAttributes": {
        "Building": {
            "+noise-buildingReflection": {"type": "string"},
            "+noise-buildingReflectionCorrection": {
                "type": "object",
                "properties": {"value": {"type": "number"},
                               "uom": {"type": "string"}},
            },
        },
    },
    "extraRootProperties": {},
    "extraCityObjects": {},
}

DOC = {
    "type": "CityJSON",
    "version": "1.0",
    "extensions": {"Noise": {"url": NOISE["uri"], "version": "0.1"}},
    "CityObjects": {
        "hall": {
            "type": "Building",
            "attributes": {
                "+noise-buildingReflection": "facade",
                "+noise-buildingReflectionCorrection":
                    {"value": 4.123, "uom": "dB"},
            },
            "geometry": [{"type": "MultiSurface", "lod": 2,
                          "boundaries": [[[0, 1, 2, 3]]]}],
        },
    },
    "vertices": [[0.0, 0.0, 0.0], [12.0, 0.0, 0.0],
                 [12.0, 7.0, 0.0], [0.0, 7.0, 0.0]],
}

noise = extensions.load_extension(NOISE)
print("loaded extension:", noise.name, noise.version)

model, _ = codec.parse(json.dumps(DOC))
print("clean file:", validation.validate(model, [noise]))

DOC["CityObjects"]["hall"]["attributes"]["+noise-buildingReflection"] = 12
broken, _ = codec.parse(json.dumps(DOC))
for finding in validation.validate(broken, [noise]):
    print("mutant:", finding.code, "at", finding.path, "—", finding.message)

plain = extensions.strip_extensions(broken)
print("after strip_extensions:",
      validation.validate(plain, []),
      "| attributes left:",
      list(plain.city_objects["hall"].attributes))
