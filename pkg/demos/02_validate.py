"""Two-layer validation: structural checks, then referential consistency."""

import copy
import json

from cjtk import validation

# Two seeded consistency defects: a child link the parent does not
# reciprocate, and a vertex nobody references.
DOC = {
    "type": "CityJSON",
    "version": "1.0",
    "CityObjects": {
        "hq": {
            "type": "Building",
            "children": [],
            "geometry": [{"type": "MultiSurface", "lod": 2,
                          "boundaries": [[[0, 1, 2, 3]]]}],
        },
        "annex": {
            "type": "BuildingPart",
            "parents": ["hq"],
            "geometry": [{"type": "MultiSurface", "lod": 2,
                          "boundaries": [[[0, 3, 2, 1]]]}],
        },
    },
    "vertices": [[0.0, 0.0, 0.0], [5.0, 0.0, 0.0], [5.0, 5.0, 0.0],
                 [0.0, 5.0, 0.0], [99.0, 99.0, 99.0]],
}


def report(text):
    for finding in validation.validate_text(text):
        print(f"{finding.stage:12} {finding.severity:8} "
              f"{finding.code:24} {finding.path}")
        print(f"{'':21} {finding.message}")


report(json.dumps(DOC))

print("\nA structural error suppresses the consistency stage — its checks")
print("would only chase the same broken data:")
broken = copy.deepcopy(DOC)
broken["CityObjects"]["hq"]["type"] = "Skyscraper"
report(json.dumps(broken))

print("\nBroken syntax is caught before anything else runs:")
report('{"type": "CityJSON",')
