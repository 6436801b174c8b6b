"""Subset, partition and merge a city without losing anything."""

from cjtk import codec, geomops, ops, synth, validation

model = synth.scene_to_model(synth.make_scene(seed=7, buildings=30,
                                              clusters=2, part_every=4))
model = geomops.quantize(model, digits=3)
print("city:", len(model.city_objects), "objects")

extent = geomops.compute_extent(model)
downtown = ops.subset(model, bbox=[extent[0], extent[1],
                                   (extent[0] + extent[3]) / 2, extent[4]])
print("subset by bbox (west half):", len(downtown.city_objects),
      "objects,", len(downtown.vertices), "vertices (pool compacted)")

parts = ops.partition_grid(model, 2, 2)
for pid, part in parts:
    print(f"  tile {pid}: {len(part.city_objects):3} objects, "
          f"{len(codec.dumps(part))} bytes")

merged = ops.merge([part for _, part in parts])
print("merged tiles:", len(merged.city_objects), "objects — findings:",
      validation.validate(merged))

same_ids = set(merged.city_objects) == set(model.city_objects)
print("same objects as the original:", same_ids)

# Merging unrelated files is where id collisions appear; the suffix
# policy renames instead of refusing.
clash = ops.merge([model, model], policy="suffix")
print("self-merge with suffix policy:", len(clash.city_objects),
      "objects, e.g.", sorted(clash.city_objects)[:4])
