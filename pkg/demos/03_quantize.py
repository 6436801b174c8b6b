"""Vertex quantization: integer vertices plus a transform, smaller files."""

from cjtk import codec, geomops, synth

scene = synth.make_scene(seed=42, buildings=120, clusters=3)
model = synth.scene_to_model(scene)
print("synthetic city:", len(model.city_objects), "objects,",
      len(model.vertices), "vertices")

original = codec.dumps(model)
print("minified, full floats:   ", len(original), "bytes")

quantized = geomops.quantize(model, digits=3)
encoded = codec.dumps(quantized)
print("minified, 3-digit quanta:", len(encoded), "bytes",
      f"({(1 - len(encoded) / len(original)):.1%} smaller)")
print("transform: scale", quantized.transform.scale,
      "translate", [round(t, 3) for t in quantized.transform.translate])
print("first vertex, stored:", quantized.vertices[0],
      "real:", [round(c, 3) for c in quantized.real_vertex(0)])

decoded = geomops.dequantize(quantized)
worst = max(abs(a - b)
            for va, vb in zip(model.vertices, decoded.vertices)
            for a, b in zip(va, vb))
print(f"worst round-trip error: {worst:.2e} (bound is 5.00e-04)")
