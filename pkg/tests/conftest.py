from pathlib import Path

import pytest

from cjtk import codec, extensions, geomops, synth

DATA = Path(__file__).parent / "data"
CORPUS_DIR = DATA / "corpus"
NOISE_EXTENSION_PATH = DATA / "extensions" / "noise.ext.json"


def committed_corpus():
    return sorted(CORPUS_DIR.glob("*.city.json"))


@pytest.fixture(scope="session")
def corpus_paths(tmp_path_factory):
    """The committed corpus plus three generator outputs."""
    out = tmp_path_factory.mktemp("synth-corpus")
    recipes = [
        ("town-pretty",
         synth.make_scene(seed=11, buildings=8, clusters=2), True, False),
        ("town-parts",
         synth.make_scene(seed=12, buildings=6, clusters=2, part_every=3),
         False, False),
        ("town-quantized",
         synth.make_scene(seed=13, buildings=5, clusters=1,
                          rich_attributes=False), False, True),
    ]
    generated = []
    for name, scene, pretty, quantized in recipes:
        model = synth.scene_to_model(scene)
        if quantized:
            model = geomops.quantize(model)
        path = out / f"{name}.city.json"
        path.write_text(codec.dumps(model, pretty=pretty), encoding="utf-8")
        generated.append(path)
    return committed_corpus() + generated


@pytest.fixture()
def noise_extension():
    return extensions.load_extension(NOISE_EXTENSION_PATH)
