"""Chainable command-line frontend.

One invocation reads one input and pushes it through a pipeline of stages,
left to right, entirely in memory::

    cjtk in.json compress --digits 3 subset --type Building save out.json
    cjtk in.gml import save out.json
    cat in.json | cjtk - validate

"-" reads standard input; ``save -`` writes minified JSON to standard
output.  Exit codes: 0 success (and valid), 1 validation warnings only,
2 errors (validation errors or a failed stage), 3 usage errors.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import codec, geomops, gml, ops
from .errors import ERROR, CjtkError, WARNING
from .extensions import discover, load_extension
from .validation import validate, validate_text


class _State:
    """What flows between stages: raw text until something needs a model."""

    def __init__(self, source: str, text: str, extensions):
        self.source = source
        self.text: str | None = text
        self.model = None
        self.exit = 0
        self.saved = False
        self.finished = False
        self.extensions = extensions

    def require_model(self, stage: str):
        if self.finished:
            raise click.UsageError(
                f"{stage}: the pipeline already ended with partition")
        if self.model is None:
            self.model, _ = codec.parse(self.text)
            self.text = None
        return self.model


def _read_input(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    path = Path(source)
    if not path.exists():
        raise click.UsageError(f"input file not found: {source}")
    return path.read_text(encoding="utf-8")


@click.group(chain=True)
@click.argument("input", metavar="INPUT")
@click.option("--extension", "extensions", multiple=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Extension file to validate against (repeatable); the "
                   "CJTK_EXTENSIONS variable adds a default search path.")
def cli(input, extensions):
    """Process the CityJSON (or CityGML) file INPUT through a pipeline."""


@cli.result_callback()
def run_pipeline(processors, input, extensions):
    exts = list(discover())
    for path in extensions:
        exts.append(load_extension(path))
    state = _State(input, _read_input(input), exts)
    for name, processor in processors:
        try:
            processor(state)
        except CjtkError as exc:
            raise click.ClickException(f"{name}: [{exc.code}] {exc.message}"
                                       + (f" at {exc.path}" if exc.path
                                          else ""))
        if state.exit >= 2:
            break
    sys.exit(state.exit)


# -- validation ---------------------------------------------------------------


@cli.command("validate")
@click.option("--json", "as_json", is_flag=True,
              help="Report findings as JSON lines instead of text.")
def validate_cmd(as_json):
    """Check the model; exit 0 valid, 1 warnings only, 2 errors."""
    def stage(state: _State):
        if state.model is None and not state.finished:
            findings = validate_text(state.text, state.extensions)
        else:
            findings = validate(state.require_model("validate"),
                                state.extensions)
        for f in findings:
            line = json.dumps(f.to_json()) if as_json else \
                f"{f.severity}: [{f.code}] {f.path or '<root>'}" \
                + (f" — {f.message}" if f.message else "")
            click.echo(line)
        if any(f.severity == ERROR for f in findings):
            state.exit = 2
        elif any(f.severity == WARNING for f in findings):
            state.exit = max(state.exit, 1)
    return "validate", stage


# -- coordinate stages --------------------------------------------------------


@cli.command("compress")
@click.option("--digits", default=3, show_default=True,
              type=click.IntRange(0, 12),
              help="Decimal digits kept (quantum = 10^-digits).")
def compress_cmd(digits):
    """Quantize vertices onto an integer grid with a transform."""
    def stage(state: _State):
        state.model = geomops.quantize(state.require_model("compress"),
                                       digits=digits, requantize=True)
    return "compress", stage


@cli.command("decompress")
def decompress_cmd():
    """Expand quantized vertices back to real-world floats."""
    def stage(state: _State):
        state.model = geomops.dequantize(state.require_model("decompress"))
    return "decompress", stage


@cli.command("dedupe")
@click.option("--tolerance", default=0.0, show_default=True, type=float,
              help="Merge vertices within this per-axis distance "
                   "(stored units).")
def dedupe_cmd(tolerance):
    """Merge duplicate (or near-duplicate) vertices."""
    def stage(state: _State):
        state.model = geomops.dedupe_vertices(state.require_model("dedupe"),
                                              tolerance=tolerance)
    return "dedupe", stage


@cli.command("clean")
def clean_cmd():
    """Drop vertices no geometry references."""
    def stage(state: _State):
        state.model = geomops.remove_orphan_vertices(
            state.require_model("clean"))
    return "clean", stage


# -- object stages ------------------------------------------------------------


@cli.command("subset")
@click.option("--id", "ids", multiple=True,
              help="Keep this object (repeatable).")
@click.option("--type", "types", multiple=True,
              help="Keep objects of this type (repeatable).")
@click.option("--bbox", nargs=4, type=float, default=None,
              help="Keep objects whose extent centroid falls in "
                   "MINX MINY MAXX MAXY.")
def subset_cmd(ids, types, bbox):
    """Keep a selection of objects (plus their children)."""
    if not ids and not types and bbox is None:
        raise click.UsageError("subset needs --id, --type, or --bbox")

    def stage(state: _State):
        state.model = ops.subset(state.require_model("subset"),
                                 ids=list(ids) or None,
                                 types=list(types) or None,
                                 bbox=list(bbox) if bbox else None)
    return "subset", stage


@cli.command("merge")
@click.argument("other", type=click.Path(exists=True, dir_okay=False))
@click.option("--policy", default="error", show_default=True,
              type=click.Choice(["error", "suffix"]),
              help="What to do when two inputs share an object id.")
def merge_cmd(other, policy):
    """Merge the pipeline model with OTHER (another CityJSON file).

    Chain several merge stages to combine more than two files.
    """
    def stage(state: _State):
        m, _ = codec.parse(Path(other).read_text(encoding="utf-8"))
        state.model = ops.merge([state.require_model("merge"), m],
                                policy=policy)
    return "merge", stage


@cli.command("partition")
@click.option("--grid", default=None, metavar="NXxNY",
              help="Grid split, e.g. 4x3.")
@click.option("--by-type", "by_type", is_flag=True,
              help="One part per first-level object type.")
@click.option("--random", "random_k", default=None, type=int, metavar="K",
              help="K parts by seeded random draw.")
@click.option("--seed", default=0, show_default=True, type=int,
              help="Seed for --random.")
@click.option("--out-dir", default=".", show_default=True,
              type=click.Path(file_okay=False),
              help="Directory receiving <stem>_<part-id>.json files.")
def partition_cmd(grid, by_type, random_k, seed, out_dir):
    """Split the model into part files; ends the pipeline."""
    chosen = sum(x is not None and x is not False
                 for x in (grid, by_type or None, random_k))
    if chosen != 1:
        raise click.UsageError(
            "partition needs exactly one of --grid, --by-type, --random")
    if grid is not None:
        try:
            nx, ny = (int(p) for p in grid.lower().split("x"))
        except ValueError:
            raise click.UsageError(f"--grid wants NXxNY, got {grid!r}")
        if nx < 1 or ny < 1:
            raise click.UsageError("--grid cells must be positive")

    def stage(state: _State):
        model = state.require_model("partition")
        if grid is not None:
            parts = ops.partition_grid(model, nx, ny)
        elif by_type:
            parts = ops.partition_by_type(model)
        else:
            parts = ops.partition_random(model, random_k, seed=seed)
        stem = Path(state.source).stem if state.source != "-" else "stdin"
        directory = Path(out_dir)
        directory.mkdir(parents=True, exist_ok=True)
        for pid, part in parts:
            target = directory / f"{stem}_{pid}.json"
            target.write_text(codec.dumps(part), encoding="utf-8")
            click.echo(str(target))
        state.finished = True
        state.saved = True
    return "partition", stage


# -- bookkeeping stages -------------------------------------------------------


@cli.command("textures-path")
@click.option("--base", required=True,
              help="New base for every texture image path.")
def textures_path_cmd(base):
    """Rebase texture image paths onto --base."""
    def stage(state: _State):
        state.model = ops.update_texture_paths(
            state.require_model("textures-path"), base)
    return "textures-path", stage


@cli.command("metadata")
def metadata_cmd():
    """Recompute derived metadata (extent, LoDs, appearance flags)."""
    def stage(state: _State):
        state.model = ops.refresh_metadata(state.require_model("metadata"))
    return "metadata", stage


@cli.command("info")
def info_cmd():
    """Print summary statistics as JSON."""
    def stage(state: _State):
        click.echo(json.dumps(ops.stats(state.require_model("info")),
                              indent=2))
    return "info", stage


@cli.command("import")
def import_cmd():
    """Read the input as CityGML 2.0 (must be the first stage)."""
    def stage(state: _State):
        if state.model is not None or state.text is None:
            raise click.UsageError("import must be the first stage")
        model, report = gml.import_citygml(state.text)
        state.model = model
        state.text = None
        for line in report.to_json_lines():
            click.echo(json.dumps(line), err=True)
    return "import", stage


@cli.command("save")
@click.argument("output", metavar="OUTPUT")
@click.option("--pretty", is_flag=True, help="Indent the JSON output.")
def save_cmd(output, pretty):
    """Write the model to OUTPUT ("-" = standard output, minified)."""
    def stage(state: _State):
        model = state.require_model("save")
        if output == "-":
            if pretty:
                raise click.UsageError(
                    "save -: standard output is minified only")
            sys.stdout.write(codec.dumps(model))
            sys.stdout.write("\n")
        else:
            Path(output).write_text(codec.dumps(model, pretty=pretty),
                                    encoding="utf-8")
        state.saved = True
    return "save", stage


def main():
    try:
        cli(standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        sys.exit(3)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except click.exceptions.Abort:
        sys.exit(130)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)


if __name__ == "__main__":
    main()
