"""Toolkit for the CityJSON 1.0 encoding of the CityGML 2.0 data model.

Read and write models (:mod:`cjtk.codec`), validate them in layers
(:mod:`cjtk.validation`), quantize and manipulate coordinates
(:mod:`cjtk.geomops`), subset/merge/partition datasets (:mod:`cjtk.ops`),
handle Extension files (:mod:`cjtk.extensions`), import scoped CityGML 2.0
(:mod:`cjtk.gml`), and generate synthetic scenes (:mod:`cjtk.synth`).
The ``cjtk`` command chains all of it on the command line.
"""

from .codec import dump, dumps, load, loads, parse
from .errors import (ERROR, WARNING, CjtkError, CodecError, ExtensionError,
                     Finding, GmlImportError)
from .extensions import (Extension, load_extension, strip_extensions,
                         validate_extended)
from .geomops import (compute_extent, dedupe_vertices, dequantize,
                      instantiate_template, quantize, remove_orphan_vertices)
from .gml import ImportReport, import_citygml
from .model import (CityModel, CityObject, Geometry, Semantics, Transform,
                    boundary_depth)
from .ops import (merge, partition_by_type, partition_grid, partition_random,
                  refresh_metadata, stats, subset, update_texture_paths)
from .validation import (is_valid, validate, validate_consistency,
                         validate_structure, validate_text)

__version__ = "0.1.0"

__all__ = [
    "CityModel", "CityObject", "Geometry", "Semantics", "Transform",
    "boundary_depth",
    "parse", "loads", "load", "dumps", "dump",
    "validate", "validate_text", "validate_structure", "validate_consistency",
    "is_valid",
    "quantize", "dequantize", "dedupe_vertices", "remove_orphan_vertices",
    "instantiate_template", "compute_extent",
    "subset", "merge", "partition_grid", "partition_by_type",
    "partition_random", "update_texture_paths", "refresh_metadata", "stats",
    "Extension", "load_extension", "validate_extended", "strip_extensions",
    "import_citygml", "ImportReport",
    "CjtkError", "CodecError", "ExtensionError", "GmlImportError",
    "Finding", "ERROR", "WARNING",
    "__version__",
]
