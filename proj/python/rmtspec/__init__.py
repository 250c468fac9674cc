"""Random-matrix spectral analysis of neural-network weight matrices."""

import json
import os

import numpy as np

from ._rmtspec import (
    RmtspecError,
    __version__,
    eigenvalues,
    fit_mp,
    fit_power_law,
    load_npy,
    synth,
)
from . import _rmtspec

__all__ = [
    "RmtspecError",
    "__version__",
    "analyze",
    "analyze_path",
    "eigenvalues",
    "fit_mp",
    "fit_power_law",
    "load_npy",
    "synth",
    "validate",
    "write_layers",
]


def analyze(matrix, name="layer"):
    """Phase report for one matrix, as a dict."""
    result = json.loads(_rmtspec.analyze_json(np.asarray(matrix, dtype=np.float64), name))
    if result["errors"]:
        raise RmtspecError(result["errors"][0]["error"])
    return result["layers"][0]


def analyze_path(path, deterministic=True, jobs=1):
    """Analysis of an .npy file or manifest.json, as a dict."""
    return json.loads(_rmtspec.analyze_path_json(path, deterministic, jobs))


def validate(suite, seed=1):
    return json.loads(_rmtspec.validate_json(suite, seed))


def write_layers(directory, layers, layer_kind="dense"):
    """Write named 2-D arrays as float32 NPY files plus manifest.json.

    This is the on-disk contract produced by checkpoint exporters.
    Arrays that are not 2-D are skipped. Returns the manifest path.
    """
    os.makedirs(directory, exist_ok=True)
    entries = []
    for name, array in layers.items():
        array = np.ascontiguousarray(array, dtype=np.float32)
        if array.ndim != 2:
            continue
        file_name = "".join(c if c.isalnum() or c in "-_." else "_" for c in name) + ".npy"
        np.save(os.path.join(directory, file_name), array)
        entries.append({"name": name, "file": file_name, "shape": list(array.shape), "layer_kind": layer_kind})
    path = os.path.join(directory, "manifest.json")
    with open(path, "w") as fh:
        json.dump({"version": "1", "layers": entries}, fh, indent=2)
    return path
