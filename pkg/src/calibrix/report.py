"""Report envelope, JSON/CSV serialization and schema validation."""

from __future__ import annotations

import csv
import io
import json
import math
from importlib import resources

import numpy as np

from . import __version__
from .verifier import CONDITIONS

SCHEMA_NAME = "report.schema.json"


def plain(obj):
    """Convert numpy scalars/arrays to JSON types; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value  # enums
    return obj


def build_envelope(command, config, report, parameters=None, hessian=None):
    env = {
        "tool": "calibrix",
        "version": __version__,
        "command": command,
        "config": plain(config),
        "parameters": plain(parameters if parameters is not None else report.params),
        "seed": int(report.seed),
        "conditions": {c: plain(report.results[c].as_dict()) for c in CONDITIONS},
        "verdict": report.verdict,
        "timing": plain(report.timing),
    }
    if hessian is not None:
        env["hessian"] = plain(hessian)
    return env


def dumps(env):
    """Stable JSON text.  ``json`` writes floats with ``repr``, which round-trips exactly."""
    return json.dumps(env, indent=2, sort_keys=True, allow_nan=False) + "\n"


def strip_timing(env):
    return {k: v for k, v in env.items() if k != "timing"}


def load_schema():
    return json.loads(resources.files("calibrix").joinpath("schema", SCHEMA_NAME).read_text())


def validate(env):
    import jsonschema

    jsonschema.validate(env, load_schema())


def conditions_csv(env):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["condition", "passed", "residual", "tolerance", "samples", "worst_point"])
    for name in CONDITIONS:
        c = env["conditions"][name]
        w.writerow([name, c["passed"], repr(c["residual"]), repr(c["tolerance"]), c["samples"], " ".join(repr(v) for v in c["worst_point"])])
    w.writerow(["verdict", env["verdict"], "", "", "", ""])
    return buf.getvalue()


def table_csv(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()
