"""JSON/CSV formats for triples, realizations, potentials, grids and reports.

Complex scalars are ``[re, im]`` (plain numbers are accepted on input) and
matrices are lists of rows.  Every file written here carries
``schema_version``, the command line that produced it and the tolerances in
force, so outputs are self-describing.  Floats go through ``repr`` so equal
inputs give byte-identical files.
"""
import csv
import json
import math
import sys

import numpy as np

from . import linalg as la
from .errors import SchemaError
from .gbdt import Potential, Signature, check_potential_matrix, new_admissible_triple
from .inverse import make_realization

SCHEMA_VERSION = 1


def _require(obj, keys, what):
    if not isinstance(obj, dict):
        raise SchemaError(f"{what}: expected a JSON object")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise SchemaError(f"{what}: missing keys {missing}")


def _dim(obj, key, what, lo=0):
    v = obj[key]
    if not isinstance(v, int) or isinstance(v, bool) or v < lo:
        raise SchemaError(f"{what}: '{key}' must be an integer >= {lo}")
    return v


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read ({exc.strerror})") from None


def triple_from_json(obj, tol=1e-9):
    what = "triple"
    _require(obj, ("n", "m1", "m2", "A", "S0", "theta1", "theta2"), what)
    n, m1, m2 = _dim(obj, "n", what), _dim(obj, "m1", what, 1), _dim(obj, "m2", what, 1)
    return new_admissible_triple(
        la.decode_matrix(obj["A"], (n, n), "A"), la.decode_matrix(obj["S0"], (n, n), "S0"),
        la.decode_matrix(obj["theta1"], (n, m1), "theta1"),
        la.decode_matrix(obj["theta2"], (n, m2), "theta2"), Signature(m1, m2), tol)


def triple_to_json(t):
    return {"n": t.n, "m1": t.sig.m1, "m2": t.sig.m2, "A": la.encode_matrix(t.A),
            "S0": la.encode_matrix(t.S0), "theta1": la.encode_matrix(t.theta1),
            "theta2": la.encode_matrix(t.theta2)}


def realization_from_json(obj):
    what = "realization"
    _require(obj, ("n", "m1", "m2", "A_cal", "B", "C_cal"), what)
    n, m1, m2 = _dim(obj, "n", what), _dim(obj, "m1", what, 1), _dim(obj, "m2", what, 1)
    return make_realization(la.decode_matrix(obj["A_cal"], (n, n), "A_cal"),
                            la.decode_matrix(obj["B"], (n, m2), "B"),
                            la.decode_matrix(obj["C_cal"], (m1, n), "C_cal"), Signature(m1, m2))


def realization_to_json(r):
    return {"n": r.n, "m1": r.sig.m1, "m2": r.sig.m2, "A_cal": la.encode_matrix(r.Acal),
            "B": la.encode_matrix(r.B), "C_cal": la.encode_matrix(r.Ccal)}


def potential_from_json(obj, tol=1e-9, check=True):
    what = "potential"
    _require(obj, ("m1", "m2", "C"), what)
    sig = Signature(_dim(obj, "m1", what, 1), _dim(obj, "m2", what, 1))
    if not isinstance(obj["C"], list) or not obj["C"]:
        raise SchemaError("potential: 'C' must be a nonempty list of matrices")
    Cs = []
    for k, c in enumerate(obj["C"]):
        C = la.frozen(la.decode_matrix(c, (sig.m, sig.m), f"C[{k}]"))
        if check:
            check_potential_matrix(C, sig, tol, k)
        Cs.append(C)
    return Potential(sig, tuple(Cs))


def potential_to_json(pot):
    return {"m1": pot.sig.m1, "m2": pot.sig.m2, "C": [la.encode_matrix(C) for C in pot.C]}


def grid_from_json(obj):
    _require(obj, ("z",), "grid")
    if not isinstance(obj["z"], list) or not obj["z"]:
        raise SchemaError("grid: 'z' must be a nonempty list")
    return np.array([la.decode_complex(z, "z") for z in obj["z"]], dtype=np.complex128)


def grid_to_json(zs):
    return {"z": [la.encode_complex(z) for z in zs]}


def _clean(obj):
    """Replace non-finite floats by strings so the output is strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def envelope(kind, payload, command=None, tolerances=None):
    out = {"schema_version": SCHEMA_VERSION, "kind": kind,
           "command": list(command or []), "tolerances": dict(tolerances or {})}
    out.update(payload)
    return out


def dumps(obj):
    return json.dumps(_clean(obj), indent=1, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj):
    """Write ``obj`` to ``path`` (stdout when ``path`` is ``None``)."""
    if path is None:
        sys.stdout.write(dumps(obj))
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, columns, rows, comments=()):
    """CSV with a header row; ``comments`` become leading ``# `` lines."""
    if path is None:
        _write_csv(sys.stdout, columns, rows, comments)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        _write_csv(fh, columns, rows, comments)


def _write_csv(fh, columns, rows, comments):
    for line in comments:
        fh.write(f"# {line}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
