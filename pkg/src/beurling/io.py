"""JSON file formats for spaces, kernels and twisted sequences.

Complex numbers are ``[re, im]`` pairs; kernel entries are listed row-major
in id order, sequence values in the lattice id order of their window.
"""

import json

import numpy as np

from .algebra import FiniteMetricSpace, Kernel
from .errors import UsageError
from .twisted import TwistedSequence


def _int(obj, key, default=None):
    val = obj.get(key, default)
    if isinstance(val, bool) or not isinstance(val, int):
        raise UsageError(f"space field {key!r} must be an integer")
    return val


def space_from_json(obj):
    if not isinstance(obj, dict):
        raise UsageError("space must be a JSON object")
    kind = obj.get("kind")
    if kind == "lattice-window":
        allowed = {"kind", "d", "radius", "lo", "hi", "norm"}
        if set(obj) - allowed:
            raise UsageError(f"unknown space keys {sorted(set(obj) - allowed)}")
        d = _int(obj, "d", 1)
        norm = obj.get("norm", "sup")
        if "radius" in obj:
            if "lo" in obj or "hi" in obj:
                raise UsageError("give either radius or lo/hi, not both")
            return FiniteMetricSpace.lattice_window(d, _int(obj, "radius"), norm)
        return FiniteMetricSpace.lattice_box(d, _int(obj, "lo"), _int(obj, "hi"), norm)
    if kind == "point-cloud":
        if "points" in obj and "distance" not in obj:
            return FiniteMetricSpace.point_cloud(obj["points"])
        if "distance" in obj and "points" not in obj:
            return FiniteMetricSpace.from_distance(obj["distance"])
        raise UsageError("point-cloud space needs exactly one of points/distance")
    raise UsageError(f"unknown space kind {kind!r}")


def _complex_list(values, what):
    try:
        return np.array([complex(float(re), float(im)) for re, im in values])
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{what} must be a list of [re, im] pairs") from exc


def kernel_to_json(K):
    return {
        "space": K.space.to_spec(),
        "entries": [[float(z.real), float(z.imag)] for z in K.entries.ravel()],
    }


def kernel_from_json(obj):
    if not isinstance(obj, dict) or set(obj) != {"space", "entries"}:
        raise UsageError('kernel file must be {"space": ..., "entries": [...]}')
    space = space_from_json(obj["space"])
    vals = _complex_list(obj["entries"], "kernel entries")
    if vals.size != space.size**2:
        raise UsageError(f"{vals.size} entries for a space of size {space.size}")
    return Kernel(space, vals.reshape(space.size, space.size))


def sequence_to_json(a):
    return {
        "d": a.d,
        "theta": a.theta,
        "radius": a.radius,
        "values": [[float(z.real), float(z.imag)] for z in a.flat()],
    }


def sequence_from_json(obj):
    if not isinstance(obj, dict) or set(obj) != {"d", "theta", "radius", "values"}:
        raise UsageError('sequence file must be {"d", "theta", "radius", "values"}')
    vals = _complex_list(obj["values"], "sequence values")
    return TwistedSequence(int(obj["d"]), float(obj["theta"]), int(obj["radius"]), vals)


def load_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def dump_json(obj, path=None):
    text = json.dumps(obj, indent=1, sort_keys=False, allow_nan=False)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return text
