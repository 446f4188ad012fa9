"""Experiment configuration: strict JSON parsing with exhaustive error reports."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields

from .errors import ConfigError, UsageError
from .weights import weight_from_spec

EXPERIMENTS = ("barnes", "inverse-closed", "aux-weights", "wiener-twisted", "weights-audit", "eps-limit")
GENERATORS = ("toeplitz", "diag", "dense", "random-decaying")
FORMATS = ("csv", "json")

COMMON_KEYS = {"experiment", "p_list", "weights", "seed", "output", "format"}
EXPERIMENT_KEYS = {
    "barnes": {"matrix", "j_max", "delta", "b"},
    "inverse-closed": {"matrix", "floor"},
    "aux-weights": {"matrix", "levels"},
    "wiener-twisted": {"sequence", "op_radii", "neumann_terms", "tol"},
    "weights-audit": {"delta"},
    "eps-limit": {"matrix", "eps_exponents", "delta"},
}
MATRIX_KEYS = {
    "toeplitz": {"generator", "coeffs", "sizes", "d", "norm"},
    "diag": {"generator", "values"},
    "dense": {"generator", "entries"},
    "random-decaying": {
        "generator", "sizes", "d", "norm", "cloud_points", "cloud_dim",
        "envelope", "hermitian", "bandwidth", "count",
    },
}


@dataclass(frozen=True)
class MatrixSpec:
    """Generator name plus parameters; complex numbers are stored as (re, im)."""

    generator: str
    coeffs: tuple = ()
    sizes: tuple = ()
    d: int = 1
    norm: str = "sup"
    values: tuple = ()
    entries: tuple = ()
    cloud_points: int | None = None
    cloud_dim: int = 2
    envelope: tuple = ("exponential", 0.5)
    hermitian: bool = False
    bandwidth: float | None = None
    count: int = 1

    def to_json(self):
        g = self.generator
        out = {"generator": g}
        if g == "toeplitz":
            out["coeffs"] = {key: list(val) for key, val in self.coeffs}
            out.update(sizes=list(self.sizes), d=self.d, norm=self.norm)
        elif g == "diag":
            out["values"] = [list(v) for v in self.values]
        elif g == "dense":
            out["entries"] = [[list(v) for v in row] for row in self.entries]
        else:
            if self.cloud_points is not None:
                out.update(cloud_points=self.cloud_points, cloud_dim=self.cloud_dim)
            else:
                out.update(sizes=list(self.sizes), d=self.d, norm=self.norm)
            kind, param = self.envelope
            out["envelope"] = {"kind": kind, ("r" if kind == "exponential" else "s"): param}
            out.update(hermitian=self.hermitian, bandwidth=self.bandwidth, count=self.count)
        return out


@dataclass(frozen=True)
class SequenceSpec:
    d: int
    theta: float
    terms: tuple  # ((index tuple, (re, im)), ...)

    def to_json(self):
        return {
            "d": self.d,
            "theta": self.theta,
            "terms": [{"index": list(idx), "value": list(val)} for idx, val in self.terms],
        }


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    p_list: tuple = (1.0,)
    weights: tuple = ({"family": "zero"},)
    seed: int = 0
    output: str = "results"
    format: str = "csv"
    matrix: MatrixSpec | None = None
    j_max: int = 8
    delta: float = 0.5
    b: float | None = None
    floor: float = 1e-14
    levels: tuple = tuple(range(1, 21))
    eps_exponents: tuple = tuple(range(0, 21))
    sequence: SequenceSpec | None = None
    op_radii: tuple = (24, 32)
    neumann_terms: int = 40
    tol: float = 1e-8

    def to_json(self):
        allowed = COMMON_KEYS | EXPERIMENT_KEYS[self.experiment]
        out = {}
        for f in fields(self):
            if f.name not in allowed:
                continue
            val = getattr(self, f.name)
            if f.name in ("matrix", "sequence"):
                if val is None:
                    continue
                val = val.to_json()
            elif isinstance(val, tuple):
                val = [dict(v) if isinstance(v, dict) else v for v in val]
            out[f.name] = val
        return out

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def digest(self):
        """SHA-256 of the fields that determine the results (not output location or format)."""
        obj = {k: v for k, v in self.to_json().items() if k not in ("output", "format")}
        text = json.dumps(obj, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _freeze_weight(spec):
    def freeze(v):
        if isinstance(v, dict):
            return {k: freeze(v[k]) for k in sorted(v)}
        return v
    return freeze(spec)


class _Collector:
    def __init__(self):
        self.problems = []

    def add(self, msg):
        self.problems.append(msg)


def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _complex_pair(v):
    if _is_num(v):
        return (float(v), 0.0)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(_is_num(c) for c in v):
        return (float(v[0]), float(v[1]))
    raise ValueError


def _int_list(val, name, err, minimum=None):
    if not isinstance(val, list) or not val or not all(_is_int(v) for v in val):
        err.add(f"{name}: expected a nonempty list of integers")
        return None
    if minimum is not None and any(v < minimum for v in val):
        err.add(f"{name}: entries must be >= {minimum}")
        return None
    return tuple(val)


def _parse_matrix(obj, err):
    if not isinstance(obj, dict):
        err.add("matrix: expected an object")
        return None
    gen = obj.get("generator")
    if gen not in GENERATORS:
        err.add(f"matrix.generator: {gen!r} is not one of {list(GENERATORS)}")
        return None
    unknown = set(obj) - MATRIX_KEYS[gen]
    if unknown:
        err.add(f"matrix: unknown keys {sorted(unknown)} for generator {gen!r}")
    kw = {"generator": gen}
    if gen in ("toeplitz", "random-decaying"):
        d = obj.get("d", 1)
        if not _is_int(d) or d < 1:
            err.add("matrix.d: expected a positive integer")
        else:
            kw["d"] = d
        norm = obj.get("norm", "sup")
        if norm not in ("sup", "sum", "euclid"):
            err.add(f"matrix.norm: {norm!r} is not one of ['sup', 'sum', 'euclid']")
        else:
            kw["norm"] = norm
    if gen == "toeplitz":
        coeffs = obj.get("coeffs")
        if not isinstance(coeffs, dict) or not coeffs:
            err.add("matrix.coeffs: expected a nonempty object mapping offsets to values")
        else:
            items = {}
            for key, val in coeffs.items():
                try:
                    offset = tuple(int(c) for c in str(key).split(","))
                    canon = ",".join(str(c) for c in offset)
                    if canon in items:
                        raise ValueError
                    items[canon] = (offset, _complex_pair(val))
                except ValueError:
                    err.add(f"matrix.coeffs[{key!r}]: offsets are distinct comma-separated integers, values numbers or [re, im]")
            # canonical order so that parse(serialize(cfg)) == cfg
            kw["coeffs"] = tuple((k, v) for k, (_, v) in sorted(items.items(), key=lambda kv: kv[1][0]))
        sizes = _int_list(obj.get("sizes"), "matrix.sizes", err, minimum=1)
        if sizes:
            kw["sizes"] = sizes
    elif gen == "diag":
        vals = obj.get("values")
        try:
            if not isinstance(vals, list) or not vals:
                raise ValueError
            kw["values"] = tuple(_complex_pair(v) for v in vals)
        except ValueError:
            err.add("matrix.values: expected a nonempty list of numbers or [re, im]")
    elif gen == "dense":
        rows = obj.get("entries")
        try:
            if not isinstance(rows, list) or not rows or any(not isinstance(r, list) or len(r) != len(rows) for r in rows):
                raise ValueError
            kw["entries"] = tuple(tuple(_complex_pair(v) for v in r) for r in rows)
        except ValueError:
            err.add("matrix.entries: expected a square list of rows of numbers or [re, im]")
    else:
        if "cloud_points" in obj:
            if "sizes" in obj:
                err.add("matrix: give either sizes or cloud_points, not both")
            cp = obj["cloud_points"]
            if not _is_int(cp) or cp < 1:
                err.add("matrix.cloud_points: expected a positive integer")
            else:
                kw["cloud_points"] = cp
            cd = obj.get("cloud_dim", 2)
            if not _is_int(cd) or cd < 1:
                err.add("matrix.cloud_dim: expected a positive integer")
            else:
                kw["cloud_dim"] = cd
        else:
            sizes = _int_list(obj.get("sizes"), "matrix.sizes", err, minimum=1)
            if sizes:
                kw["sizes"] = sizes
        env = obj.get("envelope", {"kind": "exponential", "r": 0.5})
        if not isinstance(env, dict) or env.get("kind") not in ("exponential", "polynomial"):
            err.add("matrix.envelope: expected {kind: exponential, r} or {kind: polynomial, s}")
        else:
            pname = "r" if env["kind"] == "exponential" else "s"
            pval = env.get(pname)
            if set(env) != {"kind", pname} or not _is_num(pval):
                err.add(f"matrix.envelope: {env['kind']} envelope takes exactly the parameter {pname!r}")
            elif env["kind"] == "exponential" and not 0 < pval < 1:
                err.add("matrix.envelope.r: must lie in (0, 1)")
            elif env["kind"] == "polynomial" and not pval > 0:
                err.add("matrix.envelope.s: must be positive")
            else:
                kw["envelope"] = (env["kind"], float(pval))
        herm = obj.get("hermitian", False)
        if not isinstance(herm, bool):
            err.add("matrix.hermitian: expected true or false")
        else:
            kw["hermitian"] = herm
        bw = obj.get("bandwidth")
        if bw is not None and (not _is_num(bw) or bw < 0):
            err.add("matrix.bandwidth: expected a nonnegative number or null")
        else:
            kw["bandwidth"] = None if bw is None else float(bw)
        count = obj.get("count", 1)
        if not _is_int(count) or count < 1:
            err.add("matrix.count: expected a positive integer")
        else:
            kw["count"] = count
    return MatrixSpec(**kw)


def _parse_sequence(obj, err):
    if not isinstance(obj, dict) or set(obj) - {"d", "theta", "terms"}:
        err.add("sequence: expected an object with keys d, theta, terms")
        return None
    d, theta, terms = obj.get("d"), obj.get("theta"), obj.get("terms")
    ok = True
    if not _is_int(d) or d < 1:
        err.add("sequence.d: expected a positive integer")
        ok = False
    if not _is_num(theta) or theta < 0:
        err.add("sequence.theta: expected a nonnegative number")
        ok = False
    parsed = []
    if not isinstance(terms, list) or not terms:
        err.add("sequence.terms: expected a nonempty list of {index, value}")
        ok = False
    else:
        for i, t in enumerate(terms):
            try:
                if not isinstance(t, dict) or set(t) != {"index", "value"}:
                    raise ValueError
                idx = t["index"]
                if not isinstance(idx, list) or not all(_is_int(c) for c in idx):
                    raise ValueError
                if ok and len(idx) != 2 * d:
                    err.add(f"sequence.terms[{i}].index: expected {2 * d} integers")
                    continue
                parsed.append((tuple(idx), _complex_pair(t["value"])))
            except ValueError:
                err.add(f"sequence.terms[{i}]: expected {{index: [ints], value: number or [re, im]}}")
    if not ok:
        return None
    return SequenceSpec(d, float(theta), tuple(parsed))


def parse_config(text):
    """Validate an experiment config; raises ConfigError listing every problem."""
    try:
        obj = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError([f"config is not valid JSON: {exc}"]) from exc
    return config_from_obj(obj)


def config_from_obj(obj):
    err = _Collector()
    if not isinstance(obj, dict):
        raise ConfigError(["config must be a JSON object"])
    exp = obj.get("experiment")
    if exp not in EXPERIMENTS:
        err.add(f"experiment: {exp!r} is not one of {list(EXPERIMENTS)}")
        unknown = set(obj) - COMMON_KEYS - set().union(*EXPERIMENT_KEYS.values())
        if unknown:
            err.add(f"unknown keys {sorted(unknown)}")
        raise ConfigError(err.problems)
    allowed = COMMON_KEYS | EXPERIMENT_KEYS[exp]
    unknown = set(obj) - allowed
    if unknown:
        err.add(f"unknown keys {sorted(unknown)} for experiment {exp!r}; allowed: {sorted(allowed)}")
    kw = {"experiment": exp}

    if "p_list" in obj:
        pl = obj["p_list"]
        if not isinstance(pl, list) or not pl or not all(_is_num(p) for p in pl):
            err.add("p_list: expected a nonempty list of numbers")
        elif any(not 0 < p <= 1 for p in pl):
            err.add(f"p_list: every p must lie in (0, 1], got {pl}")
        else:
            kw["p_list"] = tuple(float(p) for p in pl)

    if "weights" in obj:
        ws = obj["weights"]
        if not isinstance(ws, list) or not ws:
            err.add("weights: expected a nonempty list of weight specs")
        else:
            frozen = []
            for i, spec in enumerate(ws):
                try:
                    weight_from_spec(spec)
                    frozen.append(_freeze_weight(spec))
                except UsageError as exc:
                    err.add(f"weights[{i}]: {exc}")
            kw["weights"] = tuple(frozen)

    if "seed" in obj:
        s = obj["seed"]
        if not _is_int(s) or not 0 <= s < 2**64:
            err.add("seed: expected an unsigned 64-bit integer")
        else:
            kw["seed"] = s
    if "output" in obj:
        if not isinstance(obj["output"], str) or not obj["output"]:
            err.add("output: expected a directory path")
        else:
            kw["output"] = obj["output"]
    if "format" in obj:
        if obj["format"] not in FORMATS:
            err.add(f"format: {obj['format']!r} is not one of {list(FORMATS)}")
        else:
            kw["format"] = obj["format"]

    if "matrix" in allowed:
        if "matrix" not in obj:
            err.add(f"matrix: required for experiment {exp!r}")
        else:
            m = _parse_matrix(obj["matrix"], err)
            if m is not None:
                kw["matrix"] = m
                if exp in ("barnes", "aux-weights") and m.generator == "random-decaying" and m.cloud_points is None and not m.sizes:
                    err.add("matrix.sizes: required")
    if "j_max" in obj:
        if not _is_int(obj["j_max"]) or not 0 <= obj["j_max"] <= 12:
            err.add("j_max: expected an integer in 0..12")
        else:
            kw["j_max"] = obj["j_max"]
    if "delta" in obj:
        if not _is_num(obj["delta"]) or not 0 < obj["delta"] <= 1:
            err.add("delta: expected a number in (0, 1]")
        else:
            kw["delta"] = float(obj["delta"])
    if "b" in obj:
        if obj["b"] is not None and (not _is_num(obj["b"]) or not obj["b"] > 0):
            err.add("b: expected a positive number or null")
        else:
            kw["b"] = None if obj["b"] is None else float(obj["b"])
    if "floor" in obj:
        if not _is_num(obj["floor"]) or not obj["floor"] > 0:
            err.add("floor: expected a positive number")
        else:
            kw["floor"] = float(obj["floor"])
    if "levels" in obj:
        lv = _int_list(obj["levels"], "levels", err, minimum=1)
        if lv:
            kw["levels"] = lv
    if "eps_exponents" in obj:
        ex = _int_list(obj["eps_exponents"], "eps_exponents", err, minimum=0)
        if ex:
            kw["eps_exponents"] = ex
    if "op_radii" in obj:
        rr = _int_list(obj["op_radii"], "op_radii", err, minimum=1)
        if rr:
            kw["op_radii"] = rr
    if "neumann_terms" in obj:
        if not _is_int(obj["neumann_terms"]) or obj["neumann_terms"] < 0:
            err.add("neumann_terms: expected a nonnegative integer")
        else:
            kw["neumann_terms"] = obj["neumann_terms"]
    if "tol" in obj:
        if not _is_num(obj["tol"]) or not obj["tol"] > 0:
            err.add("tol: expected a positive number")
        else:
            kw["tol"] = float(obj["tol"])
    if "sequence" in allowed:
        if "sequence" not in obj:
            err.add(f"sequence: required for experiment {exp!r}")
        else:
            sq = _parse_sequence(obj["sequence"], err)
            if sq is not None:
                kw["sequence"] = sq

    if exp == "aux-weights" and "weights" not in obj:
        err.add("weights: aux-weights needs a base weight")
    elif exp == "aux-weights" and "weights" in kw:
        fam = kw["weights"][0].get("family")
        if fam not in ("log-poly", "root"):
            err.add("weights[0]: aux-weights needs an unbounded admissible base (log-poly or root)")
    if exp in ("wiener-twisted",) and "weights" in kw and "sequence" in kw:
        for i, spec in enumerate(kw["weights"]):
            w = weight_from_spec(spec)
            if not w.is_radial or w.dim != 2 * kw["sequence"].d:
                err.add(f"weights[{i}]: wiener-twisted needs radial weights with dim = 2d = {2 * kw['sequence'].d}")

    if err.problems:
        raise ConfigError(err.problems)
    return ExperimentConfig(**kw)


def override(cfg, **changes):
    """Copy of ``cfg`` with CLI overrides applied (``None`` values are ignored)."""
    from dataclasses import replace

    return replace(cfg, **{k: v for k, v in changes.items() if v is not None})


__all__ = ["ExperimentConfig", "MatrixSpec", "SequenceSpec", "parse_config", "config_from_obj", "override"]
