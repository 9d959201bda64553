"""Canonical text serialization for instances, hard instances and traces.

Files are JSON with sorted keys and floats written with 17 significant
digits, so ``dumps(loads(text)) == text`` for any canonically written file
and values round-trip bit for bit. Instance files are indented trees;
trace files hold one compact JSON object per line.
"""

from __future__ import annotations

import json
import math
import os
import tempfile

import numpy as np

from .adversary import HardInstance
from .maxaffine import MaxAffine

__all__ = [
    "dumps",
    "dumps_line",
    "loads",
    "write_atomic",
    "read_text",
    "instance_to_dict",
    "instance_from_dict",
    "hard_to_dict",
    "hard_from_dict",
    "read_trace",
]


def _num(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if s == "-0":
        s = "-0.0"
    return s


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _scalar(obj) -> str | None:
    obj = _plain(obj)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _num(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    return None


def dumps(obj, indent: int = 1, _level: int = 0) -> str:
    """Indented canonical form; lists of scalars stay on one line."""
    obj = _plain(obj)
    s = _scalar(obj)
    if s is not None:
        return s
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(obj[k], indent, _level + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        parts = [_plain(v) for v in obj]
        if all(_scalar(v) is not None for v in parts):
            return "[" + ", ".join(_scalar(v) for v in parts) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in parts) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_line(obj) -> str:
    """Compact single-line canonical form."""
    obj = _plain(obj)
    s = _scalar(obj)
    if s is not None:
        return s
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{dumps_line(obj[k])}"
                              for k in sorted(obj, key=str)) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps_line(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def loads(text: str):
    return json.loads(text)


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _floats(v, name):
    if v is None:
        raise ValueError(f"missing numeric field {name!r}")
    return np.asarray(v, dtype=float)


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------

def instance_to_dict(F: MaxAffine, x0=None, M=None, R=None, minimizer=None, f_star=None) -> dict:
    d = {
        "kind": "max_affine",
        "dim": F.dim,
        "pieces": [{"f": float(F.values[i]), "g": F.slopes[i], "y": F.anchors[i]}
                   for i in range(F.n_pieces)],
    }
    for key, val in (("x0", x0), ("M", M), ("R", R), ("minimizer", minimizer), ("f_star", f_star)):
        if val is not None:
            d[key] = val
    return d


def instance_from_dict(d: dict) -> dict:
    """Parse an instance tree; returns a dict with ``F``, ``x0`` and the optional fields.

    ``x0`` defaults to the origin. Raises ``ValueError`` on malformed input.
    """
    if d.get("kind") != "max_affine":
        raise ValueError("instance kind must be 'max_affine'")
    dim = int(d["dim"])
    pieces = d.get("pieces") or []
    if not pieces:
        raise ValueError("instance needs at least one piece")
    vals, slopes, anchors = [], [], []
    for k, p in enumerate(pieces):
        g, y = _floats(p.get("g"), "g"), _floats(p.get("y"), "y")
        if g.shape != (dim,) or y.shape != (dim,):
            raise ValueError(f"piece {k} vectors must have length {dim}")
        vals.append(float(p["f"]))
        slopes.append(g)
        anchors.append(y)
    F = MaxAffine(np.array(vals), np.array(slopes), np.array(anchors))
    out = {"F": F, "x0": np.zeros(dim), "M": d.get("M"), "R": d.get("R"),
           "minimizer": None, "f_star": d.get("f_star")}
    if d.get("x0") is not None:
        out["x0"] = _floats(d["x0"], "x0")
        if out["x0"].shape != (dim,):
            raise ValueError(f"x0 must have length {dim}")
    if d.get("minimizer") is not None:
        out["minimizer"] = _floats(d["minimizer"], "minimizer")
        if out["minimizer"].shape != (dim,):
            raise ValueError(f"minimizer must have length {dim}")
    M = out["M"]
    if M is not None:
        norms = np.linalg.norm(F.slopes, axis=1)
        if np.any(norms > M + 1e-9):
            k = int(np.argmax(norms))
            raise ValueError(f"piece {k} slope norm {norms[k]:.17g} exceeds M = {M}")
    return out


def hard_to_dict(inst: HardInstance, certificate: dict | None = None) -> dict:
    d = instance_to_dict(inst.F, inst.x0, inst.M, inst.R, inst.minimizer, inst.f_star)
    hard = {
        "flavor": inst.flavor,
        "n": inst.n,
        "N": inst.N,
        "certified_gap": inst.certified_gap,
        "guarantee": inst.guarantee,
        "past": {k: v for k, v in inst.past.items()},
        "future": {k: v for k, v in inst.future.items()},
        "E": inst.E.T,
    }
    if inst.L is not None:
        hard["L"] = inst.L
    if inst.padded_from is not None:
        hard["padded_from"] = inst.padded_from
    plan = inst.plan
    if inst.flavor == "spppa" and plan is not None:
        hard["z_prime"] = plan.z_prime
        hard["xi"] = plan.xi
    if inst.flavor == "klm" and plan is not None:
        hard["plan"] = {"y": plan.y, "t": plan.t, "theta": plan.theta, "f_half": plan.f_half,
                        "zeta": plan.zeta}
    d["hard"] = hard
    if certificate is not None:
        d["certificate"] = certificate
    return d


class _StoredPlan:
    """Minimal plan record restored from a file (fields used by the verifiers)."""

    def __init__(self, **kw):
        self.__dict__.update(kw)


def hard_from_dict(d: dict) -> HardInstance:
    base = instance_from_dict(d)
    h = d["hard"]
    dim = base["F"].dim

    def arr(block, key):
        v = np.asarray(block[key], dtype=float)
        if key in ("f", "tau"):
            return v.reshape(-1)
        return v.reshape(-1, dim)

    past = {k: arr(h["past"], k) for k in h["past"]}
    future = {k: (arr(h["future"], k) if isinstance(h["future"][k], list) else h["future"][k])
              for k in h["future"]}
    if "m" in future:
        future["m"] = int(future["m"])
    plan = None
    if h["flavor"] == "spppa" and "z_prime" in h:
        plan = _StoredPlan(z_prime=np.asarray(h["z_prime"], dtype=float), xi=h["xi"],
                           m=future.get("m", -1))
    if h["flavor"] == "klm" and "plan" in h:
        p = h["plan"]
        plan = _StoredPlan(y=np.asarray(p["y"], dtype=float), t=p["t"], theta=p["theta"],
                           f_half=p["f_half"], zeta=p["zeta"])
    E = np.asarray(h["E"], dtype=float).reshape(-1, dim).T
    L = np.asarray(h["L"], dtype=float) if "L" in h else None
    return HardInstance(h["flavor"], base["F"], base["x0"], base["minimizer"], float(base["f_star"]),
                        float(h["certified_gap"]), float(h["guarantee"]), int(h["n"]), int(h["N"]),
                        past, future, E, M=base["M"], R=base["R"], L=L, plan=plan,
                        padded_from=h.get("padded_from"))


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------

def read_trace(path: str) -> tuple[dict, list[dict], dict | None]:
    """Split a trace file into header, iteration records and summary."""
    header, rows, summary = None, [], None
    for k, line in enumerate(read_text(path).splitlines()):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"trace line {k + 1} is not valid JSON: {exc}") from None
        kind = rec.get("type")
        if kind == "header":
            header = rec
        elif kind == "iteration":
            rows.append(rec)
        elif kind == "summary":
            summary = rec
        else:
            raise ValueError(f"trace line {k + 1} has unknown type {kind!r}")
    if header is None:
        raise ValueError("trace has no header line")
    return header, rows, summary
