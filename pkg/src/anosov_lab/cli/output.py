"""Report serialization, CSV tables and the enumeration cache."""
from __future__ import annotations

import csv
import enum
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from ..freegroup import GroupElement, enumerate_ball
from ..hyperbolic import Kind, MoebiusMap
from .config import canonical_json, content_hash

CACHE_VERSION = 1
TIMING_KEYS = ("run",)


def to_jsonable(obj):
    """Plain JSON types; non-finite floats become the strings "NaN", "Infinity", "-Infinity"."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return x
    return obj


def payload_hash(report: dict) -> str:
    """Hash of the report without its run section (timings, cache status)."""
    body = {k: v for k, v in report.items() if k not in TIMING_KEYS and k != "payload_sha256"}
    return hashlib.sha256(canonical_json(body).encode()).hexdigest()


def write_report(out: Path, report: dict) -> Path:
    report = to_jsonable(report)
    report["payload_sha256"] = payload_hash(report)
    path = out / "report.json"
    # Python's float repr is the shortest string that round-trips
    path.write_text(json.dumps(report, indent=2, allow_nan=False) + "\n")
    return path


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def write_table(out: Path, name: str, rows: list, columns: list | None = None) -> Path:
    """Write ``tables/<name>.csv``; columns default to the keys of the first row."""
    tables = out / "tables"
    tables.mkdir(parents=True, exist_ok=True)
    path = tables / f"{name}.csv"
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in columns])
    return path


def read_table(path) -> list:
    """Rows of an emitted CSV as dicts of strings."""
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------- enumeration cache

def ball_cache_key(cfg) -> str:
    body = {"version": CACHE_VERSION, "group_hash": content_hash(cfg.raw["group"]["generators"]),
            "rep_hash": content_hash(cfg.raw["representation"]), "L": cfg.L}
    return content_hash(body)[:24]


def _save_ball(path: Path, key: str, ball: list, rep) -> None:
    lengths = np.array([len(g.word) for g in ball], dtype=np.int64)
    flat = np.array([x for g in ball for x in g.word], dtype=np.int64)
    maps = np.array([[g.sl2.a, g.sl2.b, g.sl2.c, g.sl2.d, g.sl2.sign] for g in ball])
    disp = np.array([g.displacement for g in ball])
    kinds = np.array([list(Kind).index(g.kind) for g in ball], dtype=np.int64)
    images = np.array([rep.evaluate(g.word) for g in ball])
    tmp = path.with_suffix(".tmp.npz")
    np.savez(tmp, version=np.int64(CACHE_VERSION), key=np.array(key), lengths=lengths, flat=flat, maps=maps,
             displacement=disp, kinds=kinds, images=images)
    tmp.replace(path)


def _load_ball(path: Path, key: str, rep):
    with np.load(path, allow_pickle=False) as z:
        if int(z["version"]) != CACHE_VERSION or str(z["key"]) != key:
            return None
        lengths, flat, maps = z["lengths"], z["flat"], z["maps"]
        disp, kinds, images = z["displacement"], z["kinds"], z["images"]
    if images.shape[1:] != (rep.d, rep.d):
        return None
    kind_list = list(Kind)
    ball = []
    words = []
    pos = 0
    for n, m, dd, kd in zip(lengths, maps, disp, kinds):
        w = tuple(int(x) for x in flat[pos:pos + n])
        pos += n
        sl2 = MoebiusMap.from_normalized(m[0], m[1], m[2], m[3], int(m[4]))
        ball.append(GroupElement(w, sl2, float(dd), kind_list[int(kd)]))
        words.append(w)
    rep.seed_cache(words, images)
    return ball


def cached_ball(cfg, out: Path):
    """The evaluated ball of radius L, from ``<out>/cache`` when a current entry exists.

    Returns ``(ball, status)`` with status "hit", "miss" or "stale"; a stale
    entry (other cache version or key) is recomputed and overwritten.
    """
    cache = out / "cache"
    cache.mkdir(parents=True, exist_ok=True)
    key = ball_cache_key(cfg)
    path = cache / f"ball-{key}.npz"
    status = "miss"
    if path.exists():
        try:
            ball = _load_ball(path, key, cfg.representation)
        except (OSError, ValueError, KeyError):
            ball = None
        if ball is not None:
            return ball, "hit"
        status = "stale"
    ball = enumerate_ball(cfg.generators, cfg.L, cap=cfg.cap)
    _save_ball(path, key, ball, cfg.representation)
    return ball, status
