"""Configuration loading, validation and representation construction."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from ..errors import ConfigError, DomainError
from ..freegroup import parse_word
from ..hyperbolic import MoebiusMap
from ..reps import (
    Representation,
    conjugate,
    direct_sum,
    explicit_rep,
    exterior_power_rep,
    lift_rep,
    tau_rep,
)

SCHEMA_VERSION = 1
DET_TOL = 1e-9

DEFAULTS = {
    "k": None,
    "slope_tol": 0.01,
    "zero_tol": 1e-9,
    "angle_tol": 1e-4,
    "equivariance_tol": 1e-8,
    "margin_tol": 1e-10,
    "n_points": 50,
    "margin_pairs": 2000,
    "limit_map_parabolic": True,
    "full_flags": False,
    "flag_dump": False,
    "trajectories": 8,
    "trajectory_length": 20,
    "tuple_budget": 200,
    "tuple_sizes": [3, 4],
    "n_range": [2 ** e for e in range(6, 13)],
    "t_grid": [-4.0 + 0.5 * i for i in range(17)],
    "hitchin": False,
}


def load_schema() -> dict:
    return json.loads(resources.files("anosov_lab.cli").joinpath("schema.json").read_text())


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def content_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


@dataclass
class Config:
    raw: dict
    seed: int
    generators: list
    peripherals: list
    cap: int
    representation: Representation
    reference: Optional[Representation]
    params: dict
    source: Optional[str] = None
    hash: str = field(default="")

    @property
    def L(self) -> int:
        return self.params["L"]

    @property
    def ks(self) -> list:
        return self.params["k"]

    def rng(self, stream: str) -> np.random.Generator:
        """An independent generator per named stream, so diagnostics do not share draws."""
        tag = int.from_bytes(hashlib.sha256(stream.encode()).digest()[:8], "little")
        return np.random.default_rng([self.seed, tag])


def _path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _schema_problems(raw) -> list:
    validator = jsonschema.Draft202012Validator(load_schema())
    problems = []
    for err in sorted(validator.iter_errors(raw), key=lambda e: (list(map(str, e.absolute_path)), e.message)):
        problems.append(f"{_path(err.absolute_path)}: {err.message}")
    return problems


def _square(values, where, problems) -> Optional[np.ndarray]:
    n = len(values)
    d = math.isqrt(n)
    if d * d != n:
        problems.append(f"{where}: {n} entries is not a square matrix")
        return None
    return np.array(values, dtype=float).reshape(d, d)


def _det_ok(g: np.ndarray) -> bool:
    return abs(np.linalg.det(g) - 1.0) <= DET_TOL * max(1.0, np.linalg.norm(g, 2) ** g.shape[0])


def build_representation(spec: dict, generators: list, where: str, problems: list) -> Optional[Representation]:
    """Representation from a config node; problems are appended instead of raised."""
    kind = spec["constructor"]
    rank = len(generators)
    try:
        if kind == "lift":
            return lift_rep(generators)
        if kind == "tau":
            return tau_rep(generators, spec["d"], spec.get("basis", "monomial"))
        if kind == "explicit":
            local = []
            mats = []
            for i, m in enumerate(spec["matrices"]):
                g = _square(m, f"{where}.matrices[{i}]", local)
                if g is not None and not _det_ok(g):
                    local.append(f"{where}.matrices[{i}]: determinant {np.linalg.det(g)!r} is not 1")
                mats.append(g)
            if len(mats) != rank:
                local.append(f"{where}.matrices: {len(mats)} matrices for a group of rank {rank}")
            if len({g.shape for g in mats if g is not None}) > 1:
                local.append(f"{where}.matrices: matrices of different sizes")
            problems.extend(local)
            return None if local else explicit_rep(mats)
        if kind == "direct_sum":
            parts = [build_representation(p, generators, f"{where}.parts[{i}]", problems)
                     for i, p in enumerate(spec["parts"])]
            return None if any(p is None for p in parts) else direct_sum(*parts)
        base = build_representation(spec["base"], generators, f"{where}.base", problems)
        if base is None:
            return None
        if kind == "exterior_power":
            if not 1 <= spec["k"] <= base.d - 1:
                problems.append(f"{where}.k: must lie in [1, {base.d - 1}]")
                return None
            return exterior_power_rep(base, spec["k"])
        if kind == "conjugate":
            g = _square(spec["by"], f"{where}.by", problems)
            if g is None:
                return None
            if g.shape[0] != base.d:
                problems.append(f"{where}.by: size {g.shape[0]} does not match dimension {base.d}")
                return None
            if abs(np.linalg.det(g)) < DET_TOL:
                problems.append(f"{where}.by: matrix is singular")
                return None
            return conjugate(base, g)
        if kind == "inverse_transpose":
            return base.inverse_transpose()
    except (DomainError, ValueError) as exc:
        problems.append(f"{where}: {exc}")
        return None
    problems.append(f"{where}.constructor: unknown constructor {kind!r}")
    return None


def parse_config(raw: dict, source: Optional[str] = None) -> Config:
    """Validate a config document and build its group and representations.

    Raises
    ------
    ConfigError
        Listing every schema violation, or every semantic problem
        (determinants, dimensions, k range, words) when the schema passes.
    """
    problems = _schema_problems(raw)
    if problems:
        raise ConfigError(f"{len(problems)} schema violation(s)", problems=problems)
    gens = []
    for i, m in enumerate(raw["group"]["generators"]):
        g = np.array(m, dtype=float).reshape(2, 2)
        det = float(np.linalg.det(g))
        if abs(det - 1.0) > DET_TOL * max(1.0, float(np.abs(g).max()) ** 2):
            problems.append(f"$.group.generators[{i}]: determinant {det!r} is not 1")
        else:
            gens.append(MoebiusMap.from_matrix(g))
    peripherals = []
    for i, w in enumerate(raw["group"].get("peripherals", [])):
        try:
            word = parse_word(w)
        except DomainError as exc:
            problems.append(f"$.group.peripherals[{i}]: {exc}")
            continue
        if word and max(abs(x) for x in word) > len(raw["group"]["generators"]):
            problems.append(f"$.group.peripherals[{i}]: uses a generator beyond the rank")
            continue
        peripherals.append(word)
    if problems:
        raise ConfigError(f"{len(problems)} invalid field(s)", problems=problems)
    rep = build_representation(raw["representation"], gens, "$.representation", problems)
    ref = None
    if "reference" in raw:
        ref = build_representation(raw["reference"], gens, "$.reference", problems)
        if ref is not None and rep is not None and ref.d != rep.d:
            problems.append(f"$.reference: dimension {ref.d} differs from the representation's {rep.d}")
    params = dict(DEFAULTS)
    params.update(raw["diagnostics"])
    if rep is not None:
        if params["k"] is None:
            params["k"] = list(range(1, rep.d))
        for i, k in enumerate(params["k"]):
            if not 1 <= k <= rep.d - 1:
                problems.append(f"$.diagnostics.k[{i}]: k = {k} outside [1, {rep.d - 1}]")
        if params["hitchin"] and rep.d > 8:
            problems.append("$.diagnostics.hitchin: positivity certification is capped at d = 8")
    if problems:
        raise ConfigError(f"{len(problems)} invalid field(s)", problems=problems)
    cfg = Config(raw, int(raw["seed"]), gens, peripherals, int(raw["group"].get("cap", 2_000_000)), rep, ref,
                 params, source)
    cfg.hash = content_hash(raw)
    return cfg


def load_config(path, seed: Optional[int] = None) -> Config:
    """Read, optionally override the seed, and validate a config file."""
    p = Path(path)
    try:
        raw = json.loads(p.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}", problems=[str(exc)]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {p} is not valid JSON", problems=[f"line {exc.lineno}: {exc.msg}"]) from exc
    if seed is not None and isinstance(raw, dict):
        raw["seed"] = int(seed)
    return parse_config(raw, str(p))


def shipped_config(name: str) -> Path:
    """Path of a config shipped with the package, e.g. ``tau3_punctured_sphere.json``."""
    return Path(str(resources.files("anosov_lab.configs").joinpath(name)))
