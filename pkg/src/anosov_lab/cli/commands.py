"""Command implementations: each fills report sections, tables and verdict categories."""
from __future__ import annotations

import math
import time
from pathlib import Path

import numpy as np

from .. import __version__
from ..errors import AnosovLabError
from ..freegroup import cyclic_core, primitive_root, rotations, sample_limit_set, word_key, word_to_str
from ..hyperbolic import Kind
from ..reps import build_cusp_rep
from ..diagnostics.cusps import cusp_norm_distortion, parabolic_growth_exponents, tp_check
from ..diagnostics.fits import Verdict
from ..diagnostics.gaps import eigengap_statistics, gap_samples, gap_statistics, orbit_qi_check
from ..diagnostics.hitchin import guard, hitchin_certify, positivity_category
from ..diagnostics.limits import cartan_property_check, limit_map_sample, power_trajectory
from .output import cached_ball, write_report, write_table

COMMANDS = ("classify", "gaps", "limitmap", "positivity", "cusp", "certify")

HEADER = ("Finite-sample numerical evidence, not a proof: verdicts compare fitted rates and margins "
          "against the engineering thresholds listed under parameters.")


def _category(verdict, margin, statistic, **detail):
    out = {"verdict": Verdict(verdict).value, "margin": margin, "statistic": statistic}
    out.update(detail)
    return out


class Run:
    """State shared by the phases of one command invocation."""

    def __init__(self, cfg, out: Path, jobs: int = 1):
        self.cfg = cfg
        self.rep = cfg.representation
        self.p = cfg.params
        self.out = Path(out)
        self.jobs = max(1, int(jobs))
        self.timings = {}
        self.results = {}
        self.categories = {}
        self.cache_status = None
        self._ball = None
        self._samples = None
        self._sample = None

    def timed(self, name, fn):
        t0 = time.perf_counter()
        try:
            return fn()
        finally:
            self.timings[name] = time.perf_counter() - t0

    # -- shared data

    @property
    def ball(self):
        if self._ball is None:
            self._ball, self.cache_status = self.timed("enumerate", lambda: cached_ball(self.cfg, self.out))
        return self._ball

    @property
    def samples(self):
        if self._samples is None:
            self._samples = self.timed("gap_samples", lambda: gap_samples(self.rep, self.ball, self.jobs))
        return self._samples

    @property
    def limit_sample(self):
        if self._sample is None:
            n = self.p["n_points"]
            self._sample = sample_limit_set(self.ball, math.pi / (2 * n), max_points=n)
        return self._sample

    # -- phases

    def classify(self):
        rows = [{"word": g.name, "trace": g.trace, "class": g.kind.value, "displacement": g.displacement,
                 "translation_length": g.translation_length} for g in self.ball]
        write_table(self.out, "classify", rows, ["word", "trace", "class", "displacement", "translation_length"])
        counts = {k.value: sum(1 for g in self.ball if g.kind is k) for k in Kind}
        self.results["classify"] = {"n": len(self.ball), "counts": counts}

    def gaps(self):
        p = self.p
        samples = self.samples
        write_table(self.out, "gaps", [s.to_row() for s in samples])
        sec = {"gap": {}, "eigengap": {}, "consistency": []}
        for k in self.cfg.ks:
            st = self.timed(f"gap_k{k}", lambda: gap_statistics(self.rep, self.ball, k, p["slope_tol"], p["zero_tol"],
                                                                  samples=samples))
            sec["gap"][str(k)] = st.to_json()
            self.categories[f"gap(k={k})"] = _category(st.verdict, st.fit.lower_slope, "fitted lower slope 1/a_lo",
                                                       zero_gap_words=len(st.zero_gap_words))
            hyp = [s for s in samples if s.hyperbolic]
            try:
                es = eigengap_statistics(self.rep, self.ball, k, p["slope_tol"], samples=hyp)
            except AnosovLabError as exc:
                sec["eigengap"][str(k)] = {"error": str(exc)}
                self.categories[f"eigengap(k={k})"] = _category(Verdict.INCONCLUSIVE, math.nan,
                                                                "min log eigen-gap / translation length",
                                                                error=str(exc))
                continue
            sec["eigengap"][str(k)] = es.to_json()
            self.categories[f"eigengap(k={k})"] = _category(es.verdict, es.min_rate,
                                                            "min log eigen-gap / translation length")
            if st.verdict is Verdict.PASS and not es.min_rate > 0:
                sec["consistency"].append({"k": k, "issue": "gap open but periodic rate not positive"})
        qi = orbit_qi_check(self.rep, self.ball, p["slope_tol"], samples=samples)
        sec["qi"] = qi.to_json()
        self.categories["qi"] = _category(qi.verdict, qi.fit.lower_slope, "fitted lower slope")
        self.results["gaps"] = sec

    def _limit_verdict(self, lm):
        p = self.p
        if lm.failures:
            return Verdict.FAIL
        if len(lm.points) < 2 or lm.equivariance_checks == 0:
            return Verdict.INCONCLUSIVE
        if not lm.equivariance_residual <= p["equivariance_tol"] or not lm.min_margin > p["margin_tol"]:
            return Verdict.FAIL
        return Verdict.PASS

    def limitmap(self):
        p = self.p
        sample = self.limit_sample
        sec = {"n_points": len(sample), "parabolic_points": len(sample.parabolic_points()), "k": {}}
        hyp = sorted({lp.witness.word for lp in sample.conical_points()}, key=lambda w: (len(w), word_key(w)))
        trajs = [power_trajectory(w, p["trajectory_length"], self.cfg.generators)
                 for w in hyp[:p["trajectories"]]]
        modes = list(self.cfg.ks) + ([None] if p["full_flags"] or p["flag_dump"] else [])
        for k in modes:
            tag = "full" if k is None else str(k)
            lm = self.timed(f"limitmap_{tag}", lambda: limit_map_sample(
                self.rep, sample, k, self.cfg.generators, include_parabolic=p["limit_map_parabolic"],
                on_failure="skip", equivariance_tol=p["equivariance_tol"], margin_pairs=p["margin_pairs"],
                rng=self.cfg.rng(f"margins-{tag}"), jobs=self.jobs))
            entry = lm.to_json()
            verdict = self._limit_verdict(lm)
            name = "limit-map(full)" if k is None else f"limit-map(k={k})"
            self.categories[name] = _category(verdict, lm.min_margin, "min pairwise transversality",
                                              equivariance_residual=lm.equivariance_residual,
                                              failing_witnesses=[word_to_str(w) for w in lm.failures])
            write_table(self.out, f"limitmap_{tag}", [
                {"angle": x.angle, "point": x.to_json() if x.is_infinite else x.x, "witness": word_to_str(w),
                 "parabolic": par} for x, w, par in zip(lm.points, lm.witnesses, lm.parabolic)],
                ["angle", "point", "witness", "parabolic"])
            if k is None:
                if p["flag_dump"]:
                    write_table(self.out, "flags", [
                        dict({"angle": x.angle, "parabolic": int(par)},
                             **{f"f{i}{j}": F.basis[i, j] for i in range(self.rep.d) for j in range(self.rep.d)})
                        for x, F, par in zip(lm.points, lm.values, lm.parabolic)])
                sec["k"][tag] = entry
                continue
            cart = self.timed(f"cartan_{tag}", lambda: cartan_property_check(self.rep, lm, trajs, k, p["angle_tol"]))
            entry["cartan"] = [c.to_json() for c in cart]
            worst = max((c.terminal_angle for c in cart), default=math.nan)
            self.categories[f"cartan(k={k})"] = _category(
                Verdict.combine(c.verdict for c in cart) if cart else Verdict.INCONCLUSIVE, worst,
                "max terminal angle")
            write_table(self.out, f"cartan_{tag}", [{"trajectory": c.label, "n": n + 1, "angle": a}
                                                     for c in cart for n, a in enumerate(c.angles)],
                        ["trajectory", "n", "angle"])
            sec["k"][tag] = entry
        self.results["limitmap"] = sec

    def positivity(self):
        p = self.p
        cat = self.timed("positivity", lambda: guard("positivity", lambda: positivity_category(
            self.rep, self.limit_sample, p["tuple_budget"], self.cfg.rng("positivity"), tuple(p["tuple_sizes"]),
            jobs=self.jobs)))
        self._add_positivity("positivity", cat)

    def _add_positivity(self, name, cat):
        rows = cat.detail.pop("rows", [])
        if rows:
            write_table(self.out, name, rows)
        self.results[name] = cat.to_json()
        self.categories[name] = _category(cat.verdict, cat.margin, "min balanced minor / Hadamard bound",
                                          **({"error": cat.error} if cat.error else {}))

    def _peripherals(self):
        if self.cfg.peripherals:
            return list(self.cfg.peripherals)
        roots = {}
        for g in self.ball:
            if g.kind is Kind.PARABOLIC:
                root = primitive_root(cyclic_core(g.word)[1])[0]
                if len(root) <= 2:
                    roots.setdefault(min(rotations(root), key=word_key), None)
        return sorted(roots, key=lambda w: (len(w), word_key(w)))

    def cusp(self):
        p = self.p
        periph = self._peripherals()
        sec = {"peripherals": [word_to_str(w) for w in periph], "entries": []}
        exp_rows, dist_rows = [], []
        per_k = {k: [] for k in self.cfg.ks}
        dist = []
        for w in periph:
            entry = {"word": word_to_str(w)}
            _, r = self.rep.best_rotation(w)
            entry["rotation"] = word_to_str(r)
            try:
                gr = parabolic_growth_exponents(self.rep, r, p["n_range"])
                entry["growth"] = gr.to_json()
                for j, (c, m, dd, br) in enumerate(zip(gr.exponents, gr.nearest, gr.distance, gr.bracket), start=1):
                    exp_rows.append({"peripheral": word_to_str(w), "j": j, "exponent": c, "nearest": m,
                                     "distance": dd, "bracket": br})
                for k in self.cfg.ks:
                    per_k[k].append((gr.verdicts[k], gr.exponents[k - 1] - gr.exponents[k]))
            except AnosovLabError as exc:
                entry["growth"] = {"error": str(exc)}
                for k in self.cfg.ks:
                    per_k[k].append((Verdict.INCONCLUSIVE, math.nan))
            try:
                psi = build_cusp_rep(self.rep.evaluate(r))
                entry["blocks"] = [list(b) for b in psi.block_multiset()]
                dr = cusp_norm_distortion(psi, p["t_grid"], rng=self.cfg.rng(f"distortion-{word_to_str(w)}"))
                entry["distortion"] = dr.to_json()
                dist.append((Verdict.PASS if dr.bound_holds else Verdict.FAIL, dr.min_slack))
                for t, u, lo in zip(dr.t_grid, dr.log_upper, dr.log_lower):
                    dist_rows.append({"peripheral": word_to_str(w), "t": t, "log_upper": u, "log_lower": lo})
            except AnosovLabError as exc:
                entry["distortion"] = {"error": str(exc)}
                dist.append((Verdict.INCONCLUSIVE, math.nan))
            sec["entries"].append(entry)
        if not periph:
            sec["note"] = "no peripheral elements"
        for k, vals in per_k.items():
            if vals:
                self.categories[f"cusp-exponents(k={k})"] = _category(
                    Verdict.combine(v for v, _ in vals), float(np.nanmin([m for _, m in vals] + [math.inf])),
                    "min c(k) - c(k+1)")
        if dist:
            self.categories["cusp-distortion"] = _category(
                Verdict.combine(v for v, _ in dist), float(np.nanmin([m for _, m in dist] + [math.inf])),
                "min slack of the two-sided bound")
        write_table(self.out, "cusp_exponents", exp_rows,
                    ["peripheral", "j", "exponent", "nearest", "distance", "bracket"])
        write_table(self.out, "cusp_distortion", dist_rows, ["peripheral", "t", "log_upper", "log_lower"])
        if self.cfg.reference is not None and periph:
            try:
                tp = tp_check(self.rep, self.cfg.reference, periph)
                sec["tp"] = tp.to_json()
                self.categories["tp-vs-reference"] = _category(
                    tp.verdict, float(sum(1 for e in tp.entries if e.match)), "matching peripherals",
                    mismatches=[word_to_str(e.word) for e in tp.entries if not e.match])
            except AnosovLabError as exc:
                sec["tp"] = {"error": str(exc)}
                self.categories["tp-vs-reference"] = _category(Verdict.INCONCLUSIVE, math.nan,
                                                               "matching peripherals", error=str(exc))
        self.results["cusp"] = sec

    def hitchin(self):
        p = self.p
        rep = self.timed("hitchin", lambda: hitchin_certify(
            self.rep, self.ball, self.limit_sample, p["tuple_budget"], self.cfg.rng("hitchin"),
            tuple(p["tuple_sizes"]), p["slope_tol"], p["n_range"], self.jobs))
        for name, cat in rep.categories.items():
            if name == "positivity":
                self._add_positivity("hitchin-positivity", cat)
                continue
            self.results[f"hitchin-{name}"] = cat.to_json()
            self.categories[f"hitchin-{name}"] = _category(cat.verdict, cat.margin, name,
                                                           **({"error": cat.error} if cat.error else {}))

    # -- report

    def report(self, command: str) -> dict:
        verdict = Verdict.combine(Verdict(c["verdict"]) for c in self.categories.values())
        return {
            "tool": {"name": "anosov-lab", "version": __version__},
            "command": command,
            "header": HEADER,
            "config_hash": self.cfg.hash,
            "seed": self.cfg.seed,
            "representation": self.rep.describe(),
            "parameters": self.p,
            "verdict": verdict.value,
            "failing": sorted(n for n, c in self.categories.items() if c["verdict"] == "fail"),
            "inconclusive": sorted(n for n, c in self.categories.items() if c["verdict"] == "inconclusive"),
            "categories": self.categories,
            "results": self.results,
            "run": {"timings": self.timings, "cache": self.cache_status, "jobs": self.jobs},
        }


def run_command(command: str, cfg, out, jobs: int = 1) -> tuple:
    """Run one command, write ``report.json`` and tables, and return ``(report, verdict)``."""
    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    run = Run(cfg, out, jobs)
    t0 = time.perf_counter()
    if command == "classify":
        run.classify()
    elif command == "gaps":
        run.gaps()
    elif command == "limitmap":
        run.limitmap()
    elif command == "positivity":
        run.positivity()
    elif command == "cusp":
        run.cusp()
    else:
        run.classify()
        run.gaps()
        run.limitmap()
        run.cusp()
        if cfg.params["hitchin"]:
            run.hitchin()
    run.timings["total"] = time.perf_counter() - t0
    report = run.report(command)
    write_report(out, report)
    return report, Verdict(report["verdict"])
