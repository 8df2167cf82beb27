"""Sweeps, figure presets and the analytic-vs-simulation validation report."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, NamedTuple

import numpy as np

from . import channel
from . import montecarlo as mc
from .config import Scenario, SicMode, SystemConfig, validate_config
from .sop import sop_asymptotic, sop_exact

CSV_HEADER = ("scenario", "scheme", "sic", "user", "method", "rho_db", "value",
              "ci_low", "ci_high", "iterations", "seed")
METHODS = ("exact", "asymptotic", "mc")


class SweepRow(NamedTuple):
    scenario: str
    scheme: str
    sic: str
    user: str
    method: str
    rho_db: float
    value: float
    ci_low: float
    ci_high: float
    iterations: int
    seed: int

    def to_strings(self) -> list[str]:
        return [repr(v) if isinstance(v, float) else str(v) for v in self]

    @classmethod
    def from_strings(cls, rec: list[str]) -> SweepRow:
        types = (str, str, str, str, str, float, float, float, float, int, int)
        return cls(*(t(v) for t, v in zip(types, rec)))


def _sort_key(row: SweepRow):
    return (row.scenario, row.method, row.rho_db)


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)

    def sorted(self) -> SweepResult:
        return SweepResult(sorted(self.rows, key=_sort_key))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            _write_rows(fh, self.rows)

    def to_csv_string(self) -> str:
        import io

        buf = io.StringIO()
        _write_rows(buf, self.rows)
        return buf.getvalue()

    @classmethod
    def read_csv(cls, path) -> SweepResult:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if tuple(header) != CSV_HEADER:
                raise ValueError(f"unexpected CSV header {header}")
            return cls([SweepRow.from_strings(r) for r in reader])

    def select(self, **where) -> list[SweepRow]:
        return [r for r in self.rows if all(getattr(r, k) == v for k, v in where.items())]


def _write_rows(fh, rows) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.to_strings())


def parse_range(spec: str) -> list[float]:
    """'0:60:5' -> [0, 5, ..., 60] (inclusive); '10,20,30' -> list."""
    spec = spec.strip()
    if ":" in spec:
        parts = [float(p) for p in spec.split(":")]
        if len(parts) == 2:
            parts.append(5.0)
        lo, hi, step = parts
        if step <= 0 or hi < lo:
            raise ValueError(f"bad range {spec!r}")
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [lo + i * step for i in range(n)]
    vals = [float(p) for p in spec.split(",") if p.strip()]
    if not vals:
        raise ValueError("empty range")
    return vals


def run_sweep(cfg: SystemConfig, scenarios, rho_db, methods=("exact",), iterations: int = 20000,
              seed: int = 0, workers: int = 1, out_path=None) -> SweepResult:
    """One row per (rho point, scenario, method).

    With ``out_path`` rows are streamed to ``<out_path>.partial`` and moved
    into place on success; on error the partial file is kept and the error
    re-raised.
    """
    cfg = validate_config(cfg)
    scenarios = [s if isinstance(s, Scenario) else Scenario(s) for s in scenarios]
    rho_db = [float(r) for r in rho_db]
    if not rho_db or not scenarios:
        raise ValueError("sweep needs at least one scenario and one rho point")
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise ValueError(f"unknown methods {bad}")
    rows: list[SweepRow] = []
    partial = None
    fh = None
    if out_path is not None:
        partial = Path(str(out_path) + ".partial")
        fh = open(partial, "w", newline="")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)

    def emit(row):
        rows.append(row)
        if fh is not None:
            writer.writerow(row.to_strings())
            fh.flush()

    try:
        batch = mc.simulate(cfg, iterations, seed, workers) if "mc" in methods else None
        for sc in scenarios:
            for method in methods:
                for r in rho_db:
                    c = cfg.replace(rho_db=r)
                    base = (sc.value, cfg.scheme, cfg.sic.label, sc.user, method, r)
                    if method == "mc":
                        est = mc.estimate_sop_mc(c, sc, iterations, seed, batch=batch)
                        lo, hi = est.ci
                        emit(SweepRow(*base, est.value, lo, hi, est.iterations, est.seed))
                    else:
                        fn = sop_exact if method == "exact" else sop_asymptotic
                        emit(SweepRow(*base, fn(c, sc).value, 0.0, 0.0, 0, 0))
    except BaseException:
        if fh is not None:
            fh.close()
        raise
    result = SweepResult(rows).sorted()
    if fh is not None:
        fh.close()
        result.write_csv(out_path)
        os.remove(partial)
    return result


# -- figure presets ---------------------------------------------------------


@dataclass(frozen=True)
class FigureRecipe:
    """Parameter deltas for one figure: a list of labelled config variants,
    each swept over ``rho_db`` for ``scenarios``."""

    name: str
    description: str
    sweep_variable: str
    variants: tuple[tuple[str, tuple[tuple[str, Any], ...]], ...]
    scenarios: tuple[str, ...]
    rho_db: tuple[float, ...] = tuple(float(r) for r in range(0, 65, 5))
    methods: tuple[str, ...] = ("exact", "asymptotic")

    def configs(self, base: SystemConfig | None = None) -> list[tuple[str, SystemConfig]]:
        base = base or SystemConfig()
        return [(label, validate_config(base.replace(**dict(over)))) for label, over in self.variants]


def _v(label, **over):
    return (label, tuple(sorted(over.items())))


_IPSIC = {"kind": "imperfect", "varpi": 1.0}
_PSIC = "perfect"

_RECIPES = {
    "fig2": FigureRecipe(
        "fig2", "n-th and m-th user SOP, pSIC and ipSIC at two residual powers (K = 2)", "rho_db",
        (_v("psic", K=2, sic=_PSIC, R_n=0.01, R_m=0.01),
         _v("ipsic-30dB", K=2, sic=_IPSIC, residual_total_db=-30.0, R_n=0.01, R_m=0.01),
         _v("ipsic-20dB", K=2, sic=_IPSIC, residual_total_db=-20.0, R_n=0.01, R_m=0.01)),
        ("external-n", "external-m")),
    "fig3": FigureRecipe(
        "fig3", "SOP for K = 1 (PD) against K = 3 (CD)", "K",
        (_v("K=1-psic", K=1, sic=_PSIC), _v("K=1-ipsic", K=1, sic=_IPSIC),
         _v("K=3-psic", K=3, sic=_PSIC), _v("K=3-ipsic", K=3, sic=_IPSIC)),
        ("external-n", "external-m")),
    "fig4": FigureRecipe(
        "fig4", "SOP at several target secrecy rates", "rate",
        tuple(_v(f"R={r}", K=2, sic=_IPSIC, R_n=r, R_m=r) for r in (0.01, 0.1, 0.5)),
        ("external-n", "external-m")),
    "fig5": FigureRecipe(
        "fig5", "SOP for path loss exponents 2, 3 and 4", "alpha",
        tuple(_v(f"alpha={a}", K=2, sic=_IPSIC, alpha=float(a)) for a in (2, 3, 4)),
        ("external-n", "external-m")),
    "fig6": FigureRecipe(
        "fig6", "SOP for several user-zone radii", "radius",
        tuple(_v(f"RD1={r1},RD2={r2}", K=2, sic=_IPSIC, r_d1=float(r1), r_d2=float(r2))
              for r1, r2 in ((1, 5), (2, 10), (3, 15))),
        ("external-n", "external-m")),
    "fig7": FigureRecipe(
        "fig7", "pair SOP, CD (K = 2) against PD (K = 1)", "K",
        (_v("cd-psic", K=2, sic=_PSIC), _v("cd-ipsic", K=2, sic=_IPSIC),
         _v("pd-psic", K=1, sic=_PSIC), _v("pd-ipsic", K=1, sic=_IPSIC)),
        ("external-pair",)),
    "fig8": FigureRecipe(
        "fig8", "pair SOP against the power factor theta (a_n = theta, a_m = 1 - theta)", "theta",
        tuple(_v(f"theta={t}-{s}", K=2, sic=sic, a_n=t, a_m=round(1.0 - t, 12))
              for t in (0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45)
              for s, sic in (("psic", _PSIC), ("ipsic", _IPSIC))),
        ("external-pair",), rho_db=(30.0, 40.0, 50.0), methods=("exact",)),
    "fig9": FigureRecipe(
        "fig9", "internal wiretapping, CD against PD, pSIC and ipSIC at two residual levels", "sic",
        tuple(_v(f"K={k}-{lab}", K=k, sic=sic, r_d1=2.0)
              for k in (1, 2)
              for lab, sic in (("psic", _PSIC), ("varpi=0.5", {"kind": "imperfect", "varpi": 0.5}),
                               ("varpi=1", _IPSIC))),
        ("internal",)),
    "fig10": FigureRecipe(
        "fig10", "internal wiretapping for several n-th user zone radii", "radius",
        tuple(_v(f"K={k}-RD1={r}", K=k, sic=_IPSIC, r_d1=float(r), residual_total_db=-30.0)
              for k in (1, 2) for r in (1, 2, 4)),
        ("internal",)),
}

FIGURES = tuple(_RECIPES)


def figure_recipe(name: str) -> FigureRecipe:
    try:
        return _RECIPES[name]
    except KeyError:
        raise KeyError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}") from None


def run_figure(name: str, out_dir, base: SystemConfig | None = None, methods=None,
               iterations: int = 20000, seed: int = 0, workers: int = 1) -> dict[str, SweepResult]:
    """Write one CSV per variant plus ``manifest.json`` into ``out_dir``."""
    recipe = figure_recipe(name)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    methods = tuple(methods or recipe.methods)
    results = {}
    manifest = {"figure": name, "description": recipe.description,
                "sweep_variable": recipe.sweep_variable, "variants": []}
    for label, cfg in recipe.configs(base):
        fname = f"{name}_{label}.csv".replace("/", "_")
        res = run_sweep(cfg, recipe.scenarios, recipe.rho_db, methods, iterations, seed, workers,
                        out_path=out_dir / fname)
        results[label] = res
        manifest["variants"].append({"label": label, "file": fname, "config": cfg.to_json()})
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
    return results


# -- validation report ------------------------------------------------------

KS_LIMIT = 0.015
PDF_MASS_TOL = 1e-3


def _sop_tolerance(ci: float, iterations: int) -> float:
    return max(0.005 if iterations >= 100_000 else 0.01, 3.0 * ci)


def _arbitrate(candidates: dict[str, float], target: float, prefer: str) -> tuple[str, float]:
    """Pick the candidate closest to ``target``; ties (1e-12) go to ``prefer``."""
    best = min(abs(v - target) for v in candidates.values())
    close = [k for k, v in candidates.items() if abs(v - target) <= best + 1e-12]
    choice = prefer if prefer in close else close[0]
    return choice, abs(candidates[choice] - target)


def pdf_mass(handle: channel.DistributionHandle, rel_tol=1e-8) -> float:
    """Integral of the handle's pdf over its support; 1 for a consistent pair."""
    from .numerics import integrate_finite, integrate_semi_infinite

    f = lambda x: float(handle.pdf(np.array([x]))[0])  # noqa: E731
    med = handle.median()
    if handle.support_hint:
        return integrate_finite(f, 0.0, handle.support_hint, rel_tol=rel_tol, scale=min(med, handle.support_hint / 2))
    return integrate_semi_infinite(f, rel_tol=rel_tol, scale=med)


def _eve_handles(cfg):
    return {"gamma_En": channel.eve_external_n(cfg), "gamma_Em": channel.eve_external_m(cfg),
            "gamma_int": channel.eve_internal(cfg)}


def validate_report(cfg: SystemConfig, iterations: int = 100_000, seed: int = 0, workers: int = 1,
                    rho_grid_db=(10.0, 20.0, 30.0, 40.0), stress: bool = True) -> dict[str, Any]:
    """Compare every closed form with simulation and record the arbitrations.

    Failures are report content, listed under ``flagged``.
    """
    cfg = validate_config(cfg)
    report: dict[str, Any] = {"config": cfg.to_json(), "iterations": iterations, "seed": seed}
    flagged: list[str] = []
    no_eves = cfg.lambda_e == 0
    batch = mc.simulate(cfg, iterations, seed, workers)
    sinrs = batch.sinrs(cfg)

    # distributions
    dists = {}
    user = {"gamma_n": lambda x: channel.cdf_gamma_n(cfg, x), "gamma_m": lambda x: channel.cdf_gamma_m(cfg, x)}
    for name, cdf in user.items():
        ks = mc.ks_distance(sinrs[name], cdf)
        dists[name] = {"ks": ks, "limit": KS_LIMIT, "pass": ks <= KS_LIMIT}
    for name, h in _eve_handles(cfg).items():
        if no_eves:
            dists[name] = {"skipped": "lambda_e = 0"}
            continue
        ks = mc.ks_distance(sinrs[name], h.cdf)
        mass = pdf_mass(h)
        ok = ks <= KS_LIMIT and abs(mass - 1.0) <= PDF_MASS_TOL
        dists[name] = {"ks": ks, "limit": KS_LIMIT, "pdf_mass": mass, "pass": ok, "provenance": h.provenance}
    for name, d in dists.items():
        if d.get("pass") is False:
            flagged.append(f"distribution:{name}")
    report["distributions"] = dists

    # SOP
    sops = []
    for r in rho_grid_db:
        c = cfg.replace(rho_db=float(r))
        for sc in Scenario:
            exact = sop_exact(c, sc).value
            est = mc.estimate_sop_mc(c, sc, iterations, seed, batch=batch)
            tol = _sop_tolerance(est.ci_half_width, iterations)
            ok = abs(exact - est.value) <= tol
            sops.append({"scenario": sc.value, "rho_db": float(r), "exact": exact, "mc": est.value,
                         "ci": est.ci_half_width, "delta": exact - est.value, "tol": tol, "pass": ok})
            if not ok:
                flagged.append(f"sop:{sc.value}@{r}dB")
    report["sop"] = sops

    # arbitrations
    arb: dict[str, Any] = {}
    if no_eves:
        arb["eve_exponent"] = arb["m_user_tail"] = arb["factorial"] = {"skipped": "lambda_e = 0"}
    else:
        ks_d = mc.ks_distance(sinrs["gamma_En"], channel.eve_external_n(cfg).cdf)
        ks_p = mc.ks_distance(sinrs["gamma_En"], channel.eve_external_n(cfg, variant="shifted").cdf)
        arb["eve_exponent"] = {"ks_derived": ks_d, "ks_shifted": ks_p,
                               "selected": "derived" if ks_d <= ks_p else "shifted"}
        if arb["eve_exponent"]["selected"] != "derived":
            flagged.append("arbitration:eve_exponent")

        t2_cfgs = [("base", cfg)]
        if stress:
            t2_cfgs.append(("stress", cfg.replace(rho_e_db=60.0, R_m=1.0, rho_db=40.0)))
        arb["m_user_tail"] = {}
        for label, c in t2_cfgs:
            b = batch if c is cfg else mc.simulate(c, iterations, seed, workers)
            est = mc.estimate_sop_mc(c, Scenario.EXTERNAL_M, iterations, seed, batch=b)
            cands = {"truncated": sop_exact(c, Scenario.EXTERNAL_M, variant="truncated").value,
                     "full": sop_exact(c, Scenario.EXTERNAL_M).value}
            choice, gap = _arbitrate(cands, est.value, "full")
            arb["m_user_tail"][label] = {**cands, "mc": est.value, "ci": est.ci_half_width, "selected": choice,
                                      "abs_delta": gap, "tail_gap": cands["full"] - cands["truncated"]}
            if choice != "full":
                flagged.append(f"arbitration:m_user_tail:{label}")

        if stress:
            # 1/i! and 1/j! coincide for K <= 2; a dense, close Eve field at K = 3 separates them
            c3 = validate_config(cfg.replace(K=3, lambda_e=0.5, r_eve=30.0, rho_e_db=40.0,
                                             sic=SicMode.perfect()))
            n3 = min(iterations, 50_000)
            s3 = mc.sample_sinr(c3, "gamma_int", n3, seed, workers)
            ks_i = mc.ks_distance(s3, channel.eve_internal(c3).cdf)
            ks_j = mc.ks_distance(s3, channel.eve_internal(c3, factorial="j").cdf)
            arb["factorial"] = {"ks_1_over_i!": ks_i, "ks_1_over_j!": ks_j,
                                "selected": "i" if ks_i <= ks_j else "j", "iterations": n3}
            if ks_i > ks_j:
                flagged.append("arbitration:factorial")

        # Eves beyond r_eve: closed forms integrate to infinity, the simulator stops at r_eve
        trunc = {}
        for name, which in (("gamma_En", "external-n"), ("gamma_Em", "external-m"), ("gamma_int", "internal")):
            h = _eve_handles(cfg)[name]
            worst = 0.0
            for x in h.median() * np.array([0.25, 1.0, 4.0]):
                full = -math.log(float(h.cdf(np.array([x]))[0]))
                part = channel.ppp_void_exponent_truncated(cfg, x, cfg.r_eve, which)
                worst = max(worst, abs(math.exp(-part) - math.exp(-full)))
            trunc[name] = {"max_cdf_gap": worst}
        arb["truncation"] = trunc
    report["arbitrations"] = arb
    report["flagged"] = flagged
    report["passed"] = not flagged
    return report


def summarize_report(report: dict[str, Any]) -> str:
    lines = [f"validation: {'PASS' if report['passed'] else 'FAIL'} "
             f"({report['iterations']} drops, seed {report['seed']})"]
    for name, d in report["distributions"].items():
        if "skipped" in d:
            lines.append(f"  {name:10s} skipped ({d['skipped']})")
        else:
            extra = f" pdf mass {d['pdf_mass']:.6f}" if "pdf_mass" in d else ""
            lines.append(f"  {name:10s} KS {d['ks']:.4f}{extra} {'ok' if d['pass'] else 'FAIL'}")
    for s in report["sop"]:
        lines.append(f"  sop {s['scenario']:13s} {s['rho_db']:5.1f} dB exact {s['exact']:.5f} "
                     f"mc {s['mc']:.5f} tol {s['tol']:.4f} {'ok' if s['pass'] else 'FAIL'}")
    arb = report["arbitrations"]
    if "ks_derived" in arb.get("eve_exponent", {}):
        e = arb["eve_exponent"]
        lines.append(f"  eve exponent: derived KS {e['ks_derived']:.4f}, shifted KS {e['ks_shifted']:.4f}"
                     f" -> {e['selected']}")
    for label, t in arb.get("m_user_tail", {}).items():
        if isinstance(t, dict):
            lines.append(f"  m-user tail ({label}): truncated {t['truncated']:.5f} full {t['full']:.5f}"
                         f" mc {t['mc']:.5f} -> {t['selected']} (|delta| {t['abs_delta']:.2e})")
    if "selected" in arb.get("factorial", {}):
        f = arb["factorial"]
        lines.append(f"  factorial: 1/i! KS {f['ks_1_over_i!']:.4f}, 1/j! KS {f['ks_1_over_j!']:.4f}"
                     f" -> 1/{f['selected']}!")
    for name, t in arb.get("truncation", {}).items():
        lines.append(f"  truncation {name}: max CDF gap {t['max_cdf_gap']:.2e}")
    if report["flagged"]:
        lines.append("  flagged: " + ", ".join(report["flagged"]))
    return "\n".join(lines)
