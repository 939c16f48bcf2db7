"""Experiment runner: named experiment configurations, CSV/SVG outputs and
reproducibility manifests.

Every experiment is a pure function of (parameters, seed); outputs are
written with stable formatting so identical configurations produce
identical file checksums, which the manifest records.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import limits, measures, samplers
from .catalog import Weight, build_family, build_map, catalog_ids, jacobian_weight_for
from .geometry import coarea_residual, generalized_jacobian, normal_hessian_det
from .measures import (AngleDensity, AtomicMeasure, angle_pushforward,
                       rate_fit, tv_atoms, tv_histogram, w1_line)
from .quadrature import GibbsSpec, gibbs_cdf, gibbs_moment, tabulate_density
from .samplers import ChainConfig, SgldConfig, run_chain_ensemble, sgld_chain
from .svg import Series, emit_svg

__all__ = ["ExperimentConfig", "RunManifest", "run_experiment",
           "parse_config_file", "experiment_ids", "ANGLE_BIN_WIDTH"]

OUTPUT_DIR_ENV = "LEVELSET_GIBBS_OUT"
ANGLE_BIN_WIDTH = 0.05 * math.pi  # histogram bin width on the circle


class ConfigError(ValueError):
    """Invalid experiment id, override or configuration file."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Experiment id plus overrides; unknown ids/overrides are rejected."""

    experiment: str
    seed: int = 0
    out_dir: str | None = None
    overrides: dict = field(default_factory=dict)


@dataclass
class RunManifest:
    """Echo of the resolved run: parameters and per-output checksums."""

    experiment: str
    seed: int
    parameters: dict
    outputs: dict  # basename -> sha256

    def to_json(self) -> str:
        return json.dumps(
            {"experiment": self.experiment, "seed": self.seed,
             "parameters": self.parameters, "outputs": self.outputs},
            sort_keys=True, indent=2)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- configuration files --------------------------------------------------------

def _parse_value(text: str):
    text = text.strip()
    if "," in text:
        return [_parse_value(t) for t in text.split(",") if t.strip()]
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config_file(path) -> dict:
    """Key/value configuration with [section] nesting into dotted keys.

    Lines are ``key = value``; values parse as bool/int/float/string or a
    comma-separated list of those.  ``#`` starts a comment.
    """
    out: dict = {}
    section = ""
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ConfigError(f"cannot parse config line: {raw!r}")
        key, val = line.split("=", 1)
        key = key.strip()
        if section:
            key = f"{section}.{key}"
        out[key] = _parse_value(val)
    return out


# -- shared helpers --------------------------------------------------------------

def _stratified_quantiles(n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) / n


def _quartic_targets():
    qmap = build_map("quartic")
    atoms_one = limits.atomic_limit(qmap, Weight(kind="one"))
    atoms_jf = limits.atomic_limit(qmap, jacobian_weight_for(qmap))
    return qmap, atoms_one, atoms_jf


def _ellipse_start_points(density: AngleDensity, a1, a2, n: int) -> np.ndarray:
    theta = density.quantile(_stratified_quantiles(n))
    g = a2 + (a1 - a2) * np.cos(theta) ** 2
    r = g ** -0.5
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)


def _quartic_chain_masses(eps, gamma, chains, steps, burn_in, thinning, seed,
                          corrected: bool):
    """Root-cell masses of a stationary-start chain ensemble on the quartic.

    Start points are stratified inverse-CDF draws of the chain's own
    target, so the run validates that the recursion preserves its
    invariant law (single trajectories cannot cross the inter-root
    barriers at this temperature on any desk-scale budget).
    """
    qmap = build_map("quartic")
    weight = jacobian_weight_for(qmap) if corrected else Weight(kind="one")
    spec = GibbsSpec(map=qmap, k=2, eps=eps, weight=weight)
    tab = gibbs_cdf(spec, grid_n=4096)
    x0 = tab.quantile(_stratified_quantiles(chains))[:, None]
    cfg = ChainConfig(gamma=gamma, eps=eps, steps=steps, burn_in=burn_in,
                      thinning=thinning, seed=seed, x0=(0.0,))
    emp = run_chain_ensemble(spec, cfg, x0, corrected=corrected)
    return emp


def _sgld_dataset(n: int, seed: int) -> np.ndarray:
    gen = samplers.SeededGenerator(seed=seed)
    return gen.uniforms(n) - 0.5


def _eq13_tabulation(zbar: float, eps: float, grid_n: int = 4096):
    fam = build_family("eq13")
    minima = limits._family_minima(fam, zbar)
    centers = list(minima)
    widths = []
    for x in minima:
        d2 = max(float(fam.d2u_dx2(x, zbar)), 0.5)
        widths.append(12.0 * math.sqrt(eps / d2))
    lo, hi = fam.domain
    u_min = min(float(fam.eval(x, zbar)) for x in minima)

    def dens(xs):
        return np.exp(-(fam.eval(xs, zbar) - u_min) / eps)

    return tabulate_density(dens, lo, hi, grid_n=grid_n,
                            centers=centers, halfwidths=widths)


# -- experiments ------------------------------------------------------------------

def _run_fig1(p, seed, out):
    qmap = build_map("quartic")
    rows = []
    for eps in p["eps_grid"]:
        spec = GibbsSpec(map=qmap, k=2, eps=float(eps))
        m = gibbs_moment(spec, lambda c: np.asarray(qmap.eval(c)[0]) ** 2)
        rows.append((eps, m, 2.0 * m / eps))
    _write_csv(out / "fig1.csv", ["eps", "moment", "ratio"], rows)
    emit_svg([Series([math.log10(r[0]) for r in rows],
                     [r[2] for r in rows], kind="line", label="2 moment / eps")],
             out / "fig1.svg", title="second-moment scaling",
             xlabel="log10 eps", ylabel="ratio")
    return ["fig1.csv", "fig1.svg"]


def _run_fig2(p, seed, out):
    qmap, atoms_one, atoms_jf = _quartic_targets()
    uniform = AtomicMeasure(atoms=atoms_jf.atoms,
                            weights=np.full(len(atoms_jf.atoms), 0.25))
    emp_c = _quartic_chain_masses(p["eps"], p["gamma"], p["chains"], p["steps"],
                                  p["burn_in"], p["thinning"], seed, corrected=True)
    emp_p = _quartic_chain_masses(p["eps"], p["gamma"], p["chains"], p["steps"],
                                  p["burn_in"], p["thinning"], seed + 1,
                                  corrected=False)
    m_c = measures.nearest_atom_masses(emp_c, uniform)
    m_p = measures.nearest_atom_masses(emp_p, uniform)
    rows = [(float(a), 0.25, float(mc), float(w1), float(mp))
            for a, mc, w1, mp in zip(uniform.atoms, m_c, atoms_one.weights, m_p)]
    _write_csv(out / "fig2_roots.csv",
               ["root", "target_corrected", "empirical_corrected",
                "target_plain", "empirical_plain"], rows)
    summary = [
        ("corrected", tv_atoms(emp_c, uniform), tv_atoms(emp_c, atoms_one)),
        ("plain", tv_atoms(emp_p, uniform), tv_atoms(emp_p, atoms_one)),
    ]
    _write_csv(out / "fig2_summary.csv",
               ["chain", "tv_vs_uniform", "tv_vs_inverse_slope_weights"], summary)
    for name, emp, target in (("corrected", emp_c, uniform),
                              ("plain", emp_p, atoms_one)):
        masses = measures.nearest_atom_masses(emp, target)
        emit_svg([
            Series(list(target.atoms), list(masses), kind="bars",
                   label=f"{name} chain"),
            Series(list(target.atoms), list(target.weights), kind="points",
                   label="target"),
        ], out / f"fig2_{name}.svg", title=f"{name} chain root masses",
            xlabel="root", ylabel="mass")
    return ["fig2_roots.csv", "fig2_summary.csv",
            "fig2_corrected.svg", "fig2_plain.svg"]


def _run_fig3(p, seed, out):
    a1, a2 = float(p["a1"]), float(p["a2"])
    if p.get("paper_scale"):
        eps, gamma, total_steps = 1e-3, 1e-5, 90_000_000
    else:
        eps, gamma, total_steps = p["eps"], p["gamma"], p["total_steps"]
    chains = int(p["chains"])
    steps = max(1, int(total_steps) // chains)
    burn = min(int(p["burn_in"]), steps // 2)
    cmap = build_map("conic", a1=a1, a2=a2)
    dens_unif = limits.conic_limit_density(a1, a2, Weight(kind="jf"))
    dens_plain = limits.conic_limit_density(a1, a2, Weight(kind="one"))

    spec_c = GibbsSpec(map=cmap, k=2, eps=eps, weight=jacobian_weight_for(cmap))
    spec_p = GibbsSpec(map=cmap, k=2, eps=eps)
    cfg = ChainConfig(gamma=gamma, eps=eps, steps=steps, burn_in=burn,
                      thinning=int(p["thinning"]), seed=seed, x0=(1.0, 0.0))
    emp_c = run_chain_ensemble(
        spec_c, cfg, _ellipse_start_points(dens_unif, a1, a2, chains),
        corrected=True)
    cfg_p = ChainConfig(gamma=gamma, eps=eps, steps=steps, burn_in=burn,
                        thinning=int(p["thinning"]), seed=seed + 1, x0=(1.0, 0.0))
    emp_p = run_chain_ensemble(
        spec_p, cfg_p, _ellipse_start_points(dens_plain, a1, a2, chains),
        corrected=False)
    ang_c = angle_pushforward(emp_c)
    ang_p = angle_pushforward(emp_p)
    bins = int(round(2 * math.pi / ANGLE_BIN_WIDTH))
    edges = np.linspace(-math.pi, math.pi, bins + 1)
    hist_c = np.histogram(ang_c, bins=edges)[0] / ang_c.size
    hist_p = np.histogram(ang_p, bins=edges)[0] / ang_p.size
    tgt_u = dens_unif.mass_in_bins(edges)
    tgt_p = dens_plain.mass_in_bins(edges)
    rows = [(edges[i], edges[i + 1], hist_c[i], hist_p[i], tgt_u[i], tgt_p[i])
            for i in range(bins)]
    _write_csv(out / "fig3_hist.csv",
               ["bin_left", "bin_right", "corrected_emp", "plain_emp",
                "target_uniform", "target_weighted"], rows)
    summary = [
        ("corrected", tv_histogram(ang_c, dens_unif, bins),
         tv_histogram(ang_c, dens_plain, bins)),
        ("plain", tv_histogram(ang_p, dens_plain, bins),
         tv_histogram(ang_p, dens_unif, bins)),
    ]
    _write_csv(out / "fig3_summary.csv", ["chain", "tv_own", "tv_other"], summary)
    centers = 0.5 * (edges[:-1] + edges[1:])
    emit_svg([
        Series(list(centers), list(hist_c), kind="bars", label="corrected"),
        Series(list(centers), list(hist_p), kind="bars", label="plain"),
        Series(list(centers), list(tgt_u), kind="line", label="uniform target"),
        Series(list(centers), list(tgt_p), kind="line", label="weighted target"),
    ], out / "fig3.svg", title="angle histograms", xlabel="angle", ylabel="mass")
    return ["fig3_hist.csv", "fig3_summary.csv", "fig3.svg"]


def _run_w1rate(p, seed, out):
    qmap, atoms_one, atoms_jf = _quartic_targets()
    jf_weight = jacobian_weight_for(qmap)
    rows, fits = [], []
    for label, weight, atoms in (("one", Weight(kind="one"), atoms_one),
                                 ("jf", jf_weight, atoms_jf)):
        vals = []
        for eps in p["eps_grid"]:
            spec = GibbsSpec(map=qmap, k=2, eps=float(eps), weight=weight)
            vals.append(w1_line(gibbs_cdf(spec, grid_n=p["grid_n"]), atoms))
        fit = rate_fit(list(zip(p["eps_grid"], vals)))
        fits.append((label, fit.slope, fit.intercept, fit.r_squared))
        rows.append(vals)
    table = [(e, a, b) for e, a, b in zip(p["eps_grid"], rows[0], rows[1])]
    _write_csv(out / "w1rate.csv", ["eps", "w1_psi_one", "w1_psi_jf"], table)
    _write_csv(out / "w1rate_fit.csv",
               ["weight", "slope", "intercept", "r_squared"], fits)
    return ["w1rate.csv", "w1rate_fit.csv"]


def _run_coarea(p, seed, out):
    rows = []
    for a1, a2 in ((1.0, 1.0), (1.0, 4.0)):
        cmap = build_map("conic", a1=a1, a2=a2)
        for eps in p["eps_grid"]:
            rep = coarea_residual(cmap, k=2, eps=float(eps))
            rows.append(("conic", a1, a2, 2, eps, rep.lhs, rep.rhs,
                         rep.rel_residual))
    _write_csv(out / "coarea.csv",
               ["map", "a1", "a2", "k", "eps", "lhs", "rhs", "rel_residual"],
               rows)
    return ["coarea.csv"]


def _run_lemma_a1(p, seed, out):
    rows = []
    cmap = build_map("conic", a1=1.0, a2=4.0)
    thetas = np.linspace(-math.pi, math.pi, 10, endpoint=False)
    for th in thetas:
        r = float(cmap.ray_radius(th))
        x = np.array([r * math.cos(th), r * math.sin(th)])
        jf = generalized_jacobian(cmap, x)
        nhd = normal_hessian_det(cmap, x)
        expected = 2.0 * jf * jf
        rows.append(("conic", x[0], x[1], jf, nhd, expected,
                     abs(nhd - expected) / expected))
    qmap = build_map("quartic")
    for (z,) in qmap.known_zeros:
        x = np.array([z])
        jf = generalized_jacobian(qmap, x)
        nhd = normal_hessian_det(qmap, x)
        expected = 2.0 * jf * jf
        rows.append(("quartic", z, 0.0, jf, nhd, expected,
                     abs(nhd - expected) / expected))
    _write_csv(out / "lemma_a1.csv",
               ["map", "x1", "x2", "jf", "normal_hessian_det", "expected",
                "rel_error"], rows)
    return ["lemma_a1.csv"]


def _run_prop10(p, seed, out):
    if p["trials"] < 1:
        raise ConfigError("trials must be >= 1")
    rows = []
    for n in p["n_grid"]:
        res = limits.prop10_mc(int(n), int(p["trials"]), seed=seed)
        bound = (math.pi / (6.0 * math.sqrt(3.0))) / math.sqrt(n)
        rows.append((n, p["trials"], res.mean_excess, bound,
                     res.positive_side_fraction))
    _write_csv(out / "prop10.csv",
               ["n", "trials", "mean_excess", "bound",
                "positive_side_fraction"], rows)
    return ["prop10.csv"]


def _run_barrier(p, seed, out):
    point_rows = []
    for k_index in p["k_grid"]:
        spec = limits.BarrierSpec(k_index=int(k_index))
        for z in p["z_grid"]:
            for eps in p["eps_grid"]:
                point_rows.append((k_index, z, eps,
                                   limits.barrier_w1_point(float(z), float(eps), spec)))
    _write_csv(out / "barrier_point.csv", ["k_index", "z", "eps", "w1"],
               point_rows)
    mix_rows, fit_rows = [], []
    for k_index in p["k_grid"]:
        spec = limits.BarrierSpec(k_index=int(k_index))
        pairs = []
        for eps in p["mixture_eps_grid"]:
            w1, lower = limits.barrier_w1_mixture(float(eps), spec)
            mix_rows.append((k_index, eps, w1, lower))
            pairs.append((eps, w1))
        fit = rate_fit(pairs)
        fit_rows.append((k_index, fit.slope, 1.0 / spec.exponent))
    _write_csv(out / "barrier_mixture.csv",
               ["k_index", "eps", "w1", "lower_bound"], mix_rows)
    _write_csv(out / "barrier_rates.csv",
               ["k_index", "slope", "expected_slope"], fit_rows)
    return ["barrier_point.csv", "barrier_mixture.csv", "barrier_rates.csv"]


def _run_sgld(p, seed, out):
    fam = build_family("eq13")
    data = _sgld_dataset(int(p["n_data"]), seed=int(p["dataset_seed"]))
    zbar = float(data.mean())
    rows = []
    for eps in p["eps_grid"]:
        eps = float(eps)
        tab = _eq13_tabulation(zbar, eps)
        atoms = limits.s0_for_family(fam, zbar)
        chains = int(p["chains"])
        steps = max(1, int(p["total_steps"]) // chains)
        cfg = SgldConfig(dataset=tuple(data), minibatch=int(p["minibatch"]),
                         gamma=float(p["gamma"]), eps=eps, steps=steps,
                         burn_in=min(int(p["burn_in"]), steps // 2),
                         seed=seed, x0=0.0)
        x0 = tab.quantile(_stratified_quantiles(chains))
        emp = sgld_chain(fam, cfg, x0_points=x0)
        rows.append((eps, w1_line(emp, tab), w1_line(emp, atoms)))
    _write_csv(out / "sgld.csv", ["eps", "w1_to_gibbs", "w1_to_atoms"], rows)
    return ["sgld.csv"]


_EXPERIMENTS = {
    "fig1": {
        "runner": _run_fig1,
        "defaults": {"eps_grid": [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4,
                                  1e-4, 3e-5, 1e-5]},
    },
    "fig2": {
        "runner": _run_fig2,
        "defaults": {"eps": 1e-3, "gamma": 1e-5, "chains": 4096,
                     "steps": 500, "burn_in": 100, "thinning": 1},
    },
    "fig3": {
        "runner": _run_fig3,
        "defaults": {"a1": 1.0, "a2": 4.0, "eps": 1e-2, "gamma": 1e-4,
                     "total_steps": 2_000_000, "chains": 256,
                     "burn_in": 500, "thinning": 4, "paper_scale": False},
    },
    "w1rate": {
        "runner": _run_w1rate,
        "defaults": {"eps_grid": [1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 1e-2],
                     "grid_n": 4096},
    },
    "coarea": {
        "runner": _run_coarea,
        "defaults": {"eps_grid": [0.1, 0.01]},
    },
    "lemma_a1": {"runner": _run_lemma_a1, "defaults": {}},
    "prop10": {
        "runner": _run_prop10,
        "defaults": {"n_grid": [10, 100, 1000], "trials": 10_000},
    },
    "barrier": {
        "runner": _run_barrier,
        "defaults": {"k_grid": [0, 1, 2],
                     "z_grid": [0.0, 0.25, 0.5, 1.0],
                     "eps_grid": [1e-6, 1e-4, 1e-2, 1e-1, 1.0],
                     "mixture_eps_grid": [1e-6, 1e-5, 1e-4, 1e-3, 1e-2]},
    },
    "sgld": {
        "runner": _run_sgld,
        "defaults": {"n_data": 50, "dataset_seed": 2024, "minibatch": 10,
                     "gamma": 1e-3, "eps_grid": [0.2, 0.1, 0.05],
                     "total_steps": 500_000, "chains": 100, "burn_in": 500},
    },
}


def experiment_ids():
    return sorted(_EXPERIMENTS)


def _resolve_parameters(experiment: str, overrides: dict) -> dict:
    if experiment not in _EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; "
                          f"known: {experiment_ids()}")
    params = dict(_EXPERIMENTS[experiment]["defaults"])
    for key, val in overrides.items():
        if key not in params:
            raise ConfigError(
                f"unknown override {key!r} for {experiment!r}; "
                f"allowed: {sorted(params)}")
        default = params[key]
        if isinstance(default, bool):
            if not isinstance(val, bool):
                raise ConfigError(f"override {key!r} must be a bool")
        elif isinstance(default, (int, float)) and not isinstance(val, (int, float)):
            raise ConfigError(f"override {key!r} must be numeric")
        elif isinstance(default, list) and not isinstance(val, list):
            val = [val]
        params[key] = val
    return params


def run_experiment(cfg: ExperimentConfig) -> RunManifest:
    """Run one experiment; returns the manifest (written last)."""
    params = _resolve_parameters(cfg.experiment, cfg.overrides)
    out_dir = cfg.out_dir or os.environ.get(OUTPUT_DIR_ENV) or "."
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = _EXPERIMENTS[cfg.experiment]["runner"](params, cfg.seed, out)
    manifest = RunManifest(
        experiment=cfg.experiment, seed=cfg.seed,
        parameters={k: params[k] for k in sorted(params)},
        outputs={name: _sha256(out / name) for name in sorted(files)})
    (out / "manifest.json").write_text(manifest.to_json() + "\n",
                                       encoding="utf-8")
    return manifest


def catalog_listing() -> str:
    lines = ["maps:"]
    for mid in catalog_ids():
        m = build_map(mid)
        lines.append(f"  {mid}: d={m.d}, p={m.p}, params={sorted(m.params)}")
    lines.append("families:")
    lines.append("  eq13: piecewise tilted-cosine family u(x, z)")
    lines.append("  barrier: two-point family x * z^(2k+1), parameter k_index")
    lines.append("experiments:")
    for eid in experiment_ids():
        keys = sorted(_EXPERIMENTS[eid]["defaults"]) or ["(none)"]
        lines.append(f"  {eid}: overrides {keys}")
    return "\n".join(lines)
