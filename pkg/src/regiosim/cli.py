"""``regiosim`` command-line interface."""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import stats

from . import __version__, config as cfgmod
from .charts import Series, line_chart
from .dynamics import (
    equilibrium_closed_form,
    equilibrium_solve,
    n_steps_for,
    neumann_equilibrium,
    neumann_order_for,
    neumann_tail_bound,
    simulate,
)
from .econometrics import SfaOptions, efficiency_scores, fe_within, hausman, re_gls, sfa_fit
from .econometrics.sfa import SfaParams
from .errors import (
    ComputationError,
    ConfigError,
    DidNotConverge,
    DegenerateField,
    InputError,
    NoWithinVariation,
    RankDeficient,
    RegiosimError,
    SchemaError,
    ZeroResponse,
)
from .paneldata import (
    DEFAULT_DELTA,
    DEFAULT_TAU,
    GrowthPanel,
    build_regression_panel,
    compute_stocks,
    growth_rates_empirical,
    knowledge_stock,
    load_raw,
    nested_band_models,
    panel_from_frame,
    panel_to_frame,
    raw_from_frame,
    sigma_series,
    synth_dynamics,
    synth_sfa,
    write_raw,
)
from .spatial import band_partition, inverse_square_weights, morans_test, row_standardize, write_matrix

EXIT_OK, EXIT_RUNTIME, EXIT_INPUT = 0, 1, 2
DEFAULT_OUT = "regiosim_out"

HINTS = {
    ZeroResponse: "rerun with --zero-patents log1p to use ln(P + 1)",
    RankDeficient: "drop collinear regressors or supply more regions/years",
    NoWithinVariation: "a regressor is constant within regions; try re mode or drop it",
    DidNotConverge: "raise estimate.sfa.n_starts or estimate.sfa.max_iter",
}


def significance_stars(p: float) -> str:
    if not np.isfinite(p):
        return ""
    for cut, mark in ((0.001, "***"), (0.01, "**"), (0.05, "*"), (0.1, ".")):
        if p < cut:
            return mark
    return ""


STAR_LEGEND = "Signif. codes: 0 '***' 0.001 '**' 0.01 '*' 0.05 '.' 0.1 ' ' 1"


class Run:
    """Output directory, file registry and manifest for one command."""

    def __init__(self, command: str, cfg: cfgmod.RunConfig, out_dir: Path, seed: int, quiet: bool):
        self.command = command
        self.cfg = cfg
        self.out = out_dir
        self.seed = seed
        self.quiet = quiet
        self.files: dict[str, str] = {}
        self.started = _dt.datetime.now(_dt.timezone.utc).isoformat()
        out_dir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.out / name

    def write_text(self, name: str, text: str) -> Path:
        p = self.path(name)
        p.write_text(text, encoding="utf-8", newline="\n")
        self._register(name)
        return p

    def write_frame(self, name: str, df: pd.DataFrame, footer: list[str] | None = None) -> Path:
        text = df.to_csv(index=False, float_format="%.17g", lineterminator="\n", na_rep="NA")
        if footer:
            text += "".join(f"# {line}\n" for line in footer)
        return self.write_text(name, text)

    def register_external(self, name: str) -> None:
        self._register(name)

    def _register(self, name: str) -> None:
        self.files[name] = hashlib.sha256(self.path(name).read_bytes()).hexdigest()

    def say(self, msg: str) -> None:
        if not self.quiet:
            print(msg)

    def finish(self) -> dict:
        manifest = {
            "tool": "regiosim",
            "version": __version__,
            "command": self.command,
            "config_sha256": self.cfg.hash(),
            "inputs": dict(sorted(self.cfg.inputs.items())),
            "seed": self.seed,
            "started": self.started,
            "finished": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "outputs": dict(sorted(self.files.items())),
        }
        self.path("manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return manifest


def _wide(times, labels, blocks: dict[str, np.ndarray]) -> pd.DataFrame:
    data = {"t": times}
    for prefix, arr in blocks.items():
        for j, lab in enumerate(labels):
            data[f"{prefix}_{lab}"] = arr[:, j]
    return pd.DataFrame(data)


def cmd_simulate(run: Run, args) -> None:
    econ, init = cfgmod.economy(run.cfg)
    it = cfgmod.integration(run.cfg)
    every = it["record_every"] or max(1, n_steps_for(it["dt"], it["horizon"]) // 1000)
    traj = simulate(econ, init, it["dt"], it["horizon"], tol=it["tol"], record_every=every)
    labels = list(econ.weights.labels)
    run.write_frame("trajectory.csv", _wide(traj.times, labels, {"lnA": traj.ln_A, "lnK": traj.ln_K, "lnL": traj.ln_L}))
    run.write_frame("rates.csv", _wide(traj.times, labels, {"gA": traj.g_A, "gK": traj.g_K}))
    mean = traj.g_A.mean(axis=1)
    sd = traj.g_A.std(axis=1)
    svg = line_chart(
        traj.times,
        [Series("mean g_A", mean)],
        title="Knowledge growth rate across regions",
        xlabel="time",
        ylabel="g_A",
        band=(mean - sd, mean + sd),
    )
    run.write_text("convergence.svg", svg)
    status = "stopped early (rates settled)" if traj.early_stop else "reached horizon"
    run.say(f"simulated {len(traj)} recorded states to t={traj.times[-1]:g}; {status}")


def cmd_equilibrium(run: Run, args) -> None:
    econ, _ = cfgmod.economy(run.cfg)
    eq = equilibrium_solve(econ)
    labels = list(econ.weights.labels)
    df = pd.DataFrame({"region": labels, "g_A_star": eq.g_A_star, "g_K_star": eq.g_K_star})
    footer = []
    mu = econ.mu
    if econ.homogeneous:
        gA, gK = equilibrium_closed_form(econ.params, float(mu[0]), float(econ.n[0]))
        df["g_A_closed"] = gA
        df["g_K_closed"] = gK
    if np.all(mu == mu[0]):
        r = neumann_order_for(econ, tol=1e-14)
        df["g_A_neumann"] = neumann_equilibrium(econ, r)
        cols = [c for c in ("g_A_closed", "g_A_neumann") if c in df]
        disc = max(float(np.max(np.abs(df[c] - df["g_A_star"]))) for c in cols)
        footer.append(f"max_abs_discrepancy={disc:.3e}")
        footer.append(f"neumann_order={r} tail_bound={float(np.max(neumann_tail_bound(econ, r))):.3e}")
        if "g_A_closed" not in df:
            footer.append("closed form omitted: n is heterogeneous")
    else:
        footer.append("closed form and neumann columns omitted: mu is heterogeneous")
    run.write_frame("equilibrium.csv", df, footer)
    run.say(df.to_string(index=False))
    for line in footer:
        run.say(line)


def cmd_weights(run: Run, args) -> None:
    dist = cfgmod.distance_matrix(run.cfg)
    if dist is None:
        raise ConfigError("weights command needs weights.source = coordinates or distances")
    w = row_standardize(inverse_square_weights(dist))
    labels = list(dist.labels)
    write_matrix(run.path("distances.csv"), labels, dist.d)
    write_matrix(run.path("weights.csv"), labels, w.w)
    run.register_external("distances.csv")
    run.register_external("weights.csv")
    if "bands" in run.cfg.doc:
        for b, band in enumerate(band_partition(w, dist, cfgmod.bands(run.cfg)), start=1):
            write_matrix(run.path(f"band_{b}.csv"), labels, band.w)
            run.register_external(f"band_{b}.csv")
    run.say(f"wrote matrices for {len(labels)} regions")


def _read_csv(path: Path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, dtype={"region": str, "region_id": str}, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise SchemaError(f"{path}: cannot parse CSV ({exc})") from exc


def cmd_moran(run: Run, args) -> None:
    m = run.cfg.section("moran")
    if "values" not in m:
        raise ConfigError("moran needs moran.values (or --values)")
    df = _read_csv(run.cfg.resolve(m["values"]))
    for c in ("region", "year", "value"):
        if c not in df.columns:
            raise SchemaError(f"values file needs column {c!r}")
    df["region"] = df["region"].astype(str)
    labels = list(dict.fromkeys(df["region"]))
    w, _ = cfgmod.weights_for(run.cfg, labels)
    method = m.get("method", "permutation")
    n_perm = m.get("permutations", 999)
    rows = []
    for year, grp in df.groupby("year", sort=True):
        vals = grp.set_index("region")["value"]
        missing = [lab for lab in labels if lab not in vals.index]
        if missing:
            raise SchemaError(f"year {year}: no value for regions {missing}")
        x = vals.loc[labels].to_numpy(dtype=float)
        try:
            r = morans_test(x, w, method=method, n_perm=n_perm, seed=run.seed, workers=m.get("workers", 1))
            rows.append([int(year), r.I, r.expected, r.variance, r.z, r.p, method, significance_stars(r.p)])
        except DegenerateField as exc:
            print(f"warning: year {year}: {exc}; row reported as NA", file=sys.stderr)
            rows.append([int(year), np.nan, np.nan, np.nan, np.nan, np.nan, method, ""])
    out = pd.DataFrame(rows, columns=["year", "I", "expected", "variance", "z", "p", "method", "signif"])
    run.write_frame("moran.csv", out)
    run.say(out.to_string(index=False))


def _coef_rows(model: str, names, est, se, stat, p) -> list[list]:
    return [[model, n, e, s, t, q, significance_stars(q)] for n, e, s, t, q in zip(names, est, se, stat, p)]


def _coef_block(rows) -> list[str]:
    lines = [f"{'term':<12}{'estimate':>14}{'std.err':>14}{'stat':>10}{'p':>10}"]
    for _, n, e, s, t, q, star in rows:
        lines.append(f"{n:<12}{e:>14.6g}{s:>14.6g}{t:>10.3f}{q:>10.4f} {star}")
    return lines


def _estimation_panel(run: Run, args, mode: str):
    """Regression panel from a raw CSV (built here) or a ready-made y/X CSV."""
    est = run.cfg.section("estimate")
    if "panel" not in est:
        raise ConfigError("estimate needs estimate.panel (or --panel)")
    path = run.cfg.resolve(est["panel"])
    df = _read_csv(path)
    if "y" in df.columns:
        return panel_from_frame(df, str(path))
    raw = raw_from_frame(df, str(path))
    span = est.get("growth_span")
    stocks = compute_stocks(raw, est.get("delta", DEFAULT_DELTA), est.get("tau", DEFAULT_TAU), tuple(span) if span else None)
    labels = list(raw.regions)
    w, dist = cfgmod.weights_for(run.cfg, labels)
    if mode == "bands":
        if dist is None:
            raise ConfigError("bands mode needs weights.source = coordinates or distances")
        weights = band_partition(w, dist, cfgmod.bands(run.cfg))
    else:
        weights = w
    return build_regression_panel(raw, stocks, weights, zero_patents=est.get("zero_patents", "error"))


def _fe_rows(model, fe):
    return _coef_rows(model, fe.names, fe.coefficients, fe.std_errors, fe.t_stats, fe.pvalues)


def _re_rows(model, re):
    se = re.std_errors
    return _coef_rows(model, re.names, re.coefficients, se, re.coefficients / se, re.pvalues)


def cmd_estimate(run: Run, args) -> None:
    est = run.cfg.section("estimate")
    mode = est.get("mode", "fe")
    panel = _estimation_panel(run, args, mode)
    level = est.get("level", 0.01)
    rows: list[list] = []
    report = [f"regiosim {__version__} estimate mode={mode}", f"panel: {panel.n_regions} regions x {panel.n_periods} periods", ""]
    extra: dict[str, pd.DataFrame] = {}

    if mode == "sfa":
        o = est.get("sfa", {})
        opts = SfaOptions(
            estimate_mu_trunc=o.get("estimate_mu_trunc", True),
            max_iter=o.get("max_iter", 500),
            tol=o.get("tol", 1e-6),
            n_starts=o.get("n_starts", 4),
            seed=run.seed,
        )
        fit = sfa_fit(panel, opts)
        vec, se = fit.vector(), fit.se_vector()
        z = vec / se
        p = 2 * stats.norm.sf(np.abs(z))
        rows = _coef_rows("sfa", fit.names, vec, se, z, p)
        report += ["stochastic frontier (time-varying decay)", *_coef_block(rows)]
        report += ["", f"log-likelihood: {fit.loglik:.6f}", f"best start: {fit.start_index}"]
        eff = efficiency_scores(fit, panel)
        extra["efficiency.csv"] = pd.DataFrame(
            {
                "region": np.repeat(panel.region_ids, panel.n_periods),
                "year": np.tile(panel.years, panel.n_regions),
                "u_hat": eff.reshape(-1),
                "efficiency": np.exp(-eff).reshape(-1),
            }
        )
    elif mode in ("fe", "re", "hausman"):
        fe = fe_within(panel) if mode in ("fe", "hausman") else None
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            re = re_gls(panel) if mode in ("re", "hausman") else None
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        if fe is not None:
            fr = _fe_rows("fe", fe)
            rows += fr
            report += ["fixed effects (within)", *_coef_block(fr)]
            report += [f"R2 (within): {fe.r_squared:.6f}  F: {fe.f_stat:.4f}  p(F): {fe.f_pvalue:.4g}  df: {fe.df_resid}", ""]
        if re is not None:
            rr = _re_rows("re", re)
            rows += rr
            report += ["random effects (GLS)", *_coef_block(rr)]
            report += [f"R2: {re.r_squared:.6f}  theta: {re.theta:.6f}  sigma_alpha^2: {re.sigma_alpha_sq:.6g}  sigma_eps^2: {re.sigma_eps_sq:.6g}", ""]
        if mode == "hausman":
            h = hausman(fe, re)
            verdict = h.verdict(level)
            report += [f"Hausman H = {h.statistic:.6f}  df = {h.df}  p = {h.p:.6g}  verdict at {level:g}: {verdict}"]
            if h.regularized:
                report.append("note: covariance difference not positive definite; positive-spectrum pseudo-inverse used")
            extra["hausman.csv"] = pd.DataFrame(
                [[h.statistic, h.df, h.p, verdict, h.regularized]], columns=["H", "df", "p", "verdict", "regularized"]
            )
    elif mode == "bands":
        n_bands = sum(1 for n in panel.regressor_names if n.startswith("w") and n.endswith("lnA"))
        if n_bands < 1:
            raise ConfigError("bands mode needs w1lnA..wklnA columns or a coordinate/distance weights source")
        summary = []
        for j, names in enumerate(nested_band_models(n_bands), start=1):
            sub = panel.subset(names)
            fe = fe_within(sub)
            fr = _fe_rows(f"model{j}", fe)
            rows += fr
            report += [f"model {j} (fixed effects)", *_coef_block(fr)]
            report += [f"R2: {fe.r_squared:.6f}  F: {fe.f_stat:.4f}  p(F): {fe.f_pvalue:.4g}"]
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    h = hausman(fe, re_gls(sub))
                report.append(f"Hausman H = {h.statistic:.4f}  df = {h.df}  p = {h.p:.4g}  verdict: {h.verdict(level)}")
                summary.append([j, fe.r_squared, fe.f_stat, h.statistic, h.df, h.p, h.verdict(level)])
            except InputError as exc:
                report.append(f"Hausman not available: {exc}")
                summary.append([j, fe.r_squared, fe.f_stat, np.nan, 0, np.nan, "NA"])
            report.append("")
        extra["models.csv"] = pd.DataFrame(summary, columns=["model", "r_squared", "f_stat", "hausman_H", "hausman_df", "hausman_p", "verdict"])
    report += ["", STAR_LEGEND]
    table = pd.DataFrame(rows, columns=["model", "term", "estimate", "std_error", "stat", "p", "signif"])
    run.write_frame("estimates.csv", table)
    for name, df in extra.items():
        run.write_frame(name, df)
    run.write_text("report.txt", "\n".join(report) + "\n")
    run.say("\n".join(report))


def _growth_from_rates(path: Path) -> GrowthPanel:
    df = _read_csv(path)
    cols = [c for c in df.columns if c.startswith("gA_")]
    if "t" not in df.columns or not cols:
        raise SchemaError(f"{path}: expected a rates.csv with t and gA_<region> columns")
    return GrowthPanel(tuple(c[3:] for c in cols), df["t"].to_numpy(), df[cols].to_numpy(dtype=float).T)


def cmd_convergence(run: Run, args) -> None:
    c = run.cfg.section("convergence")
    if "rates" in c:
        g = _growth_from_rates(run.cfg.resolve(c["rates"]))
        xlabel = "time"
    elif "panel" in c:
        raw = load_raw(run.cfg.resolve(c["panel"]))
        span = c.get("growth_span")
        pos = None
        if span:
            years = list(raw.years)
            pos = (years.index(span[0]), years.index(span[1])) if span[0] in years and span[1] in years else None
            if pos is None:
                raise ConfigError(f"growth_span {span} is outside the panel years")
        if raw.years.size < 2:
            print("warning: single-year panel; no growth rates can be formed", file=sys.stderr)
            run.write_frame("sigma.csv", pd.DataFrame(columns=["year", "mean_g", "sigma"]))
            return
        A = knowledge_stock(raw.patents, c.get("tau", DEFAULT_TAU), pos)
        g = growth_rates_empirical(raw.patents, A, raw.regions, raw.years)
        run.write_frame("growth.csv", g.to_frame())
        xlabel = "year"
    else:
        raise ConfigError("convergence needs convergence.panel or convergence.rates (or --panel / --rates)")
    sig = sigma_series(g)
    run.write_frame("sigma.csv", sig.to_frame())
    gstar = c.get("gstar")
    svg = line_chart(
        sig.years,
        [Series("mean g", sig.mean_g), Series("sigma", sig.sigma)],
        title="Cross-region growth rate: mean and dispersion",
        xlabel=xlabel,
        ylabel="growth rate",
        hline=(float(gstar), f"g* = {gstar:g}") if gstar is not None else None,
    )
    run.write_text("sigma.svg", svg)
    if sig.years.size:
        run.say(f"final year {sig.years[-1]}: mean g = {sig.mean_g[-1]:.6g}, sigma = {sig.sigma[-1]:.6g}")


def cmd_synth(run: Run, args) -> None:
    s = run.cfg.section("synth")
    mode = s.get("mode", "dynamics")
    base_year = s.get("base_year", 2000)
    if mode == "dynamics":
        econ, init = cfgmod.economy(run.cfg)
        it = cfgmod.integration(run.cfg)
        years = s.get("years", 20)
        raw = synth_dynamics(econ, init, it["dt"], float(years), s.get("obs_noise_sd", 0.0), run.seed, base_year)
        write_raw(raw, run.path("raw_panel.csv"))
        run.register_external("raw_panel.csv")
        run.say(f"wrote {raw.n_rows} rows for {len(raw.regions)} regions")
    else:
        if "sfa" not in s:
            raise ConfigError("synth mode sfa needs synth.sfa with beta, sigma_sq and gamma_var")
        t = s["sfa"]
        truth = SfaParams(t["beta"], t["sigma_sq"], t["gamma_var"], t.get("eta", 0.0), t.get("mu_trunc", 0.0))
        panel, u = synth_sfa(truth, t.get("N", 100), t.get("T", 15), t.get("x_design"), run.seed, base_year, return_inefficiency=True)
        run.write_frame("sfa_panel.csv", panel_to_frame(panel))
        run.write_frame(
            "sfa_inefficiency.csv",
            pd.DataFrame({"region": np.repeat(panel.region_ids, panel.n_periods), "year": np.tile(panel.years, panel.n_regions), "u": u.reshape(-1)}),
        )
        run.say(f"wrote frontier panel {panel.n_regions} x {panel.n_periods}")


COMMANDS = {
    "simulate": cmd_simulate,
    "equilibrium": cmd_equilibrium,
    "weights": cmd_weights,
    "moran": cmd_moran,
    "estimate": cmd_estimate,
    "convergence": cmd_convergence,
    "synth": cmd_synth,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--out", type=Path, help="output directory (default: $REGIOSIM_OUT or ./regiosim_out)")
    common.add_argument("--seed", type=int, help="seed (unsigned 64-bit); overrides the config")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = argparse.ArgumentParser(prog="regiosim", description="Regional innovation growth with spatial spillovers.", parents=[common])
    parser.add_argument("--version", action="version", version=f"regiosim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="integrate the growth dynamics")
    sub.add_parser("equilibrium", parents=[common], help="steady growth rates by three routes")
    sub.add_parser("weights", parents=[common], help="emit distance, weight and band matrices")
    m = sub.add_parser("moran", parents=[common], help="Moran's I per year")
    m.add_argument("--values", help="CSV with region,year,value")
    m.add_argument("--method", choices=["permutation", "analytic"])
    m.add_argument("--permutations", type=int)
    e = sub.add_parser("estimate", parents=[common], help="frontier and linear panel estimation")
    e.add_argument("mode", nargs="?", choices=["sfa", "fe", "re", "hausman", "bands"])
    e.add_argument("--panel", help="raw panel CSV or a region,year,y,<regressors> CSV")
    e.add_argument("--zero-patents", choices=["error", "log1p"], dest="zero_patents")
    c = sub.add_parser("convergence", parents=[common], help="sigma convergence of growth rates")
    c.add_argument("--panel", help="raw panel CSV")
    c.add_argument("--rates", help="rates.csv written by simulate")
    c.add_argument("--gstar", type=float, help="draw a reference line at this steady growth rate")
    s = sub.add_parser("synth", parents=[common], help="generate synthetic datasets")
    s.add_argument("mode", nargs="?", choices=["dynamics", "sfa"])
    return parser


def _effective_config(args) -> cfgmod.RunConfig:
    cfg = cfgmod.RunConfig.from_file(args.config) if args.config else cfgmod.RunConfig.empty()
    cwd_rel = lambda p: str(Path(p).resolve()) if p is not None else None  # noqa: E731
    overrides = {}
    if args.command == "moran":
        overrides["moran"] = {"values": cwd_rel(args.values), "method": args.method, "permutations": args.permutations}
    elif args.command == "estimate":
        overrides["estimate"] = {"mode": args.mode, "panel": cwd_rel(args.panel), "zero_patents": args.zero_patents}
    elif args.command == "convergence":
        overrides["convergence"] = {"panel": cwd_rel(args.panel), "rates": cwd_rel(args.rates), "gstar": args.gstar}
    elif args.command == "synth":
        overrides["synth"] = {"mode": args.mode}
    if args.seed is not None:
        overrides["seed"] = args.seed
    return cfg.with_overrides(**overrides) if overrides else cfg


def _out_dir(args, cfg: cfgmod.RunConfig) -> Path:
    if args.out is not None:
        return args.out
    if os.environ.get("REGIOSIM_OUT"):
        return Path(os.environ["REGIOSIM_OUT"])
    if "output_dir" in cfg.doc:
        p = Path(cfg.doc["output_dir"])
        return p if p.is_absolute() else cfg.base_dir / p
    return Path(DEFAULT_OUT)


def _report_error(exc: BaseException) -> None:
    msg = f"error: {type(exc).__name__}: {exc}"
    for cls, hint in HINTS.items():
        if isinstance(exc, cls):
            msg += f"\nhint: {hint}"
            break
    print(msg, file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _effective_config(args)
        seed = int(cfg.doc.get("seed", 0))
        if not 0 <= seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        run = Run(args.command, cfg, _out_dir(args, cfg), seed, args.quiet)
        COMMANDS[args.command](run, args)
        run.finish()
    except InputError as exc:
        _report_error(exc)
        return EXIT_INPUT
    except (ComputationError, RegiosimError, ArithmeticError, np.linalg.LinAlgError) as exc:
        _report_error(exc)
        return EXIT_RUNTIME
    except OSError as exc:
        _report_error(exc)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
