"""Command-line entry point: subcommand dispatch and CSV emission.

Every output file carries comment lines (#-prefixed) holding the fully
resolved config, which re-parses to the RunConfig that produced the file,
plus the seeding scheme. Bodies are deterministic for a fixed seed and
independent of the worker count.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import __version__
from .basis import (TensorBasisOrdering, build_ortho_polys,
                    compatible_theta_indices, kappa_inverse)
from .chaos import (chaos_orthogonality_check, hida_norm_neg_q,
                    multi_indices_up_to)
from .config import (ConfigError, RunConfig, parse_config, serialize_config,
                     with_overrides)
from .fracheat import HeatConfig, solve, tumor_preset
from .mittag_leffler import mittag_leffler
from .sheets import Domain, simulate_brownian_sheet, simulate_levy_sheet
from .whitenoise import (covariance_partial_sum, covariance_target,
                         levy_noise_expansion)

OUT_DIR_ENV = "LEVYSHEET_OUT_DIR"


def _resolve_out(path: str) -> str:
    """Environment may override the output directory, never the name."""
    override = os.environ.get(OUT_DIR_ENV)
    if override:
        return os.path.join(override, os.path.basename(path))
    return path


def write_csv(path: str, cfg: RunConfig, header, rows):
    path = _resolve_out(path)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# levysheet {__version__} {cfg.subcommand}\n")
        fh.write("# seeding: Philox keyed by (base seed, stream index); "
                 "blocks of fixed size reduce in block order\n")
        for line in serialize_config(cfg).splitlines():
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating))
                             else v for v in row])
    return path


def read_config_comment(path: str) -> RunConfig:
    """Re-parse the config echoed in a CSV produced by write_csv."""
    lines = []
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            body = line[1:].strip()
            if "=" in body or body.startswith("["):
                lines.append(body)
    return parse_config("\n".join(lines))


def _domain(cfg: RunConfig) -> Domain:
    return Domain(upper=cfg.domain.upper, lower=cfg.domain.lower)


def cmd_simulate_sheet(cfg: RunConfig) -> str:
    dom = _domain(cfg)
    if cfg.sheet.kind == "brownian":
        grid = tuple(np.linspace(lo, hi, cfg.sheet.grid_points)
                     for lo, hi in zip(dom.lower, dom.upper))
        path = simulate_brownian_sheet(dom, grid, cfg.mc.seed)
        header = [f"idx_{a + 1}" for a in range(dom.n)] + ["increment"]
        rows = [list(idx) + [float(v)]
                for idx, v in np.ndenumerate(path.increments)]
        return write_csv(cfg.out, cfg, header, rows)
    path = simulate_levy_sheet(cfg.measure.build(), dom,
                               cfg.truncation.epsilon, cfg.mc.seed)
    header = [f"loc_{a + 1}" for a in range(dom.n)] + ["mark"]
    rows = [list(map(float, loc)) + [float(m)]
            for loc, m in zip(path.locations, path.marks)]
    return write_csv(cfg.out, cfg, header, rows)


def cmd_basis(cfg: RunConfig) -> str:
    rows = [[k, *kappa_inverse(k)] for k in range(1, cfg.basis.j_max + 1)]
    return write_csv(cfg.out, cfg, ["k", "i", "j"], rows)


def cmd_chaos_check(cfg: RunConfig) -> str:
    measure = cfg.measure.build()
    system = build_ortho_polys(measure)
    n = len(np.atleast_1d(cfg.domain.upper))
    A = cfg.chaos.domain_halfwidth
    dom = Domain(upper=tuple(A for _ in range(n)),
                 lower=tuple(-A for _ in range(n)))
    ordering = TensorBasisOrdering(n=n)
    theta_ks = compatible_theta_indices(system, cfg.chaos.n_theta)
    alphas = multi_indices_up_to(theta_ks, cfg.chaos.max_order)
    res = chaos_orthogonality_check(measure, dom, system, ordering, alphas,
                                    cfg.mc.n_samples, cfg.mc.seed,
                                    cfg.truncation.epsilon, cfg.mc.workers)
    rows = []
    for a, alpha in enumerate(alphas):
        for b in range(a, len(alphas)):
            rows.append([alpha.label(), alphas[b].label(),
                         float(res["moments"][a, b]), float(res["se"][a, b]),
                         float(res["target"][a, b])])
    return write_csv(cfg.out, cfg, ["alpha", "beta", "moment", "se", "target"],
                     rows)


def cmd_whitenoise(cfg: RunConfig) -> str:
    measure = cfg.measure.build()
    system = build_ortho_polys(measure)
    x = np.atleast_1d(cfg.whitenoise.x)
    ordering = TensorBasisOrdering(n=x.size)
    M = measure.moment(2)
    target = covariance_target(x, x, M)
    rows = []
    for J in cfg.whitenoise.levels:
        cov = covariance_partial_sum(x, x, int(J), system, ordering)
        noise = levy_noise_expansion(x, int(J), system, ordering)
        rows.append([int(J), cov, target, abs(cov - target),
                     hida_norm_neg_q(noise, cfg.whitenoise.hida_q)])
    return write_csv(cfg.out, cfg,
                     ["J", "cov_partial_sum", "cov_target", "cov_abs_err",
                      "hida_neg_norm_sq"], rows)


def cmd_ml_eval(cfg: RunConfig) -> str:
    zs = np.linspace(cfg.ml.z_min, cfg.ml.z_max, cfg.ml.n_points)
    rows = [[float(z), mittag_leffler(cfg.ml.alpha, cfg.ml.beta, float(z))]
            for z in zs]
    return write_csv(cfg.out, cfg, ["z", "value"], rows)


def cmd_solve_heat(cfg: RunConfig) -> str:
    if cfg.preset == "tumor":
        heat = tumor_preset(n_samples=cfg.mc.n_samples, seed=cfg.mc.seed,
                            workers=cfg.mc.workers)
    elif cfg.preset:
        raise ConfigError([f"preset: unknown {cfg.preset!r}"])
    else:
        h = cfg.heat
        measure = cfg.measure.build() if h.gamma != 0.0 else None
        heat = HeatConfig(alpha=h.alpha, lam=h.lam, sigma=h.sigma,
                          gamma=h.gamma, d=h.d, t=h.t,
                          x_points=tuple(h.x_points), measure=measure,
                          epsilon=cfg.truncation.epsilon, nt=h.nt, nx=h.nx,
                          x_max=(cfg.truncation.X_max or None),
                          n_samples=cfg.mc.n_samples, seed=cfg.mc.seed,
                          workers=cfg.mc.workers)
    if heat.alpha_gt_one:
        print("warning: alpha > 1 — kernel positivity is lost and only the "
              "isometry oracle applies", file=sys.stderr)
    stats = solve(heat)
    rows = [[s.x, s.i1, s.mean_y, s.var_y, s.se_y, s.bias_estimate]
            for s in stats]
    return write_csv(cfg.out, cfg,
                     ["x", "I1", "mean_Y", "var_Y", "se_Y", "bias_estimate"],
                     rows)


_DISPATCH = {
    "simulate-sheet": cmd_simulate_sheet,
    "basis": cmd_basis,
    "chaos-check": cmd_chaos_check,
    "whitenoise": cmd_whitenoise,
    "ml-eval": cmd_ml_eval,
    "solve-heat": cmd_solve_heat,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levysheet",
        description="Levy-sheet white-noise calculus and the fractional "
                    "stochastic heat equation")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _DISPATCH:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="TOML config file")
        sp.add_argument("--out", help="output CSV path")
        sp.add_argument("--seed", type=int, help="base RNG seed")
        sp.add_argument("--workers", type=int, help="worker count")
        if name == "solve-heat":
            sp.add_argument("--preset", help="named scenario (tumor)")
    return parser


def run(cfg: RunConfig) -> str:
    """Dispatch a validated config; returns the written CSV path."""
    return _DISPATCH[cfg.subcommand](cfg)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            with open(args.config) as fh:
                cfg = parse_config(fh.read())
        else:
            cfg = RunConfig(subcommand=args.subcommand)
        cfg = with_overrides(cfg, subcommand=args.subcommand, out=args.out,
                             seed=args.seed, workers=args.workers,
                             preset=getattr(args, "preset", None))
        path = run(cfg)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
