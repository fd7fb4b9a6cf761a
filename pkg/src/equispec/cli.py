"""Command-line front end: ``equispec generate|analytic|cavity|compare``.

Exit codes: 0 ok, 1 usage, 2 infeasible structure or parameters,
3 sampling failure, 4 solver failure.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .cavity import (
    DEFAULT_DAMPING,
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    PLOT_EPSILON,
    DensityCurve,
    density_grid,
)
from .core_periphery import (
    CorePeripheryParams,
    analytic_density,
    band_weight,
    spectral_summary,
    support_intervals,
    isolated_eigenvalues,
)
from .empirical import compare, ensemble_spectrum, spectrum_from_density
from .errors import (
    DomainError,
    EigensolverError,
    InfeasibleError,
    SamplingError,
    StructureError,
)
from .graphs import BlockStructure, generate_equitable, load_structure, validate_structure, write_blocks, write_edge_list

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_SAMPLING, EXIT_SOLVER = range(5)
SEED_ENV = "EQUISPEC_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_grid(text: str) -> tuple:
    """``lo:hi:npoints`` -> ``(lo, hi, npoints)``."""
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise UsageError(f"grid must look like lo:hi:npoints, got {text!r}") from None
    if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi or n < 2:
        raise UsageError(f"grid {text!r} needs finite lo < hi and at least 2 points")
    return lo, hi, n


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        raise UsageError(f"a seed is required: pass --seed or set {SEED_ENV}")
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None


def _structure(args) -> BlockStructure:
    if args.structure is not None:
        if not Path(args.structure).exists():
            raise UsageError(f"structure file {args.structure} does not exist")
        return load_structure(args.structure)
    if None in (args.core, args.k, args.kp):
        raise UsageError("give either --structure FILE or all of --core, --k, --kp")
    return BlockStructure.core_periphery(args.core, args.k, args.kp)


def _write_manifest(out: Path, command: str, args, extra=None) -> None:
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    manifest = {
        "command": command,
        "config": config,
        "versions": {
            "equispec": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }
    if extra:
        manifest.update(extra)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_generate(args) -> int:
    s = _structure(args)
    seed = _resolve_seed(args)
    report = validate_structure(s)
    if not report.ok:
        raise StructureError(report.violations)
    g = generate_equitable(s, np.random.default_rng(seed), max_restarts=args.max_restarts)
    out = _outdir(args)
    write_edge_list(g, out / "edges.txt", seed=seed)
    write_blocks(g, out / "blocks.txt")
    _write_manifest(out, "generate", args, {"seed": seed})
    print(f"wrote {len(g.edges)} edges on {g.n_vertices} vertices to {out}")
    return EXIT_OK


def cmd_analytic(args) -> int:
    lo, hi, n = parse_grid(args.grid)
    if args.k < 2:
        raise DomainError(f"k={args.k} unsupported, need k >= 2")
    grid = np.linspace(lo, hi, n)
    curve = DensityCurve(
        grid, analytic_density(grid, args.k, args.kp), None, {"k": args.k, "kp": args.kp}
    )
    out = _outdir(args)
    curve.write(out / "density.csv", out / "density.json")
    if args.kp >= 1:
        summary = spectral_summary(CorePeripheryParams(args.k, args.kp, args.core)).to_dict()
    else:
        lm, lp = isolated_eigenvalues(args.k, 0)
        summary = {
            "k": args.k, "kp": 0, "n_core": args.core,
            "support": [list(iv) for iv in support_intervals(args.k, 0)],
            "lambda_minus": lm, "lambda_plus": lp,
            "zero_multiplicity": 0, "continuous_fraction": (args.core - 1) / args.core,
        }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    _write_manifest(out, "analytic", args)
    return EXIT_OK


def cmd_cavity(args) -> int:
    lo, hi, n = parse_grid(args.grid)
    s = _structure(args)
    report = validate_structure(s)
    if not report.ok:
        raise StructureError(report.violations)
    if args.normalize_bands and args.structure is not None:
        raise UsageError("--normalize-bands needs the inline --core/--k/--kp form")
    curve = density_grid(
        s, lo, hi, n, epsilon=args.epsilon, threads=args.threads,
        tol=args.tol, max_iter=args.max_iter, damping=args.damping,
    )
    if args.normalize_bands:
        curve.rho = curve.rho / band_weight(args.kp)
        curve.meta["normalized_bands"] = True
    out = _outdir(args)
    curve.write(out / "density.csv", out / "density.json")
    _write_manifest(out, "cavity", args)
    for lam, msg in curve.failures:
        print(f"point lambda={lam}: {msg}", file=sys.stderr)
    if len(curve) == 0:
        print("every grid point failed", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_compare(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    params = CorePeripheryParams(args.k, args.kp, args.core)
    summary = spectral_summary(params)

    def density(lam):
        return analytic_density(lam, args.k, args.kp)

    extra = {}
    if args.self_check:
        spectrum = spectrum_from_density(density, summary.support, args.samples * params.n_vertices)
    else:
        seed = _resolve_seed(args)
        extra["seed"] = seed
        spectrum = ensemble_spectrum(
            params.structure(), args.samples, seed, summary=summary,
            zero_tol=args.zero_tol, isolated_tol=args.isolated_tol, threads=args.threads,
        )
    result = compare(spectrum, density, n_bins=args.bins, support=summary.support)
    out = _outdir(args)
    spectrum.write_csv(out / "spectrum.csv")
    result.write_csv(out / "histogram.csv")
    result.write_json(out / "comparison.json")
    _write_manifest(out, "compare", args, extra)
    print(f"l1={result.l1_distance:.6f} sup_cdf={result.sup_cdf_distance:.6f} bins={result.n_bins}")
    return EXIT_OK


def _add_structure_args(p):
    p.add_argument("--structure", help="JSON file {sizes: [...], connectivity: [[...]]}")
    p.add_argument("--core", type=int, help="core size N_c")
    p.add_argument("--k", type=int, help="core-core degree")
    p.add_argument("--kp", type=int, help="core-periphery degree")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="equispec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    threads = os.cpu_count() or 1

    p = sub.add_parser("generate", help="sample one equitable graph")
    _add_structure_args(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-restarts", type=int, default=1000)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("analytic", help="closed-form core-periphery density")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--kp", type=int, required=True)
    p.add_argument("--core", type=int, default=500, help="core size used in the summary")
    p.add_argument("--grid", default="-8:8:1601")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("cavity", help="numerical block cavity density")
    _add_structure_args(p)
    p.add_argument("--grid", default="-8:8:1601")
    p.add_argument("--epsilon", type=float, default=PLOT_EPSILON)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--damping", type=float, default=DEFAULT_DAMPING)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--normalize-bands", action="store_true",
                   help="rescale a core-periphery curve to unit mass over the bands")
    p.add_argument("--threads", type=int, default=threads)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_cavity)

    p = sub.add_parser("compare", help="ensemble histogram against the closed form")
    p.add_argument("--core", type=int, default=500)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--kp", type=int, default=4)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--zero-tol", type=float, default=1e-8)
    p.add_argument("--isolated-tol", type=float, default=1e-6)
    p.add_argument("--self-check", action="store_true",
                   help="compare the density against its own quantiles instead of sampling")
    p.add_argument("--threads", type=int, default=threads)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_compare)
    return parser


def _join_grid(argv):
    # "--grid -8:8:1601" would otherwise be read as an unknown flag
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--grid":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--grid={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_grid(argv))
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"equispec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StructureError, InfeasibleError, DomainError) as exc:
        print(f"equispec: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SamplingError as exc:
        print(f"equispec: sampling failure: {exc}", file=sys.stderr)
        return EXIT_SAMPLING
    except EigensolverError as exc:
        print(f"equispec: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
