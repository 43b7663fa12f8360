"""Command line entry point: ``hadamard-mp <study> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .ensembles import DimensionTriple, EnsembleSpec, EntryDistribution, FAMILIES
from .errors import ConfigurationError, HadamardMPError
from .harness import DEFAULT_SEED, STUDY_KINDS, StudyConfig, run_study, write_report

log = logging.getLogger("hadamard_mp")


def _dims(text: str) -> DimensionTriple:
    try:
        n, d, p = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected n,d,p integers, got {text!r}")
    return DimensionTriple(n, d, p)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("ensemble")
    g.add_argument("--gamma", type=float, default=0.5, help="target n/(dp)")
    g.add_argument("--a", type=float, default=2.0, help="target p/d")
    g.add_argument("--n", type=int, action="append", dest="n_values", help="matrix order (repeatable)")
    g.add_argument("--dims", type=_dims, help="explicit n,d,p (overrides --gamma/--a/--n)")
    g.add_argument("--dist-x", choices=FAMILIES, default="gaussian")
    g.add_argument("--dist-y", choices=FAMILIES, default="gaussian")
    g.add_argument("--scale-x", type=float, default=1.0)
    g.add_argument("--scale-y", type=float, default=1.0)
    g.add_argument("--nu", type=float, help="student_t degrees of freedom")
    g.add_argument("--allow-infinite-fourth-moment", action="store_true")
    g.add_argument("--no-normalize", action="store_true", help="do not divide M by sigma_x^2 sigma_y^2")
    s = common.add_argument_group("study")
    s.add_argument("--trials", type=int)
    s.add_argument("--k-max", type=int, default=4)
    s.add_argument("--c", type=float, action="append", dest="c_values", help="truncation level (repeatable)")
    s.add_argument("--truncate", choices=("both", "x-only"), default="both")
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--bins", type=int, default=60)
    o = common.add_argument_group("execution")
    o.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    o.add_argument("--format", choices=("csv", "json"), default="json")
    o.add_argument("--mem-cap-gb", type=float, default=4.0)
    o.add_argument("--threads", type=int, default=1)
    o.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="hadamard-mp",
        description="Monte Carlo and exact checks of the spectrum of (XX^T/d) o (YY^T/p) against Marchenko-Pastur.",
    )
    sub = parser.add_subparsers(dest="study", required=True)
    for kind in STUDY_KINDS:
        sub.add_parser(kind, parents=[common])
    return parser


def _dist(family: str, scale: float, args) -> EntryDistribution:
    nu = args.nu if family == "student_t" else None
    return EntryDistribution(family, scale, nu, args.allow_infinite_fourth_moment)


def config_from_args(args) -> StudyConfig:
    spec = EnsembleSpec(
        dist_x=_dist(args.dist_x, args.scale_x, args),
        dist_y=_dist(args.dist_y, args.scale_y, args),
        normalize=not args.no_normalize,
    )
    kw = {}
    if args.c_values:
        kw["c_values"] = sorted(args.c_values)
    return StudyConfig(
        kind=args.study,
        ensemble=spec,
        gamma=args.gamma,
        a=args.a,
        n_values=args.n_values or (1000,),
        dims=args.dims,
        trials=args.trials,
        k_max=args.k_max,
        truncate=args.truncate,
        master_seed=args.seed,
        bins=args.bins,
        out_dir=args.out,
        fmt=args.format,
        threads=args.threads,
        mem_cap_gb=args.mem_cap_gb,
        **kw,
    )


def _setup_logging(out_dir: Path, verbose: bool) -> logging.Handler:
    out_dir.mkdir(parents=True, exist_ok=True)
    log.setLevel(logging.DEBUG if verbose else logging.INFO)
    fh = logging.FileHandler(out_dir / "run.log", mode="w", encoding="utf-8")
    fh.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    log.addHandler(fh)
    if not any(isinstance(h, logging.StreamHandler) and not isinstance(h, logging.FileHandler) for h in log.handlers):
        sh = logging.StreamHandler(sys.stderr)
        sh.setFormatter(logging.Formatter("%(message)s"))
        log.addHandler(sh)
    return fh


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fh = None
    try:
        config = config_from_args(args)
        fh = _setup_logging(config.out_dir, args.verbose)
        t0 = time.perf_counter()
        report = run_study(config)
        paths = write_report(report, config.out_dir, config.fmt)
        log.info("%s finished in %.2fs; wrote %s", config.kind, time.perf_counter() - t0, ", ".join(p.name for p in paths))
        return 0
    except HadamardMPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ConfigurationError.exit_code
    finally:
        if fh is not None:
            log.removeHandler(fh)
            fh.close()


if __name__ == "__main__":
    sys.exit(main())
