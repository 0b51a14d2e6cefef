"""Command line front end.

One subcommand per experiment kind; every subcommand takes the same
flags.  Values are layered kind defaults < ``--config`` file < explicit
flags, and the resulting configuration is echoed into the manifest, so
a run is reproducible from its manifest alone.

Exit codes: 0 success, 1 violated invariant, 2 bad configuration,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import (ConfigError, DomainError, InvariantViolation,
                     MapError, QuadratureError)
from .experiments import KINDS, make_config, run

_KIND_HELP = {
    "kernel-check": "closed-form kernel and jump density vs "
                    "independent quadrature routes",
    "lk-check": "exponent vs its jump-measure integral",
    "sample-stats": "endpoint law, subordinator cross-check, "
                    "increment moments",
    "weak-convergence": "endpoint KS distance from the massless law "
                        "along the mass ladder",
    "couple-distance": "pathwise sup distance of coupled pairs",
    "map-check": "radial transport monotonicity and pushforward "
                 "identity",
    "fk-oracle": "path-integral estimates vs the split-step grid "
                 "solver",
    "sup-convergence": "sup-norm gap to the massless semigroup, "
                       "coupled paths",
    "l2-convergence": "L2 gap to the massless semigroup, coupled "
                      "paths",
    "selftest": "fast invariants across the whole stack",
    "certify-epsilon": "cutoff certification ladder for the "
                       "configured fields",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relfk",
        description="Experiments on the relativistic stable process "
                    "and its path-integral semigroup.")
    sub = parser.add_subparsers(dest="kind", required=True,
                                metavar="kind")
    for kind in KINDS:
        p = sub.add_parser(kind, help=_KIND_HELP[kind])
        p.add_argument("--config", metavar="FILE",
                       help="INI file with [run] and [fields] sections")
        p.add_argument("--out", metavar="DIR",
                       help="output directory (created if missing)")
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int)
        p.add_argument("--mass-ladder", dest="masses", metavar="M,M,...",
                       help="strictly decreasing masses")
        p.add_argument("--eps", type=float,
                       help="small-jump truncation cutoff")
        p.add_argument("--paths", dest="n_paths", type=int)
        p.add_argument("--grid-n", dest="grid_n", type=int)
        p.add_argument("--box-l", dest="box_l", type=float)
        p.add_argument("--dim", type=int)
        p.add_argument("--horizon", type=float)
        p.add_argument("--target", type=float,
                       help="truncation bias target for certification")
        p.add_argument("--a-amp", dest="a_amp", type=float)
        p.add_argument("--a-radius", dest="a_radius", type=float)
        p.add_argument("--v-amp", dest="v_amp", type=float)
        p.add_argument("--v-radius", dest="v_radius", type=float)
        p.add_argument("--g-amp", dest="g_amp", type=float)
        p.add_argument("--g-radius", dest="g_radius", type=float)
    return parser


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    kind = args.pop("kind")
    config_file = args.pop("config")
    out_dir = args.pop("out")
    try:
        config = make_config(kind, out_dir=out_dir,
                             config_file=config_file, **args)
        manifest = run(config)
    except (ConfigError, DomainError) as exc:
        print(f"relfk: configuration error: {exc}", file=sys.stderr)
        return 2
    except (QuadratureError, MapError) as exc:
        print(f"relfk: numerical failure: {exc}", file=sys.stderr)
        return 3
    except InvariantViolation as exc:
        print(f"relfk: invariant violated: {exc}", file=sys.stderr)
        return 1
    print(f"{kind}: {len(manifest.files)} file(s) in {config.out_dir} "
          f"(config {manifest.config_hash}, "
          f"{manifest.wall_time_s:.1f}s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
