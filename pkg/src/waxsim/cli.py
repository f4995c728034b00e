"""Command-line front end.

Subcommands:

* ``sweep``     - Monte Carlo capacity-ratio sweep over (L, T, SNR), CSV/JSON out.
* ``tmin``      - minimum-T report for given (M, K, L): the closed-form floor
                  formula, the strict trade-off threshold, and the empirically
                  measured solver threshold (the latter two coincide; the floor
                  formula disagrees for some dimensions and is reported as-is).
* ``decompose`` - run the alternating optimizer on one seeded instance and
                  print its objective trajectory and capacity ratios.

Exit codes: 0 success, 1 invalid arguments, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .harness import METHODS, ExperimentSpec, emit, render, run_sweep
from .model import SystemConfig, capacity_ratio, sample_channel
from .optim import INIT_MODES, OptimOptions, optimize
from .wax import (
    CombiningModule,
    effective_transform,
    empirical_t_min,
    t_min,
    tradeoff_threshold,
)


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(","))


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def _method_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="waxsim",
        description="Decentralized multi-antenna processing with unitary "
        "constraints: capacity-ratio simulations.",
    )
    sub = parser.add_subparsers(dest="command")

    p_sweep = sub.add_parser(
        "sweep", help="Monte Carlo capacity-ratio sweep over (L, T, SNR) cells"
    )
    p_sweep.add_argument("--m", type=int, default=12, help="antennas (default 12)")
    p_sweep.add_argument("--k", type=int, default=4, help="users (default 4)")
    p_sweep.add_argument(
        "--l", type=_int_list, default=(1, 2, 3), metavar="L1,L2,...",
        help="panel sizes (default 1,2,3)",
    )
    p_sweep.add_argument("--t-min", type=int, default=None, help="smallest T (default K)")
    p_sweep.add_argument("--t-max", type=int, default=None, help="largest T (default M)")
    p_sweep.add_argument(
        "--snr-db", type=_float_list, default=(0.0, 20.0), metavar="DB1,DB2,...",
        help="SNR points in dB (default 0,20)",
    )
    p_sweep.add_argument("--trials", type=int, default=1000)
    p_sweep.add_argument("--seed", type=int, default=0, help="master seed")
    p_sweep.add_argument(
        "--methods", type=_method_list, default=METHODS, metavar="NAME,...",
        help=f"subset of {','.join(METHODS)}",
    )
    p_sweep.add_argument(
        "--fix-a", action="store_true",
        help="reuse one combining module for all trials of a cell",
    )
    p_sweep.add_argument(
        "--out", default="-", help="output path, or - for stdout (default)"
    )
    p_sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    p_sweep.add_argument(
        "--workers", type=int, default=None,
        help="trial worker processes (default WAXSIM_WORKERS or 1)",
    )

    p_tmin = sub.add_parser(
        "tmin", help="minimum interconnection dimension report for (M, K, L)"
    )
    p_tmin.add_argument("--m", type=int, required=True)
    p_tmin.add_argument("--k", type=int, required=True)
    p_tmin.add_argument("--l", type=int, required=True)
    p_tmin.add_argument("--trials", type=int, default=50, help="channels per T")
    p_tmin.add_argument("--seed", type=int, default=0)

    p_dec = sub.add_parser(
        "decompose", help="optimize one seeded instance and print the trace"
    )
    p_dec.add_argument("--m", type=int, default=12)
    p_dec.add_argument("--k", type=int, default=4)
    p_dec.add_argument("--l", type=int, default=2)
    p_dec.add_argument("--t", type=int, default=8)
    p_dec.add_argument("--seed", type=int, default=0)
    p_dec.add_argument(
        "--snr-db", type=_float_list, default=(0.0, 20.0), metavar="DB1,DB2,...",
        help="SNR points for the reported capacity ratios",
    )
    p_dec.add_argument("--max-iters", type=int, default=500)
    p_dec.add_argument("--restarts", type=int, default=3)
    p_dec.add_argument("--init", choices=INIT_MODES, default="haar-random")
    return parser


def _cmd_sweep(ns: argparse.Namespace) -> int:
    t_lo = ns.t_min if ns.t_min is not None else ns.k
    t_hi = ns.t_max if ns.t_max is not None else ns.m
    spec = ExperimentSpec(
        m=ns.m,
        k=ns.k,
        l_values=ns.l,
        t_range=(t_lo, t_hi),
        snr_db_values=ns.snr_db,
        trials=ns.trials,
        master_seed=ns.seed,
        methods=ns.methods,
        fix_a_across_trials=ns.fix_a,
    )
    result = run_sweep(spec, workers=ns.workers)
    if ns.out == "-":
        sys.stdout.write(render(result, ns.format))
    else:
        emit(result, ns.format, ns.out)
    return 0


def _cmd_tmin(ns: argparse.Namespace) -> int:
    if not (1 <= ns.l <= ns.k <= ns.m) or ns.m % ns.l != 0:
        raise ValueError(
            f"need 1 <= L <= K <= M with L | M, got M={ns.m} K={ns.k} L={ns.l}"
        )
    cfg = SystemConfig(m=ns.m, k=ns.k, l=ns.l, t=ns.k, snr=1.0)
    closed_form = t_min(cfg)
    threshold = max(ns.k, tradeoff_threshold(ns.m, ns.k, ns.l))
    empirical = empirical_t_min(
        ns.m, ns.k, ns.l, trials=ns.trials, rng=np.random.default_rng(ns.seed)
    )
    print(f"M={ns.m} K={ns.k} L={ns.l}")
    print(f"closed-form floor formula T_min : {closed_form}")
    print(f"trade-off condition threshold   : {threshold}")
    print(f"empirical solver threshold      : {empirical}  ({ns.trials} trials per T)")
    return 0


def _cmd_decompose(ns: argparse.Namespace) -> int:
    rng = np.random.default_rng(ns.seed)
    snr = 10.0 ** (ns.snr_db[0] / 10.0)
    cfg = SystemConfig(m=ns.m, k=ns.k, l=ns.l, t=ns.t, snr=snr)
    ch = sample_channel(cfg, rng)
    a = CombiningModule.sample(cfg, rng)
    opts = OptimOptions(max_iters=ns.max_iters, restarts=ns.restarts, init=ns.init)
    res = optimize(ch, a, cfg, opts, rng)
    print(f"M={ns.m} K={ns.k} L={ns.l} T={ns.t} panels={cfg.m_p} seed={ns.seed}")
    for i, j in enumerate(res.j_history, start=1):
        print(f"sweep {i:4d}  J = {j:.12f}")
    print(f"final J = {res.final_j:.12f} (upper bound T = {ns.t})")
    print(f"distance = {res.distance:.6e}")
    print(f"lossless = {'yes' if res.lossless else 'no'}")
    print(f"converged = {'yes' if res.converged else 'no'} "
          f"({res.total_sweeps} sweeps over {ns.restarts} restarts)")
    g = effective_transform(res.w, a)
    for snr_db in ns.snr_db:
        ratio = capacity_ratio(ch, g, 10.0 ** (snr_db / 10.0))
        print(f"capacity ratio @ {snr_db:g} dB : {ratio:.12f}")
    return 0


_COMMANDS = {
    "sweep": _cmd_sweep,
    "tmin": _cmd_tmin,
    "decompose": _cmd_decompose,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 1
    if ns.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[ns.command](ns)
    except (ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
