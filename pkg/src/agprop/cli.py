"""Command-line benchmark driver.

Examples:
    agprop --dataset synth:powerlaw:10000:4 --algo dynamic --app pagerank \
           --updates 20000 --pattern dr --eta 10 --seeds 1,2,3 --out report.csv
    agprop --config bench.cfg --delta 0.001
"""

import argparse
import sys

from .harness import ALGORITHMS, APPLICATIONS, PATTERNS, BenchConfig, \
    run_benchmark


def build_parser():
    p = argparse.ArgumentParser(
        prog="agprop",
        description="Approximate graph propagation benchmark harness")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--dataset", help="edge-list path or synth:kind:n[:param]")
    p.add_argument("--algo", dest="algos",
                   help=f"comma list from {{{','.join(ALGORITHMS)}}}")
    p.add_argument("--app", dest="apps",
                   help=f"comma list from {{{','.join(APPLICATIONS)}}}")
    p.add_argument("--delta", type=float, help="threshold (default 1/n)")
    p.add_argument("--c", type=float, help="relative error bound")
    p.add_argument("--eta", type=float, help="insertion-to-deletion ratio")
    p.add_argument("--pattern", choices=PATTERNS, help="update pattern")
    p.add_argument("--updates", type=int, help="updates before querying")
    p.add_argument("--updates-file", dest="updates_file",
                   help="replay updates from a file ('I u v' / 'D u v')")
    p.add_argument("--seeds", help="comma list of integer seeds")
    p.add_argument("--out", help="CSV report path")
    p.add_argument("--alpha", type=float, help="geometric weight parameter")
    p.add_argument("--t", type=float, help="Poisson weight parameter")
    p.add_argument("--hop", type=int, help="level for L-hop style weights")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    cfg = BenchConfig.from_file(args.config) if args.config else BenchConfig()
    overrides = {k: v for k, v in vars(args).items()
                 if k != "config" and v is not None}
    cfg = cfg.merged(overrides)
    report = run_benchmark(cfg)
    print(report.format_table())
    if cfg.out:
        print(f"# wrote {len(report.rows)} rows to {cfg.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
