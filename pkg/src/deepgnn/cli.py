"""Command line interface.

Verbs:
    run <spec-file>       train an experiment, write results.json + summary.md
    grid <spec-file>      sweep the spec's grid axes, write heatmap.csv
    profile <spec-file>   time epochs, write timing.json
    preset <name>         show (or --emit-spec) a named preset

Common flags: --reps N, --seed-base K, --out DIR, --threads N, --data-dir DIR.
The dataset root may also come from $DEEPGNN_DATA_DIR.
"""

from __future__ import annotations

import argparse
import sys

from .config import format_spec, parse_spec_file, set_option
from .errors import ConfigError, DataFormatError, DivergenceError
from .presets import PRESET_NAMES, get_preset
from .runner import grid_search, profile_epoch, run_experiment


def _add_common(p):
    p.add_argument("--reps", type=int, default=None, help="override repetitions")
    p.add_argument("--seed-base", type=int, default=None, help="first seed")
    p.add_argument("--out", default=None, help="output directory for artifacts")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    p.add_argument("--data-dir", default=None,
                   help="dataset root (default: $DEEPGNN_DATA_DIR)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a spec option, repeatable")


def build_parser():
    parser = argparse.ArgumentParser(prog="deepgnn",
                                     description="deep GNN trick benchmark")
    sub = parser.add_subparsers(dest="verb", required=True)

    for verb, helptext in (("run", "train one experiment"),
                           ("grid", "sweep grid axes into a heatmap"),
                           ("profile", "measure per-epoch wall time")):
        p = sub.add_parser(verb, help=helptext)
        p.add_argument("spec", help="spec file (key = value lines)")
        _add_common(p)

    p = sub.add_parser("preset", help="show a named preset")
    p.add_argument("name", help="preset name, e.g. sweet-cora")
    p.add_argument("--emit-spec", action="store_true",
                   help="print the preset as a parseable spec file")
    return parser


def _load_spec(args):
    spec = parse_spec_file(args.spec)
    if args.reps is not None:
        spec.repetitions = args.reps
    if args.seed_base is not None:
        spec.seed_base = args.seed_base
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, raw = item.split("=", 1)
        set_option(spec, key.strip(), raw.strip())
    spec.validate()
    return spec


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "preset":
            try:
                spec = get_preset(args.name)
            except ConfigError as e:
                print(str(e), file=sys.stderr)
                return 2
            if args.emit_spec:
                sys.stdout.write(format_spec(spec))
            else:
                print(f"{args.name}:")
                for line in format_spec(spec).splitlines():
                    print(f"  {line}")
            return 0

        spec = _load_spec(args)
        if args.verb == "run":
            artifact = run_experiment(spec, out_dir=args.out, threads=args.threads,
                                      data_dir=args.data_dir)
            agg = artifact["aggregate"]
            if agg["n"] == 0:
                print("all runs failed:", file=sys.stderr)
                for item in artifact["failed"]:
                    print(f"  seed {item['seed']}: {item['error']}", file=sys.stderr)
                return 1
            print(f"{spec.dataset} {spec.trick.backbone}-{spec.trick.depth}: "
                  f"test acc {100 * agg['mean_test_acc']:.2f} "
                  f"± {100 * agg['std_test_acc']:.2f} ({agg['n']} runs)")
            if artifact["failed"]:
                print(f"  {len(artifact['failed'])} run(s) failed", file=sys.stderr)
            if "com_search" in artifact:
                print(f"  best COM: {artifact['com_search']['best_com']}")
            return 0

        if args.verb == "grid":
            cells = grid_search(spec, out_dir=args.out, threads=args.threads,
                                data_dir=args.data_dir)
            axes = [k for k in cells[0] if k not in
                    ("mean_test_acc", "std_test_acc", "n", "artifact")]
            for c in cells:
                coord = ", ".join(f"{a}={c[a]}" for a in axes)
                acc = c["mean_test_acc"]
                shown = f"{100 * acc:.2f}" if acc is not None else "failed"
                print(f"{coord}: {shown}")
            return 0

        if args.verb == "profile":
            report = profile_epoch(spec, out_dir=args.out, data_dir=args.data_dir)
            print(f"{spec.dataset} {spec.trick.backbone}-{spec.trick.depth}: "
                  f"median {report['median_epoch_ms']:.2f} ms/epoch "
                  f"over {report['timed_epochs']} epochs")
            return 0
    except (ConfigError, DataFormatError, DivergenceError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    raise AssertionError(f"unhandled verb {args.verb}")


if __name__ == "__main__":
    sys.exit(main())
