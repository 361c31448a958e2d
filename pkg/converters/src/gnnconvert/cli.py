"""Command line interface.

    gnnconvert convert --source planetoid --in DIR --out DIR
    gnnconvert convert --source planetoid --in DIR --name cora --out DIR
    gnnconvert convert --source ogb --name ogbn-arxiv --out DIR

Planetoid without --name converts every dataset found under --in, each
into its own subdirectory of --out.  With --name the canonical files land
directly in --out.  The output directory must be empty unless --force.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings

from .errors import ConvertError
from .ogb import convert_ogb
from .planetoid import convert_planetoid, detect_names


def build_parser():
    parser = argparse.ArgumentParser(prog="gnnconvert",
                                     description="citation dataset converters")
    sub = parser.add_subparsers(dest="verb", required=True)
    p = sub.add_parser("convert", help="convert a published distribution")
    p.add_argument("--source", required=True, choices=("planetoid", "ogb"),
                   help="distribution family")
    p.add_argument("--in", dest="in_dir", default=".", metavar="DIR",
                   help="directory holding the raw distribution (default: .)")
    p.add_argument("--name", default=None,
                   help="dataset name (required for ogb; optional for planetoid)")
    p.add_argument("--out", required=True, metavar="DIR",
                   help="output dataset directory")
    p.add_argument("--force", action="store_true",
                   help="overwrite a non-empty output directory")
    return parser


def _report(summary) -> None:
    print(f"{summary['name']}: {summary['n']} nodes, {summary['num_edges']} edges, "
          f"{summary['d']} features, {summary['num_classes']} classes "
          f"-> {summary['out']}")


def _convert_planetoid(args) -> None:
    if args.name is not None:
        _report(convert_planetoid(args.in_dir, args.name, args.out,
                                  force=args.force))
        return
    names = detect_names(args.in_dir)
    if not names:
        raise ConvertError(f"no ind.<name>.* files under {args.in_dir!r}")
    for name in names:
        _report(convert_planetoid(args.in_dir, name,
                                  os.path.join(args.out, name),
                                  force=args.force))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    warnings.simplefilter("always")
    try:
        if args.source == "planetoid":
            _convert_planetoid(args)
        else:
            if args.name is None:
                raise ConvertError("--source ogb requires --name (e.g. ogbn-arxiv)")
            _report(convert_ogb(args.name, args.out, in_dir=args.in_dir,
                                force=args.force))
    except (ConvertError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
