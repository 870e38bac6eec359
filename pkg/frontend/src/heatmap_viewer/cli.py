"""Batch rendering entry point.

Exit codes: 0 success, 1 bad arguments or schema mismatch.
"""

from __future__ import annotations

import argparse
import sys

from .render import RenderSpec, SchemaError, render_cer, render_sc, save

_KINDS = {"cer": "cer-heatmap", "sc": "sc-sweep"}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="heatmap-viewer",
        description="Render result files into heatmap or sweep figures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    render = sub.add_parser("render", help="render one figure from result files")
    render.add_argument(
        "--kind", choices=sorted(_KINDS), required=True,
        help="cer: marginal heatmap from cer_result.json; "
        "sc: sweep panels from sc_sweep.json",
    )
    render.add_argument(
        "--in", dest="inputs", action="append", required=True, metavar="FILE",
        help="input JSON file; repeat for side-by-side heatmap columns",
    )
    render.add_argument("--out", required=True, help="output image (.svg or .png)")
    render.add_argument("--vmin", type=float, default=1e-4,
                        help="lower color bound (default 1e-4)")
    render.add_argument("--vmax", type=float, default=1e-1,
                        help="upper color bound (default 1e-1)")
    render.add_argument("--threshold", type=float, default=None,
                        help="hide rows whose every cell is below this value")
    args = parser.parse_args(argv)

    try:
        spec = RenderSpec(
            inputs=tuple(args.inputs),
            kind=_KINDS[args.kind],
            out=args.out,
            vmin=args.vmin,
            vmax=args.vmax,
            threshold=args.threshold,
        )
        fig = render_cer(spec) if args.kind == "cer" else render_sc(spec)
        save(fig, spec.out)
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
