"""Command-line interface.

    rankdnn-exporter export --data DIR --backbone NAME --out FILE.fvec
                            [--resolution N] [--batch-size B]
    rankdnn-exporter backbones

Exit codes: 0 success, 1 exporter error (message on stderr), 2 usage.
"""

from __future__ import annotations

import argparse
import sys

from .backbones import BACKBONE_NAMES, _FILE_BACKED, get_backbone, weights_dir
from .errors import ExporterError
from .export import ExportManifest, export_features


def cmd_export(args) -> int:
    manifest = ExportManifest(
        root=args.data,
        backbone=args.backbone,
        out=args.out,
        resolution=args.resolution,
        batch_size=args.batch_size,
    )
    result = export_features(manifest)
    print(f"wrote {result.count} rows of dim {result.dim} "
          f"to {result.fvec_path}")
    if result.skipped:
        print(f"skipped {len(result.skipped)} undecodable file(s); "
              f"details in the sidecar")
    print(f"sidecar {result.sidecar_path}")
    return 0


def cmd_backbones(args) -> int:
    for name in BACKBONE_NAMES:
        if name in _FILE_BACKED:
            path = weights_dir() / _FILE_BACKED[name][1]
            status = "present" if path.is_file() else "missing"
            source = f"weights file {path} ({status})"
            dim = _FILE_BACKED[name][0][-1]
        else:
            backbone = get_backbone(name)
            source = "seeded (built in)"
            dim = backbone.dim
        print(f"{name:12s} dim {dim:4d}  {source}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rankdnn-exporter",
        description="Export image-folder features to .fvec files.")
    sub = parser.add_subparsers(dest="command", required=True)

    export = sub.add_parser("export", help="run a backbone over a folder")
    export.add_argument("--data", required=True,
                        help="dataset root: root/<class_name>/<image>")
    export.add_argument("--backbone", required=True,
                        help=f"one of {BACKBONE_NAMES}")
    export.add_argument("--out", required=True, help="output .fvec path")
    export.add_argument("--resolution", type=int, default=None,
                        help="square working resolution (backbone default "
                             "when omitted)")
    export.add_argument("--batch-size", dest="batch_size", type=int,
                        default=32)
    export.set_defaults(func=cmd_export)

    backbones = sub.add_parser("backbones", help="list available backbones")
    backbones.set_defaults(func=cmd_backbones)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ExporterError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
