"""`extract` command line: pretrained-backbone embeddings to CSV + sidecar."""

from __future__ import annotations

import argparse
import json
import sys

from .extractor import ExtractionConfig, extract_embeddings


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="extract",
        description="Extract 512-dim global-pool embeddings of the CIFAR-10 test set to CSV.",
    )
    p.add_argument("--out", required=True, help="output CSV path (sidecar written alongside)")
    p.add_argument("--batch", type=int, default=256, help="inference batch size (default 256)")
    p.add_argument("--device", default="cpu", help="torch device selector (default cpu)")
    p.add_argument("--data-root", default="./data",
                   help="dataset cache directory (default ./data)")
    return p


def cli_main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = ExtractionConfig(
        out=args.out, batch_size=args.batch, device=args.device, data_root=args.data_root
    )
    try:
        data = extract_embeddings(cfg)
    except Exception as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2
    print(f"wrote {data.shape[0]} x {data.shape[1]} embeddings to {args.out}")
    return 0


def main():
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
