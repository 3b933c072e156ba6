#!/usr/bin/env python3
"""Bandwidth experiment: what does text-to-image conversion cost?

Renders N random fixed-length strings with the default typography and
reports raster and encoded sizes. A historical reference for this setup is
a 7.4 KB mean uncompressed size for 100-character strings (measured with a
different font stack); expect the same order of magnitude, not the same
number.

Usage: python scripts/size_calibration.py [--count 1000] [--length 100] [--seed 7]
"""

import argparse
import random
import statistics
import string
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from latebind.render import DEFAULT_SPEC, render_static  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=1000)
    parser.add_argument("--length", type=int, default=100)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    alphabet = string.ascii_letters + string.digits + "      "

    raster, encoded, heights = [], [], []
    for _ in range(args.count):
        text = "".join(rng.choice(alphabet) for _ in range(args.length))
        assets = render_static(text, DEFAULT_SPEC)
        raster.append(sum(a.width * a.height for a in assets))
        encoded.append(sum(a.byte_length for a in assets))
        heights.append(sum(a.height for a in assets))

    kb = 1024.0
    print(f"strings             {args.count} x {args.length} chars (seed {args.seed})")
    print(f"uncompressed raster mean {statistics.mean(raster)/kb:7.1f} KB   "
          f"median {statistics.median(raster)/kb:7.1f} KB   max {max(raster)/kb:7.1f} KB")
    print(f"encoded PNG         mean {statistics.mean(encoded)/kb:7.1f} KB   "
          f"median {statistics.median(encoded)/kb:7.1f} KB   max {max(encoded)/kb:7.1f} KB")
    print(f"image height        mean {statistics.mean(heights):7.1f} px")
    print("reference figure: 7.4 KB mean uncompressed for 100-char strings (different font)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
