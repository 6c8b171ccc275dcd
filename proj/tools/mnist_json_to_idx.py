#!/usr/bin/env python3
"""Convert the digit JSON files of the npm `mnist` package to an IDX pair.

Each <digit>.json holds {"data": [...]} with 784 floats per image, rounded to
three decimals of byte/255. Bytes are recovered by rounding.

    python3 tools/mnist_json_to_idx.py /path/to/mnist/src/digits data/mnist
"""

import argparse
import json
import pathlib
import struct

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049
SIDE = 28


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("digits_dir", type=pathlib.Path)
    ap.add_argument("out_dir", type=pathlib.Path)
    args = ap.parse_args()

    pixels = bytearray()
    labels = bytearray()
    for digit in range(10):
        values = json.loads((args.digits_dir / f"{digit}.json").read_text())["data"]
        if len(values) % (SIDE * SIDE):
            raise SystemExit(f"{digit}.json: {len(values)} values is not a whole number of images")
        pixels.extend(min(255, max(0, round(v * 255))) for v in values)
        labels.extend([digit] * (len(values) // (SIDE * SIDE)))

    count = len(labels)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    with open(args.out_dir / "images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", IMAGE_MAGIC, count, SIDE, SIDE))
        f.write(pixels)
    with open(args.out_dir / "labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", LABEL_MAGIC, count))
        f.write(labels)
    print(f"wrote {count} images to {args.out_dir}")


if __name__ == "__main__":
    main()
