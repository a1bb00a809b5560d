#!/usr/bin/env python3
"""Convert the digit JSON files of the npm `mnist` package into IDX files.

The package (https://github.com/cazala/mnist, MIT) ships 10,000 MNIST digits
as per-class JSON arrays of pixel intensities rounded to three decimals. Each
intensity is mapped back to its byte value with round(v * 255), which is
lossless for the 256 levels present. Samples are interleaved with a fixed-seed
permutation so that any prefix is approximately class balanced.

Usage:
    npm pack mnist && tar xzf mnist-*.tgz
    tools/mnist_from_npm.py package/src/digits data/
"""
import argparse
import json
import pathlib
import random
import struct


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("digits_dir", type=pathlib.Path)
    parser.add_argument("out_dir", type=pathlib.Path)
    parser.add_argument("--seed", type=int, default=20190701)
    args = parser.parse_args()

    samples = []
    for digit in range(10):
        values = json.loads((args.digits_dir / f"{digit}.json").read_text())["data"]
        if len(values) % 784:
            raise SystemExit(f"{digit}.json: length {len(values)} is not a multiple of 784")
        for start in range(0, len(values), 784):
            pixels = bytes(int(round(v * 255.0)) for v in values[start:start + 784])
            samples.append((pixels, digit))

    random.Random(args.seed).shuffle(samples)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    n = len(samples)
    with open(args.out_dir / "mnist10k-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, n, 28, 28))
        for pixels, _ in samples:
            f.write(pixels)
    with open(args.out_dir / "mnist10k-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, n))
        f.write(bytes(label for _, label in samples))
    print(f"wrote {n} samples to {args.out_dir}")


if __name__ == "__main__":
    main()
