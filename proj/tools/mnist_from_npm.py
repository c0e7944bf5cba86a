#!/usr/bin/env python3
"""Convert the 10,000 MNIST digits bundled with the `mnist` npm package
(https://github.com/cazala/mnist, MIT) into gzipped IDX files.

Usage: npm pack mnist && tar xzf mnist-*.tgz
       python3 tools/mnist_from_npm.py package/src/digits data/mnist

The digits are interleaved with a fixed permutation (seed 20231015) and
split 8000 train / 2000 test. Pixel bytes are recovered as round(v * 255).
"""
import gzip
import json
import random
import struct
import sys
from pathlib import Path


def write_idx_images(path, images):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(bytes(img))


def write_idx_labels(path, labels):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    src, dst = Path(sys.argv[1]), Path(sys.argv[2])
    dst.mkdir(parents=True, exist_ok=True)
    samples = []
    for digit in range(10):
        flat = json.loads((src / f"{digit}.json").read_text())["data"]
        assert len(flat) % 784 == 0
        for i in range(0, len(flat), 784):
            px = [int(round(v * 255)) for v in flat[i:i + 784]]
            samples.append((px, digit))
    random.Random(20231015).shuffle(samples)
    train, test = samples[:8000], samples[8000:]
    for name, part in (("train", train), ("t10k", test)):
        write_idx_images(dst / f"{name}-images-idx3-ubyte.gz", [s[0] for s in part])
        write_idx_labels(dst / f"{name}-labels-idx1-ubyte.gz", [s[1] for s in part])
    print(f"wrote {len(train)} train / {len(test)} test samples to {dst}")


if __name__ == "__main__":
    main()
