#!/usr/bin/env python3
"""Build the small MNIST 0-vs-1 subset used by the S-MNIST task.

The digits come from the `mnist` npm package, which ships 1001 images per
class as JSON arrays of 784 intensities in [0, 1]. The script writes
standard IDX files (train 1024 images, test 256 images, classes balanced and
interleaved) so the C++ loader reads them like the original distribution.

    npm pack mnist@1.1.0 && tar xzf mnist-1.1.0.tgz
    python3 scripts/make_mnist01.py --source package/src/digits --out data/mnist01
"""

import argparse
import json
import pathlib
import struct

DIGITS = (0, 1)
PIXELS = 28 * 28


def load_digit(source: pathlib.Path, digit: int) -> list[bytes]:
    flat = json.loads((source / f"{digit}.json").read_text())["data"]
    if len(flat) % PIXELS:
        raise SystemExit(f"{digit}.json does not hold whole 28x28 images")
    images = []
    for k in range(len(flat) // PIXELS):
        chunk = flat[k * PIXELS:(k + 1) * PIXELS]
        images.append(bytes(min(255, max(0, round(v * 255))) for v in chunk))
    return images


def write_images(path: pathlib.Path, images: list[bytes]) -> None:
    with path.open("wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(img)


def write_labels(path: pathlib.Path, labels: list[int]) -> None:
    with path.open("wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--source", type=pathlib.Path, required=True, help="directory holding 0.json .. 9.json")
    ap.add_argument("--out", type=pathlib.Path, default=pathlib.Path("data/mnist01"))
    ap.add_argument("--train-per-class", type=int, default=512)
    ap.add_argument("--test-per-class", type=int, default=128)
    args = ap.parse_args()

    per_digit = {d: load_digit(args.source, d) for d in DIGITS}
    need = args.train_per_class + args.test_per_class
    for d, imgs in per_digit.items():
        if len(imgs) < need:
            raise SystemExit(f"digit {d}: {len(imgs)} images, need {need}")

    def interleave(lo: int, hi: int):
        images, labels = [], []
        for k in range(lo, hi):
            for d in DIGITS:
                images.append(per_digit[d][k])
                labels.append(d)
        return images, labels

    args.out.mkdir(parents=True, exist_ok=True)
    tr_img, tr_lab = interleave(0, args.train_per_class)
    te_img, te_lab = interleave(args.train_per_class, need)
    write_images(args.out / "train-images-idx3-ubyte", tr_img)
    write_labels(args.out / "train-labels-idx1-ubyte", tr_lab)
    write_images(args.out / "t10k-images-idx3-ubyte", te_img)
    write_labels(args.out / "t10k-labels-idx1-ubyte", te_lab)
    print(f"wrote {len(tr_img)} train and {len(te_img)} test images to {args.out}")


if __name__ == "__main__":
    main()
