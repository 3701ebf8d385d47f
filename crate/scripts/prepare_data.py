#!/usr/bin/env python3
"""Build the desk-scale data sets used by the acceptance suite.

MNIST digits come from the `mnist` npm package (10,000 digits stored as
intensity/255 rounded to three decimals, which recovers the original bytes
exactly). Fashion-MNIST comes from the `fashion-mnist` npm package (raw bytes).

Corrupted test sets are produced with re-implementations of the MNIST-C
shot-noise and motion-blur corruptions, since the published MNIST-C archive
is not reachable from this environment. Point the harness at the real
MNIST-C directory whenever it is available.

Usage: prepare_data.py [--out data] [--fashion] [--npm-dir DIR]
"""
import argparse
import gzip
import json
import math
import os
import struct
import subprocess
import tarfile
import tempfile

import numpy as np

TEST_PER_CLASS = 100


def npm_package(name, npm_dir):
    if npm_dir is None:
        npm_dir = tempfile.mkdtemp(prefix="npm-data-")
    root = os.path.join(npm_dir, name)
    if not os.path.isdir(root):
        tgz = subprocess.check_output(["npm", "pack", name, "--silent"], cwd=npm_dir, text=True)
        tgz = tgz.strip().splitlines()[-1]
        with tarfile.open(os.path.join(npm_dir, tgz)) as tf:
            tf.extractall(root)
    return os.path.join(root, "package", "src")


def write_idx_images(path, images):
    n, h, w = images.shape
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x00000803, n, h, w))
        f.write(images.astype(np.uint8).tobytes())


def write_idx_labels(path, labels):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def load_mnist_digits(src):
    images, labels = [], []
    for digit in range(10):
        with open(os.path.join(src, "digits", f"{digit}.json")) as f:
            data = np.array(json.load(f)["data"], dtype=np.float64)
        imgs = np.rint(data * 255.0).astype(np.uint8).reshape(-1, 28, 28)
        images.append(imgs)
        labels.append(np.full(len(imgs), digit, dtype=np.uint8))
    return images, labels


def load_fashion(src):
    images, labels = [], []
    for cls in range(10):
        with open(os.path.join(src, "clothes", f"{cls}.json")) as f:
            data = json.load(f)["data"]
        imgs = np.array(data, dtype=np.uint8).reshape(-1, 28, 28)
        images.append(imgs)
        labels.append(np.full(len(imgs), cls, dtype=np.uint8))
    return images, labels


def split_and_shuffle(images, labels, test_per_class, seed):
    rng = np.random.default_rng(seed)
    tr_x, tr_y, te_x, te_y = [], [], [], []
    for imgs, labs in zip(images, labels):
        te_x.append(imgs[:test_per_class])
        te_y.append(labs[:test_per_class])
        tr_x.append(imgs[test_per_class:])
        tr_y.append(labs[test_per_class:])
    out = []
    for xs, ys in ((tr_x, tr_y), (te_x, te_y)):
        x = np.concatenate(xs)
        y = np.concatenate(ys)
        order = rng.permutation(len(y))
        out.append((x[order], y[order]))
    return out


# --- MNIST-C style corruptions -------------------------------------------

def shot_noise(x, rng, severity=4):
    c = [60, 25, 12, 5, 3][severity - 1]
    x = np.array(x) / 255.0
    return np.clip(rng.poisson(x * c) / c, 0, 1) * 255


def _gauss(x, mean, sigma):
    return np.exp(-((x - mean) ** 2) / (2 * sigma ** 2)) / (np.sqrt(2 * np.pi) * sigma)


def _shift(image, dx, dy):
    if dx < 0:
        shifted = np.roll(image, shift=image.shape[1] + dx, axis=1)
        shifted[:, dx:] = shifted[:, dx - 1:dx]
    elif dx > 0:
        shifted = np.roll(image, shift=dx, axis=1)
        shifted[:, :dx] = shifted[:, dx:dx + 1]
    else:
        shifted = image
    if dy < 0:
        shifted = np.roll(shifted, shift=image.shape[0] + dy, axis=0)
        shifted[dy:, :] = shifted[dy - 1:dy, :]
    elif dy > 0:
        shifted = np.roll(shifted, shift=dy, axis=0)
        shifted[:dy, :] = shifted[dy:dy + 1, :]
    return shifted


def _motion_blur(x, radius, sigma, angle):
    width = radius * 2 + 1
    kernel = _gauss(np.arange(width), 0, sigma)
    kernel = kernel / np.sum(kernel)
    point = (width * np.sin(np.deg2rad(angle)), width * np.cos(np.deg2rad(angle)))
    hypot = math.hypot(point[0], point[1])
    blurred = np.zeros_like(x, dtype=np.float32)
    for i in range(width):
        dy = -math.ceil(((i * point[0]) / hypot) - 0.5)
        dx = -math.ceil(((i * point[1]) / hypot) - 0.5)
        if abs(dy) >= x.shape[0] or abs(dx) >= x.shape[1]:
            break
        blurred = blurred + kernel[i] * _shift(x, dx, dy)
    return blurred


def motion_blur(x, rng, severity=1):
    c = [(10, 3), (15, 5), (15, 8), (15, 12), (20, 15)][severity - 1]
    angle = rng.uniform(-45, 45)
    return np.clip(_motion_blur(np.array(x, dtype=np.float32), c[0], c[1], angle), 0, 255)


def write_npy_set(dirpath, images, labels):
    os.makedirs(dirpath, exist_ok=True)
    np.save(os.path.join(dirpath, "test_images.npy"), images.reshape(-1, 28, 28, 1).astype(np.uint8))
    np.save(os.path.join(dirpath, "test_labels.npy"), labels.astype(np.uint8))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    ap.add_argument("--npm-dir", default=None)
    ap.add_argument("--fashion", action="store_true", help="also build full Fashion-MNIST")
    ap.add_argument("--seed", type=int, default=2023)
    args = ap.parse_args()

    src = npm_package("mnist", args.npm_dir)
    images, labels = load_mnist_digits(src)
    (trx, try_), (tex, tey) = split_and_shuffle(images, labels, TEST_PER_CLASS, args.seed)
    mnist_dir = os.path.join(args.out, "mnist-desk")
    os.makedirs(mnist_dir, exist_ok=True)
    write_idx_images(os.path.join(mnist_dir, "train-images-idx3-ubyte.gz"), trx)
    write_idx_labels(os.path.join(mnist_dir, "train-labels-idx1-ubyte.gz"), try_)
    write_idx_images(os.path.join(mnist_dir, "t10k-images-idx3-ubyte.gz"), tex)
    write_idx_labels(os.path.join(mnist_dir, "t10k-labels-idx1-ubyte.gz"), tey)
    print(f"mnist-desk: {len(try_)} train, {len(tey)} test")

    rng = np.random.default_rng(args.seed + 1)
    corrupt_dir = os.path.join(args.out, "mnist-c-desk")
    for name, fn in (("shot_noise", shot_noise), ("motion_blur", motion_blur)):
        out = np.stack([fn(img, rng) for img in tex]).astype(np.uint8)
        write_npy_set(os.path.join(corrupt_dir, name), out, tey)
        print(f"mnist-c-desk/{name}: {len(out)} images")

    if args.fashion:
        src = npm_package("fashion-mnist", args.npm_dir)
        images, labels = load_fashion(src)
        (trx, try_), (tex, tey) = split_and_shuffle(images, labels, 1000, args.seed)
        fdir = os.path.join(args.out, "fashion-mnist")
        os.makedirs(fdir, exist_ok=True)
        write_idx_images(os.path.join(fdir, "train-images-idx3-ubyte.gz"), trx)
        write_idx_labels(os.path.join(fdir, "train-labels-idx1-ubyte.gz"), try_)
        write_idx_images(os.path.join(fdir, "t10k-images-idx3-ubyte.gz"), tex)
        write_idx_labels(os.path.join(fdir, "t10k-labels-idx1-ubyte.gz"), tey)
        print(f"fashion-mnist: {len(try_)} train, {len(tey)} test")


if __name__ == "__main__":
    main()
