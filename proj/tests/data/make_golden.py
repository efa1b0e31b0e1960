#!/usr/bin/env python3
"""Regenerates golden_mlp.bin and golden_mlp.txt with numpy.

The weight stream layout: b"FMNN", u32 version, u32 layer count, u64 sizes,
then per layer the row-major weights followed by the bias, all little-endian.
"""
import struct
from pathlib import Path

import numpy as np

here = Path(__file__).resolve().parent
rng = np.random.default_rng(20240611)
sizes = [3, 5, 4, 2]
layers = []
for n_in, n_out in zip(sizes[:-1], sizes[1:]):
    w = rng.uniform(-1.0, 1.0, size=(n_out, n_in))
    b = rng.uniform(-0.5, 0.5, size=n_out)
    layers.append((w, b))

blob = bytearray(b"FMNN")
blob += struct.pack("<II", 1, len(sizes))
for s in sizes:
    blob += struct.pack("<Q", s)
for w, b in layers:
    blob += w.astype("<f8").tobytes(order="C")
    blob += b.astype("<f8").tobytes()
(here / "golden_mlp.bin").write_bytes(bytes(blob))

x = rng.uniform(-2.0, 2.0, size=(sizes[0], 6))
a = x
for k, (w, b) in enumerate(layers):
    a = w @ a + b[:, None]
    if k + 1 < len(layers):
        a = np.maximum(a, 0.0)

# Adam on a single 2x2 block with a fixed gradient sequence.
lr, b1, b2, eps = 1e-2, 0.9, 0.999, 1e-8
p = np.array([[0.5, -1.0], [2.0, 0.25]])
m = np.zeros_like(p)
v = np.zeros_like(p)
grads = [np.array([[1.0, -2.0], [0.5, 0.0]]), np.array([[-0.3, 4.0], [0.1, 1e-3]]),
         np.array([[2.0, 2.0], [-1.0, -1.0]])]
for t, g in enumerate(grads, start=1):
    m = b1 * m + (1 - b1) * g
    v = b2 * v + (1 - b2) * g * g
    mh = m / (1 - b1**t)
    vh = v / (1 - b2**t)
    p = p - lr * mh / (np.sqrt(vh) + eps)

with open(here / "golden_mlp.txt", "w") as f:
    f.write("# inputs: %d x %d, column per sample\n" % x.shape)
    for row in x:
        f.write(" ".join(repr(float(c)) for c in row) + "\n")
    f.write("# outputs: %d x %d\n" % a.shape)
    for row in a:
        f.write(" ".join(repr(float(c)) for c in row) + "\n")
    f.write("# adam grads (3 steps), then final params, row-major 2x2\n")
    for g in grads:
        f.write(" ".join(repr(float(c)) for c in g.ravel()) + "\n")
    f.write(" ".join(repr(float(c)) for c in p.ravel()) + "\n")
