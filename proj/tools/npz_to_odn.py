#!/usr/bin/env python3
"""Convert an externally generated operator dataset (.npz or .mat) to ODN1.

The source arrays are named on the command line because public releases use
different layouts. Expected shapes after optional reshaping:

  X  (N_x, d_u)      input sample locations
  Y  (N_y, d_v)      output sample locations
  U  (N, N_x)        input function samples
  V  (N, N_y * c)    output samples, components fastest per location

Example for a Darcy-style release with train and test files:

  npz_to_odn.py darcy.odn --src train.npz --src test.npz \
      --u X_train --v y_train --x-grid 32x32 --y-grid 32x32 --n-train 1900

Multiple --src files are concatenated along N in the order given; the first
file's sample count becomes n_train unless --n-train is set.
"""

import argparse
import os
import struct
import sys
import zlib

import numpy as np

MAGIC = b"ODNSET01"
VERSION = 1


def load(path):
    if path.endswith(".mat"):
        from scipy.io import loadmat  # only needed for .mat inputs

        return {k: v for k, v in loadmat(path).items() if not k.startswith("__")}
    with np.load(path) as f:
        return {k: f[k] for k in f.files}


def grid(spec):
    # "32x32" -> uniform grid on [0,1]^d with endpoints, first axis fastest
    counts = [int(s) for s in spec.lower().split("x")]
    axes = [np.linspace(0.0, 1.0, n) for n in counts]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel(order="F") for m in mesh], axis=1)


def pick(arrays, key, what):
    if key not in arrays:
        sys.exit(f"error: array '{key}' ({what}) not found; have {sorted(arrays)}")
    return np.asarray(arrays[key], dtype=np.float64)


def encode(X, Y, U, V, components, metadata):
    N_x, d_u = X.shape
    N_y, d_v = Y.shape
    N = U.shape[0]
    if U.shape != (N, N_x):
        sys.exit(f"error: U has shape {U.shape}, expected ({N}, {N_x})")
    if V.shape != (N, N_y * components):
        sys.exit(f"error: V has shape {V.shape}, expected ({N}, {N_y * components})")
    for name, a in (("X", X), ("Y", Y), ("U", U), ("V", V)):
        if not np.all(np.isfinite(a)):
            sys.exit(f"error: {name} contains non-finite values")
    out = bytearray(MAGIC)
    out += struct.pack("<7I", VERSION, d_u, d_v, N_x, N_y, N, components)
    for a in (X, Y, U, V):
        out += np.ascontiguousarray(a, dtype="<f8").tobytes()
    meta = "".join(f"{k}={v}\n" for k, v in sorted(metadata.items())).encode("utf-8")
    out += struct.pack("<I", len(meta)) + meta
    out += struct.pack("<I", zlib.crc32(out) & 0xFFFFFFFF)
    return bytes(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out")
    ap.add_argument("--src", action="append", required=True, help="source .npz/.mat (repeatable)")
    ap.add_argument("--u", required=True, help="array with input functions")
    ap.add_argument("--v", required=True, help="array with output functions")
    ap.add_argument("--x", help="array with input locations")
    ap.add_argument("--y", help="array with output locations")
    ap.add_argument("--x-grid", help="generate input locations, e.g. 32x32")
    ap.add_argument("--y-grid", help="generate output locations, e.g. 32x32")
    ap.add_argument("--components", type=int, default=1)
    ap.add_argument("--n-train", type=int)
    ap.add_argument("--name", default="external")
    ap.add_argument("--force", action="store_true")
    args = ap.parse_args()

    sources = [load(p) for p in args.src]
    U = np.concatenate([pick(s, args.u, "U").reshape(len(s[args.u]), -1) for s in sources])
    V = np.concatenate([pick(s, args.v, "V").reshape(len(s[args.v]), -1) for s in sources])
    if args.x:
        X = pick(sources[0], args.x, "X").reshape(U.shape[1], -1)
    elif args.x_grid:
        X = grid(args.x_grid)
    else:
        sys.exit("error: give --x or --x-grid")
    if args.y:
        Y = pick(sources[0], args.y, "Y").reshape(V.shape[1] // args.components, -1)
    elif args.y_grid:
        Y = grid(args.y_grid)
    else:
        sys.exit("error: give --y or --y-grid")

    n_train = args.n_train if args.n_train is not None else len(sources[0][args.u])
    if not 0 < n_train <= U.shape[0]:
        sys.exit(f"error: n_train={n_train} outside 1..{U.shape[0]}")
    data = encode(X, Y, U, V, args.components,
                  {"generator": args.name, "n_train": str(n_train)})

    if os.path.exists(args.out) and not args.force:
        sys.exit(f"error: refusing to overwrite '{args.out}' (use --force)")
    with open(args.out, "wb") as f:
        f.write(data)
    print(f"wrote {args.out}: N={U.shape[0]} N_x={X.shape[0]} N_y={Y.shape[0]} n_train={n_train}")


if __name__ == "__main__":
    main()
