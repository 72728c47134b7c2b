"""Binary checkpoint container for resumable runs.

Layout (documented here and in the README):

    bytes 0..7    magic b"CWCHKPT1"
    bytes 8..11   uint32 little-endian header length H
    bytes 12..    H bytes of UTF-8 JSON header:
                  {"version": 1, "n_points": n, "length": L,
                   "dealias_fraction": d, "sigma": s, "time": t,
                   "fields": ["Zdev", "Zp", "Zt"], "angle_field": true}
    then          three complex fields, each n little-endian float64
                  (re, im) pairs in grid order, followed by the tracked
                  angle branch g as n little-endian float64

Round-trips are bit-exact.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .evolution import WaveState
from .spectral import SpectralGrid

MAGIC = b"CWCHKPT1"


def save_checkpoint(path, state):
    grid = state.grid
    header = {
        "version": 1,
        "n_points": grid.n,
        "length": grid.length,
        "dealias_fraction": grid.dealias_fraction,
        "sigma": state.sigma,
        "time": state.time,
        "fields": ["Zdev", "Zp", "Zt"],
        "angle_field": True,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for arr in (state.Zdev, state.Zp, state.Zt):
            fh.write(np.ascontiguousarray(arr, dtype="<c16").tobytes())
        fh.write(np.ascontiguousarray(state.g, dtype="<f8").tobytes())


def load_checkpoint(path):
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise ValueError(f"not a crestwave checkpoint (magic {magic!r})")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        if header.get("version") != 1:
            raise ValueError(f"unsupported checkpoint version {header.get('version')}")
        n = int(header["n_points"])
        grid = SpectralGrid(n, float(header["length"]), float(header["dealias_fraction"]))
        fields = []
        for _ in range(3):
            fields.append(np.frombuffer(fh.read(16 * n), dtype="<c16").astype(np.complex128))
        g = np.frombuffer(fh.read(8 * n), dtype="<f8").astype(np.float64)
    Zdev, Zp, Zt = fields
    return WaveState(grid, Zdev, Zp, Zt, float(header["sigma"]), float(header["time"]), g)
