"""Flat binary checkpoints.

Layout of ``<stem>.bin`` (all integers little-endian uint32)::

    magic    8 bytes  b"TACKPT01"
    count    number of arrays
    per array: ndim, then ndim dimension sizes
    payload  every array's float64 values, row-major, little-endian, in header order

``<stem>.json`` names the arrays in header order and carries the hyperparameters.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import DataError
from .ddpg import DdpgAgent, DdpgHyper

MAGIC = b"TACKPT01"


def write_arrays(path, arrays) -> None:
    arrays = [np.ascontiguousarray(a, dtype="<f8") for a in arrays]
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(arrays)))
        for a in arrays:
            fh.write(struct.pack("<I", a.ndim))
            fh.write(struct.pack(f"<{a.ndim}I", *a.shape))
        for a in arrays:
            fh.write(a.tobytes(order="C"))


def read_arrays(path) -> list:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise DataError(f"{path}: bad checkpoint magic")
    pos = 8
    (count,) = struct.unpack_from("<I", data, pos)
    pos += 4
    shapes = []
    for _ in range(count):
        (ndim,) = struct.unpack_from("<I", data, pos)
        pos += 4
        shapes.append(struct.unpack_from(f"<{ndim}I", data, pos))
        pos += 4 * ndim
    out = []
    for shape in shapes:
        n = int(np.prod(shape)) if shape else 1
        out.append(np.frombuffer(data, dtype="<f8", count=n, offset=pos).reshape(shape).copy())
        pos += 8 * n
    if pos != len(data):
        raise DataError(f"{path}: {len(data) - pos} trailing bytes")
    return out


def save_agent(agent: DdpgAgent, stem, extra: dict | None = None) -> None:
    stem = Path(stem)
    named = agent.named_arrays()
    write_arrays(stem.with_suffix(".bin"), list(named.values()))
    meta = {"arrays": list(named), "dims": list(agent.dims), "hyper": agent.hyper.to_dict()}
    if extra:
        meta.update(extra)
    stem.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def load_agent(stem) -> DdpgAgent:
    stem = Path(stem)
    meta = json.loads(stem.with_suffix(".json").read_text())
    arrays = dict(zip(meta["arrays"], read_arrays(stem.with_suffix(".bin"))))
    agent = DdpgAgent(*meta["dims"], DdpgHyper.from_dict(meta["hyper"]))
    for name, net in (("actor", agent.actor), ("critic", agent.critic),
                      ("actor_target", agent.actor_target), ("critic_target", agent.critic_target)):
        for i in range(len(net.weights)):
            net.weights[i][...] = arrays[f"{name}.W{i}"]
            net.biases[i][...] = arrays[f"{name}.b{i}"]
    for name, norm in (("o_norm", agent.o_norm), ("g_norm", agent.g_norm)):
        norm.load_state({k: arrays[f"{name}.{k}"] for k in ("count", "sum", "sumsq")})
    return agent
