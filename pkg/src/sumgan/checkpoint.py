"""Versioned binary checkpoint container.

Text header (format version, optional metadata, tensor manifest with
name/shape/offset) followed by raw little-endian float64 buffers.
Save/load round-trips are bit-exact.
"""

import numpy as np

FORMAT_VERSION = 1
_MAGIC = "sumganckpt"


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, tensors, meta=None):
    """Write name->ndarray (float64) plus string metadata to `path`."""
    lines = [f"{_MAGIC} {FORMAT_VERSION}"]
    for key, value in (meta or {}).items():
        if any(c.isspace() for c in key):
            raise CheckpointError(f"meta key may not contain whitespace: {key!r}")
        lines.append(f"meta {key} {value}")
    offset = 0
    buffers = []
    for name, arr in tensors.items():
        arr = np.asarray(arr, dtype="<f8")
        dims = " ".join(str(d) for d in arr.shape)
        lines.append(f"tensor {name} {arr.ndim} {dims} {offset}".rstrip())
        offset += arr.size
        buffers.append(arr.tobytes(order="C"))
    lines.append("end")
    with open(path, "wb") as f:
        f.write(("\n".join(lines) + "\n").encode("utf-8"))
        for buf in buffers:
            f.write(buf)


def load_checkpoint(path):
    """Read a checkpoint; returns (tensors dict, meta dict)."""
    with open(path, "rb") as f:
        raw = f.read()
    head_end = raw.find(b"\nend\n")
    if head_end < 0:
        raise CheckpointError(f"{path}: missing header terminator")
    header = raw[:head_end].decode("utf-8").split("\n")
    blob = raw[head_end + len(b"\nend\n"):]
    first = header[0].split()
    if len(first) != 2 or first[0] != _MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    if int(first[1]) != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported format version {first[1]}")
    tensors, meta = {}, {}
    data = np.frombuffer(blob, dtype="<f8")
    for line in header[1:]:
        parts = line.split()
        if parts[0] == "meta":
            meta[parts[1]] = " ".join(parts[2:])
        elif parts[0] == "tensor":
            name = parts[1]
            ndim = int(parts[2])
            shape = tuple(int(d) for d in parts[3 : 3 + ndim])
            offset = int(parts[3 + ndim])
            size = int(np.prod(shape)) if shape else 1
            if offset + size > data.size:
                raise CheckpointError(f"{path}: tensor {name} overruns data section")
            tensors[name] = data[offset : offset + size].reshape(shape).copy()
        else:
            raise CheckpointError(f"{path}: bad header line {line!r}")
    return tensors, meta
