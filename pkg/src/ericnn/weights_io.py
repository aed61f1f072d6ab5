"""Binary weight file format.

Little-endian throughout:

    8 bytes   magic "ERICNN01"
    u32       trainable layer count (two records follow per layer)
    records   u16 name length, name (utf-8), u8 rank, rank x u32 dims,
              then rank-product x f32 values
    u64       checksum: sum of every f32 payload byte, mod 2^64

Each trainable layer contributes exactly two parameter tensor records, its
weights and its bias, in fixed layer order.  Loading validates the magic,
every record name and shape against the target network, and the checksum
before touching any parameter, so a bad file never leaves a partially
loaded network behind.
"""

import struct

import numpy as np

from .errors import FormatError
from .network import Network

MAGIC = b"ERICNN01"


def _checksum(payloads):
    total = 0
    for payload in payloads:
        total += int(np.frombuffer(payload, dtype=np.uint8).sum(dtype=np.uint64))
    return total & 0xFFFFFFFFFFFFFFFF


def save_weights(net, path):
    """Serialize all parameters (as float32) in fixed layer order."""
    records = net.named_params()
    payloads = []
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(records) // 2))
        for name, arr in records:
            data = np.ascontiguousarray(arr, dtype="<f4").tobytes()
            payloads.append(data)
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<B", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(data)
        fh.write(struct.pack("<Q", _checksum(payloads)))
    return path


class _Reader:
    def __init__(self, blob):
        self.blob = blob
        self.pos = 0

    def take(self, n, what):
        if self.pos + n > len(self.blob):
            raise FormatError(f"truncated file while reading {what}")
        out = self.blob[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt, what):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def read_records(path):
    """Parse and validate a weight file into an ordered {name: array} dict."""
    with open(path, "rb") as fh:
        blob = fh.read()
    r = _Reader(blob)
    if r.take(len(MAGIC), "magic") != MAGIC:
        raise FormatError(f"bad magic in {path}: not a weight file")
    (layer_count,) = r.unpack("<I", "layer count")
    records = {}
    payloads = []
    for i in range(2 * layer_count):
        (name_len,) = r.unpack("<H", f"record {i} name length")
        name = r.take(name_len, f"record {i} name").decode("utf-8")
        (rank,) = r.unpack("<B", f"record '{name}' rank")
        dims = r.unpack(f"<{rank}I", f"record '{name}' dims")
        n_values = int(np.prod(dims, dtype=np.int64)) if rank else 1
        payload = r.take(4 * n_values, f"record '{name}' data")
        payloads.append(payload)
        if name in records:
            raise FormatError(f"duplicate record '{name}'")
        records[name] = np.frombuffer(payload, dtype="<f4").reshape(dims).copy()
    (stored,) = r.unpack("<Q", "checksum")
    if r.pos != len(blob):
        raise FormatError(f"{len(blob) - r.pos} trailing bytes after checksum")
    actual = _checksum(payloads)
    if stored != actual:
        raise FormatError(f"checksum mismatch: stored {stored:#x}, data {actual:#x}")
    return records


def load_weights(path, net=None):
    """Build (or fill) a network from a weight file.

    Without an explicit target, the standard architecture is assembled.  The
    file must carry exactly the target's parameter records.
    """
    records = read_records(path)
    net = net or Network.standard()
    expected = net.named_params()
    for name, param in expected:
        if name not in records:
            raise FormatError(f"record '{name}' missing from {path}")
        if records[name].shape != param.shape:
            raise FormatError(
                f"record '{name}': shape {records[name].shape} != expected {param.shape}"
            )
    extra = set(records) - {name for name, _ in expected}
    if extra:
        raise FormatError(f"record '{sorted(extra)[0]}' does not belong to this network")
    for name, param in expected:
        param[...] = records[name].astype(param.dtype)
    return net
