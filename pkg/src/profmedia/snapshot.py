"""Versioned, length-prefixed binary container used for store and corpus snapshots.

Layout (all integers big-endian):

    magic        4 bytes   container kind, e.g. b"PMWS" (wordnet store), b"PMCS" (corpus)
    version      u16       container format version (currently 1)
    count        u32       number of records
    records      count *   (u32 payload length + payload bytes)
    checksum     u32       zlib.adler32 over the concatenated payloads

Payloads are canonical JSON (sorted keys, compact separators, UTF-8), so a
snapshot built from identical inputs is byte-identical. Record 0 is a header
object describing the content; the remaining records are content rows in a
deterministic order chosen by the writer.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path
from typing import Iterable

FORMAT_VERSION = 1


class SnapshotError(Exception):
    """Raised for unreadable or corrupt snapshot files."""


def canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def write_snapshot(path: str | Path, magic: bytes, records: Iterable[dict]) -> None:
    if len(magic) != 4:
        raise ValueError("magic must be exactly 4 bytes")
    payloads = [canonical_json(rec) for rec in records]
    checksum = 0
    body = bytearray()
    for payload in payloads:
        body += struct.pack(">I", len(payload))
        body += payload
        checksum = zlib.adler32(payload, checksum)
    with open(path, "wb") as fh:
        fh.write(magic)
        fh.write(struct.pack(">HI", FORMAT_VERSION, len(payloads)))
        fh.write(body)
        fh.write(struct.pack(">I", checksum))


def read_snapshot(path: str | Path, magic: bytes) -> list[dict]:
    data = Path(path).read_bytes()
    if len(data) < 14:
        raise SnapshotError(f"{path}: truncated snapshot")
    if data[:4] != magic:
        raise SnapshotError(f"{path}: bad magic {data[:4]!r}, expected {magic!r}")
    version, count = struct.unpack(">HI", data[4:10])
    if version != FORMAT_VERSION:
        raise SnapshotError(f"{path}: unsupported snapshot version {version}")
    pos = 10
    records = []
    checksum = 0
    for _ in range(count):
        if pos + 4 > len(data) - 4:
            raise SnapshotError(f"{path}: truncated record table")
        (length,) = struct.unpack(">I", data[pos:pos + 4])
        pos += 4
        payload = data[pos:pos + length]
        if len(payload) != length:
            raise SnapshotError(f"{path}: truncated record payload")
        pos += length
        checksum = zlib.adler32(payload, checksum)
        records.append(json.loads(payload.decode("utf-8")))
    (expected,) = struct.unpack(">I", data[pos:pos + 4])
    if checksum != expected:
        raise SnapshotError(f"{path}: checksum mismatch")
    return records
