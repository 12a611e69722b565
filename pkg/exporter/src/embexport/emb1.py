"""Writer for the EMB1 embedding-file format.

Layout, little-endian: bytes 0-3 magic ``EMB1``; bytes 4-7 uint32 row count
N; bytes 8-11 uint32 dimension D; N*D IEEE-754 float32 values row-major;
then N LF-terminated UTF-8 document-id lines. No padding anywhere.

This is an independent implementation of the format the topic pipeline
reads; keeping it separate is the point, the two sides interoperate only
through the bytes.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"EMB1"
_HEADER = struct.Struct("<4sII")


def write_emb1(data: np.ndarray, doc_ids: list[str], path) -> None:
    data = np.ascontiguousarray(data, dtype=np.float32)
    if data.ndim != 2:
        raise ValueError(f"embedding matrix must be 2-D, got shape {data.shape}")
    if not np.all(np.isfinite(data)):
        raise ValueError("embedding matrix must be finite")
    if len(doc_ids) != data.shape[0]:
        raise ValueError(f"{len(doc_ids)} ids for {data.shape[0]} rows")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, data.shape[0], data.shape[1]))
        fh.write(data.astype("<f4").tobytes())
        fh.write("".join(doc_id + "\n" for doc_id in doc_ids).encode("utf-8"))
