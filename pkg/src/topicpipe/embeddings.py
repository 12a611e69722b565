"""Document-embedding storage: the EMB1 binary format and a hash-projection embedder.

Embeddings enter the pipeline only through :class:`EmbeddingMatrix`. The
EMB1 file format is little-endian: magic ``EMB1``, uint32 row count N,
uint32 dimension D, N*D IEEE-754 float32 values row-major, then N
LF-terminated UTF-8 document-id lines. File payloads are 32-bit; matrices
whose entries are exactly float32-representable (anything read from disk,
in particular) round-trip bit-exactly. In memory values are held as float64
so downstream numerics keep full precision.

``hash_projection_embed`` is a deterministic, dependency-free stand-in for
a pretrained document encoder: each token maps to a pseudo-random unit
vector derived from a stable 64-bit hash of its UTF-8 bytes mixed with the
seed, documents sum their token vectors, rows are L2-normalized.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from hashlib import blake2b

import numpy as np

from .corpus import Corpus, TokenizerConfig, doc_tokens
from .errors import FormatError

MAGIC = b"EMB1"
_HEADER = struct.Struct("<4sII")


@dataclass(frozen=True)
class EmbeddingMatrix:
    """N x D dense document vectors, row i aligned to document i."""

    data: np.ndarray
    doc_ids: tuple[str, ...]

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError(f"embedding data must be 2-D, got shape {data.shape}")
        if data.shape[1] < 1:
            raise ValueError("embedding dimension must be >= 1")
        if not np.all(np.isfinite(data)):
            raise ValueError("embedding entries must be finite")
        if len(self.doc_ids) != data.shape[0]:
            raise ValueError(
                f"{len(self.doc_ids)} doc ids for {data.shape[0]} embedding rows"
            )
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "doc_ids", tuple(str(i) for i in self.doc_ids))

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


def write_embeddings(m: EmbeddingMatrix, path) -> None:
    """Write ``m`` to ``path`` in EMB1 format (float32 payload)."""
    n, d = m.shape
    payload = np.ascontiguousarray(m.data, dtype="<f4").tobytes()
    ids = "".join(doc_id + "\n" for doc_id in m.doc_ids).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, n, d))
        fh.write(payload)
        fh.write(ids)


def read_embeddings(path) -> EmbeddingMatrix:
    """Parse an EMB1 file, validating magic and declared counts against the
    actual payload length."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(blob)} bytes)")
    magic, n, d = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if d < 1:
        raise FormatError(f"{path}: dimension must be >= 1, got {d}")
    body = blob[_HEADER.size :]
    need = n * d * 4
    if len(body) < need:
        raise FormatError(
            f"{path}: declared {n}x{d} floats need {need} bytes, payload has {len(body)}"
        )
    data = np.frombuffer(body[:need], dtype="<f4").reshape(n, d).astype(np.float64)
    trailer = body[need:]
    if n and not trailer.endswith(b"\n"):
        raise FormatError(f"{path}: doc-id trailer must be LF-terminated")
    lines = trailer.split(b"\n")[:-1] if trailer else []
    if len(lines) != n:
        raise FormatError(f"{path}: expected {n} doc-id lines, found {len(lines)}")
    try:
        doc_ids = tuple(line.decode("utf-8") for line in lines)
    except UnicodeDecodeError as e:
        raise FormatError(f"{path}: doc-id trailer is not valid UTF-8 ({e})") from e
    return EmbeddingMatrix(data=data, doc_ids=doc_ids)


def _token_vector(token: str, seed: int, dim: int) -> np.ndarray:
    # Stable across platforms: blake2b of the UTF-8 bytes keyed by the seed,
    # feeding a counter-based Philox generator.
    digest = blake2b(
        token.encode("utf-8"), digest_size=8, key=seed.to_bytes(8, "little", signed=True)
    ).digest()
    key = int.from_bytes(digest, "little")
    vec = np.random.Generator(np.random.Philox(key=key)).standard_normal(dim)
    norm = np.linalg.norm(vec)
    return vec / norm if norm > 0 else vec


def hash_projection_embed(
    corpus: Corpus, config: TokenizerConfig, dim: int, seed: int
) -> EmbeddingMatrix:
    """Embed each document as the L2-normalized sum of pseudo-random unit
    vectors, one per token occurrence. Pure function of
    (corpus, config, dim, seed); empty documents map to the zero vector."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    cache: dict[str, np.ndarray] = {}
    data = np.zeros((len(corpus), dim))
    for i, doc in enumerate(corpus):
        row = data[i]
        for tok in doc_tokens(doc, config):
            vec = cache.get(tok)
            if vec is None:
                vec = cache[tok] = _token_vector(tok, seed, dim)
            row += vec
        norm = np.linalg.norm(row)
        if norm > 0:
            row /= norm
    return EmbeddingMatrix(data=data, doc_ids=corpus.doc_ids)
