"""Batched document embedding with a pretrained transformer encoder.

The exporter reads a JSONL corpus (``id`` plus ``text``, or a pre-tokenized
``tokens`` array which gets joined with spaces), runs the encoder in eval
mode without gradients, pools the last hidden states (mean over non-padding
tokens by default, or the first token with ``cls``), and writes one EMB1
row per document in input order. A ``<out>.meta.json`` sidecar records the
model identifier, pooling, sequence length and runtime versions so a run
can be audited later.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


class ModelLoadError(Exception):
    """The model identifier could not be resolved by the local runtime."""


@dataclass(frozen=True)
class ExporterConfig:
    model: str
    out_path: str
    pooling: str = "mean"
    batch_size: int = 32
    max_seq_len: int = 128

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch size must be >= 1, got {self.batch_size}")
        if self.max_seq_len < 8:
            raise ValueError(f"max sequence length must be >= 8, got {self.max_seq_len}")
        if self.pooling not in ("mean", "cls"):
            raise ValueError(f"pooling must be 'mean' or 'cls', got {self.pooling!r}")


def read_corpus_jsonl(path) -> tuple[list[str], list[str]]:
    """Document ids and texts, in file order."""
    ids, texts = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "id" not in obj:
                raise ValueError(f"{path}:{lineno}: missing 'id'")
            ids.append(str(obj["id"]))
            if "tokens" in obj and obj["tokens"] is not None:
                texts.append(" ".join(obj["tokens"]))
            elif "text" in obj:
                texts.append(str(obj["text"]))
            else:
                raise ValueError(f"{path}:{lineno}: need 'text' or 'tokens'")
    return ids, texts


def _load_model(model_id: str):
    import torch
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = AutoModel.from_pretrained(model_id)
    except Exception as exc:
        raise ModelLoadError(f"cannot load model {model_id!r}: {exc}") from exc
    model.eval()
    return tokenizer, model, torch


def export(corpus_path, config: ExporterConfig) -> str:
    """Embed every document and write the EMB1 file plus its metadata
    sidecar. Returns the output path."""
    ids, texts = read_corpus_jsonl(corpus_path)
    tokenizer, model, torch = _load_model(config.model)
    rows = []
    with torch.no_grad():
        for start in range(0, len(texts), config.batch_size):
            batch = texts[start : start + config.batch_size]
            encoded = tokenizer(
                batch,
                padding=True,
                truncation=True,
                max_length=config.max_seq_len,
                return_tensors="pt",
            )
            hidden = model(**encoded).last_hidden_state
            if config.pooling == "cls":
                pooled = hidden[:, 0, :]
            else:
                mask = encoded["attention_mask"].unsqueeze(-1).to(hidden.dtype)
                pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0)
            rows.append(pooled.cpu().numpy().astype(np.float32))
    data = (
        np.vstack(rows)
        if rows
        else np.zeros((0, int(model.config.hidden_size)), dtype=np.float32)
    )

    from .emb1 import write_emb1

    write_emb1(data, ids, config.out_path)
    meta = {
        "model": config.model,
        "pooling": config.pooling,
        "batch_size": config.batch_size,
        "max_seq_len": config.max_seq_len,
        "n_docs": len(ids),
        "hidden_size": int(data.shape[1]),
        "runtime": _runtime_versions(),
    }
    with open(str(config.out_path) + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
    return str(config.out_path)


def _runtime_versions() -> dict:
    import torch
    import transformers

    return {"torch": torch.__version__, "transformers": transformers.__version__}
