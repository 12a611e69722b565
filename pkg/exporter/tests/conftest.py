"""Builds a tiny deterministic BERT checkpoint for offline exporter tests."""

import os

import pytest

_VOCAB = (
    ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    + list("abcdefghijklmnopqrstuvwxyz0123456789")
    + [
        "atm", "card", "transfer", "bank", "account", "money", "refund",
        "please", "help", "charge", "fee", "app", "ussd", "network", "branch",
        "customer", "care", "naira", "failed", "reverse", "debit", "credit",
        "the", "my", "your", "and", "no", "not", "never", "abeg", "una", "dey",
        "##s", "##ing", "##ed", "##er",
    ]
)


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    import torch
    from transformers import BertConfig, BertModel, BertTokenizerFast

    directory = tmp_path_factory.mktemp("tiny-encoder")
    vocab_path = directory / "vocab.txt"
    vocab_path.write_text("\n".join(_VOCAB) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast(vocab_file=str(vocab_path), do_lower_case=True)
    config = BertConfig(
        vocab_size=len(_VOCAB),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=128,
    )
    torch.manual_seed(0)
    model = BertModel(config)
    model.save_pretrained(directory)
    tokenizer.save_pretrained(directory)
    return str(directory)


@pytest.fixture(scope="session")
def sample_corpus_path():
    here = os.path.dirname(os.path.abspath(__file__))
    return os.path.join(here, "..", "data", "bank_tweets_sample.jsonl")
