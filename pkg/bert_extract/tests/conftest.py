import os

os.environ.setdefault("HF_HUB_DISABLE_PROGRESS_BARS", "1")
os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_VERBOSITY", "error")

import json

import pytest
import torch
from tokenizers import Tokenizer, models, normalizers, pre_tokenizers
from transformers import BertConfig, BertModel, PreTrainedTokenizerFast

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "the", "dog", "cat", "ran", "sat", "play", "run", "happy", "day", "good",
    "un", "re", "##play", "##ing", "##ed", "##s", "##happy", "##run", "##day",
]

# a combining accent alone normalizes to nothing: zero subwords
ACCENT_ONLY = "̀́"

NORMAL_DOCS = [
    ["the", "dog", "ran"],
    ["the", "cat", "sat"],
    ["playing", "the", "good", "day"],
    ["unhappy", "dog", "played"],
    ["replaying", "the", "run"],
    ["happy", "days", "playing"],
    ["rerun", "the", "play"],
    ["the", "dog", "played", "the", "run"],
    ["good", "dog", "plays"],
    ["the", "unhappy", "cat", "ran"],
    ["playing", "the", "replaying", "the", "good", "run"],
    ["days", "ran", "good"],
    ["the", "play", "ran", "good"],
    ["dog", "days", "playing", "the", "run", "happy"],
    ["cat", "played", "the", "good", "play"],
    [ACCENT_ONLY, "the", "dog", "sat"],
]

ANOMALOUS_DOCS = [
    (["the", "dog", "qqq", "ran"], 2),
    (["playing", "xkcd", "the", "run"], 1),
    (["zzz", "unhappy", "cat"], 0),
    (["the", "good", "day", "qwerty"], 3),
]


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("model")
    piece_model = models.WordPiece({t: i for i, t in enumerate(VOCAB)},
                                   unk_token="[UNK]",
                                   max_input_chars_per_word=100)
    backend = Tokenizer(piece_model)
    backend.normalizer = normalizers.BertNormalizer(lowercase=True)
    backend.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=backend, unk_token="[UNK]", pad_token="[PAD]",
        cls_token="[CLS]", sep_token="[SEP]", mask_token="[MASK]")
    tokenizer.save_pretrained(path)

    torch.manual_seed(0)
    config = BertConfig(vocab_size=len(VOCAB), hidden_size=768,
                        num_hidden_layers=2, num_attention_heads=4,
                        intermediate_size=256, max_position_embeddings=512)
    BertModel(config).save_pretrained(path)
    return str(path)


@pytest.fixture(scope="session")
def corpus_path(tmp_path_factory):
    """20 labeled documents: 16 normal, 4 with one planted gibberish word."""
    records = []
    for i, words in enumerate(NORMAL_DOCS):
        records.append({"doc_id": f"doc-{i:03d}", "words": words, "label": 0,
                        "word_labels": [0] * len(words)})
    for j, (words, anom_index) in enumerate(ANOMALOUS_DOCS):
        labels = [0] * len(words)
        labels[anom_index] = 1
        records.append({"doc_id": f"doc-{len(NORMAL_DOCS) + j:03d}",
                        "words": words, "label": 1, "word_labels": labels})
    assert len(records) == 20
    path = tmp_path_factory.mktemp("corpus") / "fixture.jsonl"
    path.write_text("\n".join(json.dumps(r, ensure_ascii=False)
                              for r in records) + "\n", encoding="utf-8")
    return str(path)
