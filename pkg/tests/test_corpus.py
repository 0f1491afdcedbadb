import json

import pytest

from tokencore.corpus import (Corpus, Document, WordToken, read_corpus_jsonl,
                              validate_corpus, write_corpus_jsonl)
from tokencore.errors import IoError, SchemaError


def make_corpus():
    return Corpus(documents=(
        Document(doc_id="a", words=(WordToken("hi", 0), WordToken("there", 0)),
                 label=0),
        Document(doc_id="b", words=(WordToken("zzqx", 1),), label=1),
        Document(doc_id="c", words=(WordToken("plain"),)),
    ), name="fixture")


class TestJsonlRoundTrip:
    def test_round_trip_preserves_everything(self, tmp_path):
        corpus = make_corpus()
        path = tmp_path / "corpus.jsonl"
        write_corpus_jsonl(corpus, path)
        back = read_corpus_jsonl(path)
        assert len(back.documents) == 3
        assert back.documents[0].words == corpus.documents[0].words
        assert back.documents[1].label == 1
        assert back.documents[2].label is None
        assert back.documents[2].words[0].label is None

    def test_rewrite_is_byte_identical(self, tmp_path):
        corpus = make_corpus()
        p1, p2 = tmp_path / "one.jsonl", tmp_path / "two.jsonl"
        write_corpus_jsonl(corpus, p1)
        write_corpus_jsonl(corpus, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_json_line_raises_schema_error(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"doc_id": "a", "words": ["x"]}\nnot json\n')
        with pytest.raises(SchemaError):
            read_corpus_jsonl(path)

    def test_bad_label_raises_schema_error(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps({"doc_id": "a", "words": ["x"],
                                    "label": 7}) + "\n")
        with pytest.raises(SchemaError):
            read_corpus_jsonl(path)

    def test_missing_file_raises_io_error(self, tmp_path):
        with pytest.raises(IoError):
            read_corpus_jsonl(tmp_path / "absent.jsonl")

    def test_name_comes_from_filename(self, tmp_path):
        path = tmp_path / "mydata.jsonl"
        write_corpus_jsonl(make_corpus(), path)
        assert read_corpus_jsonl(path).name == "mydata"


class TestValidateCorpus:
    def test_clean_corpus_passes(self):
        report = validate_corpus(make_corpus())
        assert report.ok
        assert report.violations == []

    def test_duplicate_doc_ids_flagged(self):
        corpus = Corpus(documents=(
            Document(doc_id="a", words=(WordToken("x"),)),
            Document(doc_id="a", words=(WordToken("y"),)),
        ))
        report = validate_corpus(corpus)
        assert not report.ok
        assert any(v.code == "duplicate-doc-id" for v in report.violations)

    def test_label_inconsistency_flagged(self):
        corpus = Corpus(documents=(
            Document(doc_id="a", words=(WordToken("x", 1),), label=0),
        ))
        report = validate_corpus(corpus)
        assert not report.ok

    def test_empty_word_flagged(self):
        corpus = Corpus(documents=(
            Document(doc_id="a", words=(WordToken(""),)),
        ))
        assert not validate_corpus(corpus).ok

    def test_whitespace_word_flagged(self):
        corpus = Corpus(documents=(
            Document(doc_id="a", words=(WordToken("two words"),)),
        ))
        assert not validate_corpus(corpus).ok
