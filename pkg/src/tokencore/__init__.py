"""Token-level text anomaly detection over embedding archives.

Build a memory bank from normal word embeddings, score test tokens by
nearest-neighbor distance, aggregate to document scores, and evaluate
with AUROC/AUPRC against classic outlier-detection baselines.
"""

from .ann import AnnParams, build_ann_index
from .archive import Archive, doc_row_offsets, read_archive, write_archive
from .bank import (Aggregator, AggregatorKind, MemoryBank, ScoredDocument,
                   SubsampleConfig, SubsampleMode, build_bank, load_bank,
                   min_sq_dists, save_bank, score_document, score_token,
                   score_tokens)
from .baselines import (EcodDetector, IsolationForestDetector, LofDetector,
                        MemoryBankDetector)
from .corpus import (Corpus, Document, SubwordSpan, ValidationReport,
                     WordToken, read_corpus_jsonl, validate_corpus,
                     write_corpus_jsonl)
from .errors import (ContaminationError, DataError, DegenerateError,
                     EmptyInputError, FormatError, IoError, ParamError,
                     RecallError, SchemaError, TokencoreError)
from .metrics import EvalReport, auprc, auroc, evaluate_run, split_corpus
from .pooling import PoolingMode, pool_document, pool_word
from .synth import (CorruptionConfig, HashEmbedConfig, VocabConfig,
                    embed_corpus, gen_normal_corpus, hash_embed_word,
                    inject_gibberish)

__version__ = "0.1.0"

__all__ = [
    "AnnParams", "build_ann_index",
    "Archive", "doc_row_offsets", "read_archive", "write_archive",
    "Aggregator", "AggregatorKind", "MemoryBank", "ScoredDocument",
    "SubsampleConfig", "SubsampleMode", "build_bank", "load_bank",
    "min_sq_dists", "save_bank", "score_document", "score_token",
    "score_tokens",
    "EcodDetector", "IsolationForestDetector", "LofDetector",
    "MemoryBankDetector",
    "Corpus", "Document", "SubwordSpan", "ValidationReport", "WordToken",
    "read_corpus_jsonl", "validate_corpus", "write_corpus_jsonl",
    "ContaminationError", "DataError", "DegenerateError", "EmptyInputError",
    "FormatError", "IoError", "ParamError", "RecallError", "SchemaError",
    "TokencoreError",
    "EvalReport", "auprc", "auroc", "evaluate_run", "split_corpus",
    "PoolingMode", "pool_document", "pool_word",
    "CorruptionConfig", "HashEmbedConfig", "VocabConfig", "embed_corpus",
    "gen_normal_corpus", "hash_embed_word", "inject_gibberish",
]
