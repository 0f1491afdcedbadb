import numpy as np
import pytest

from tokencore.corpus import SubwordSpan
from tokencore.errors import EmptyInputError, SchemaError
from tokencore.pooling import PoolingMode, pool_document, pool_word


class TestPoolWord:
    def test_max_dominates_every_row(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            rows = rng.standard_normal((int(rng.integers(1, 9)), 16))
            pooled = pool_word(rows, PoolingMode.MAX)
            assert (pooled[None, :] >= rows).all()

    def test_single_row_is_identity_for_all_modes(self):
        rng = np.random.default_rng(12)
        row = rng.standard_normal((1, 8))
        for mode in PoolingMode:
            np.testing.assert_array_equal(pool_word(row, mode), row[0])

    def test_max_and_mean_are_permutation_invariant(self):
        rng = np.random.default_rng(13)
        rows = rng.standard_normal((6, 10))
        perm = rng.permutation(6)
        for mode in (PoolingMode.MAX, PoolingMode.MEAN):
            np.testing.assert_allclose(pool_word(rows[perm], mode),
                                       pool_word(rows, mode), rtol=0, atol=1e-12)

    def test_max_is_exactly_permutation_invariant(self):
        rng = np.random.default_rng(14)
        rows = rng.standard_normal((5, 7))
        perm = rng.permutation(5)
        np.testing.assert_array_equal(pool_word(rows[perm], PoolingMode.MAX),
                                      pool_word(rows, PoolingMode.MAX))

    def test_first_picks_row_zero(self):
        rows = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(pool_word(rows, PoolingMode.FIRST),
                                      rows[0])

    def test_mean_matches_numpy(self):
        rng = np.random.default_rng(15)
        rows = rng.standard_normal((4, 5))
        np.testing.assert_allclose(pool_word(rows, PoolingMode.MEAN),
                                   rows.mean(axis=0), atol=1e-12)

    def test_empty_input_raises(self):
        with pytest.raises(EmptyInputError):
            pool_word(np.zeros((0, 4)), PoolingMode.MAX)

    def test_mixed_shapes_raise(self):
        with pytest.raises(SchemaError):
            pool_word([np.zeros(3), np.zeros(4)], PoolingMode.MAX)


class TestPoolingModeParse:
    def test_known_names(self):
        assert PoolingMode.parse("max") is PoolingMode.MAX
        assert PoolingMode.parse("MEAN") is PoolingMode.MEAN
        assert PoolingMode.parse("first") is PoolingMode.FIRST

    def test_unknown_name_raises(self):
        with pytest.raises(SchemaError):
            PoolingMode.parse("median")


class TestPoolDocument:
    def _spans(self, sizes):
        spans = []
        cursor = 0
        for i, size in enumerate(sizes):
            spans.append(SubwordSpan(word_index=i, start=cursor,
                                     end=cursor + size))
            cursor += size
        return tuple(spans)

    def test_pools_each_span(self):
        rng = np.random.default_rng(16)
        sizes = [2, 1, 3]
        rows = rng.standard_normal((sum(sizes), 6))
        spans = self._spans(sizes)
        out = pool_document(rows, spans, PoolingMode.MAX)
        assert out.shape == (3, 6)
        np.testing.assert_array_equal(out[0], rows[0:2].max(axis=0))
        np.testing.assert_array_equal(out[1], rows[2])
        np.testing.assert_array_equal(out[2], rows[3:6].max(axis=0))

    def test_spans_must_tile_rows(self):
        rows = np.zeros((4, 3))
        with pytest.raises(SchemaError):
            pool_document(rows, self._spans([2, 1]), PoolingMode.MAX)

    def test_empty_document_gives_empty_matrix(self):
        out = pool_document(np.zeros((0, 5)), (), PoolingMode.MEAN)
        assert out.shape == (0, 5)
