import io
from collections import Counter

import numpy as np
import pytest

from gossipopt.dataio import (
    LibsvmFormatError,
    Trace,
    TraceRecord,
    parse_libsvm,
    partition,
    planted_direction,
    read_trace,
    serialize_libsvm,
    synth_classification,
    write_trace,
)

# five-line fixture used by the round-trip acceptance check
FIXTURE = """\
+1 1:0.5 3:-2.0
-1 2:1.25
+1 1:-0.75 2:0.5 4:3.0
-1 3:0.125
+1 4:-1.5
"""


class TestParse:
    def test_basic_line(self):
        ds = parse_libsvm(io.StringIO("+1 1:0.5 3:-2\n"))
        assert ds.samples == ((1, ((0, 0.5), (2, -2.0))),)
        assert ds.d >= 3

    def test_label_mapping(self):
        ds = parse_libsvm(io.StringIO("0 2:1\n-1 1:1\n3 1:1\n"))
        assert [s[0] for s in ds.samples] == [-1, -1, 1]

    def test_comments_and_blanks_skipped(self):
        ds = parse_libsvm(io.StringIO("# header\n\n+1 1:1\n"))
        assert len(ds.samples) == 1

    def test_non_increasing_index(self):
        with pytest.raises(LibsvmFormatError, match="non-increasing") as exc:
            parse_libsvm(io.StringIO("+1 1:1\n1 3:1 2:1\n"))
        assert exc.value.line_no == 2

    def test_bad_label(self):
        with pytest.raises(LibsvmFormatError, match="label"):
            parse_libsvm(io.StringIO("abc 1:1\n"))

    def test_missing_colon(self):
        with pytest.raises(LibsvmFormatError, match="colon"):
            parse_libsvm(io.StringIO("+1 12\n"))

    def test_zero_index_rejected(self):
        with pytest.raises(LibsvmFormatError, match="1-based"):
            parse_libsvm(io.StringIO("+1 0:1\n"))


def test_roundtrip_fixture_exact():
    ds = parse_libsvm(io.StringIO(FIXTURE))
    out = io.StringIO()
    serialize_libsvm(ds, out)
    assert parse_libsvm(io.StringIO(out.getvalue())) == ds


class TestSynth:
    def test_deterministic(self):
        a = synth_classification(10, 3, seed=7)
        b = synth_classification(10, 3, seed=7)
        assert a == b

    def test_labels_are_signs(self):
        ds = synth_classification(50, 4, seed=0)
        assert all(s[0] in (-1, 1) for s in ds.samples)
        assert ds.d == 4

    def test_planted_direction_recovers_labels(self):
        # direct evaluation: the planted hyperplane classifies its own data
        ds = synth_classification(2000, 40, seed=1)
        w = planted_direction(40, seed=1)
        x = np.array([[v for _, v in s[1]] for s in ds.samples])
        y = np.array([s[0] for s in ds.samples])
        accuracy = np.mean(np.where(x @ w >= 0, 1, -1) == y)
        assert accuracy >= 0.9

    def test_validation(self):
        with pytest.raises(ValueError):
            synth_classification(0, 3, seed=0)


class TestPartition:
    def test_even_split(self):
        ds = synth_classification(10, 2, seed=3)
        shards = partition(ds, 5, seed=0)
        assert [f.shape[0] for f in shards.features] == [2, 2, 2, 2, 2]

    def test_near_equal_split(self):
        ds = synth_classification(10, 2, seed=3)
        shards = partition(ds, 3, seed=0)
        assert [f.shape[0] for f in shards.features] == [4, 3, 3]

    def test_deterministic(self):
        ds = synth_classification(20, 2, seed=3)
        a = partition(ds, 4, seed=9)
        b = partition(ds, 4, seed=9)
        for fa, fb in zip(a.features, b.features):
            np.testing.assert_array_equal(fa, fb)

    def test_label_multiset_preserved(self):
        ds = synth_classification(23, 2, seed=5)
        shards = partition(ds, 4, seed=1)
        before = Counter(s[0] for s in ds.samples)
        after = Counter(int(v) for lab in shards.labels for v in lab)
        assert before == after

    def test_too_few_samples(self):
        ds = synth_classification(3, 2, seed=0)
        with pytest.raises(ValueError):
            partition(ds, 4, seed=0)

    def test_densified_rows_match(self):
        ds = parse_libsvm(io.StringIO(FIXTURE))
        shards = partition(ds, 1, seed=0)
        assert shards.features[0].shape == (5, 4)
        # sample '+1 1:0.5 3:-2.0' densifies to [0.5, 0, -2, 0]
        row_labels = shards.labels[0]
        dense = shards.features[0]
        idx = int(np.flatnonzero(np.isclose(dense[:, 0], 0.5))[0])
        np.testing.assert_allclose(dense[idx], [0.5, 0.0, -2.0, 0.0])
        assert row_labels[idx] == 1.0


class TestTraceCsv:
    def test_empty_trace_header_only(self):
        out = io.StringIO()
        write_trace(Trace(), out)
        assert out.getvalue() == "iter,grad_evals,comm_rounds,sq_dist,lyapunov\n"

    def test_single_record_blank_lyapunov(self):
        out = io.StringIO()
        write_trace(Trace(records=[TraceRecord(0, 1, 1, 2.5, None)]), out)
        lines = out.getvalue().splitlines()
        assert len(lines) == 2
        assert lines[1] == "0,1,1,2.5,"

    def test_roundtrip_exact(self):
        records = [
            TraceRecord(0, 0, 0, 2.0 / 3.0, None),
            TraceRecord(7, 7, 21, 1.2345678901234567e-11, 0.1 + 0.2),
        ]
        out = io.StringIO()
        write_trace(Trace(records=records), out)
        back = read_trace(io.StringIO(out.getvalue()))
        assert back.records == records

    def test_header_validated_on_read(self):
        with pytest.raises(ValueError):
            read_trace(io.StringIO("a,b\n"))
