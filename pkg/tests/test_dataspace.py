import numpy as np
import pytest

from bandit_bakery.dataspace import (
    ADF,
    COST_SENSITIVE,
    MULTICLASS,
    MULTILABEL,
    Dataset,
    Encoding,
    Example,
    LabelSpec,
    ParseError,
    bandit_round,
    cost_vector,
    encode_loss,
    parse_dataset,
    shuffle,
    to_text,
)


class TestParsing:
    def test_multiclass_line(self):
        ds = parse_dataset("2 | 1:1.0 3:0.5")
        assert ds.kind == MULTICLASS
        assert ds.n_actions == 2
        ex = ds.examples[0]
        assert ex.label.y == 2
        assert ex.shared == {1: 1.0, 3: 0.5}

    def test_multilabel_line(self):
        ds = parse_dataset("K:4\n1,3 | 2:1")
        assert ds.kind == MULTILABEL
        assert ds.n_actions == 4
        assert ds.examples[0].label.labels == frozenset({1, 3})

    def test_cost_sensitive_line(self):
        ds = parse_dataset("1:0.2 2:0.9 | 5:1")
        assert ds.kind == COST_SENSITIVE
        assert ds.examples[0].label.costs == (0.2, 0.9)

    def test_value_defaults_to_one(self):
        ds = parse_dataset("1 | 4 7:2.5")
        assert ds.examples[0].shared == {4: 1.0, 7: 2.5}

    def test_k_inferred_as_max_label(self):
        ds = parse_dataset("3 | 1:1\n1 | 2:1\n")
        assert ds.n_actions == 3

    def test_k_header_overrides_inference(self):
        ds = parse_dataset("K:6\n3 | 1:1")
        assert ds.n_actions == 6

    def test_label_beyond_declared_k(self):
        with pytest.raises(ParseError, match="line 2"):
            parse_dataset("K:2\n3 | 1:1")

    def test_malformed_line_reports_number(self):
        with pytest.raises(ParseError, match="line 3"):
            parse_dataset("1 | 1:1\n2 | 1:1\n2 | 1:oops\n")

    def test_missing_bar(self):
        with pytest.raises(ParseError, match="'\\|'"):
            parse_dataset("1 1:1")

    def test_non_finite_value_rejected(self):
        with pytest.raises(ParseError, match="non-finite"):
            parse_dataset("1 | 1:inf")

    def test_mixed_kinds_rejected(self):
        with pytest.raises(ParseError, match="mixed"):
            parse_dataset("1 | 1:1\n1,2 | 1:1")

    def test_adf_block(self):
        text = """shared | 1:1.0
0.25 | 2:1
1 | 3:1

shared | 1:0.5
0 | 2:2
0.5 | 3:1
"""
        ds = parse_dataset(text)
        assert ds.kind == ADF
        assert ds.n_actions == 2
        assert len(ds) == 2
        ex = ds.examples[0]
        assert ex.label.costs == (0.25, 1.0)
        assert ex.action_features[1] == {3: 1.0}

    def test_adf_inconsistent_k(self):
        text = "shared | 1:1\n0 | 2:1\n\nshared | 1:1\n0 | 2:1\n1 | 3:1\n"
        with pytest.raises(ParseError, match="expected 1"):
            parse_dataset(text)

    def test_adf_merges_shared_and_action_features(self):
        ds = parse_dataset("shared | 1:1.0 2:1.0\n0 | 2:3.0\n1 | 3:1\n")
        idx, val = ds.examples[0].arrays(0)
        assert list(idx) == [1, 2]
        assert list(val) == [1.0, 4.0]

    def test_round_trip(self):
        text = "K:3\n2 | 1:1 4:0.25\n3 | 2:1\n1 | 1:0.5\n"
        ds = parse_dataset(text)
        again = parse_dataset(to_text(ds))
        assert again.n_actions == ds.n_actions
        assert [ex.label for ex in again.examples] == \
            [ex.label for ex in ds.examples]
        assert [ex.shared for ex in again.examples] == \
            [ex.shared for ex in ds.examples]


class TestCostVector:
    def test_multiclass(self):
        got = cost_vector(LabelSpec(MULTICLASS, y=2), 3)
        assert got.tolist() == [1.0, 0.0, 1.0]

    def test_multilabel(self):
        got = cost_vector(LabelSpec(MULTILABEL, labels=frozenset({1, 3})), 4)
        assert got.tolist() == [0.0, 1.0, 0.0, 1.0]

    def test_explicit_passthrough(self):
        got = cost_vector(LabelSpec(COST_SENSITIVE, costs=(0.2, 0.9)), 2)
        assert got.tolist() == [0.2, 0.9]

    def test_multiclass_exactly_one_zero(self, rng):
        for _ in range(50):
            k = int(rng.integers(1, 8))
            y = int(rng.integers(1, k + 1))
            costs = cost_vector(LabelSpec(MULTICLASS, y=y), k)
            assert (costs == 0.0).sum() == 1
            assert (costs == 1.0).sum() == k - 1

    def test_out_of_range_label(self):
        with pytest.raises(ValueError):
            cost_vector(LabelSpec(MULTICLASS, y=4), 3)

    def test_empty_multilabel(self):
        with pytest.raises(ValueError):
            cost_vector(LabelSpec(MULTILABEL), 3)


class TestEncoding:
    def test_offsets(self):
        costs = np.array([1.0, 0.0, 1.0])
        assert encode_loss(costs, Encoding(-1)).tolist() == [0.0, -1.0, 0.0]
        assert encode_loss(costs, Encoding(0)).tolist() == [1.0, 0.0, 1.0]
        assert encode_loss(costs, Encoding(9)).tolist() == [10.0, 9.0, 10.0]

    def test_identity_for_zero_offset(self, rng):
        costs = rng.random(6)
        assert encode_loss(costs, Encoding(0)).tolist() == costs.tolist()

    def test_range(self, rng):
        for offset in (-1.0, 0.0, 9.0):
            enc = Encoding(offset)
            encoded = encode_loss(rng.random(20), enc)
            assert (encoded >= enc.c_min).all()
            assert (encoded <= enc.c_max).all()

    def test_names(self):
        assert Encoding.from_string("-1/0").offset == -1.0
        assert Encoding.from_string("9/10").offset == 9.0
        assert str(Encoding.from_string("0/1")) == "0/1"


class TestShuffle:
    def _dataset(self, n):
        lines = "\n".join(f"{1 + i % 2} | {i}:1" for i in range(n))
        return parse_dataset(f"K:2\n{lines}")

    def test_singleton_unchanged(self):
        ds = self._dataset(1)
        assert shuffle(ds, 123).examples == ds.examples

    def test_deterministic(self):
        ds = self._dataset(50)
        a = shuffle(ds, 9)
        b = shuffle(ds, 9)
        assert [e.shared for e in a.examples] == [e.shared for e in b.examples]

    def test_seeds_differ(self):
        ds = self._dataset(1000)
        a = shuffle(ds, 0)
        b = shuffle(ds, 1)
        assert [e.shared for e in a.examples] != [e.shared for e in b.examples]

    def test_permutation_preserves_multiset(self):
        ds = self._dataset(200)
        shuffled = shuffle(ds, 3)
        key = lambda ex: sorted(ex.shared.items())
        assert sorted(map(key, shuffled.examples)) == \
            sorted(map(key, ds.examples))


class TestBanditRound:
    def _ds(self):
        return parse_dataset("2 | 1:1\n")

    def test_correct_action(self):
        observed, cost = bandit_round(self._ds(), 0, 1, Encoding(-1))
        assert (observed, cost) == (-1.0, 0.0)

    def test_wrong_action(self):
        observed, cost = bandit_round(self._ds(), 0, 0, Encoding(-1))
        assert (observed, cost) == (0.0, 1.0)

    def test_explicit_costs_zero_offset(self):
        ds = parse_dataset("1:0.2 2:0.9 | 1:1")
        observed, cost = bandit_round(ds, 0, 1, Encoding(0))
        assert (observed, cost) == (0.9, 0.9)

    def test_action_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            bandit_round(self._ds(), 0, 5, Encoding(0))

    def test_returns_scalars_only(self):
        result = bandit_round(self._ds(), 0, 1, Encoding(0))
        assert all(isinstance(v, float) for v in result)

    def test_evaluator_cost_encoding_free(self):
        for offset in (-1.0, 0.0, 9.0):
            _, cost = bandit_round(self._ds(), 0, 0, Encoding(offset))
            assert cost == 1.0
