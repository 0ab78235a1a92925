import numpy as np
import pandas as pd
import pytest

from causalwhy import tabular
from causalwhy.tabular import (
    EmptyAggregateError,
    Filter,
    Predicate,
    Subspace,
    TabularError,
    UnknownColumnError,
    aggregate,
    discover_fds,
    discretize,
    from_dataframe,
    load_csv,
    select,
)


def write_csv(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadCsv:
    def test_all_string_columns_become_dimensions(self, tmp_path):
        p = write_csv(tmp_path, "City,State,Country\na,s,X\nb,s,X\nc,t,Y\n")
        d = load_csv(p)
        assert d.dimensions == ["City", "State", "Country"]
        assert d.row_count == 3

    def test_numeric_column_becomes_measure(self, tmp_path):
        p = write_csv(tmp_path, "name,amount\na,1\nb,2\n")
        d = load_csv(p)
        assert d.measures == ["amount"]

    def test_missing_value_row_dropped(self, tmp_path):
        p = write_csv(tmp_path, "a,b\n1,x\n2,\n3,z\n")
        d = load_csv(p)
        assert d.row_count == 2

    def test_duplicate_headers_rejected(self, tmp_path):
        p = write_csv(tmp_path, "a,a\n1,2\n")
        with pytest.raises(TabularError, match="duplicate"):
            load_csv(p)

    def test_zero_data_rows_rejected(self, tmp_path):
        p = write_csv(tmp_path, "a,b\n")
        with pytest.raises(TabularError):
            load_csv(p)

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "missing.csv")

    def test_schema_hint_overrides(self, tmp_path):
        p = write_csv(tmp_path, "code,amount\n1,5\n2,6\n")
        d = load_csv(p, schema_hints={"code": "dimension"})
        assert d.dimensions == ["code"]
        assert d.measures == ["amount"]

    def test_schema_json_shape(self, tmp_path):
        p = write_csv(tmp_path, "a,b\nx,1\ny,2\n")
        d = load_csv(p)
        assert d.schema() == {
            "columns": [{"name": "a", "kind": "dimension"}, {"name": "b", "kind": "measure"}],
            "rows": 2,
        }


class TestSelect:
    @pytest.fixture
    def patients(self):
        return from_dataframe(
            pd.DataFrame(
                {
                    "Location": ["A", "A", "B", "B", "A"],
                    "Smoking": ["yes", "no", "yes", "no", "yes"],
                    "Severity": [5.0, 1.0, 2.0, 1.0, 4.0],
                }
            )
        )

    def test_filter_selects_matching_rows(self, patients):
        sub = select(patients, Filter("Location", "A"))
        assert sub.row_count == 3

    def test_full_domain_predicate_is_identity(self, patients):
        pred = Predicate("Location", {"A", "B"})
        assert select(patients, pred).row_count == patients.row_count

    def test_complement_partitions_rows(self, patients):
        s = Subspace([Filter("Location", "A"), Filter("Smoking", "yes")])
        kept = select(patients, s)
        dropped = select(patients, s, complement=True)
        assert kept.row_count + dropped.row_count == patients.row_count

    def test_unknown_dimension_errors(self, patients):
        with pytest.raises(UnknownColumnError):
            select(patients, Filter("Nope", "A"))

    def test_unknown_value_returns_empty(self, patients):
        assert select(patients, Filter("Location", "Z")).row_count == 0

    def test_select_idempotent(self, patients):
        s = Subspace([Filter("Location", "A")])
        once = select(patients, s)
        twice = select(once, s)
        assert twice.row_count == once.row_count
        assert np.array_equal(twice.measure_values("Severity"), once.measure_values("Severity"))


class TestAggregate:
    def test_avg_constant_column(self):
        d = from_dataframe(pd.DataFrame({"m": [7.0, 7.0, 7.0]}))
        assert aggregate(d, "m", "AVG") == 7.0

    def test_sum(self):
        d = from_dataframe(pd.DataFrame({"m": [1.0, 2.0, 3.0]}))
        assert aggregate(d, "m", "SUM") == 6.0

    def test_count(self):
        d = from_dataframe(pd.DataFrame({"m": [1.0, 2.0, 3.0]}))
        assert aggregate(d, "m", "COUNT") == 3.0

    def test_avg_empty_selection_errors(self):
        d = from_dataframe(pd.DataFrame({"x": ["a", "b"], "m": [1.0, 2.0]}))
        empty = select(d, Filter("x", "zzz"))
        with pytest.raises(EmptyAggregateError):
            aggregate(empty, "m", "AVG")

    def test_sum_additive_over_random_partitions(self):
        rng = np.random.default_rng(3)
        d = from_dataframe(
            pd.DataFrame({"x": [f"v{i}" for i in rng.integers(0, 8, 500)], "m": rng.normal(size=500)})
        )
        values = d.domain("x")
        half = set(values[: len(values) // 2])
        p1 = Predicate("x", half)
        p2 = Predicate("x", set(values) - half)
        total = aggregate(select(d, p1), "m", "SUM") + aggregate(select(d, p2), "m", "SUM")
        assert total == pytest.approx(aggregate(d, "m", "SUM"))


class TestDiscretize:
    def test_uniform_two_bins_split_at_median(self):
        d = from_dataframe(pd.DataFrame({"m": np.arange(1.0, 101.0)}))
        d2 = discretize(d, "m", bins=2)
        bins = d2.domain("m__bin")
        assert len(bins) == 2
        assert bins[0].hi == 50.0 and bins[1].lo == 51.0

    def test_constant_column_single_bin(self):
        d = from_dataframe(pd.DataFrame({"m": [4.0] * 20}))
        d2 = discretize(d, "m", bins=5)
        assert len(d2.domain("m__bin")) == 1

    def test_bin_sizes_within_one_when_distinct(self):
        rng = np.random.default_rng(0)
        d = from_dataframe(pd.DataFrame({"m": rng.permutation(997).astype(float)}))
        d2 = discretize(d, "m", bins=7)
        counts = np.bincount(d2.codes("m__bin"))
        assert counts.max() - counts.min() <= 1

    def test_syn_b_measure_bins_balanced(self):
        from causalwhy.synth import gen_syn_b

        inst = gen_syn_b(rows=10000, seed=5)
        d2 = discretize(inst.dataset, "Z", bins=10)
        counts = np.bincount(d2.codes("Z__bin"))
        assert len(counts) == 10
        assert counts.max() - counts.min() <= 1

    def test_bins_must_be_at_least_two(self):
        d = from_dataframe(pd.DataFrame({"m": [1.0, 2.0]}))
        with pytest.raises(TabularError):
            discretize(d, "m", bins=1)


class TestDiscoverFds:
    def test_cityinfo_three_fds(self, cityinfo):
        fd = discover_fds(cityinfo)
        assert fd.edges == {("City", "State"), ("State", "Country"), ("City", "Country")}
        assert fd.depth == {"City": 0, "State": 1, "Country": 2}

    def test_key_column_determines_everything(self):
        d = from_dataframe(
            pd.DataFrame({"id": [f"k{i}" for i in range(20)], "x": ["a", "b"] * 10})
        )
        fd = discover_fds(d)
        assert ("id", "x") in fd.edges

    def test_duplicate_columns_flag_redundant(self):
        d = from_dataframe(pd.DataFrame({"u": ["a", "b", "a", "c"], "v": ["p", "q", "p", "r"]}))
        fd = discover_fds(d)
        assert fd.redundant == ["v"]
        assert all("v" not in e for e in fd.edges)

    def test_output_acyclic_and_recovers_injected(self):
        from causalwhy.synth import gen_syn_a

        inst = gen_syn_a(10, seed=3, n_rows=3000)
        fd = discover_fds(inst.dataset)
        assert fd.edges == set(inst.fd_truth.edges)  # injected plus closure, nothing else

    def test_transitive_edges_kept_but_depth_on_reduction(self, cityinfo):
        fd = discover_fds(cityinfo)
        assert ("City", "Country") in fd.edges  # transitive edge retained
        assert fd.depth["Country"] == 2  # but depth walks the reduction


def test_dataset_rejects_mismatched_lengths():
    with pytest.raises(TabularError):
        tabular.Dataset(
            [
                tabular.Column("a", tabular.DIMENSION, ["x", "y"]),
                tabular.Column("b", tabular.DIMENSION, ["x"]),
            ]
        )
