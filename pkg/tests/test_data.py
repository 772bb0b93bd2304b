"""Synthetic generation, subsetting, CSV ingestion and the dataset store."""

import numpy as np
import pytest

from tallmh import generate, ingest_csv, load_dataset, save_dataset, subset
from tallmh.data import DataError, Dataset


class TestGenerate:
    def test_gaussian_mle_near_unit_scale(self):
        ds = generate("gaussian_1d", 100_000, seed=5)
        x = ds.X[:, 0]
        assert abs(x.std() - 1.0) < 0.01
        assert abs(x.mean()) < 0.02

    def test_lognormal_positive(self):
        ds = generate("lognormal_1d", 5000, seed=6)
        assert (ds.X > 0).all()

    def test_lognormal_is_exp_of_normal(self):
        ds = generate("lognormal_1d", 5000, seed=7)
        z = np.log(ds.X[:, 0])
        assert abs(z.mean()) < 0.05
        assert abs(z.std() - 1.0) < 0.05

    def test_logistic_class_balance(self):
        ds = generate("logistic_two_gaussians", 100_000, seed=8)
        frac = (ds.y == 1.0).mean()
        assert abs(frac - 0.5) < 0.01

    def test_logistic_labels_pm1(self, logit_ds):
        assert set(np.unique(logit_ds.y)) == {-1.0, 1.0}

    def test_deterministic(self):
        a = generate("gaussian_1d", 50, seed=9)
        b = generate("gaussian_1d", 50, seed=9)
        np.testing.assert_array_equal(a.X, b.X)

    def test_gamma_positive_and_meta(self, gamma_ds):
        assert (gamma_ds.y > 0).all()
        assert gamma_ds.meta["kappa"] == 2.0
        assert len(gamma_ds.meta["theta_true"]) == gamma_ds.d
        np.testing.assert_array_equal(gamma_ds.X[:, 0], 1.0)

    def test_unknown_kind(self):
        with pytest.raises(DataError, match="unknown synthetic kind"):
            generate("pareto_1d", 10, seed=0)

    def test_unknown_param(self):
        with pytest.raises(DataError, match="unknown generator parameters"):
            generate("gaussian_1d", 10, seed=0, skew=2.0)

    def test_n_positive(self):
        with pytest.raises(DataError):
            generate("gaussian_1d", 0, seed=0)


class TestSubset:
    def test_full_size_is_permutation(self, gauss_ds):
        out = subset(gauss_ds, gauss_ds.n, seed=3)
        np.testing.assert_array_equal(np.sort(out.X[:, 0]),
                                      np.sort(gauss_ds.X[:, 0]))
        assert not np.array_equal(out.X, gauss_ds.X)

    def test_single_row_from_original(self, gauss_ds):
        out = subset(gauss_ds, 1, seed=4)
        assert out.n == 1
        assert out.X[0, 0] in gauss_ds.X[:, 0]

    def test_same_seed_same_subset(self, gamma_ds):
        a = subset(gamma_ds, 37, seed=12)
        b = subset(gamma_ds, 37, seed=12)
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.y, b.y)

    def test_rows_stay_paired(self, gamma_ds):
        out = subset(gamma_ds, 50, seed=13)
        # each subset row must appear in the original with its own response
        for i in range(5):
            j = np.flatnonzero((gamma_ds.X == out.X[i]).all(axis=1))
            assert j.size == 1
            assert gamma_ds.y[j[0]] == out.y[i]

    def test_bad_sizes(self, gauss_ds):
        with pytest.raises(DataError):
            subset(gauss_ds, 0, seed=0)
        with pytest.raises(DataError):
            subset(gauss_ds, gauss_ds.n + 1, seed=0)


class TestDatasetValidation:
    def test_rejects_empty(self):
        with pytest.raises(DataError):
            Dataset(X=np.empty((0, 2)))

    def test_rejects_nan(self):
        with pytest.raises(DataError, match="non-finite"):
            Dataset(X=np.array([[1.0], [np.nan]]))

    def test_rejects_mismatched_y(self):
        with pytest.raises(DataError):
            Dataset(X=np.ones((3, 1)), y=np.ones(2))


class TestIngestCsv:
    def test_exact_matrix(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("a,b,lab\n1.5,2.0,0\n-0.5,3.25,1\n0.0,1.0,0\n")
        ds = ingest_csv(p, label_col="lab")
        np.testing.assert_array_equal(
            ds.X, [[1.5, 2.0], [-0.5, 3.25], [0.0, 1.0]])
        np.testing.assert_array_equal(ds.y, [-1.0, 1.0, -1.0])
        assert ds.meta["label_map"] == {"0.0": -1, "1.0": 1}

    def test_standardize(self, tmp_path):
        p = tmp_path / "t.csv"
        rows = ["x,y"] + ["%g,%g" % (i, 2 * i + 1) for i in range(10)]
        p.write_text("\n".join(rows) + "\n")
        ds = ingest_csv(p, standardize=True)
        assert np.abs(ds.X.mean(axis=0)).max() < 1e-10
        assert np.abs(ds.X.std(axis=0) - 1.0).max() < 1e-10
        assert "standardization" in ds.meta

    def test_standardization_constants_reproduce(self, tmp_path):
        p = tmp_path / "t.csv"
        rng = np.random.default_rng(0)
        raw = rng.normal(3.0, 2.5, size=(20, 2))
        lines = ["u,v"] + ["%.17g,%.17g" % tuple(r) for r in raw]
        p.write_text("\n".join(lines) + "\n")
        ds = ingest_csv(p, standardize=True)
        c = ds.meta["standardization"]
        plain = ingest_csv(p)
        again = (plain.X - np.array(c["mean"])) / np.array(c["sd"])
        np.testing.assert_array_equal(again, ds.X)

    def test_add_intercept(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("x\n1\n2\n")
        ds = ingest_csv(p, add_intercept=True)
        np.testing.assert_array_equal(ds.X[:, 1], 1.0)
        assert ds.meta["column_roles"] == ["feature", "intercept"]

    def test_column_selection_by_index_no_header(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("1,2,3\n4,5,6\n")
        ds = ingest_csv(p, feature_cols=[2, 0], header=False)
        np.testing.assert_array_equal(ds.X, [[3.0, 1.0], [6.0, 4.0]])

    def test_non_numeric_reports_line(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("a,b\n1,2\n3,oops\n")
        with pytest.raises(DataError, match="line 3.*'oops'"):
            ingest_csv(p)

    def test_ragged_reports_line(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("a,b\n1,2\n3\n")
        with pytest.raises(DataError, match="line 3"):
            ingest_csv(p)

    def test_empty_file(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("")
        with pytest.raises(DataError, match="empty"):
            ingest_csv(p)

    def test_header_only(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("a,b\n")
        with pytest.raises(DataError, match="no data rows"):
            ingest_csv(p)

    def test_label_needs_two_values(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("a,lab\n1,0\n2,0\n")
        with pytest.raises(DataError, match="distinct values"):
            ingest_csv(p, label_col="lab")

    def test_constant_column_standardize(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("a,b\n1,5\n2,5\n")
        with pytest.raises(DataError, match="constant column"):
            ingest_csv(p, standardize=True)

    def test_label_and_response_exclusive(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(DataError, match="mutually exclusive"):
            ingest_csv(p, label_col="b", response_col="c")

    def test_missing_column_name(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("a,b\n1,2\n")
        with pytest.raises(DataError, match="no column named"):
            ingest_csv(p, feature_cols=["zz"])


class TestStore:
    def test_round_trip(self, tmp_path, gamma_ds):
        save_dataset(gamma_ds, tmp_path / "ds")
        back = load_dataset(tmp_path / "ds")
        np.testing.assert_array_equal(back.X, gamma_ds.X)
        np.testing.assert_array_equal(back.y, gamma_ds.y)
        assert back.meta == gamma_ds.meta
        assert back.content_hash() == gamma_ds.content_hash()

    def test_round_trip_no_response(self, tmp_path, gauss_ds):
        save_dataset(gauss_ds, tmp_path / "ds")
        back = load_dataset(tmp_path / "ds")
        assert back.y is None
        np.testing.assert_array_equal(back.X, gauss_ds.X)

    def test_missing_dir(self, tmp_path):
        with pytest.raises(DataError, match="meta.json"):
            load_dataset(tmp_path / "nope")

    def test_truncated_payload(self, tmp_path, gauss_ds):
        save_dataset(gauss_ds, tmp_path / "ds")
        raw = (tmp_path / "ds" / "X.bin").read_bytes()
        (tmp_path / "ds" / "X.bin").write_bytes(raw[:-8])
        with pytest.raises(DataError, match="X.bin"):
            load_dataset(tmp_path / "ds")

    def test_bad_version(self, tmp_path, gauss_ds):
        import json
        save_dataset(gauss_ds, tmp_path / "ds")
        meta = json.loads((tmp_path / "ds" / "meta.json").read_text())
        meta["format_version"] = 99
        (tmp_path / "ds" / "meta.json").write_text(json.dumps(meta))
        with pytest.raises(DataError, match="version"):
            load_dataset(tmp_path / "ds")
