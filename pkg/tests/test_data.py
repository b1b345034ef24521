import numpy as np
import pytest
from scipy import stats

from peerlearn import data, nn
from peerlearn.errors import ConfigurationError, ParseError


@pytest.fixture
def balanced_ds():
    return data.generate_gaussian_dataset(num_classes=4, per_class=25, dim=3,
                                          separation=3.0, seed=0)


class TestGenerate:
    def test_counts(self):
        ds = data.generate_gaussian_dataset(2, 5, 2, 1.0, seed=0)
        assert len(ds) == 10
        assert ds.class_counts.tolist() == [5, 5]

    def test_clean_labels_match(self, balanced_ds):
        assert all(s.observed_label == s.clean_label for s in balanced_ds.samples)
        assert not any(s.is_out_of_domain for s in balanced_ds.samples)

    def test_deterministic(self):
        a = data.generate_gaussian_dataset(3, 7, 4, 2.0, seed=5)
        b = data.generate_gaussian_dataset(3, 7, 4, 2.0, seed=5)
        np.testing.assert_array_equal(data.features_matrix(a.samples),
                                      data.features_matrix(b.samples))

    def test_wide_separation_linearly_separable(self):
        ds = data.generate_gaussian_dataset(3, 30, 4, 10.0, seed=1)
        X = data.features_matrix(ds.samples)
        y = data.observed_labels(ds.samples)
        model = nn.init_model([4, 3], seed=0)  # single linear layer
        for _ in range(300):
            model = nn.sgd_step(model, nn.gradient(model, X, y), 0.5)
        assert np.mean(nn.predict(model, X) == y) == 1.0

    def test_invalid_sizes(self):
        with pytest.raises(ConfigurationError):
            data.generate_gaussian_dataset(1, 5, 3, 1.0, seed=0)
        with pytest.raises(ConfigurationError):
            data.generate_gaussian_dataset(2, 0, 3, 1.0, seed=0)


class TestCrossCategoryNoise:
    def test_rate_zero_unchanged(self, balanced_ds):
        assert data.inject_cross_category_noise(balanced_ds, 0.0, "symmetric", 1) is balanced_ds

    def test_exact_flip_count(self):
        ds = data.generate_gaussian_dataset(5, 20, 3, 3.0, seed=2)
        noisy = data.inject_cross_category_noise(ds, 0.4, "symmetric", 3)
        flipped = sum(s.observed_label != s.clean_label for s in noisy.samples)
        assert flipped == 40

    def test_clean_labels_untouched(self, balanced_ds):
        noisy = data.inject_cross_category_noise(balanced_ds, 0.5, "pairwise", 4)
        assert [s.clean_label for s in noisy.samples] == [s.clean_label for s in balanced_ds.samples]

    def test_pairwise_flips_to_next_class(self, balanced_ds):
        noisy = data.inject_cross_category_noise(balanced_ds, 0.5, "pairwise", 4)
        for before, after in zip(balanced_ds.samples, noisy.samples):
            if after.observed_label != before.observed_label:
                assert after.observed_label == (before.observed_label + 1) % 4

    def test_symmetric_flip_distribution_uniform(self):
        # over many flips, (new - old) mod C should be uniform on {1..C-1}
        ds = data.generate_gaussian_dataset(10, 1250, 2, 1.0, seed=6)
        noisy = data.inject_cross_category_noise(ds, 0.8, "symmetric", 7)
        offsets = [
            (a.observed_label - b.observed_label) % 10
            for a, b in zip(noisy.samples, ds.samples)
            if a.observed_label != b.observed_label
        ]
        assert len(offsets) == 10000
        counts = np.bincount(offsets, minlength=10)[1:]
        assert stats.chisquare(counts).pvalue > 0.01

    def test_ood_never_selected(self):
        ds = data.generate_gaussian_dataset(3, 20, 2, 2.0, seed=1)
        ds = data.inject_cross_domain_noise(ds, 0.3, seed=2)
        noisy = data.inject_cross_category_noise(ds, 0.5, "symmetric", 3)
        for before, after in zip(ds.samples, noisy.samples):
            if before.is_out_of_domain:
                assert after.observed_label == before.observed_label


class TestCrossDomainNoise:
    def test_rate_zero_unchanged(self, balanced_ds):
        assert data.inject_cross_domain_noise(balanced_ds, 0.0, 1) is balanced_ds

    def test_count_formula(self):
        ds = data.generate_gaussian_dataset(3, 30, 2, 2.0, seed=3)  # 90 samples
        out = data.inject_cross_domain_noise(ds, 0.1, seed=4)
        assert len(out) == 100
        assert sum(s.is_out_of_domain for s in out.samples) == 10

    def test_appended_samples_flagged(self, balanced_ds):
        out = data.inject_cross_domain_noise(balanced_ds, 0.2, seed=5)
        appended = out.samples[len(balanced_ds):]
        assert all(s.is_out_of_domain for s in appended)
        assert all(s.observed_label == s.clean_label for s in appended)

    def test_ids_unique(self, balanced_ds):
        out = data.inject_cross_domain_noise(balanced_ds, 0.2, seed=5)
        ids = [s.id for s in out.samples]
        assert len(set(ids)) == len(ids)


class TestImbalance:
    def test_factor_one_unchanged(self, balanced_ds):
        assert data.apply_imbalance(balanced_ds, 1.0, 1) is balanced_ds

    def test_retention_formula_two_classes(self):
        ds = data.generate_gaussian_dataset(2, 100, 2, 2.0, seed=8)
        out = data.apply_imbalance(ds, 4.0, seed=9)
        assert sorted(out.class_counts.tolist(), reverse=True) == [100, 25]

    def test_ratio_near_factor(self):
        ds = data.generate_gaussian_dataset(6, 200, 2, 2.0, seed=10)
        for f in (2.0, 10.0, 50.0):
            out = data.apply_imbalance(ds, f, seed=11)
            assert data.imbalance_ratio(out) == pytest.approx(f, rel=0.1)

    def test_monotone_in_factor(self):
        ds = data.generate_gaussian_dataset(5, 120, 2, 2.0, seed=12)
        ratios = [data.imbalance_ratio(data.apply_imbalance(ds, f, seed=13))
                  for f in (1.0, 2.0, 5.0, 20.0)]
        assert ratios == sorted(ratios)

    def test_factor_below_one_rejected(self, balanced_ds):
        with pytest.raises(ConfigurationError):
            data.apply_imbalance(balanced_ds, 0.5, 1)


class TestImbalanceRatio:
    def test_paper_counts(self):
        # largest 563 vs smallest 4 -> 140.75 (reported as 140.8)
        ds = data.generate_gaussian_dataset(2, 563, 2, 2.0, seed=14)
        trimmed = [s for s in ds.samples if s.observed_label == 0][:563]
        trimmed += [s for s in ds.samples if s.observed_label == 1][:4]
        ds2 = data.Dataset(samples=tuple(trimmed), num_classes=2)
        assert data.imbalance_ratio(ds2) == 140.75

    def test_balanced(self, balanced_ds):
        assert data.imbalance_ratio(balanced_ds) == 1.0

    def test_ratio_150_125(self):
        ds = data.generate_gaussian_dataset(2, 150, 2, 2.0, seed=15)
        trimmed = [s for s in ds.samples if s.observed_label == 0][:150]
        trimmed += [s for s in ds.samples if s.observed_label == 1][:125]
        ds2 = data.Dataset(samples=tuple(trimmed), num_classes=2)
        assert data.imbalance_ratio(ds2) == 1.2


class TestMerge:
    def test_merge_sizes_and_counts(self):
        a = data.generate_gaussian_dataset(3, 10, 2, 2.0, seed=16)
        b = data.generate_gaussian_dataset(3, 7, 2, 2.0, seed=17)
        m = data.merge_datasets(a, b)
        assert len(m) == len(a) + len(b)
        assert m.class_counts.tolist() == (a.class_counts + b.class_counts).tolist()
        ids = [s.id for s in m.samples]
        assert ids == list(range(len(m)))

    def test_class_mismatch_rejected(self):
        a = data.generate_gaussian_dataset(3, 5, 2, 2.0, seed=18)
        b = data.generate_gaussian_dataset(4, 5, 2, 2.0, seed=19)
        with pytest.raises(ConfigurationError):
            data.merge_datasets(a, b)


class TestRoundTrip:
    def test_csv_bit_equal(self, tmp_path):
        ds = data.generate_gaussian_dataset(3, 8, 5, 2.0, seed=20)
        ds = data.inject_cross_category_noise(ds, 0.25, "symmetric", 21)
        ds = data.inject_cross_domain_noise(ds, 0.2, seed=22)
        path = tmp_path / "ds.csv"
        data.write_dataset(ds, path)
        back = data.read_dataset(path)
        assert back.num_classes == ds.num_classes
        assert len(back) == len(ds)
        for a, b in zip(ds.samples, back.samples):
            assert (a.id, a.observed_label, a.clean_label, a.is_out_of_domain) == \
                   (b.id, b.observed_label, b.clean_label, b.is_out_of_domain)
            np.testing.assert_array_equal(a.features, b.features)

    def test_parse_error_cites_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("2,2,1\n0,0,0,0,1.0,oops\n")
        with pytest.raises(ParseError, match="line 2"):
            data.read_dataset(path)


class TestSplitTrainTest:
    def test_split_sizes(self):
        ds = data.generate_gaussian_dataset(3, 20, 2, 2.0, seed=23)
        train, test = data.split_train_test(ds, 5)
        assert train.class_counts.tolist() == [15, 15, 15]
        assert test.class_counts.tolist() == [5, 5, 5]
