"""Tests for the toy-data generators and CSV round trips."""

import numpy as np
import pytest

from cbmap import datasets as ds


def _recover_s_curve_parameter(x, z):
    """Invert (sin t, sign(t)(cos t - 1)) back to t in (-1.5pi, 1.5pi)."""
    sign = -1.0 if z > 0 else 1.0
    base = np.arccos(np.clip(sign * z + 1.0, -1.0, 1.0))
    if sign * x < 0:  # |t| beyond pi wraps the arccos branch
        base = 2.0 * np.pi - base
    return sign * base


class TestSCurve:
    def test_points_lie_on_the_manifold(self):
        data = ds.make_s_curve(500, seed=0).data
        for x, _, z in data:
            t = _recover_s_curve_parameter(x, z)
            assert abs(x - np.sin(t)) + abs(z - np.sign(t) * (np.cos(t) - 1.0)) < 1e-9
            assert -1.5 * np.pi < t < 1.5 * np.pi

    def test_y_range(self):
        data = ds.make_s_curve(500, seed=1).data
        assert data[:, 1].min() >= 0.0
        assert data[:, 1].max() <= 2.0

    def test_y_mean_moment_bound(self):
        n = 2000
        data = ds.make_s_curve(n, seed=2).data
        # y is 2*Uniform(0,1): mean 1, std 2/sqrt(12)
        assert abs(data[:, 1].mean() - 1.0) <= 3.0 * (2.0 / np.sqrt(12.0)) / np.sqrt(n)

    def test_labels_quantize_the_parameter(self):
        out = ds.make_s_curve(300, seed=3)
        t = np.array([_recover_s_curve_parameter(x, z) for x, _, z in out.data])
        edges = np.linspace(-1.5 * np.pi, 1.5 * np.pi, 5)[1:-1]
        np.testing.assert_array_equal(out.labels, np.digitize(t, edges))
        assert set(np.unique(out.labels)) == {0, 1, 2, 3}

    def test_noise_perturbs_off_the_manifold(self):
        noisy = ds.make_s_curve(200, noise_std=0.05, seed=4).data
        clean = ds.make_s_curve(200, noise_std=0.0, seed=4).data
        assert not np.allclose(noisy, clean)
        assert np.abs(noisy - clean).max() < 0.05 * 6  # a few noise stds


class TestSwissRoll:
    def test_radius_identity(self):
        data = ds.make_swiss_roll(500, seed=0).data
        r = np.hypot(data[:, 0], data[:, 2])
        assert r.min() >= 1.5 * np.pi - 1e-9
        assert r.max() <= 4.5 * np.pi + 1e-9

    def test_y_range(self):
        data = ds.make_swiss_roll(500, seed=1).data
        assert data[:, 1].min() >= 0.0
        assert data[:, 1].max() <= 21.0

    def test_radius_coverage(self):
        data = ds.make_swiss_roll(1000, seed=2).data
        r = np.hypot(data[:, 0], data[:, 2])
        counts, _ = np.histogram(r, bins=np.linspace(1.5 * np.pi, 4.5 * np.pi, 11))
        assert np.all(counts > 0)

    def test_labels_quantize_the_roll_angle(self):
        out = ds.make_swiss_roll(300, seed=3)
        r = np.hypot(out.data[:, 0], out.data[:, 2])  # equals t when noise-free
        edges = np.linspace(1.5 * np.pi, 4.5 * np.pi, 5)[1:-1]
        np.testing.assert_array_equal(out.labels, np.digitize(r, edges))


class TestSeveredSphere:
    def test_unit_norm(self):
        data = ds.make_severed_sphere(1000, seed=0).data
        np.testing.assert_allclose(np.linalg.norm(data, axis=1), 1.0, atol=1e-12)

    def test_cut_region_is_empty(self):
        data = ds.make_severed_sphere(1000, seed=1).data
        colatitude = np.arccos(np.clip(data[:, 2], -1.0, 1.0))
        longitude = np.mod(np.arctan2(data[:, 1], data[:, 0]), 2.0 * np.pi)
        assert np.all(colatitude >= ds.SPHERE_CAP_COLATITUDE - 1e-9)
        assert np.all(longitude <= 2.0 * np.pi * ds.SPHERE_WEDGE_FRACTION + 1e-9)

    def test_surviving_fraction_matches_cut_area(self):
        n = 2000
        kept = ds.make_severed_sphere(n, seed=2).data.shape[0]
        # independent cuts: colatitude keeps 7/8 of its range, longitude 0.94
        p = (1.0 - 1.0 / 8.0) * ds.SPHERE_WEDGE_FRACTION
        assert abs(kept - n * p) <= 3.0 * np.sqrt(n * p * (1.0 - p))

    def test_no_labels(self):
        assert ds.make_severed_sphere(50, seed=3).labels is None


class TestCuboids:
    def test_points_stay_inside_their_cuboid(self):
        gap = 2.0
        out = ds.make_cuboids(200, gap=gap, seed=0)
        edges = np.array([2.0, 1.0, 1.0])
        for label in range(4):
            origin = np.array([(label % 2) * (edges[0] + gap),
                               (label // 2) * (edges[1] + gap), 0.0])
            pts = out.data[out.labels == label]
            assert np.all(pts >= origin)
            assert np.all(pts <= origin + edges)

    def test_min_inter_cluster_distance(self):
        gap = 2.0
        out = ds.make_cuboids(1000, gap=gap, seed=1)
        smallest = np.inf
        for a in range(4):
            for b in range(a + 1, 4):
                from cbmap.linalg_core import euclidean_distance_matrix

                d = euclidean_distance_matrix(out.data[out.labels == a],
                                              out.data[out.labels == b])
                smallest = min(smallest, d.min())
        assert smallest >= 0.9 * gap

    def test_row_count_and_labels(self):
        out = ds.make_cuboids(250, gap=1.0, seed=2)
        assert out.data.shape == (1000, 3)
        np.testing.assert_array_equal(np.bincount(out.labels), [250] * 4)

    def test_centroids_close_in_monotonically_with_gap(self):
        def mean_centroid_distance(gap):
            out = ds.make_cuboids(500, gap=gap, seed=3)
            centroids = np.array([out.data[out.labels == j].mean(axis=0) for j in range(4)])
            dists = [np.linalg.norm(centroids[a] - centroids[b])
                     for a in range(4) for b in range(a + 1, 4)]
            return np.mean(dists)

        values = [mean_centroid_distance(g) for g in (4.0, 2.0, 1.0, 0.25)]
        assert np.all(np.diff(values) < 0.0)

    def test_all_pairwise_centroids_shrink_with_gap(self):
        def centroids(gap):
            out = ds.make_cuboids(400, gap=gap, seed=4)
            return np.array([out.data[out.labels == j].mean(axis=0) for j in range(4)])

        wide, narrow = centroids(3.0), centroids(1.5)
        for a in range(4):
            for b in range(a + 1, 4):
                assert (np.linalg.norm(narrow[a] - narrow[b])
                        < np.linalg.norm(wide[a] - wide[b]))


class TestGeneratorDeterminism:
    @pytest.mark.parametrize("make", [ds.make_s_curve, ds.make_swiss_roll,
                                      ds.make_severed_sphere])
    def test_same_seed_same_data(self, make):
        a = make(200, seed=9)
        b = make(200, seed=9)
        np.testing.assert_array_equal(a.data, b.data)

    @pytest.mark.parametrize("make", [ds.make_s_curve, ds.make_swiss_roll,
                                      ds.make_severed_sphere])
    def test_different_seeds_differ(self, make):
        a = make(200, seed=9)
        b = make(200, seed=10)
        assert a.data.shape != b.data.shape or not np.array_equal(a.data, b.data)

    def test_cuboids_deterministic(self):
        a = ds.make_cuboids(100, gap=2.0, seed=5)
        b = ds.make_cuboids(100, gap=2.0, seed=5)
        np.testing.assert_array_equal(a.data, b.data)

    @pytest.mark.parametrize("make", [ds.make_s_curve, ds.make_swiss_roll,
                                      ds.make_severed_sphere])
    def test_rejects_nonpositive_n(self, make):
        with pytest.raises(ValueError, match="at least 1"):
            make(0)


class TestLoadCsv:
    def test_small_file_with_header(self, tmp_path):
        f = tmp_path / "t.csv"
        f.write_text("a,b\n1,2\n3,4\n5,6\n")
        out = ds.load_csv(f)
        np.testing.assert_array_equal(out.data, [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
        assert out.labels is None

    def test_label_column_by_name_first_seen_encoding(self, tmp_path):
        f = tmp_path / "t.csv"
        f.write_text("x,class\n0.5,a\n1.5,b\n2.5,a\n")
        out = ds.load_csv(f, label_column="class")
        np.testing.assert_array_equal(out.labels, [0, 1, 0])
        np.testing.assert_array_equal(out.data, [[0.5], [1.5], [2.5]])

    def test_label_column_by_index_without_header(self, tmp_path):
        f = tmp_path / "t.csv"
        f.write_text("1,2,red\n3,4,blue\n")
        out = ds.load_csv(f, has_header=False, label_column=2)
        np.testing.assert_array_equal(out.labels, [0, 1])
        assert out.data.shape == (2, 2)

    def test_ragged_row_reports_line_number(self, tmp_path):
        f = tmp_path / "t.csv"
        f.write_text("a,b\n1,2\n3\n")
        with pytest.raises(ValueError, match="line 3"):
            ds.load_csv(f)

    def test_non_numeric_cell_reports_position(self, tmp_path):
        f = tmp_path / "t.csv"
        f.write_text("a,b\n1,2\n3,oops\n")
        with pytest.raises(ValueError, match="line 3, column 2"):
            ds.load_csv(f)

    def test_empty_file_rejected(self, tmp_path):
        f = tmp_path / "t.csv"
        f.write_text("")
        with pytest.raises(ValueError, match="empty"):
            ds.load_csv(f)

    def test_header_only_rejected(self, tmp_path):
        f = tmp_path / "t.csv"
        f.write_text("a,b\n")
        with pytest.raises(ValueError, match="no data rows"):
            ds.load_csv(f)

    def test_unknown_label_column(self, tmp_path):
        f = tmp_path / "t.csv"
        f.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError, match="not found"):
            ds.load_csv(f, label_column="missing")

    def test_label_name_requires_header(self, tmp_path):
        f = tmp_path / "t.csv"
        f.write_text("1,2\n3,4\n")
        with pytest.raises(ValueError, match="needs a header"):
            ds.load_csv(f, has_header=False, label_column="class")

    def test_label_index_out_of_range(self, tmp_path):
        f = tmp_path / "t.csv"
        f.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError, match="out of range"):
            ds.load_csv(f, label_column=5)

    def test_round_trip_preserves_values_exactly(self, tmp_path):
        rng = np.random.default_rng(40)
        data = rng.normal(size=(20, 3))
        labels = rng.integers(0, 3, size=20)
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        ds.write_csv(first, data, labels)
        loaded = ds.load_csv(first, label_column="label")
        ds.write_csv(second, loaded.data, loaded.labels)
        reloaded = ds.load_csv(second, label_column="label")
        np.testing.assert_array_equal(reloaded.data, data)
        np.testing.assert_array_equal(reloaded.labels, labels)


class TestWriteCsv:
    def test_default_header(self, tmp_path):
        f = tmp_path / "t.csv"
        ds.write_csv(f, [[1.0, 2.0]], [7])
        assert f.read_text().splitlines()[0] == "x0,x1,label"

    def test_labels_length_checked(self, tmp_path):
        with pytest.raises(ValueError, match="does not match"):
            ds.write_csv(tmp_path / "t.csv", [[1.0], [2.0]], [0])

    def test_header_width_checked(self, tmp_path):
        with pytest.raises(ValueError, match="header"):
            ds.write_csv(tmp_path / "t.csv", [[1.0, 2.0]], header=["only"])
