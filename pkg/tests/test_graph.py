import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairsdp.graph import (
    ClusterAssignment,
    Graph,
    GraphFormatError,
    SensitiveAttributes,
    adjacency_from_points,
    format_edge_list,
    load_edge_list,
    load_labels,
    load_sensitive,
    save_edge_list,
    save_labels,
    save_sensitive,
)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def random_graph(rng, n, density=0.4):
    a = np.triu(rng.random((n, n)) * (rng.random((n, n)) < density), 1)
    return Graph(a + a.T)


class TestGraphInvariants:
    def test_rejects_asymmetric(self):
        with pytest.raises(GraphFormatError):
            Graph(np.array([[0, 1.0], [0.5, 0]]))

    def test_rejects_diagonal(self):
        with pytest.raises(GraphFormatError):
            Graph(np.array([[0.1, 0], [0, 0]]))

    @pytest.mark.parametrize("w", [-0.1, 1.5, np.nan])
    def test_rejects_out_of_range(self, w):
        with pytest.raises(GraphFormatError):
            Graph(np.array([[0, w], [w, 0]]))

    def test_immutable(self):
        g = Graph(np.array([[0, 1.0], [1.0, 0]]))
        with pytest.raises(ValueError):
            g.adjacency[0, 1] = 0.5

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10_000), st.integers(3, 8))
    def test_perturbation_fuzz(self, seed, n):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, n)
        a = np.array(g.adjacency)
        i, j = rng.choice(n, 2, replace=False)
        kind = seed % 3
        if kind == 0:
            a[i, j] += 0.25 if a[i, j] < 0.5 else -0.25  # breaks symmetry
        elif kind == 1:
            a[i, i] = 0.5
        else:
            a[i, j] = a[j, i] = 1.0 + rng.random() + 1e-9
        with pytest.raises(GraphFormatError):
            Graph(a)


class TestEdgeList:
    def test_load_example(self, tmp_path):
        g = load_edge_list(write(tmp_path, "g.el", "n 3\n0 1 1.0\n1 2 0.5"))
        assert g.n == 3
        assert g.adjacency[0, 1] == g.adjacency[1, 0] == 1.0
        assert g.adjacency[1, 2] == 0.5
        assert g.adjacency[0, 2] == 0

    def test_comments_and_blank_lines(self, tmp_path):
        g = load_edge_list(write(tmp_path, "g.el", "# hi\n\nn 2\n# edge\n0 1 0.25\n"))
        assert g.adjacency[1, 0] == 0.25

    @pytest.mark.parametrize(
        "text",
        [
            "n 2\n0 1 1.5",  # weight out of range
            "n 2\n0 2 0.5",  # id out of range
            "n 3\n0 1 0.5\n1 0 0.5",  # duplicate
            "n 2\n0 1",  # malformed
            "0 1 0.5",  # missing header
            "n 2\n0 x 0.5",
            "n 2\n1 1 0.5",
        ],
    )
    def test_errors(self, tmp_path, text):
        with pytest.raises(GraphFormatError):
            load_edge_list(write(tmp_path, "g.el", text))

    def test_save_format(self, tmp_path):
        g = Graph(np.array([[0, 0.5], [0.5, 0]]))
        assert format_edge_list(g) == "n 2\n0 1 0.5\n"
        assert format_edge_list(Graph(np.zeros((3, 3)))) == "n 3\n"

    def test_pairs_sorted(self):
        a = np.zeros((4, 4))
        for u, v in [(2, 3), (0, 3), (0, 1), (1, 2)]:
            a[u, v] = a[v, u] = 0.3
        lines = format_edge_list(Graph(a)).splitlines()[1:]
        assert [tuple(map(int, l.split()[:2])) for l in lines] == [(0, 1), (0, 3), (1, 2), (2, 3)]

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.integers(1, 12))
    def test_round_trip_bit_exact(self, seed, n):
        import tempfile
        from pathlib import Path

        g = random_graph(np.random.default_rng(seed), n)
        with tempfile.TemporaryDirectory() as d:
            p = Path(d) / "g.el"
            save_edge_list(g, p)
            first = p.read_bytes()
            h = load_edge_list(p)
            assert np.array_equal(g.adjacency, h.adjacency)
            save_edge_list(h, p)
            assert p.read_bytes() == first


class TestLabels:
    def test_load(self, tmp_path):
        assert load_labels(write(tmp_path, "l.csv", "node,label\n0,0\n1,1\n"), 2).tolist() == [0, 1]

    @pytest.mark.parametrize(
        "text",
        ["node,label\n0,0\n", "node,label\n0,0\n0,1\n", "node,label\n0,0\n1,a\n", "id,label\n0,0\n1,1\n"],
    )
    def test_errors(self, tmp_path, text):
        with pytest.raises(GraphFormatError):
            load_labels(write(tmp_path, "l.csv", text), 2)

    def test_round_trip(self, tmp_path):
        labels = np.random.default_rng(1).integers(0, 5, 40)
        save_labels(labels, tmp_path / "l.csv")
        assert np.array_equal(load_labels(tmp_path / "l.csv", 40), labels)

    def test_sensitive_round_trip(self, tmp_path):
        s = SensitiveAttributes.binary([1, -1, -1, 1])
        save_sensitive(s, tmp_path / "s.csv")
        assert np.array_equal(load_sensitive(tmp_path / "s.csv", 4).signs, s.signs)
        m = SensitiveAttributes.from_levels([0, 2, 1, 2, 0])
        save_sensitive(m, tmp_path / "m.csv")
        assert np.array_equal(load_sensitive(tmp_path / "m.csv", 5).indicators, m.indicators)

    def test_sensitive_zero_one_is_binary(self, tmp_path):
        s = load_sensitive(write(tmp_path, "s.csv", "node,label\n0,0\n1,1\n2,1\n"), 3)
        assert s.signs.tolist() == [-1, 1, 1]


class TestTypes:
    def test_sensitive_binary_validation(self):
        with pytest.raises(GraphFormatError):
            SensitiveAttributes.binary([1, 0, -1])

    def test_multilevel_one_hot(self):
        with pytest.raises(GraphFormatError):
            SensitiveAttributes(indicators=np.array([[1, 1], [1, 0]]))
        s = SensitiveAttributes.from_levels([0, 1, 2, 1])
        assert s.num_groups == 3
        assert s.group_labels().tolist() == [0, 1, 2, 1]

    def test_assignment(self):
        c = ClusterAssignment.from_signs([-1, 1, 0])
        assert c.labels.tolist() == [0, 1, 1]
        assert c.signs().tolist() == [-1, 1, 1]
        with pytest.raises(ValueError):
            ClusterAssignment(np.array([0, 2]), 2)


class TestPoints:
    def test_threshold(self):
        g = adjacency_from_points([(0, 0), (0, 1), (0, 3)], mode="threshold", tau=1)
        assert g.adjacency[0, 1] == 1 and g.adjacency[0, 2] == 0 and g.adjacency[1, 2] == 0

    def test_inverse_distance(self):
        g = adjacency_from_points([(0, 0), (0, 1), (0, 2)])
        # raw 1/d: (0,1)->1, (0,2)->0.5, (1,2)->1; max is 1
        assert g.adjacency[0, 1] == 1.0
        assert g.adjacency[0, 2] == 0.5
        assert g.adjacency[1, 2] == 1.0

    def test_inverse_distance_rescales_into_unit_interval(self):
        g = adjacency_from_points([(0, 0), (0, 0.1), (0, 0.5)])
        off = g.adjacency[~np.eye(3, dtype=bool)]
        assert off.max() == 1.0 and off.min() > 0

    def test_errors(self):
        with pytest.raises(ValueError):
            adjacency_from_points([(0, 0), (0, 0)])
        with pytest.raises(ValueError):
            adjacency_from_points([(0, 0), (1, 0)], mode="threshold", tau=0)
