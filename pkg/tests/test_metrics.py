import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from linkbox.gmeans import Cluster
from linkbox.labeler import LabeledCluster
from linkbox.metrics import closeness, m_at_k, overlap_distributions, precision_pcl, valid_index
from linkbox.taxonomy import SparseFeatureVector

from conftest import make_graph

# values computed offline with dense numpy cosine distances
VALID_FIXTURE = {
    "inter": 0.902747393148473,
    "intra": 0.03720683920060712,
    "valid": 24.262942312330107,
}


def valid_fixture():
    keys = "abcd"

    def sv(*w):
        return SparseFeatureVector(zip(keys, w))

    vectors = {
        "p1": sv(1, 0, 0, 0), "p2": sv(2, 1, 0, 0),
        "q1": sv(0, 1, 1, 0), "q2": sv(0, 0, 3, 1), "q3": sv(0, 1, 2, 0),
        "r1": sv(0, 0, 0, 1),
    }
    clusters = [
        Cluster(("p1", "p2"), sv(1.5, 0.5, 0, 0)),
        Cluster(("q1", "q2", "q3"), sv(0, 0.5, 2, 0.25)),
        Cluster(("r1",), sv(0, 0, 0.1, 1)),
    ]
    return clusters, vectors


class TestValidIndex:
    def test_fixture(self):
        vi = valid_index(*valid_fixture())
        assert vi.inter == pytest.approx(VALID_FIXTURE["inter"], abs=1e-9)
        assert vi.intra == pytest.approx(VALID_FIXTURE["intra"], abs=1e-9)
        assert vi.valid == pytest.approx(VALID_FIXTURE["valid"], abs=1e-9)

    def test_tight_clusters_are_infinite(self):
        v = {"x": SparseFeatureVector({"a": 1}), "y": SparseFeatureVector({"b": 1})}
        vi = valid_index([Cluster(("x",), v["x"]), Cluster(("y",), v["y"])], v)
        assert vi.inter == 1.0
        assert vi.valid == math.inf

    def test_needs_two_clusters(self):
        v = {"x": SparseFeatureVector({"a": 1})}
        with pytest.raises(ValueError):
            valid_index([Cluster(("x",), v["x"])], v)

    def test_grows_with_separation(self):
        # two clusters at angle theta, members spread by a fixed small angle
        def at(theta):
            return SparseFeatureVector({"a": math.cos(0.1 + theta), "b": math.sin(0.1 + theta)})

        spread = 0.05
        prev = 0.0
        for sep in (0.2, 0.5, 0.9, 1.3):
            vecs = {"x1": at(-spread), "x2": at(spread), "y1": at(sep - spread), "y2": at(sep + spread)}
            cl = [Cluster(("x1", "x2"), at(0)), Cluster(("y1", "y2"), at(sep))]
            vi = valid_index(cl, vecs)
            assert vi.valid > prev
            prev = vi.valid


class TestMAtK:
    ORDER = ["a", "b", "c", "d", "e", "f"]

    def test_bounds(self):
        assert m_at_k(self.ORDER, {"a", "f"}, 6) == 1.0
        assert m_at_k(self.ORDER, {"a", "f"}, 0) == 0.0

    def test_perfect_half(self):
        assert m_at_k(self.ORDER, {"a", "b", "c"}, 3) == 1.0

    def test_errors(self):
        with pytest.raises(ValueError):
            m_at_k(self.ORDER, set(), 2)
        with pytest.raises(ValueError):
            m_at_k(self.ORDER, {"a"}, 7)

    @given(st.permutations(list("abcdefgh")), st.sets(st.sampled_from("abcdefgh"), min_size=1))
    def test_nondecreasing(self, order, truth):
        vals = [m_at_k(order, truth, k) for k in range(len(order) + 1)]
        assert all(0 <= v <= 1 for v in vals)
        assert vals == sorted(vals)


class TestCloseness:
    def test_truth_against_itself(self):
        order = ["a", "b", "c", "x", "y"]
        assert closeness(order, {"a", "b", "c"}, 1, 5) == 1.0
        assert closeness(order, {"a", "b", "c"}, 1, 5, truth_curve=order) == 1.0

    def test_reversed_is_worse(self):
        order = ["a", "b", "c", "x", "y"]
        assert closeness(order[::-1], {"a", "b", "c"}, 1, 5) < 1.0

    def test_hand_ordering(self):
        order = ["a", "x", "b", "y", "c", "z"]
        truth = {"a", "b", "c"}
        ours = [Fraction(v) for v in (1, 1, 2, 2, 3, 3)]
        best = [Fraction(v) for v in (1, 2, 3, 3, 3, 3)]
        expected = sum(o / b for o, b in zip(ours, best)) / 6
        assert expected == Fraction(29, 36)
        assert closeness(order, truth, 1, 6) == pytest.approx(float(expected), abs=1e-12)

    def test_zero_reference_terms_skipped(self):
        order = ["x", "a"]
        curve = {1: 0.0, 2: 1.0}
        assert closeness(order, {"a"}, 1, 2, truth_curve=curve) == 1.0
        with pytest.raises(ValueError):
            closeness(order, {"a"}, 1, 1, truth_curve=curve)

    def test_range_checked(self):
        with pytest.raises(ValueError):
            closeness(["a"], {"a"}, 0, 1)


class TestPrecision:
    def test_all_true_and_false(self):
        clusters = {"c0": ["a", "b"], "c1": ["c"]}
        yes = {("c0", "a"): True, ("c0", "b"): True, ("c1", "c"): True}
        assert precision_pcl(clusters, yes) == 1.0
        assert precision_pcl(clusters, {k: False for k in yes}) == 0.0

    def test_mixed(self):
        clusters = {"c0": ["a", "b"], "c1": ["c", "d", "e", "f"]}
        j = {("c0", "a"): True, ("c0", "b"): False,
             ("c1", "c"): True, ("c1", "d"): True, ("c1", "e"): True, ("c1", "f"): False}
        assert precision_pcl(clusters, j) == 0.625

    def test_labeled_sequence(self):
        lcs = [LabeledCluster(Cluster(("a",), SparseFeatureVector()), "L", 1.0, "MF")]
        assert precision_pcl(lcs, {("0", "a"): True}) == 1.0

    def test_missing_listed(self):
        with pytest.raises(KeyError, match="c0/b"):
            precision_pcl({"c0": ["a", "b"]}, {("c0", "a"): True})


class TestOverlap:
    def test_star(self):
        leaves = ["l1", "l2", "l3", "l4"]
        g = make_graph({"c": leaves, **{l: ["c"] for l in leaves}})
        ov = overlap_distributions(g, bins=4, max_k=2)
        # a leaf's only neighbour is the centre, which the centre does not link to itself
        assert all(v == 0.0 for v in ov.max_overlap.values())
        assert [p for _, p in ov.cdf] == [1.0] * 5
        # leaves two hops apart share their single neighbour
        assert ov.k_hop == {1: 0.0, 2: 1.0}

    def test_k4(self):
        nodes = ["a", "b", "c", "d"]
        g = make_graph({u: [v for v in nodes if v != u] for u in nodes})
        ov = overlap_distributions(g, bins=10, max_k=2)
        assert all(v == pytest.approx(2 / 3) for v in ov.max_overlap.values())
        cdf = dict(ov.cdf)
        assert cdf[0.6] == 0.0 and cdf[0.7] == 1.0
        assert ov.k_hop[1] == pytest.approx(2 / 3)
        assert ov.k_hop[2] is None

    def test_no_articles(self):
        ov = overlap_distributions(make_graph({}, entities=["x"]))
        assert ov.max_overlap == {}
