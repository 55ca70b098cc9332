import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linkbox.errors import NoLabelError, UnknownNodeError
from linkbox.gmeans import Cluster
from linkbox.labeler import (
    LabelConfig,
    coverage,
    label_cluster,
    label_mf,
    label_mfi,
    label_zeta_lca,
    union_taxonomy,
    zeta_lca,
)
from linkbox.taxonomy import IsaTaxonomy, SparseFeatureVector, TaxonomyCorpus

from oracles import random_label_instance, zeta_lca_oracle
from test_taxonomy import four_entity_corpus


def flat(e, cats):
    return IsaTaxonomy.from_edges(e, [(e, c, 1.0) for c in cats])


class FixedIdf:
    def __init__(self, idf):
        self._idf = idf

    def idf(self, c):
        return self._idf[c]


class TestUnion:
    def test_single_member(self):
        t = IsaTaxonomy.from_edges("e", [("e", "a", 0.5), ("a", "b", 0.5)])
        ct = union_taxonomy([t])
        assert ct.members == ("e",)
        assert ct.tf == {"a": 1, "b": 1}

    def test_disjoint(self):
        ct = union_taxonomy([flat("x", ["a"]), flat("y", ["b"])])
        assert ct.nodes == {"a", "b"}
        assert ct.parents == {"x": {"a"}, "y": {"b"}}

    def test_overlap(self):
        t1 = IsaTaxonomy.from_edges("x", [("x", "a", 1), ("a", "c", 1), ("c", "d", 1)])
        t2 = IsaTaxonomy.from_edges("y", [("y", "b", 1), ("b", "c", 1), ("c", "d", 1)])
        ct = union_taxonomy([t1, t2])
        assert ct.tf == {"a": 1, "b": 1, "c": 2, "d": 2}
        assert ct.parents["c"] == {"d"}
        assert all(v <= len(ct.members) for v in ct.tf.values())

    def test_empty(self):
        with pytest.raises(ValueError):
            union_taxonomy([])

    def test_cycle_rejected(self):
        t1 = IsaTaxonomy.from_edges("x", [("x", "a", 1), ("a", "b", 1)])
        t2 = IsaTaxonomy.from_edges("y", [("y", "b", 1), ("b", "a", 1)])
        with pytest.raises(ValueError):
            union_taxonomy([t1, t2])


class TestMfMfi:
    def test_one_category(self):
        assert label_mf(union_taxonomy([flat("x", ["a"])])) == "a"

    def test_most_frequent(self):
        ct = union_taxonomy([flat("x", ["c1"]), flat("y", ["c1"]), flat("z", ["c1", "c2"])])
        assert label_mf(ct) == "c1"

    def test_no_categories(self):
        ct = union_taxonomy([flat("x", [])])
        with pytest.raises(NoLabelError):
            label_mf(ct)
        with pytest.raises(NoLabelError):
            label_mfi(ct, FixedIdf({}))
        with pytest.raises(NoLabelError):
            label_zeta_lca(ct, FixedIdf({}))

    def test_people_cluster_prefers_broad_label(self):
        people = [f"p{i}" for i in range(5)]
        taxes = [
            IsaTaxonomy.from_edges(p, [(p, "american people", 1), ("american people", "people by status", 1)])
            for p in people[1:]
        ]
        taxes.append(
            IsaTaxonomy.from_edges(
                "p0",
                [("p0", "tunisian-jewish descent", 1), ("tunisian-jewish descent", "people by status", 1)],
            )
        )
        ct = union_taxonomy(taxes)
        assert label_mf(ct) == "people by status"
        assert coverage(ct, "people by status") == 1.0
        assert coverage(ct, "tunisian-jewish descent") == pytest.approx(0.2)

    def test_mfi_equal_tf_is_max_idf(self):
        ct = union_taxonomy([flat("x", ["a", "b", "c"])])
        assert label_mfi(ct, FixedIdf({"a": 0.1, "b": 0.7, "c": 0.3})) == "b"

    def test_mfi_product(self):
        ct = union_taxonomy([flat("x", ["c1", "c2"]), flat("y", ["c1", "c2"])])
        assert label_mfi(ct, FixedIdf({"c1": 0.3, "c2": 0.9})) == "c2"

    def test_mfi_toy_corpus(self):
        cats = {"m1": "k1 k2 k3", "m2": "k1 k2 k4", "m3": "k1 k5", "o1": "k1 k2", "o2": "k1 k6", "o3": "k6 k3"}
        corpus = TaxonomyCorpus([flat(e, cs.split()) for e, cs in cats.items()])
        ct = union_taxonomy(corpus[m] for m in ("m1", "m2", "m3"))
        assert label_mfi(ct, corpus) == "k4"
        assert ct.tf["k4"] * corpus.idf("k4") == pytest.approx(1.791759469228055)
        assert ct.tf["k2"] * corpus.idf("k2") == pytest.approx(1.3862943611198906)


class TestZetaLca:
    def test_most_specific_full_coverage(self):
        corpus = four_entity_corpus()
        ct = union_taxonomy(corpus[e] for e in ("e1", "e2", "e3"))
        assert ct.reach_count("c1", 1) / 3 == pytest.approx(2 / 3)
        assert ct.reach_count("c2", 1) / 3 == pytest.approx(1 / 3)
        assert ct.reach_count("c2", 2) == ct.reach_count("c4", 2) == 3
        res = label_zeta_lca(ct, corpus, LabelConfig(zeta=1.0))
        assert res.label == "c2"
        assert res.coverage == 1.0
        assert res.strategy == "ZLCA"

    def test_four_entity_coverage(self):
        corpus = four_entity_corpus()
        ct = union_taxonomy(corpus[e] for e in ("e1", "e2", "e3"))
        assert coverage(ct, "c1") == pytest.approx(0.67, abs=0.005)
        assert coverage(ct, "c4") == 1.0
        with pytest.raises(UnknownNodeError):
            coverage(ct, "c3")

    def test_single_member_single_parent(self):
        corpus = TaxonomyCorpus([flat("x", ["c"]), flat("y", ["d"])])
        res = label_zeta_lca(union_taxonomy([corpus["x"]]), corpus)
        assert (res.label, res.coverage) == ("c", 1.0)

    def test_relaxation(self):
        # no category reaches 80% of three members with disjoint parents
        corpus = TaxonomyCorpus([flat("x", ["a"]), flat("y", ["b"]), flat("z", ["c"]), flat("w", ["a"])])
        ct = union_taxonomy(corpus[e] for e in ("x", "y", "z"))
        label, z = zeta_lca(ct, corpus, LabelConfig(zeta=0.8))
        assert z == pytest.approx(1 / 3)
        assert label == "b"

    def test_level_cap_forces_relaxation(self):
        corpus = TaxonomyCorpus(
            [
                IsaTaxonomy.from_edges("x", [("x", "a", 1), ("a", "top", 1)]),
                IsaTaxonomy.from_edges("y", [("y", "b", 1), ("b", "top", 1)]),
            ]
        )
        ct = union_taxonomy([corpus["x"], corpus["y"]])
        assert zeta_lca(ct, corpus, LabelConfig(zeta=1.0, max_level=2)) == ("top", 1.0)
        label, z = zeta_lca(ct, corpus, LabelConfig(zeta=1.0, max_level=1))
        assert (label, z) == ("a", 0.5)

    def test_label_cluster_dispatch(self):
        corpus = four_entity_corpus()
        cluster = Cluster(("e1", "e2", "e3"), SparseFeatureVector())
        assert label_cluster(cluster, corpus, LabelConfig(strategy="mf")).label == "c2"
        assert label_cluster(cluster, corpus, LabelConfig(strategy="mfi")).label == "c1"
        assert label_cluster(cluster, corpus, LabelConfig(zeta=1.0)).label == "c2"

    def test_config_validation(self):
        with pytest.raises(ValueError):
            LabelConfig(zeta=0)
        with pytest.raises(ValueError):
            LabelConfig(strategy="best")

    def test_matches_exhaustive_oracle(self):
        rng = random.Random(20240)
        for _ in range(200):
            corpus, members = random_label_instance(rng, 10, 10)
            ct = union_taxonomy(corpus[m] for m in members)
            zeta = rng.choice([1.0, 0.8, 0.5, 0.3])
            expected = zeta_lca_oracle(corpus, members, zeta, 5)
            if expected is None:
                with pytest.raises(NoLabelError):
                    zeta_lca(ct, corpus, LabelConfig(zeta=zeta))
            else:
                assert zeta_lca(ct, corpus, LabelConfig(zeta=zeta))[0] == expected


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1.0, 0.9, 0.6, 0.2]), st.integers(1, 5))
def test_zeta_lca_properties(seed, zeta, max_level):
    corpus, members = random_label_instance(random.Random(seed), 8, 12)
    ct = union_taxonomy(corpus[m] for m in members)
    if not ct.tf:
        return
    n = len(members)
    label, z = zeta_lca(ct, corpus, LabelConfig(zeta=zeta, max_level=max_level))
    assert coverage(ct, label) >= z - 1e-9
    level = min(i for i in range(1, max_level + 1) if ct.reach_count(label, i) >= z * n - 1e-9)
    for c in ct.tf:
        for i in range(1, level):
            assert ct.reach_count(c, i) < z * n - 1e-9
        if ct.reach_count(c, level) >= z * n - 1e-9:
            assert corpus.idf(c) <= corpus.idf(label)
    assert ct.tf[label_mf(ct)] == max(ct.tf.values())
