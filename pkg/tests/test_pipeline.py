import json

import pytest

from linkbox.config import PipelineConfig
from linkbox.kg_store import KnowledgeGraph, load_graph_dir
from linkbox.pipeline import (
    evaluate,
    load_judgments,
    load_truth,
    normalize_facts,
    render_facts,
    run_pipeline,
    triples,
)

from conftest import FIXTURES


@pytest.fixture(scope="module")
def two_topic():
    return load_graph_dir(FIXTURES / "two_topic")


@pytest.fixture(scope="module")
def reuse30():
    return load_graph_dir(FIXTURES / "reuse30")


def test_empty_graph():
    run = run_pipeline(PipelineConfig(), KnowledgeGraph.build({}))
    assert run.facts == []
    assert run.report.articles == run.report.clusters == run.report.facts == 0
    assert run.report.valid is None and run.report.precision is None


def test_golden_facts(two_topic):
    run = run_pipeline(PipelineConfig(), two_topic)
    assert render_facts(run.facts) == (FIXTURES / "two_topic" / "facts.jsonl").read_text()
    gallery = [f for f in run.facts if f["article"] == "gallery"]
    assert [f["property"] for f in gallery] == ["blue painters", "red painters"]
    for f in gallery:
        assert {v.split("_")[0] for v in f["values"]} == {f["property"].split()[0]}


def test_reuse_matches_direct(reuse30):
    on = run_pipeline(PipelineConfig(), reuse30)
    off = run_pipeline(PipelineConfig(reuse=False), reuse30)
    assert on.batch.forest is not None and len(on.batch.forest.parent) > 0
    assert normalize_facts(on.facts) == normalize_facts(off.facts)


def test_facts_partition_clusterable(reuse30):
    run = run_pipeline(PipelineConfig(), reuse30)
    for a, res in run.batch.results.items():
        members = [m for lc in res.labeled_clusters for m in lc.members]
        assert sorted(members) == sorted(run.extractor.clusterable(a))


def test_deterministic(reuse30):
    cfg = PipelineConfig().replace(cluster={"rng_seed": 5})
    first = render_facts(run_pipeline(cfg, reuse30).facts)
    second = render_facts(run_pipeline(cfg, load_graph_dir(FIXTURES / "reuse30")).facts)
    assert first == second


def test_normalize_merges_equal_labels():
    facts = [
        {"article": "a", "property": "p", "values": ["x"]},
        {"article": "a", "property": "p", "values": ["y"]},
    ]
    assert normalize_facts(facts) == {"a": {"p": frozenset({"x", "y"})}}
    assert triples(facts) == {("a", "p", "x"), ("a", "p", "y")}


def test_evaluate_with_truth_and_judgments(two_topic):
    run = run_pipeline(PipelineConfig(), two_topic)
    truth = load_truth([f"gallery\t{e}\trelated" for e in two_topic.links["gallery"] if "painter" in e])
    judged = {
        (f"{a}#{i}", m): True
        for a, res in run.batch.results.items()
        for i, lc in enumerate(res.labeled_clusters)
        for m in lc.members
    }
    rep = evaluate(run.extractor, run.batch.results, truth, judged)
    assert rep.precision == 1.0
    assert rep.m_at_k[len(two_topic.links["gallery"])] == 1.0
    assert 0 < rep.closeness <= 1.0
    # one gallery cluster per colour, each a single point
    assert rep.valid == float("inf")
    data = json.loads(rep.to_json())
    assert data["valid"] == "inf"


def test_loaders_reject_bad_flags():
    with pytest.raises(ValueError):
        load_truth(["a\tb\tmaybe"])
    with pytest.raises(ValueError):
        load_judgments(["a#0\tb\t2"])
    assert load_judgments(["a#0\tb\t1"]) == {("a#0", "b"): True}
