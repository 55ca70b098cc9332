from __future__ import annotations

from pathlib import Path

import pytest

from linkbox.kg_store import KnowledgeGraph

FIXTURES = Path(__file__).parent / "fixtures"


def make_graph(links=None, cats=None, entities=(), strict=True) -> KnowledgeGraph:
    """Graph from link and category dicts; kinds are inferred.

    Every link endpoint and category-dict key not used as a category is an
    entity; every category value is a category.
    """
    links = links or {}
    cats = cats or {}
    category_ids = {c for cs in cats.values() for c in cs}
    kinds = {c: "category" for c in category_ids}
    for e in entities:
        kinds[e] = "entity"
    for src, dsts in links.items():
        kinds[src] = "entity"
        for d in dsts:
            kinds[d] = "entity"
    for node in cats:
        kinds.setdefault(node, "entity")
    return KnowledgeGraph.build(kinds, links, cats, strict=strict)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
