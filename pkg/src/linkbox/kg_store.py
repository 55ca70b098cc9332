"""Tabular knowledge-graph loading and the corpus statistics built on it.

The on-disk format is three tab-separated files::

    entities    id<TAB>kind          kind is "entity" or "category"
    links       source<TAB>target    directed, file order = article order
    categories  node<TAB>category    node may itself be a category

Lines starting with ``#`` and blank lines are ignored.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Union

from .errors import DanglingReferenceError, GraphFormatError, UnknownNodeError

logger = logging.getLogger(__name__)

ENTITY = "entity"
CATEGORY = "category"
KINDS = (ENTITY, CATEGORY)

Source = Union[str, Path, Iterable[str]]


@dataclass(frozen=True, eq=False)
class KnowledgeGraph:
    """Immutable directed entity graph with a category layer.

    ``links`` keeps each article's linked entities in article order.
    ``categories`` is keyed by node id, so category nodes map to their
    parent categories.
    """

    kinds: Mapping[str, str]
    links: Mapping[str, tuple[str, ...]]
    categories: Mapping[str, frozenset[str]]
    link_count: Mapping[str, int] = field(repr=False)
    _in_links: Mapping[str, frozenset[str]] = field(repr=False)

    @classmethod
    def build(
        cls,
        kinds: Mapping[str, str],
        links: Mapping[str, Iterable[str]] | Iterable[tuple[str, str]] = (),
        categories: Mapping[str, Iterable[str]] | Iterable[tuple[str, str]] = (),
        strict: bool = True,
    ) -> "KnowledgeGraph":
        """Validate and freeze a graph from in-memory records.

        With ``strict=False`` dangling references and self-loops are
        dropped with a warning instead of raising.
        """
        kinds = dict(kinds)
        for node, kind in kinds.items():
            if kind not in KINDS:
                raise ValueError(f"node {node!r} has unknown kind {kind!r}")

        def problem(msg: str) -> None:
            if strict:
                raise DanglingReferenceError(msg)
            logger.warning(msg)

        ordered: dict[str, dict[str, None]] = defaultdict(dict)
        for src, dst in _pairs(links):
            if kinds.get(src) != ENTITY:
                problem(f"link source {src!r} is not a declared entity")
                continue
            if kinds.get(dst) != ENTITY:
                problem(f"link target {dst!r} is not a declared entity")
                continue
            if src == dst:
                problem(f"self-loop on {src!r}")
                continue
            ordered[src].setdefault(dst)

        cats: dict[str, set[str]] = defaultdict(set)
        for node, cat in _pairs(categories):
            if node not in kinds:
                problem(f"category assignment for undeclared node {node!r}")
                continue
            if kinds.get(cat) != CATEGORY:
                problem(f"{cat!r} is not a declared category")
                continue
            if node == cat:
                problem(f"category {cat!r} lists itself as parent")
                continue
            cats[node].add(cat)

        frozen_links = {src: tuple(dsts) for src, dsts in ordered.items() if dsts}
        in_links: dict[str, set[str]] = defaultdict(set)
        for src, dsts in frozen_links.items():
            for dst in dsts:
                in_links[dst].add(src)
        return cls(
            kinds=kinds,
            links=frozen_links,
            categories={n: frozenset(c) for n, c in cats.items()},
            link_count={e: len(s) for e, s in in_links.items()},
            _in_links={e: frozenset(s) for e, s in in_links.items()},
        )

    @property
    def entities(self) -> list[str]:
        return sorted(n for n, k in self.kinds.items() if k == ENTITY)

    @property
    def category_nodes(self) -> list[str]:
        return sorted(n for n, k in self.kinds.items() if k == CATEGORY)

    @property
    def article_count(self) -> int:
        """Total number of articles, one per declared entity."""
        return sum(1 for k in self.kinds.values() if k == ENTITY)

    @property
    def articles(self) -> list[str]:
        """Entities with at least one outgoing link, sorted by id."""
        return sorted(self.links)

    def __contains__(self, node: object) -> bool:
        return node in self.kinds

    def _check(self, node: str) -> None:
        if node not in self.kinds:
            raise UnknownNodeError(node)

    def n(self, e: str) -> int:
        """Number of articles linking to ``e``."""
        return self.link_count.get(e, 0)

    def iter_links(self) -> Iterator[tuple[str, str]]:
        for src in sorted(self.links):
            for dst in self.links[src]:
                yield src, dst


def neighbors(g: KnowledgeGraph, e: str, direction: str = "out") -> frozenset[str]:
    """Linked entities of ``e``; ``direction`` is ``out``, ``in`` or ``both``."""
    g._check(e)
    out = frozenset(g.links.get(e, ()))
    if direction == "out":
        return out
    inc = g._in_links.get(e, frozenset())
    if direction == "in":
        return inc
    if direction == "both":
        return out | inc
    raise ValueError(f"unknown direction {direction!r}")


def linked(g: KnowledgeGraph, e: str) -> tuple[str, ...]:
    """Out-links of ``e`` in article order."""
    g._check(e)
    return g.links.get(e, ())


def degree(g: KnowledgeGraph, e: str, mode: str = "total") -> int:
    g._check(e)
    out = len(g.links.get(e, ()))
    if mode == "out":
        return out
    if mode == "total":
        return out + g.n(e)
    raise ValueError(f"unknown degree mode {mode!r}")


def categories(g: KnowledgeGraph, node: str) -> frozenset[str]:
    g._check(node)
    return g.categories.get(node, frozenset())


@dataclass(frozen=True)
class CoocStats:
    """Counts of entity pairs linked from the same article."""

    pair_count: Mapping[frozenset[str], int]
    occurrence_count: Mapping[str, int]
    total_pairs: int

    def pair(self, x: str, y: str) -> int:
        return self.pair_count.get(frozenset((x, y)), 0)

    def occurrences(self, x: str) -> int:
        return self.occurrence_count.get(x, 0)


def cooccurrence_stats(g: KnowledgeGraph) -> CoocStats:
    pairs: Counter[frozenset[str]] = Counter()
    for src in sorted(g.links):
        for x, y in combinations(g.links[src], 2):
            pairs[frozenset((x, y))] += 1
    occ: Counter[str] = Counter()
    for key, count in pairs.items():
        for x in key:
            occ[x] += count
    return CoocStats(dict(pairs), dict(occ), sum(pairs.values()))


# -- loading -----------------------------------------------------------------


def _pairs(records) -> Iterator[tuple[str, str]]:
    if isinstance(records, Mapping):
        for key in records:
            for value in records[key]:
                yield key, value
    else:
        yield from records


def _lines(source: Source) -> tuple[str, Iterable[str]]:
    if isinstance(source, (str, Path)):
        path = Path(source)
        return str(path), path.read_text(encoding="utf-8").split("\n")
    return "<memory>", source


def read_records(source: Source, width: int) -> Iterator[tuple[int, tuple[str, ...]]]:
    """Yield ``(lineno, fields)`` for every data line of a TSV source."""
    name, lines = _lines(source)
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = tuple(f.strip() for f in line.split("\t"))
        if len(fields) != width or not all(fields):
            raise GraphFormatError(name, lineno, f"expected {width} non-empty tab-separated fields")
        yield lineno, fields


def load_graph(
    entity_source: Source,
    link_source: Source = (),
    category_source: Source = (),
    strict: bool = True,
) -> KnowledgeGraph:
    kinds: dict[str, str] = {}
    name = entity_source if isinstance(entity_source, (str, Path)) else "<memory>"
    for lineno, (node, kind) in read_records(entity_source, 2):
        if kind not in KINDS:
            raise GraphFormatError(str(name), lineno, f"kind must be one of {KINDS}, got {kind!r}")
        if node in kinds and kinds[node] != kind:
            raise GraphFormatError(str(name), lineno, f"node {node!r} redeclared with a different kind")
        kinds[node] = kind
    links = [fields for _, fields in read_records(link_source, 2)]
    cats = [fields for _, fields in read_records(category_source, 2)]
    return KnowledgeGraph.build(kinds, links, cats, strict=strict)


def load_graph_dir(directory: str | Path, strict: bool = True) -> KnowledgeGraph:
    """Load ``entities.tsv``, ``links.tsv`` and ``categories.tsv`` from a directory."""
    d = Path(directory)
    links = d / "links.tsv"
    cats = d / "categories.tsv"
    return load_graph(
        d / "entities.tsv",
        links if links.exists() else (),
        cats if cats.exists() else (),
        strict=strict,
    )


def serialize(g: KnowledgeGraph) -> tuple[str, str, str]:
    """Render the graph back to the three TSV texts, in normal form.

    Entities and categories are sorted by id; links keep article order.
    """
    ents = "".join(f"{n}\t{g.kinds[n]}\n" for n in sorted(g.kinds))
    links = "".join(f"{s}\t{t}\n" for s, t in g.iter_links())
    cats = "".join(
        f"{n}\t{c}\n" for n in sorted(g.categories) for c in sorted(g.categories[n])
    )
    return ents, links, cats


def write_graph_dir(g: KnowledgeGraph, directory: str | Path) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    ents, links, cats = serialize(g)
    (d / "entities.tsv").write_text(ents, encoding="utf-8")
    (d / "links.tsv").write_text(links, encoding="utf-8")
    (d / "categories.tsv").write_text(cats, encoding="utf-8")
