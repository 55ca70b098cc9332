"""Per-article extraction: filter, featurize, cluster and label.

Holds the corpus-wide state (co-occurrence counts, taxonomies, idf) and
caches per-article filter results and per-entity vectors.
"""

from __future__ import annotations

import dataclasses
import zlib
from typing import Sequence

from .config import PipelineConfig
from .gmeans import Cluster, gmeans_cluster, make_cluster
from .kg_store import KnowledgeGraph, cooccurrence_stats
from .labeler import LabeledCluster, label_cluster, relabel_coverage
from .noise_filter import FilterResult, filter_noise
from .reuse_scheduler import ArticleResult, direct_result
from .taxonomy import SparseFeatureVector, TaxonomyCorpus


def article_seed(seed: int, article: str) -> int:
    """Per-article RNG seed, stable across processes and article order."""
    return (seed << 32) | zlib.crc32(article.encode("utf-8"))


class Extractor:
    def __init__(self, g: KnowledgeGraph, cfg: PipelineConfig = PipelineConfig()):
        self.g = g
        self.cfg = cfg
        self.cooc = cooccurrence_stats(g)
        self.corpus = TaxonomyCorpus.build(g, cfg.taxonomy)
        self._filters: dict[str, FilterResult] = {}
        self._vectors: dict[str, SparseFeatureVector] = {}

    def filter(self, article: str) -> FilterResult:
        if article not in self._filters:
            self._filters[article] = filter_noise(self.g, self.cooc, article, self.cfg.aggregation)
        return self._filters[article]

    def vector(self, e: str) -> SparseFeatureVector:
        if e not in self._vectors:
            self._vectors[e] = self.corpus.feature_vector(e)
        return self._vectors[e]

    def clusterable(self, article: str) -> tuple[str, ...]:
        """Related linked entities that have a nonempty taxonomy, in article order."""
        return tuple(e for e in self.filter(article).related if self.corpus[e].nodes)

    def cluster(self, article: str, entities: Sequence[str]) -> list[Cluster]:
        cfg = dataclasses.replace(self.cfg.cluster, rng_seed=article_seed(self.cfg.cluster.rng_seed, article))
        return gmeans_cluster([(e, self.vector(e)) for e in entities], cfg)

    def cluster_and_label(self, article: str, entities: Sequence[str]) -> list[LabeledCluster]:
        return [label_cluster(c, self.corpus, self.cfg.label) for c in self.cluster(article, entities)]

    def restrict(self, labeled: LabeledCluster, members: Sequence[str]) -> LabeledCluster:
        cluster = make_cluster(members, {m: self.vector(m) for m in members})
        return relabel_coverage(labeled, cluster, self.corpus)

    def direct(self, article: str) -> ArticleResult:
        return direct_result(article, self)
