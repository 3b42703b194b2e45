"""End-to-end runs: corpus preparation, engine selection, comparison."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

from . import corpus as corpus_mod
from .corpus import Corpus, zero_pair_fraction
from .diagnostics import diagnose, procrustes_disparity
from .errors import ConfigError, DataError
from .mapdoc import METHODS, MapDocument, build_document
from .mds import MdsProblem, multi_start
from .similarity import association_strength, cosine_indirect
from .vos import VosProblem, proposition1_check, vos_multi_start

log = logging.getLogger(__name__)

MDS_EPS = 1e-8
VOS_EPS = 1e-10
PROPOSITION1_MAX_N = 50


@dataclass
class RunConfig:
    """Options shared by every command that runs an engine.

    ``eps`` of None selects the engine default (1e-8 for MDS, 1e-10 for
    VOS).
    """

    method: str = "mds-ordinal"
    similarity: str = "assoc"
    n_starts: int = 100
    master_seed: int = 1
    eps: Optional[float] = None
    max_iter: int = 10000
    drop_isolated: bool = False
    largest_component: bool = False
    workers: int = 1

    def validate(self) -> "RunConfig":
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.similarity not in ("assoc", "cosine"):
            raise ConfigError(f"unknown similarity {self.similarity!r}")
        if self.n_starts < 1:
            raise ConfigError("--starts must be at least 1")
        if self.eps is not None and not self.eps > 0:
            raise ConfigError("--eps must be positive")
        if self.max_iter < 1:
            raise ConfigError("--max-iter must be at least 1")
        if self.workers < 1:
            raise ConfigError("--workers must be at least 1")
        return self

    def eps_for(self, method: str) -> float:
        if self.eps is not None:
            return self.eps
        return VOS_EPS if method == "vos" else MDS_EPS


def prepare_corpus(edges_path, items_path=None, config: Optional[RunConfig] = None) -> Corpus:
    """Load a corpus and apply the optional isolated-item and component filters."""
    config = config or RunConfig()
    corpus = corpus_mod.load_edge_list(edges_path)
    if items_path is not None:
        corpus = corpus_mod.load_items(items_path, corpus)
    if config.drop_isolated:
        corpus, dropped = corpus_mod.drop_isolated(corpus)
        if dropped:
            log.warning("dropped %d isolated item(s): %s", len(dropped), ", ".join(dropped[:10]))
    if config.largest_component:
        corpus, dropped = corpus_mod.restrict_corpus(corpus)
        if dropped:
            log.warning("dropped %d item(s) outside the largest component", len(dropped))
    if corpus.n < 2:
        raise DataError("at least two items are required")
    return corpus


def similarity_matrix(corpus: Corpus, similarity: str):
    if similarity == "assoc":
        return association_strength(corpus.matrix)
    return cosine_indirect(corpus.matrix)


def run_layout(corpus: Corpus, config: RunConfig,
               progress: Optional[Callable] = None) -> MapDocument:
    """Similarity, engine, canonical layout, map document."""
    config.validate()
    sim = similarity_matrix(corpus, config.similarity)
    weights = corpus.weights
    eps = config.eps_for(config.method)
    if config.method == "vos":
        layout = vos_multi_start(
            VosProblem(sim), config.n_starts, config.master_seed, config.max_iter, eps,
            anchor_weights=weights, workers=config.workers, progress=progress,
        )
    else:
        family = config.method.split("-", 1)[1]
        problem = MdsProblem(sim.values, "similarity", family)
        layout = multi_start(
            problem, config.n_starts, config.master_seed, config.max_iter, eps,
            anchor_weights=weights, workers=config.workers, progress=progress,
        )
    return build_document(corpus, layout, config.method, config.similarity,
                          config.master_seed, config.n_starts,
                          zero_pair_fraction(corpus.matrix))


def _coords(doc: MapDocument):
    import numpy as np

    return np.array([[it.x, it.y] for it in doc.items])


def compare(corpus: Corpus, config: RunConfig, family: str = "ordinal",
            progress: Optional[Callable] = None) -> dict:
    """MDS-AS, MDS-COS and VOS on one corpus, with diagnostics.

    Returns a report dict; the map documents are under ``"maps"`` as
    :class:`MapDocument` objects (see :func:`report_as_dict`).
    """
    if family not in ("ordinal", "interval"):
        raise ConfigError(f"unknown MDS family {family!r}")
    mds_method = f"mds-{family}"
    approaches = {
        "MDS-AS": (mds_method, "assoc"),
        "MDS-COS": (mds_method, "cosine"),
        "VOS": ("vos", "assoc"),
    }
    weights = corpus.weights
    clusters = corpus.clusters
    docs = {}
    methods = {}
    for name, (method, similarity) in approaches.items():
        run_config = RunConfig(**{**config.__dict__, "method": method, "similarity": similarity})
        cb = (lambda k, layout, name=name: progress(name, k, layout)) if progress else None
        doc = run_layout(corpus, run_config, cb)
        docs[name] = doc
        diag = diagnose(_coords(doc), weights, clusters)
        methods[name] = {
            "method": method,
            "similarity": similarity,
            "score": doc.score,
            "iterations": doc.iterations,
            "circularity": diag.circularity,
            "center_periphery_corr": diag.center_periphery_corr,
            "separation_ratio": diag.separation_ratio,
        }
    names = list(approaches)
    procrustes = {}
    for a in range(len(names)):
        for b in range(a + 1, len(names)):
            procrustes[f"{names[a]}|{names[b]}"] = procrustes_disparity(
                _coords(docs[names[a]]), _coords(docs[names[b]]), allow_scaling=True
            )
    report = {
        "n": corpus.n,
        "zero_pair_fraction": zero_pair_fraction(corpus.matrix),
        "family": family,
        "seed": config.master_seed,
        "starts": config.n_starts,
        "methods": methods,
        "procrustes": procrustes,
    }
    if corpus.n <= PROPOSITION1_MAX_N:
        check = proposition1_check(
            VosProblem(association_strength(corpus.matrix)),
            seed=config.master_seed,
            n_starts=min(config.n_starts, 20),
            max_iter=config.max_iter,
        )
        report["proposition1"] = check.as_dict()
    report["maps"] = docs
    return report


def report_as_dict(report: dict) -> dict:
    out = dict(report)
    out["maps"] = {name: doc.as_dict() for name, doc in report["maps"].items()}
    return out


SUMMARY_COLUMNS = ("approach", "method", "similarity", "score", "iterations",
                   "circularity", "center_periphery_corr", "separation_ratio")


def _cell(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def summary_table(report: dict) -> str:
    """Tab-separated per-approach summary of a comparison report."""
    lines = ["\t".join(SUMMARY_COLUMNS)]
    for name, row in report["methods"].items():
        values = [name] + [row[c] for c in SUMMARY_COLUMNS[1:]]
        lines.append("\t".join(_cell(v) for v in values))
    return "\n".join(lines) + "\n"
