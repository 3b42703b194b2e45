"""Map documents: the serialized result of one layout run."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .errors import DataError

METHODS = ("mds-ordinal", "mds-interval", "vos")
SIMILARITIES = ("assoc", "cosine")
META_FIELDS = ("method", "similarity", "seed", "starts", "iterations", "score", "zero_pair_fraction")


@dataclass
class MapItem:
    id: str
    label: str
    weight: float
    x: float
    y: float
    cluster: Optional[int] = None

    def as_dict(self) -> dict:
        out = {"id": self.id, "label": self.label, "weight": float(self.weight),
               "x": float(self.x), "y": float(self.y)}
        if self.cluster is not None:
            out["cluster"] = int(self.cluster)
        return out


@dataclass
class MapDocument:
    """Run metadata plus one entry per item.

    ``score`` is normalized stress for the MDS methods and the weighted
    squared-distance objective for VOS.
    """

    method: str
    similarity: str
    seed: int
    starts: int
    iterations: int
    score: float
    zero_pair_fraction: Optional[float]
    items: list = field(default_factory=list)

    def __post_init__(self):
        if self.method not in METHODS:
            raise DataError(f"unknown method {self.method!r}")
        if self.similarity not in SIMILARITIES:
            raise DataError(f"unknown similarity {self.similarity!r}")

    @property
    def meta(self) -> dict:
        return {name: getattr(self, name) for name in META_FIELDS}

    def as_dict(self) -> dict:
        meta = self.meta
        for key in ("score", "zero_pair_fraction"):
            if meta[key] is not None:
                meta[key] = float(meta[key])
        for key in ("seed", "starts", "iterations"):
            meta[key] = int(meta[key])
        return {"meta": meta, "items": [it.as_dict() for it in self.items]}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, ensure_ascii=False, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "MapDocument":
        try:
            meta = data["meta"]
            items = [
                MapItem(str(it["id"]), str(it["label"]), float(it["weight"]),
                        float(it["x"]), float(it["y"]), it.get("cluster"))
                for it in data["items"]
            ]
            return cls(items=items, **{k: meta[k] for k in META_FIELDS})
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed map document: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "MapDocument":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"map document is not valid JSON: {exc}") from None
        return cls.from_dict(data)


def build_document(corpus, layout, method: str, similarity: str, master_seed: int,
                   starts: int, zero_fraction: Optional[float]) -> MapDocument:
    items = [
        MapItem(it.id, it.label, it.weight, float(x), float(y), it.cluster)
        for it, (x, y) in zip(corpus.items, layout.coords)
    ]
    return MapDocument(method, similarity, master_seed, starts, layout.iterations,
                       layout.score, zero_fraction, items)


def read_document(path) -> MapDocument:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read map document {path}: {exc}") from None
    return MapDocument.from_json(text)


def write_document(doc: MapDocument, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(doc.to_json())
