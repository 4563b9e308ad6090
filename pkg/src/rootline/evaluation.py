"""Link-level scoring of predicted lineage edges against ground truth.

A link is one parent->child connection between consecutive frames; a
division edge contributes two links. Precision and recall follow the
usual tp/(tp+fp) and tp/(tp+fn); an empty denominator reports 1.0 with
the corresponding `defined` flag cleared.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .lineage import LineageForest

Link = tuple[int, str, int, str]  # (parent frame, parent id, child frame, child id)


@dataclass(frozen=True)
class TrackingMetrics:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    precision_defined: bool = True
    recall_defined: bool = True

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "TrackingMetrics":
        return cls(
            tp=tp, fp=fp, fn=fn,
            precision=tp / (tp + fp) if tp + fp else 1.0,
            recall=tp / (tp + fn) if tp + fn else 1.0,
            precision_defined=bool(tp + fp),
            recall_defined=bool(tp + fn),
        )


def forest_links(forest: LineageForest) -> set[Link]:
    """Flatten a forest into individual parent->child links."""
    links: set[Link] = set()
    for edge in forest.edges:
        pf, pid = edge.parent
        for cf, cid in edge.children:
            links.add((pf, pid, cf, cid))
    return links


def _validate(links: Iterable[Link], side: str) -> set[Link]:
    out = set()
    for link in links:
        pf, pid, cf, cid = link
        if cf != pf + 1:
            raise ValueError(f"malformed {side} link spans frames {pf}->{cf}: {link}")
        out.add(link)
    return out


def compare_links(predicted: Iterable[Link], truth: Iterable[Link]) -> TrackingMetrics:
    pred = _validate(predicted, "predicted")
    true = _validate(truth, "truth")
    tp = len(pred & true)
    return TrackingMetrics.from_counts(tp=tp, fp=len(pred - true), fn=len(true - pred))


def per_frame_breakdown(
    predicted: Iterable[Link], truth: Iterable[Link]
) -> list[tuple[int, TrackingMetrics]]:
    """compare_links partitioned by parent frame; counts sum to the pooled ones."""
    pred = _validate(predicted, "predicted")
    true = _validate(truth, "truth")
    frames = sorted({l[0] for l in pred} | {l[0] for l in true})
    out = []
    for frame in frames:
        p = {l for l in pred if l[0] == frame}
        t = {l for l in true if l[0] == frame}
        out.append((frame, TrackingMetrics.from_counts(
            tp=len(p & t), fp=len(p - t), fn=len(t - p))))
    return out
