"""Nucleus-level linking within tracked files, building lineage forests.

Within each file, nuclei of consecutive frames are ranked by descending y
and consumed top-down: a non-mitotic parent takes one child, a mitotic
parent takes its two daughters once both are non-mitotic, and a mitotic
parent whose division is still in progress continues one-to-one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .clustering import FileAssignment
from .model import NUM_FILES, Dataset, FrameCloud, NucleusRecord, Phase

log = logging.getLogger(__name__)

Node = tuple[int, str]  # (frame_index, nucleus_id)


class ReconciliationError(ValueError):
    """Per-line count mismatch: children exhausted early or left over."""

    def __init__(self, file_label: int, frame_t: int, frame_t1: int,
                 leftover_parents: int, leftover_children: int):
        self.file_label = file_label
        self.frame_t = frame_t
        self.frame_t1 = frame_t1
        self.leftover_parents = leftover_parents
        self.leftover_children = leftover_children
        super().__init__(
            f"file {file_label}, frames {frame_t}->{frame_t1}: "
            f"{leftover_parents} unlinked parents, {leftover_children} unconsumed children"
        )


@dataclass(frozen=True)
class FileOfNuclei:
    """One file's nuclei in one frame, sorted by y descending (ties by id)."""

    frame_index: int
    file_label: int
    nuclei: tuple[NucleusRecord, ...]

    @classmethod
    def from_frame(cls, frame: FrameCloud, assignment: FileAssignment, file_label: int) -> "FileOfNuclei":
        members = [n for n in frame.nuclei if assignment.labels[n.nucleus_id] == file_label]
        members.sort(key=lambda n: (-n.y, n.nucleus_id))
        return cls(frame.frame_index, file_label, tuple(members))

    def __len__(self) -> int:
        return len(self.nuclei)


@dataclass(frozen=True)
class LineageEdge:
    parent: Node
    children: tuple[Node, ...]

    def __post_init__(self):
        if len(self.children) not in (1, 2):
            raise ValueError("an edge carries 1 or 2 children")


@dataclass
class LineageForest:
    """All parent->child edges over a dataset, plus reconciliation diagnostics."""

    edges: list[LineageEdge] = field(default_factory=list)
    errors: list[ReconciliationError] = field(default_factory=list)

    def __post_init__(self):
        self._parent_of: dict[Node, Node] = {}
        self._children_of: dict[Node, tuple[Node, ...]] = {}
        for edge in self.edges:
            self._index(edge)

    def _index(self, edge: LineageEdge):
        if edge.parent[0] + 1 != edge.children[0][0]:
            raise ValueError(f"edge must span consecutive frames: {edge}")
        if edge.parent in self._children_of:
            raise ValueError(f"parent {edge.parent} already has children")
        for child in edge.children:
            if child in self._parent_of:
                raise ValueError(f"child {child} already has a parent")
            self._parent_of[child] = edge.parent
        self._children_of[edge.parent] = edge.children

    def add(self, edge: LineageEdge):
        self._index(edge)
        self.edges.append(edge)

    def children_of(self, node: Node) -> tuple[Node, ...]:
        return self._children_of.get(node, ())

    def parent_of(self, node: Node) -> Node | None:
        return self._parent_of.get(node)

    def nodes(self) -> set[Node]:
        seen = set(self._children_of)
        seen.update(self._parent_of)
        return seen

    def roots(self) -> list[Node]:
        return sorted(n for n in self.nodes() if n not in self._parent_of)

    def descendants(self, node: Node) -> set[Node]:
        if node not in self._children_of and node not in self._parent_of:
            raise KeyError(f"unknown nucleus {node}")
        out: set[Node] = set()
        stack = list(self.children_of(node))
        while stack:
            cur = stack.pop()
            if cur not in out:
                out.add(cur)
                stack.extend(self.children_of(cur))
        return out

    def track_of(self, root: Node) -> list[Node]:
        """Root plus all its descendants, ordered by (frame, id)."""
        return sorted({root} | self.descendants(root))

    def division_events(self) -> list[LineageEdge]:
        return [e for e in self.edges if len(e.children) == 2]

    def track_lengths(self) -> dict[Node, int]:
        """Frames spanned by each root's track."""
        return {
            root: max(f for f, _ in self.track_of(root)) - root[0] + 1
            for root in self.roots()
        }


def link_line(line_t: FileOfNuclei, line_t1: FileOfNuclei) -> list[LineageEdge]:
    """Algorithm-1 walk over one file between two consecutive frames."""
    if line_t.file_label != line_t1.file_label:
        raise ValueError("lines must share a file label")
    if line_t.frame_index + 1 != line_t1.frame_index:
        raise ValueError("lines must come from consecutive frames")

    parents, kids = line_t.nuclei, line_t1.nuclei
    m, n = len(parents), len(kids)
    edges: list[LineageEdge] = []
    j = k = 0
    while j < m and k < n:
        parent = parents[j]
        if parent.phase is Phase.MITOTIC and k + 1 < n \
                and kids[k].phase is Phase.NON_MITOTIC and kids[k + 1].phase is Phase.NON_MITOTIC:
            edges.append(LineageEdge(
                (line_t.frame_index, parent.nucleus_id),
                ((line_t1.frame_index, kids[k].nucleus_id),
                 (line_t1.frame_index, kids[k + 1].nucleus_id)),
            ))
            k += 2
        else:
            if parent.phase is Phase.MITOTIC and kids[k].phase is Phase.NON_MITOTIC:
                log.warning(
                    "file %d frames %d->%d: mitotic parent %s continued 1:1 onto a "
                    "non-mitotic candidate (no second daughter available)",
                    line_t.file_label, line_t.frame_index, line_t1.frame_index,
                    parent.nucleus_id,
                )
            edges.append(LineageEdge(
                (line_t.frame_index, parent.nucleus_id),
                ((line_t1.frame_index, kids[k].nucleus_id),),
            ))
            k += 1
        j += 1
    if j < m or k < n:
        raise ReconciliationError(
            line_t.file_label, line_t.frame_index, line_t1.frame_index,
            leftover_parents=m - j, leftover_children=n - k,
        )
    return edges


def track_dataset(
    dataset: Dataset,
    assignments: list[FileAssignment],
    correspondences=None,
) -> LineageForest:
    """Union of link_line over all files and consecutive pairs.

    Assignments must carry globally consistent labels (propagate_labels
    output); pass the raw per-frame assignments together with their
    correspondences to propagate here. Reconciliation failures are
    collected on the returned forest rather than raised, so a partial
    forest remains available for diagnosis.
    """
    if correspondences is not None:
        from .lines import propagate_labels

        assignments = propagate_labels(assignments, correspondences)
    if len(assignments) != len(dataset):
        raise ValueError("need one assignment per frame")

    forest = LineageForest()
    for t in range(len(dataset) - 1):
        for lab in range(NUM_FILES):
            line_t = FileOfNuclei.from_frame(dataset.frames[t], assignments[t], lab)
            line_t1 = FileOfNuclei.from_frame(dataset.frames[t + 1], assignments[t + 1], lab)
            try:
                for edge in link_line(line_t, line_t1):
                    forest.add(edge)
            except ReconciliationError as err:
                forest.errors.append(err)
    return forest
