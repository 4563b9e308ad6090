"""Domain types shared by the whole pipeline.

Positions are stored in micrometers. The y axis is the root's longitudinal
axis; x and z span the cross-section in which the eight cortex cell files
sit on a ring.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

DEFAULT_VOXEL_SIZE_UM = (2.5, 0.61, 0.61)  # (z, y, x)

NUM_FILES = 8


class Phase(str, Enum):
    NON_MITOTIC = "non_mitotic"
    MITOTIC = "mitotic"


class DegenerateInputError(ValueError):
    """Raised when an operation receives too little or collapsed geometry."""


@dataclass(frozen=True)
class NucleusRecord:
    """One annotated nucleus: frame, id, position (um), mitotic phase."""

    frame_index: int
    nucleus_id: str
    position: tuple[float, float, float]
    phase: Phase = Phase.NON_MITOTIC

    def __post_init__(self):
        if self.frame_index < 0:
            raise ValueError(f"frame_index must be >= 0, got {self.frame_index}")
        if not all(np.isfinite(self.position)):
            raise ValueError(
                f"non-finite position for nucleus {self.nucleus_id!r}: {self.position}"
            )

    @property
    def y(self) -> float:
        return self.position[1]


@dataclass(frozen=True)
class FrameCloud:
    """All nuclei of one time point."""

    frame_index: int
    nuclei: tuple[NucleusRecord, ...]
    time_interval_min: float = 30.0

    def __post_init__(self):
        if not self.nuclei:
            raise ValueError(f"frame {self.frame_index} has no nuclei")
        seen = set()
        for n in self.nuclei:
            if n.frame_index != self.frame_index:
                raise ValueError(
                    f"nucleus {n.nucleus_id!r} has frame {n.frame_index}, "
                    f"expected {self.frame_index}"
                )
            if n.nucleus_id in seen:
                raise ValueError(
                    f"duplicate nucleus id {n.nucleus_id!r} in frame {self.frame_index}"
                )
            seen.add(n.nucleus_id)

    def __len__(self) -> int:
        return len(self.nuclei)

    def positions(self) -> np.ndarray:
        """(N, 3) array of positions in the order of ``self.nuclei``."""
        return np.array([n.position for n in self.nuclei], dtype=float)

    def ids(self) -> list[str]:
        return [n.nucleus_id for n in self.nuclei]

    def by_id(self, nucleus_id: str) -> NucleusRecord:
        for n in self.nuclei:
            if n.nucleus_id == nucleus_id:
                return n
        raise KeyError(f"no nucleus {nucleus_id!r} in frame {self.frame_index}")


@dataclass(frozen=True)
class Dataset:
    """Ordered sequence of frames with contiguous indices starting at 0."""

    frames: tuple[FrameCloud, ...]
    voxel_size_um: tuple[float, float, float] = DEFAULT_VOXEL_SIZE_UM  # (z, y, x)

    def __post_init__(self):
        for expected, frame in enumerate(self.frames):
            if frame.frame_index != expected:
                raise ValueError(
                    f"frame indices must be contiguous from 0; "
                    f"position {expected} holds frame {frame.frame_index}"
                )

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)
