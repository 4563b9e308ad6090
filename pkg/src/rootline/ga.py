"""Genetic algorithm over the unit sphere of projection-plane normals.

Chromosomes are unit 3-vectors. The fitness of a plane is the sample
standard deviation of the distances from the projected nuclei to the
centroid of the projected nuclei; a tight ring of eight file clusters
scores near zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ProjectionPlane
from .model import DegenerateInputError, FrameCloud

DEGENERATE_NORM = 1e-8


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 1000
    max_iterations: int = 200
    crossover_prob: float = 0.8
    mutation_prob: float = 0.1
    tolerance: float = 1e-4
    patience: int = 20
    elite_fraction: float = 0.2
    mutation_scale: float = 0.05
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if not 0.0 < self.elite_fraction < 1.0:
            raise ValueError("elite_fraction must be in (0, 1)")
        for name in ("crossover_prob", "mutation_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")


@dataclass(frozen=True)
class GAResult:
    best_plane: ProjectionPlane
    best_fitness: float
    fitness_history: tuple[float, ...]
    generations_run: int


class DegenerateCrossoverError(ValueError):
    """Signals antipodal parents whose sum has no direction."""


def fitness_population(points: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """Fitness of every normal in one shot.

    Distances from projected points to the centroid of the projections
    reduce to sqrt(|p - pbar|^2 - ((p - pbar).n)^2), so no explicit
    projection is materialized.
    """
    points = np.asarray(points, dtype=float)
    normals = np.atleast_2d(np.asarray(normals, dtype=float))
    if points.shape[0] < 2:
        raise DegenerateInputError("fitness needs at least 2 points")
    centered = points - points.mean(axis=0)
    along = centered @ normals.T  # (N_points, N_normals)
    sq = np.einsum("ij,ij->i", centered, centered)[:, None] - along**2
    dist = np.sqrt(np.clip(sq, 0.0, None))
    return dist.std(axis=0, ddof=1)


def fitness(points, plane: ProjectionPlane) -> float:
    """Sample std of distances from projected points to their centroid."""
    return float(fitness_population(points, plane.as_array()[None, :])[0])


def init_population(config: GAConfig, rng: np.random.Generator) -> np.ndarray:
    """Uniform sample on the sphere: normalized isotropic Gaussians."""
    raw = rng.normal(size=(config.population_size, 3))
    norms = np.linalg.norm(raw, axis=1)
    while np.any(norms < DEGENERATE_NORM):  # pragma: no cover - measure zero
        bad = norms < DEGENERATE_NORM
        raw[bad] = rng.normal(size=(int(bad.sum()), 3))
        norms = np.linalg.norm(raw, axis=1)
    return raw / norms[:, None]


def crossover(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Child = normalized vector sum of the parents (geodesic bisector)."""
    summed = np.asarray(a, dtype=float) + np.asarray(b, dtype=float)
    norm = np.linalg.norm(summed)
    if norm < DEGENERATE_NORM:
        raise DegenerateCrossoverError("antipodal parents, child direction undefined")
    return summed / norm


def mutate(c: np.ndarray, scale: float, rng: np.random.Generator) -> np.ndarray:
    """Add or subtract a small isotropic Gaussian vector, then renormalize."""
    c = np.asarray(c, dtype=float)
    while True:
        delta = rng.normal(scale=scale, size=3) if scale > 0 else np.zeros(3)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        moved = c + sign * delta
        norm = np.linalg.norm(moved)
        if norm >= DEGENERATE_NORM:
            break
    if not delta.any():
        return c.copy()
    return moved / norm


def elite_count(population_size: int, elite_fraction: float) -> int:
    return math.ceil(elite_fraction * population_size)


def select(population: np.ndarray, fitnesses: np.ndarray, elite_fraction: float) -> np.ndarray:
    """Keep the ceil(f*N) chromosomes with smallest fitness, ties by index."""
    order = np.argsort(fitnesses, kind="stable")
    return population[order[: elite_count(len(population), elite_fraction)]]


def optimize_plane(frame: FrameCloud | np.ndarray, config: GAConfig) -> GAResult:
    """Run the GA on one frame and return the best plane found.

    Each generation keeps the elite fraction unchanged and fills the rest
    of the population with children: two elite parents picked uniformly,
    crossed over with probability crossover_prob (plain copy of the first
    parent otherwise, and on degenerate antipodal crossover), then mutated
    with probability mutation_prob. Elitism makes the best fitness
    non-increasing; the run stops after `patience` consecutive generations
    whose improvement is below `tolerance`, or at max_iterations.
    """
    points = frame.positions() if isinstance(frame, FrameCloud) else np.asarray(frame, dtype=float)
    if points.shape[0] < 2:
        raise DegenerateInputError("optimize_plane needs a frame with >= 2 nuclei")

    rng = np.random.default_rng(config.rng_seed)
    population = init_population(config, rng)
    n_elite = elite_count(config.population_size, config.elite_fraction)

    history: list[float] = []
    best_normal: np.ndarray | None = None
    best_fitness = np.inf
    stall = 0

    for _ in range(config.max_iterations):
        fits = fitness_population(points, population)
        order = np.argsort(fits, kind="stable")
        gen_best = float(fits[order[0]])
        if gen_best < best_fitness:
            best_fitness = gen_best
            best_normal = population[order[0]].copy()
        history.append(best_fitness)

        if len(history) >= 2:
            improvement = history[-2] - history[-1]
            stall = stall + 1 if improvement < config.tolerance else 0
            if stall >= config.patience:
                break

        elites = population[order[:n_elite]]
        children = []
        while n_elite + len(children) < config.population_size:
            ia, ib = rng.integers(0, n_elite, size=2)
            if rng.random() < config.crossover_prob:
                try:
                    child = crossover(elites[ia], elites[ib])
                except DegenerateCrossoverError:
                    child = elites[ia].copy()
            else:
                child = elites[ia].copy()
            if rng.random() < config.mutation_prob:
                child = mutate(child, config.mutation_scale, rng)
            children.append(child)
        population = np.vstack([elites, children]) if children else elites

    return GAResult(
        best_plane=ProjectionPlane.from_vector(best_normal),
        best_fitness=best_fitness,
        fitness_history=tuple(history),
        generations_run=len(history),
    )
