import numpy as np
import pytest

from rootline.ga import GAConfig
from rootline.clustering import KMeansConfig

# desk-scale GA settings: fast but still converging to sub-0.1-degree planes
DESK_GA = GAConfig(population_size=120, max_iterations=60, patience=12)


@pytest.fixture
def desk_ga():
    return DESK_GA


@pytest.fixture
def kmeans_cfg():
    return KMeansConfig(rng_seed=0)


def oracle_fitness(points, normal):
    """Independent arithmetic oracle: project, centroid, sample std."""
    normal = np.asarray(normal, dtype=float)
    normal = normal / np.linalg.norm(normal)
    projected = [np.asarray(p, float) - np.dot(p, normal) * normal for p in points]
    centroid = np.mean(projected, axis=0)
    dists = [float(np.linalg.norm(q - centroid)) for q in projected]
    mean = sum(dists) / len(dists)
    var = sum((d - mean) ** 2 for d in dists) / (len(dists) - 1)
    return var ** 0.5
