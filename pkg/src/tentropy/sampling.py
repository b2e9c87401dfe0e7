"""Random instances for property sweeps: systems, potentials, measures.

Every generator takes a numpy Generator first so callers own the seeding.
"""

from __future__ import annotations

import numpy as np

from .spectral import L1Vector, l1_norm, l1_vector
from .system import (
    ESSENTIAL,
    FULL,
    FiniteSystem,
    Functional,
    PartitionOfUnity,
    effective_weights,
    functional,
    invariant_vertices,
    make_system,
)


def random_system(rng, max_atoms: int = 8, null_fraction: float = 0.25) -> FiniteSystem:
    """Draw a valid system with 1..max_atoms atoms.

    Roughly a quarter of multi-atom draws carry null atoms.  Null sets are
    repaired so the support stays forward-invariant: an atom whose image lost
    its mass loses its own as well, iterated to a fixed point.  A draw whose
    repair drains all mass falls back to a fully supported system.
    """
    n = int(rng.integers(1, max_atoms + 1))
    alpha = rng.integers(0, n, size=n)
    m = rng.uniform(0.2, 2.0, size=n)
    if n > 1 and rng.uniform() < null_fraction:
        m = np.where(rng.uniform(size=n) < 0.35, 0.0, m)
        for _ in range(n):
            dead = (m > 0) & (m[alpha] == 0)
            if not dead.any():
                break
            m = np.where(dead, 0.0, m)
        if m.sum() == 0.0:
            m = rng.uniform(0.2, 2.0, size=n)
    return make_system(m, alpha)


def random_potential(rng, system: FiniteSystem, scale: float = 2.0) -> np.ndarray:
    return rng.uniform(-scale, scale, size=system.n)


def random_unit_function(rng, system: FiniteSystem) -> L1Vector:
    """A function of unit L1 norm, supported where the measure is."""
    for _ in range(8):
        f = l1_vector(system, rng.normal(size=system.n))
        norm = l1_norm(system, f)
        if norm > 1e-9:
            return l1_vector(system, f.values / norm)
    idx = int(system.supported_indices[0])
    values = np.zeros(system.n)
    values[idx] = 1.0 / system.m[idx]
    return l1_vector(system, values)


def random_invariant(rng, system: FiniteSystem) -> Functional:
    """A point of the invariant polytope, Dirichlet-mixed over its vertices."""
    verts = invariant_vertices(system)
    coef = rng.dirichlet(np.ones(len(verts)))
    weights = np.zeros(system.n)
    for c, vert in zip(coef, verts):
        weights += c * vert.weights
    return functional(system, weights)


def random_functional(
    rng, system: FiniteSystem, scale: float = 1.0, mode: str = ESSENTIAL
) -> Functional:
    return functional(system, rng.normal(0.0, scale, size=system.n), mode=mode)


def perturbed_invariant(rng, system: FiniteSystem, scale: float = 0.25) -> Functional:
    """An invariant functional pushed off the polytope by uniform noise."""
    base = random_invariant(rng, system)
    noise = rng.uniform(-scale, scale, size=system.n)
    return functional(system, base.weights + noise)


def random_simplex_functional(
    rng, system: FiniteSystem, mode: str = ESSENTIAL
) -> Functional:
    """A nonnegative normalized functional, Dirichlet over the visible atoms."""
    idx = system.supported_indices if mode == ESSENTIAL else np.arange(system.n)
    weights = np.zeros(system.n)
    weights[idx] = rng.dirichlet(np.ones(idx.size))
    return functional(system, weights, mode=mode)


def random_null_charging(rng, system: FiniteSystem) -> Functional:
    """A normalized nonnegative FULL functional putting mass on a null atom."""
    nulls = np.flatnonzero(~system.support)
    if nulls.size == 0:
        raise ValueError("system has no null atoms to charge")
    theta = float(rng.uniform(0.05, 0.5))
    weights = (1.0 - theta) * effective_weights(system, random_invariant(rng, system))
    weights[int(rng.choice(nulls))] += theta
    return functional(system, weights, mode=FULL)


def random_partition(rng, system: FiniteSystem, members: int | None = None) -> PartitionOfUnity:
    """A soft partition of unity with a 0.05 floor keeping members positive."""
    k = int(rng.integers(2, system.n + 2)) if members is None else int(members)
    raw = rng.uniform(size=(k, system.n)) + 0.05
    return PartitionOfUnity(raw / raw.sum(axis=0))
