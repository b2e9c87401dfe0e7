"""Finite measurable dynamical systems and their invariant measures.

A system is a finite set of atoms carrying nonnegative masses (the base
measure) and a total self-map.  Everything downstream, from weighted shift
operators to entropy functionals, runs on these systems, so this module also
exposes the functional-graph structure of the map: every atom falls onto a
unique terminal cycle, and the invariant probability functionals form the
convex hull of the uniform measures sitting on cycles inside the support.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

ESSENTIAL = "essential"
FULL = "full"

EXACT_TOL = 1e-12


class InvalidSystemError(ValueError):
    """The null atoms are not closed under preimage, so no L1 shift exists."""


def _frozen(values, dtype=float):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FiniteSystem:
    """Atoms with masses and a total endomap, given as an index array."""

    atoms: tuple[str, ...]
    m: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        atoms = tuple(str(a) for a in self.atoms)
        if len(set(atoms)) != len(atoms):
            raise ValueError("atom labels must be distinct")
        m = _frozen(self.m)
        alpha = _frozen(self.alpha, dtype=np.intp)
        n = len(atoms)
        if m.shape != (n,) or alpha.shape != (n,):
            raise ValueError("measure and map must match the atom count")
        if n == 0:
            raise ValueError("a system needs at least one atom")
        if not np.all(np.isfinite(m)) or m.min() < 0.0:
            raise ValueError("masses must be finite and nonnegative")
        if m.sum() <= 0.0:
            raise ValueError("total mass must be positive")
        if alpha.min() < 0 or alpha.max() >= n:
            raise ValueError("map indices out of range")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "alpha", alpha)

    @property
    def n(self) -> int:
        return len(self.atoms)

    @cached_property
    def support(self) -> np.ndarray:
        mask = self.m > 0.0
        mask.setflags(write=False)
        return mask

    @cached_property
    def supported_indices(self) -> np.ndarray:
        return _frozen(np.flatnonzero(self.support), dtype=np.intp)

    @cached_property
    def log_m(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            lm = np.log(self.m)
        lm.setflags(write=False)
        return lm

    @cached_property
    def preimages(self) -> tuple[np.ndarray, ...]:
        """Index arrays of the full preimage of each atom."""
        buckets = [[] for _ in range(self.n)]
        for x, y in enumerate(self.alpha):
            buckets[y].append(x)
        return tuple(_frozen(b, dtype=np.intp) for b in buckets)

    @cached_property
    def decomposition(self) -> "CycleDecomposition":
        return _decompose(self)

    @cached_property
    def supported_cycle_arrays(self) -> tuple[np.ndarray, ...]:
        dec = self.decomposition
        return tuple(
            _frozen(c, dtype=np.intp)
            for c, ok in zip(dec.cycles, dec.supported)
            if ok
        )

    @cached_property
    def validation(self) -> "ValidationReport":
        return validate(self)


def make_system(m, alpha, atoms=None) -> FiniteSystem:
    """Build a system, defaulting atom labels to their indices."""
    m = np.asarray(m, dtype=float)
    if atoms is None:
        atoms = tuple(str(i) for i in range(len(m)))
    return FiniteSystem(tuple(atoms), m, np.asarray(alpha))


@dataclass(frozen=True, eq=False)
class Functional:
    """A linear functional given by one weight per atom.

    ``mode`` records which function space the functional acts on: ESSENTIAL
    functionals see classes of functions modulo null atoms, FULL functionals
    see every atom individually.
    """

    weights: np.ndarray
    mode: str = ESSENTIAL

    def __post_init__(self):
        if self.mode not in (ESSENTIAL, FULL):
            raise ValueError(f"unknown mode {self.mode!r}")
        w = _frozen(self.weights)
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "weights", w)


def functional(system: FiniteSystem, weights, mode: str = ESSENTIAL) -> Functional:
    """Canonical functional on ``system``; essential weights vanish on null atoms."""
    w = np.array(weights, dtype=float)
    if w.shape != (system.n,):
        raise ValueError("weight count must match the atom count")
    if mode == ESSENTIAL:
        w = np.where(system.support, w, 0.0)
    return Functional(w, mode)


def effective_weights(system: FiniteSystem, mu: Functional) -> np.ndarray:
    """Weights actually seen by the pairing, zeroed on null atoms in essential mode."""
    if mu.mode == ESSENTIAL:
        return np.where(system.support, mu.weights, 0.0)
    return mu.weights


def pair(system: FiniteSystem, mu: Functional, f) -> float:
    """Evaluate mu on the function f given atomwise."""
    return float(effective_weights(system, mu) @ np.asarray(f, dtype=float))


@dataclass(frozen=True, eq=False)
class CycleDecomposition:
    """Cycles of the endomap, each rotated to start at its smallest atom.

    ``cycle_of`` is the cycle id for atoms sitting on a cycle and None for
    tail atoms; ``terminal`` is the id of the cycle the orbit eventually
    enters, and ``entry_time`` the number of steps until it does.
    """

    cycles: tuple[tuple[int, ...], ...]
    cycle_of: tuple[int | None, ...]
    entry_time: tuple[int, ...]
    terminal: tuple[int, ...]
    supported: tuple[bool, ...]


def _decompose(system: FiniteSystem) -> CycleDecomposition:
    n = system.n
    alpha = system.alpha
    color = [0] * n  # 0 unseen, 1 on current path, 2 finished
    cycle_of: list[int | None] = [None] * n
    entry = [0] * n
    terminal = [0] * n
    raw_cycles: list[tuple[int, ...]] = []

    for start in range(n):
        if color[start]:
            continue
        path = []
        x = start
        while color[x] == 0:
            color[x] = 1
            path.append(x)
            x = int(alpha[x])
        if color[x] == 1:
            # closed a fresh cycle inside the current path
            i = path.index(x)
            cyc = path[i:]
            j = cyc.index(min(cyc))
            cyc = cyc[j:] + cyc[:j]
            cid = len(raw_cycles)
            raw_cycles.append(tuple(cyc))
            for a in cyc:
                color[a] = 2
                cycle_of[a] = cid
                entry[a] = 0
                terminal[a] = cid
            tail = path[:i]
        else:
            tail = path
        for a in reversed(tail):
            color[a] = 2
            nxt = int(alpha[a])
            entry[a] = entry[nxt] + 1
            terminal[a] = terminal[nxt]
            cycle_of[a] = None

    order = sorted(range(len(raw_cycles)), key=lambda c: raw_cycles[c][0])
    remap = {old: new for new, old in enumerate(order)}
    cycles = tuple(raw_cycles[old] for old in order)
    cycle_of = [None if c is None else remap[c] for c in cycle_of]
    terminal = [remap[c] for c in terminal]
    supported = tuple(bool(all(system.support[a] for a in cyc)) for cyc in cycles)
    return CycleDecomposition(
        cycles=cycles,
        cycle_of=tuple(cycle_of),
        entry_time=tuple(entry),
        terminal=tuple(terminal),
        supported=supported,
    )


@dataclass(frozen=True, eq=False)
class ValidationReport:
    """Boundedness constant of the shift and any support-closure violations."""

    constant: float
    violations: tuple[tuple[int, int], ...]

    @property
    def valid(self) -> bool:
        return not self.violations


def validate(system: FiniteSystem) -> ValidationReport:
    """Report the least C with m(preimage of G) <= C m(G), and closure defects.

    A violation (x, y) is a supported atom x mapping onto a null atom y;
    systems with violations carry no bounded shift on L1 at all.
    """
    best = 0.0
    for y in system.supported_indices:
        pre = system.preimages[y]
        if pre.size:
            best = max(best, float(system.m[pre].sum() / system.m[y]))
    violations = [
        (x, int(system.alpha[x]))
        for x in range(system.n)
        if system.support[x] and not system.support[system.alpha[x]]
    ]
    return ValidationReport(constant=best, violations=tuple(violations))


def require_valid(system: FiniteSystem) -> None:
    rep = system.validation
    if not rep.valid:
        raise InvalidSystemError(
            f"null atoms have supported preimages: {list(rep.violations)}"
        )


def cycles(system: FiniteSystem) -> CycleDecomposition:
    return system.decomposition


def alpha_power(system: FiniteSystem, n: int) -> np.ndarray:
    """Index array of the n-fold composition of the map."""
    if n < 0:
        raise ValueError("power must be nonnegative")
    result = np.arange(system.n, dtype=np.intp)
    base = system.alpha
    while n:
        if n & 1:
            result = base[result]
        n >>= 1
        if n:
            base = base[base]
    return result


def birkhoff(system: FiniteSystem, phi, n: int) -> np.ndarray:
    """Sum of the potential along the first n orbit points of each atom."""
    if n < 1:
        raise ValueError("horizon must be at least 1")
    phi = np.asarray(phi, dtype=float)
    total = phi.astype(float, copy=True)
    pos = system.alpha
    for _ in range(n - 1):
        total += phi[pos]
        pos = system.alpha[pos]
    return total


def is_invariant(system: FiniteSystem, mu: Functional) -> tuple[bool, float]:
    """Check mu is a positive normalized fixed point of composition with the map.

    Returns the verdict together with the worst per-atom defect of
    mu(preimage of y) = mu(y).
    """
    w = effective_weights(system, mu)
    worst = 0.0
    for y in range(system.n):
        pre = system.preimages[y]
        gap = abs(float(w[pre].sum()) - float(w[y]))
        worst = max(worst, gap)
    ok = (
        worst <= EXACT_TOL
        and w.min() >= -EXACT_TOL
        and abs(w.sum() - 1.0) <= EXACT_TOL
    )
    return ok, worst


def invariant_vertices(system: FiniteSystem) -> list[Functional]:
    """Uniform measures on supported cycles: the extreme invariant functionals."""
    require_valid(system)
    verts = []
    for idx in system.supported_cycle_arrays:
        w = np.zeros(system.n)
        w[idx] = 1.0 / idx.size
        verts.append(Functional(w, ESSENTIAL))
    return verts


def restrict_to_support(system: FiniteSystem) -> FiniteSystem:
    """The subsystem on supported atoms; identity when nothing is null."""
    require_valid(system)
    if bool(system.support.all()):
        return system
    keep = system.supported_indices
    new_index = np.full(system.n, -1, dtype=np.intp)
    new_index[keep] = np.arange(keep.size)
    return FiniteSystem(
        tuple(system.atoms[i] for i in keep),
        system.m[keep],
        new_index[system.alpha[keep]],
    )


@dataclass(frozen=True, eq=False)
class PartitionOfUnity:
    """Nonnegative functions, one per row, summing to one at every atom."""

    members: np.ndarray

    def __post_init__(self):
        mem = _frozen(self.members)
        if mem.ndim != 2 or mem.shape[0] == 0:
            raise ValueError("members must form a nonempty 2d array")
        if not np.all(np.isfinite(mem)) or mem.min() < -0.0:
            raise ValueError("members must be finite and nonnegative")
        col = mem.sum(axis=0)
        if np.max(np.abs(col - 1.0)) > EXACT_TOL:
            raise ValueError("member values must sum to 1 at every atom")
        object.__setattr__(self, "members", mem)

    @property
    def size(self) -> int:
        return self.members.shape[0]


def atomic_partition(system: FiniteSystem) -> PartitionOfUnity:
    return PartitionOfUnity(np.eye(system.n))


def trivial_partition(system: FiniteSystem) -> PartitionOfUnity:
    return PartitionOfUnity(np.ones((1, system.n)))
