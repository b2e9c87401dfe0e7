"""Small named systems used across the test-suite and the docs."""

from __future__ import annotations

from .system import FiniteSystem, make_system


def cycle3() -> FiniteSystem:
    """Three atoms of unit mass on a single 3-cycle 0 -> 1 -> 2 -> 0."""
    return make_system([1.0, 1.0, 1.0], [1, 2, 0])


def tail() -> FiniteSystem:
    """Fixed point at 0 fed by the tail 2 -> 1 -> 0, unit masses."""
    return make_system([1.0, 1.0, 1.0], [0, 0, 1])


def twocyc() -> FiniteSystem:
    """Two disjoint 2-cycles (0 1) and (2 3), unit masses."""
    return make_system([1.0, 1.0, 1.0, 1.0], [1, 0, 3, 2])


def null_pair() -> FiniteSystem:
    """Two fixed points where only atom 0 carries mass."""
    return make_system([1.0, 0.0], [0, 1])


ALL = {
    "cycle3": cycle3,
    "tail": tail,
    "twocyc": twocyc,
    "null_pair": null_pair,
}
