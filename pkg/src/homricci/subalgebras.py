"""Enumeration of intermediate subalgebras as bracket-closed index sets.

With pairwise inequivalent isotropy summands, a sum of summands (plus the
isotropy algebra) is a subalgebra exactly when no bracket of two member
summands leaks into the complement: [jkl] = 0 whenever j, k are in the set
and l is not.  The test is an exact zero test on the stored constants, which
either vanish identically or are bounded away from zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .space_model import HomogeneousSpaceSpec, SubalgebraIndexSet

__all__ = [
    "SubalgebraLattice",
    "is_bracket_closed",
    "intermediate_subalgebras",
    "maximal_within",
]

MAX_EXHAUSTIVE_SUMMANDS = 16


def _as_index_set(J) -> SubalgebraIndexSet:
    if isinstance(J, SubalgebraIndexSet):
        return J
    return SubalgebraIndexSet.from_iterable(J)


def is_bracket_closed(spec: HomogeneousSpaceSpec, J) -> bool:
    """True when the summands named by J span a subalgebra.

    A nonzero constant on a multiset with exactly two slots inside J
    witnesses a bracket of two members landing outside, so J fails.
    """
    Jset = _as_index_set(J).indices
    for i in Jset:
        if not 1 <= i <= spec.s:
            raise ValueError(f"index {i} out of range 1..{spec.s}")
    for multiset, value in spec.triples.nonzero_multisets():
        inside = sum(1 for idx in multiset if idx in Jset)
        if inside == 2:
            return False
    return True


@dataclass(frozen=True)
class SubalgebraLattice:
    """All proper intermediate subalgebras and the maximal ones among them.

    Both listings are sorted by size then lexicographically, so iteration
    order is reproducible.
    """

    all_proper: tuple[SubalgebraIndexSet, ...]
    maximal: tuple[SubalgebraIndexSet, ...]

    def __len__(self) -> int:
        return len(self.all_proper)


def _sort_key(J: SubalgebraIndexSet):
    return (len(J), J.sorted)


def intermediate_subalgebras(spec: HomogeneousSpaceSpec) -> SubalgebraLattice:
    """Exhaustive scan of all non-empty proper index sets for closure."""
    if spec.s > MAX_EXHAUSTIVE_SUMMANDS:
        raise ValueError(
            f"exhaustive subalgebra scan supports at most {MAX_EXHAUSTIVE_SUMMANDS} summands, got {spec.s}"
        )
    closed = []
    for mask in range(1, (1 << spec.s) - 1):
        J = SubalgebraIndexSet.from_iterable(i + 1 for i in range(spec.s) if mask >> i & 1)
        if is_bracket_closed(spec, J):
            closed.append(J)
    closed.sort(key=_sort_key)
    maximal = tuple(
        J for J in closed
        if not any(J < other for other in closed)
    )
    return SubalgebraLattice(all_proper=tuple(closed), maximal=maximal)


def maximal_within(spec: HomogeneousSpaceSpec, J) -> list[SubalgebraIndexSet]:
    """Bracket-closed proper non-empty subsets of J, maximal under inclusion.

    Closure is tested against the full constant table; since J itself is
    closed this is equivalent to requiring brackets not to leak into J minus
    the subset.
    """
    Jset = _as_index_set(J)
    if not is_bracket_closed(spec, Jset):
        raise ValueError(f"index set {Jset} is not bracket-closed")
    members = Jset.sorted
    closed = []
    for size in range(len(members) - 1, 0, -1):
        for subset in combinations(members, size):
            candidate = SubalgebraIndexSet.from_iterable(subset)
            if is_bracket_closed(spec, candidate):
                closed.append(candidate)
    closed.sort(key=_sort_key)
    return [
        candidate for candidate in closed
        if not any(candidate < other for other in closed)
    ]
