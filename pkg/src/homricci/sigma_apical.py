"""Slice suprema, pivotal subalgebras, and the existence verdict.

For an intermediate subalgebra J the quantity sigma(J, T) is the supremum of
hatS over the unit-trace slice.  A single summand makes the slice one point
and sigma has a closed form.  Larger slices combine an interior maximization
with a recursion over the maximal subalgebras inside J: the supremum is
either an interior stationary value or inherited from a smaller subalgebra,
and the two candidates are compared to decide attainment.

The pivot of the existence test is a proper subalgebra whose sigma is
attained and dominates the sigma of every maximal intermediate subalgebra.
The verdict compares sigma times the tensor trace over the complement
against a constant built from the complement alone; a strictly positive
margin guarantees an invariant metric g with Ric g = c T, c > 0.  The test
is sufficient, not necessary, so a failed inequality is reported as
inconclusive, never as non-existence.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

from .solver import SolverError, SolverOptions, maximize_hatS_on_slice
from .space_model import (
    HomogeneousSpaceSpec,
    SubalgebraIndexSet,
    coefficients_array,
    trace_Q_restricted,
)
from .subalgebras import intermediate_subalgebras, is_bracket_closed, maximal_within

__all__ = [
    "SigmaSource",
    "SigmaResult",
    "VerdictStatus",
    "ExistenceVerdict",
    "SigmaContext",
    "sigma_irreducible",
    "sigma",
    "find_T_apical",
    "existence_check",
    "wallach_existence_check",
    "NoProperSubalgebraError",
    "STRICTNESS_TOLERANCE",
    "ATTAINMENT_TOLERANCE",
]

# |margin| below this (relative to max(1, |rhs|)) is reported as "boundary":
# the decisive inequality is strict and exact equality is left undecided.
STRICTNESS_TOLERANCE = 1e-10
# interior maximum vs boundary recursion comparison; ties count as attained
# and keep the interior witness, which is the usable scalar product.
ATTAINMENT_TOLERANCE = 1e-9
# sigma values this close (relative) are treated as tied when picking a pivot
TIE_TOLERANCE = 1e-9
# a converged witness whose coordinate spread comes within a decade of the
# escape ratio, while gaining nothing over the boundary recursion, is the
# degenerate-threshold signature of a supremum that is really a boundary
# limit; treating it as attained would certify the existence inequality
# through the wrong pivot
BOUNDARY_ADJACENT_RATIO = 1e7


class NoProperSubalgebraError(ValueError):
    """The isotropy algebra is maximal; the pivot construction does not apply."""


class SigmaSource(str, enum.Enum):
    CLOSED_FORM_IRREDUCIBLE = "closed_form_irreducible"
    INTERIOR_MAXIMUM = "interior_maximum"
    BOUNDARY_RECURSION = "boundary_recursion"


@dataclass(frozen=True)
class SigmaResult:
    """Value of sigma on one subalgebra with attainment information."""

    J: SubalgebraIndexSet
    value: float
    attained: bool
    witness: tuple[float, ...] | None
    source: SigmaSource

    def as_dict(self) -> dict:
        return {
            "J": list(self.J.sorted),
            "value": self.value,
            "attained": self.attained,
            "witness": None if self.witness is None else list(self.witness),
            "source": self.source.value,
        }


class VerdictStatus(str, enum.Enum):
    GUARANTEED = "guaranteed"
    INCONCLUSIVE = "inconclusive"
    DEGENERATE_CONSTANT_RICCI = "degenerate_constant_ricci"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class ExistenceVerdict:
    """Outcome of the existence test.

    ``lhs`` is sigma times the tensor trace over the complement of the pivot,
    ``rhs`` the complement constant, ``margin`` their difference.  All pivot
    candidates surviving the tie tolerance are listed in ``candidates``;
    ``apical``/``sigma`` describe the deterministic primary choice.  The
    degenerate status (no nonzero structure constants, so every metric has
    the same Ricci tensor) carries no pivot and no inequality data.
    """

    status: VerdictStatus
    apical: SubalgebraIndexSet | None
    sigma: SigmaResult | None
    lhs: float | None
    rhs: float | None
    margin: float | None
    candidates: tuple[SigmaResult, ...] = field(default=())

    def as_dict(self) -> dict:
        return {
            "status": self.status.value,
            "apical": None if self.apical is None else list(self.apical.sorted),
            "sigma": None if self.sigma is None else self.sigma.as_dict(),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "candidates": [c.as_dict() for c in self.candidates],
        }


def _as_index_set(J) -> SubalgebraIndexSet:
    return J if isinstance(J, SubalgebraIndexSet) else SubalgebraIndexSet.from_iterable(J)


def sigma_irreducible(spec: HomogeneousSpaceSpec, i: int, z) -> SigmaResult:
    """Closed-form sigma for a single-summand subalgebra.

    The slice is the single point y = d_i z_i, so the supremum is attained
    there and equals

        (d_i b_i / 2 - [iii] / 4 - 1/2 sum_{j,k != i} [ijk]) / (d_i z_i).
    """
    zs = coefficients_array(z, spec.s, "z")
    if not 1 <= i <= spec.s:
        raise ValueError(f"summand index {i} out of range 1..{spec.s}")
    J = SubalgebraIndexSet.of(i)
    if not is_bracket_closed(spec, J):
        raise ValueError(f"summand {i} does not span a subalgebra")
    cross = 0.0
    for (a, b, c), value in spec.triples.ordered_entries:
        if a == i and b != i and c != i:
            cross += value
    self_term = spec.triples.value(i, i, i)
    numerator = 0.5 * spec.d[i - 1] * spec.b[i - 1] - 0.25 * self_term - 0.5 * cross
    point = spec.d[i - 1] * zs[i - 1]
    return SigmaResult(
        J=J,
        value=numerator / point,
        attained=True,
        witness=(point,),
        source=SigmaSource.CLOSED_FORM_IRREDUCIBLE,
    )


class SigmaContext:
    """Memoised sigma evaluations for one (spec, tensor) pair.

    Not safe to share across threads; each worker should hold its own.
    """

    def __init__(self, spec: HomogeneousSpaceSpec, z, options: SolverOptions | None = None):
        self.spec = spec
        self.z = coefficients_array(z, spec.s, "z")
        self.options = options or SolverOptions()
        self._memo: dict[frozenset[int], SigmaResult] = {}

    def sigma(self, J) -> SigmaResult:
        Jset = _as_index_set(J)
        cached = self._memo.get(Jset.indices)
        if cached is not None:
            return cached
        if not is_bracket_closed(self.spec, Jset):
            raise ValueError(f"index set {Jset} is not bracket-closed")
        if len(Jset) == 1:
            result = sigma_irreducible(self.spec, Jset.sorted[0], self.z)
        else:
            result = self._sigma_composite(Jset)
        self._memo[Jset.indices] = result
        return result

    def _sigma_composite(self, Jset: SubalgebraIndexSet) -> SigmaResult:
        report = maximize_hatS_on_slice(self.spec, Jset, self.z, self.options)
        sub_results = [self.sigma(Jp) for Jp in maximal_within(self.spec, Jset)]
        recursive = max((r.value for r in sub_results), default=None)

        if not report.converged and recursive is None:
            raise SolverError(
                f"interior maximization failed on {Jset} and it has no proper "
                f"subalgebra to recurse into: {report.diagnostics}"
            )
        boundary_adjacent = (
            report.converged
            and recursive is not None
            and max(report.argmax) / min(report.argmax) > BOUNDARY_ADJACENT_RATIO
            and report.value <= recursive + ATTAINMENT_TOLERANCE * max(1.0, abs(recursive))
        )
        if report.converged and not boundary_adjacent and (
            recursive is None
            or report.value >= recursive - ATTAINMENT_TOLERANCE * max(1.0, abs(recursive))
        ):
            value = report.value if recursive is None else max(report.value, recursive)
            return SigmaResult(
                J=Jset,
                value=value,
                attained=True,
                witness=report.argmax,
                source=SigmaSource.INTERIOR_MAXIMUM,
            )
        return SigmaResult(
            J=Jset,
            value=recursive,
            attained=False,
            witness=None,
            source=SigmaSource.BOUNDARY_RECURSION,
        )


def sigma(spec: HomogeneousSpaceSpec, J, z, options: SolverOptions | None = None) -> SigmaResult:
    """sigma(J, T) with attainment analysis; see :class:`SigmaContext`."""
    return SigmaContext(spec, z, options).sigma(J)


def _tie_break(results: Sequence[SigmaResult]) -> SigmaResult:
    # prefer more summands, then the lexicographically smallest index set
    return min(results, key=lambda r: (-len(r.J), r.J.sorted))


def _tied_subset(results: Sequence[SigmaResult]) -> list[SigmaResult]:
    best = max(r.value for r in results)
    tol = TIE_TOLERANCE * max(1.0, abs(best))
    return [r for r in results if r.value >= best - tol]


def _apical_search(ctx: SigmaContext) -> tuple[SigmaResult, tuple[SigmaResult, ...]]:
    lattice = intermediate_subalgebras(ctx.spec)
    if not lattice.all_proper:
        raise NoProperSubalgebraError(
            "the isotropy algebra is maximal: no proper intermediate subalgebra "
            "exists, and this existence test does not cover that case"
        )
    maximal_results = [ctx.sigma(J) for J in lattice.maximal]
    candidates: list[SigmaResult] = []
    for start in _tied_subset(maximal_results):
        current = start
        while not current.attained:
            subs = maximal_within(ctx.spec, current.J)
            if not subs:  # unattained sigma always has somewhere to descend
                raise SolverError(f"descent stuck on {current.J} with no subalgebras")
            current = _tie_break(_tied_subset([ctx.sigma(Jp) for Jp in subs]))
        if all(current.J.indices != c.J.indices for c in candidates):
            candidates.append(current)
    candidates.sort(key=lambda r: (-len(r.J), r.J.sorted))
    return _tie_break(candidates), tuple(candidates)


def find_T_apical(spec: HomogeneousSpaceSpec, z, options: SolverOptions | None = None) -> SigmaResult:
    """A proper subalgebra with attained sigma dominating every maximal one.

    Starts from the maximal subalgebra with the largest sigma and, while the
    supremum is unattained, descends to the sub-subalgebra with the largest
    sigma; single summands always attain, so the walk terminates.  Ties are
    broken toward more summands, then lexicographically.
    """
    primary, _ = _apical_search(SigmaContext(spec, z, options))
    return primary


def _complement_constant(spec: HomogeneousSpaceSpec, complement: frozenset[int]) -> float:
    linear = sum(spec.d[i - 1] * spec.b[i - 1] for i in sorted(complement))
    triple = 0.0
    for (a, b, c), value in spec.triples.ordered_entries:
        if a in complement and b in complement and c in complement:
            triple += value
    return 0.5 * linear - 0.25 * triple


def _classify(margin: float, rhs: float) -> VerdictStatus:
    band = STRICTNESS_TOLERANCE * max(1.0, abs(rhs))
    if margin > band:
        return VerdictStatus.GUARANTEED
    if abs(margin) <= band:
        return VerdictStatus.BOUNDARY
    return VerdictStatus.INCONCLUSIVE


def _degenerate_verdict() -> ExistenceVerdict:
    return ExistenceVerdict(
        status=VerdictStatus.DEGENERATE_CONSTANT_RICCI,
        apical=None,
        sigma=None,
        lhs=None,
        rhs=None,
        margin=None,
    )


def existence_check(spec: HomogeneousSpaceSpec, z, options: SolverOptions | None = None) -> ExistenceVerdict:
    """Decide whether the variational criterion guarantees Ric g = c T, c > 0.

    With every structure constant zero the Ricci tensor is the same for all
    invariant metrics and the verdict is degenerate.  Otherwise the pivot
    subalgebra is located and the strict inequality

        sigma(J, T) * sum_{i not in J} d_i z_i  <
            1/2 sum_{i not in J} d_i b_i - 1/4 sum_{i,j,k not in J} [ijk]

    is evaluated; margins inside the strictness band are reported as
    boundary because the criterion says nothing about equality.
    """
    zs = coefficients_array(z, spec.s, "z")
    if not spec.triples.nonzero_multisets():
        return _degenerate_verdict()
    ctx = SigmaContext(spec, zs, options)
    primary, candidates = _apical_search(ctx)
    complement = primary.J.complement(spec.s)
    lhs = primary.value * trace_Q_restricted(spec, zs, complement)
    rhs = _complement_constant(spec, complement)
    margin = rhs - lhs
    return ExistenceVerdict(
        status=_classify(margin, rhs),
        apical=primary.J,
        sigma=primary,
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        candidates=candidates,
    )


def wallach_existence_check(d: Sequence[int], a, z) -> ExistenceVerdict:
    """Fast existence test for three-summand spaces whose only bracket
    interaction is the fully mixed one with strength ``a``.

    Picks the summand p maximising (d_p - 2a) / (2 d_p z_p) (ties toward the
    smallest index, matching the generic tie-break on singletons) and checks
    the same inequality as :func:`existence_check`, which here reduces to

        (d_p - 2a) * sum_{i != p} d_i z_i  <  (d - d_p) * d_p * z_p.
    """
    dims = tuple(int(v) for v in d)
    if len(dims) != 3 or any(v < 1 for v in dims):
        raise ValueError("d must be three positive integers")
    strength = float(a)
    if strength < 0:
        raise ValueError("bracket strength a must be non-negative")
    zs = coefficients_array(z, 3, "z")
    if strength == 0.0:
        return _degenerate_verdict()

    values = [(dims[p] - 2.0 * strength) / (2.0 * dims[p] * zs[p]) for p in range(3)]
    best = max(values)
    tol = TIE_TOLERANCE * max(1.0, abs(best))
    tied = [p for p in range(3) if values[p] >= best - tol]
    p = min(tied)

    candidates = tuple(
        SigmaResult(
            J=SubalgebraIndexSet.of(q + 1),
            value=values[q],
            attained=True,
            witness=(dims[q] * zs[q],),
            source=SigmaSource.CLOSED_FORM_IRREDUCIBLE,
        )
        for q in tied
    )
    primary = candidates[tied.index(p)]
    lhs = values[p] * sum(dims[i] * zs[i] for i in range(3) if i != p)
    rhs = 0.5 * (sum(dims) - dims[p])
    margin = rhs - lhs
    return ExistenceVerdict(
        status=_classify(margin, rhs),
        apical=primary.J,
        sigma=primary,
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        candidates=candidates,
    )
