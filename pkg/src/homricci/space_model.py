"""Combinatorial descriptions of compact homogeneous spaces G/H.

A space is described by the number s of irreducible isotropy summands, their
dimensions d_i, the Killing coefficients b_i, and the fully symmetric
non-negative structure constants [ijk].  Summand indices are 1-based
everywhere in the public API, matching the JSON file format and all reports.

The toolkit assumes the isotropy summands are pairwise inequivalent, so that
every invariant metric is diagonal in the fixed decomposition and every
intermediate subalgebra is a sum of summands.  Specs describing spaces with
equivalent summands are outside the supported domain; there is no flag to
enable them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import permutations
from typing import Iterable, Mapping, Sequence

__all__ = [
    "SpecError",
    "StructureConstantTable",
    "HomogeneousSpaceSpec",
    "MetricCoefficients",
    "TensorCoefficients",
    "SubalgebraIndexSet",
    "load_space_spec",
    "space_spec_to_document",
    "builtin_space",
    "builtin_names",
    "wallach_space",
    "trace_Q_restricted",
]


class SpecError(ValueError):
    """Invalid space description.  ``field`` points at the offending entry."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(message if field is None else f"{field}: {message}")


def _as_value(raw, field: str) -> float:
    """Coerce a JSON number or a rational string like ``"7/2"`` to float."""
    if isinstance(raw, bool):
        raise SpecError("expected a number or rational string", field)
    if isinstance(raw, (int, float)):
        return float(raw)
    if isinstance(raw, str):
        try:
            return float(Fraction(raw))
        except (ValueError, ZeroDivisionError) as exc:
            raise SpecError(f"cannot parse {raw!r} as a rational", field) from exc
    raise SpecError("expected a number or rational string", field)


@dataclass(frozen=True)
class StructureConstantTable:
    """Sparse table of structure constants keyed by sorted index multiset.

    Lookup is invariant under permutations of (i, j, k); absent multisets
    evaluate to 0.  Values are squared norms and therefore non-negative.
    """

    entries: tuple[tuple[tuple[int, int, int], float], ...]

    @classmethod
    def from_items(cls, items: Mapping[tuple[int, int, int], float] | Iterable) -> "StructureConstantTable":
        pairs = items.items() if isinstance(items, Mapping) else items
        seen: dict[tuple[int, int, int], float] = {}
        for key, raw in pairs:
            multiset = tuple(sorted(int(k) for k in key))
            if multiset in seen:
                raise SpecError("duplicate multiset", f"triples[{multiset}]")
            value = float(raw)
            if value < 0:
                raise SpecError("negative structure constant", f"triples[{multiset}].value")
            seen[multiset] = value
        return cls(entries=tuple(sorted(seen.items())))

    @cached_property
    def _by_multiset(self) -> dict[tuple[int, int, int], float]:
        return dict(self.entries)

    def value(self, i: int, j: int, k: int) -> float:
        return self._by_multiset.get(tuple(sorted((i, j, k))), 0.0)

    @cached_property
    def ordered_entries(self) -> tuple[tuple[tuple[int, int, int], float], ...]:
        """Every distinct ordered triple carrying a nonzero constant.

        A sorted multiset expands to 1, 3 or 6 orderings depending on its
        repetitions; the brute-force s^3 loop is kept out of production code.
        """
        out = []
        for multiset, value in self.entries:
            if value == 0.0:
                continue
            for ordered in sorted(set(permutations(multiset))):
                out.append((ordered, value))
        return tuple(out)

    def nonzero_multisets(self) -> tuple[tuple[tuple[int, int, int], float], ...]:
        return tuple((m, v) for m, v in self.entries if v != 0.0)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class HomogeneousSpaceSpec:
    """Validated description of a homogeneous space.

    ``b`` defaults to all ones, the normalisation in which the background
    scalar product is the negative of the Killing form.
    """

    name: str
    d: tuple[int, ...]
    b: tuple[float, ...]
    triples: StructureConstantTable

    def __post_init__(self):
        if not self.name:
            raise SpecError("name must be a non-empty string", "name")
        if len(self.d) < 1:
            raise SpecError("need at least one summand", "d")
        for pos, dim in enumerate(self.d):
            if not isinstance(dim, int) or dim < 1:
                raise SpecError("summand dimension must be a positive integer", f"d[{pos + 1}]")
        if sum(self.d) < 3:
            raise SpecError("total dimension must be at least 3", "d")
        if len(self.b) != len(self.d):
            raise SpecError(f"expected {len(self.d)} Killing coefficients", "b")
        for pos, coeff in enumerate(self.b):
            if not coeff >= 0:
                raise SpecError("Killing coefficient must be non-negative", f"b[{pos + 1}]")
        s = len(self.d)
        for multiset, _ in self.triples.entries:
            for idx in multiset:
                if not 1 <= idx <= s:
                    raise SpecError(f"index {idx} out of range 1..{s}", f"triples[{multiset}]")

    @property
    def s(self) -> int:
        return len(self.d)

    @property
    def total_dimension(self) -> int:
        return sum(self.d)

    def constant(self, i: int, j: int, k: int) -> float:
        return self.triples.value(i, j, k)

    def summand_indices(self) -> range:
        return range(1, self.s + 1)


def _positive_tuple(values: Sequence[float], what: str) -> tuple[float, ...]:
    out = tuple(float(v) for v in values)
    for pos, v in enumerate(out):
        if not v > 0:
            raise ValueError(f"{what}[{pos + 1}] must be positive, got {v}")
    return out


@dataclass(frozen=True)
class MetricCoefficients:
    """Diagonal coordinates x_i > 0 of an invariant metric."""

    x: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", _positive_tuple(self.x, "x"))

    def __len__(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class TensorCoefficients:
    """Diagonal coordinates z_i > 0 of the prescribed symmetric tensor."""

    z: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "z", _positive_tuple(self.z, "z"))

    def __len__(self) -> int:
        return len(self.z)


@dataclass(frozen=True)
class SubalgebraIndexSet:
    """Non-empty set J of summand indices; stands for the span of those
    summands together with the isotropy algebra."""

    indices: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "indices", frozenset(int(i) for i in self.indices))
        if not self.indices:
            raise ValueError("index set must be non-empty")
        if any(i < 1 for i in self.indices):
            raise ValueError("summand indices are 1-based")

    @classmethod
    def of(cls, *indices: int) -> "SubalgebraIndexSet":
        return cls(frozenset(indices))

    @classmethod
    def from_iterable(cls, indices: Iterable[int]) -> "SubalgebraIndexSet":
        return cls(frozenset(indices))

    def complement(self, s: int) -> frozenset[int]:
        return frozenset(range(1, s + 1)) - self.indices

    @property
    def sorted(self) -> tuple[int, ...]:
        return tuple(sorted(self.indices))

    def __contains__(self, i: int) -> bool:
        return i in self.indices

    def __iter__(self):
        return iter(self.sorted)

    def __len__(self) -> int:
        return len(self.indices)

    def __le__(self, other: "SubalgebraIndexSet") -> bool:
        return self.indices <= other.indices

    def __lt__(self, other: "SubalgebraIndexSet") -> bool:
        return self.indices < other.indices

    def __str__(self) -> str:
        return "{" + ",".join(str(i) for i in self.sorted) + "}"


def coefficients_array(values, expected_length: int, what: str) -> tuple[float, ...]:
    """Accept a coefficient wrapper, sequence or scalar-per-index mapping and
    return a validated positive tuple of the expected length."""
    if isinstance(values, MetricCoefficients):
        values = values.x
    elif isinstance(values, TensorCoefficients):
        values = values.z
    out = tuple(float(v) for v in values)
    if len(out) != expected_length:
        raise ValueError(f"{what} has length {len(out)}, expected {expected_length}")
    for pos, v in enumerate(out):
        if not v > 0:
            raise ValueError(f"{what}[{pos + 1}] must be positive, got {v}")
    return out


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------
#
# {
#   "name": "...",
#   "d": [4, 2, 4],
#   "b": [1, 1, 1],                      # optional, defaults to all 1
#   "triples": [
#     {"i": 1, "j": 2, "k": 3, "value": "1/2"},
#     {"i": 1, "j": 1, "k": 2, "value": 0.6666666666666666}
#   ]
# }
#
# i <= j <= k is required; values may be numbers or rational strings.


def load_space_spec(document: str | bytes | dict) -> HomogeneousSpaceSpec:
    """Parse and validate a space description document.

    ``document`` may be JSON text or an already-parsed object.  Violations
    raise :class:`SpecError` with the offending field path.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SpecError(f"not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise SpecError("top-level document must be an object")

    name = document.get("name")
    if not isinstance(name, str) or not name:
        raise SpecError("required non-empty string", "name")

    raw_d = document.get("d")
    if not isinstance(raw_d, list) or not raw_d:
        raise SpecError("required non-empty array of integers", "d")
    dims = []
    for pos, value in enumerate(raw_d):
        if isinstance(value, bool) or not isinstance(value, int):
            raise SpecError("summand dimension must be an integer", f"d[{pos + 1}]")
        if value < 1:
            raise SpecError("summand dimension must be >= 1", f"d[{pos + 1}]")
        dims.append(value)
    s = len(dims)
    if sum(dims) < 3:
        raise SpecError("total dimension must be at least 3", "d")

    raw_b = document.get("b")
    if raw_b is None:
        killing = [1.0] * s
    else:
        if not isinstance(raw_b, list) or len(raw_b) != s:
            raise SpecError(f"expected array of {s} values", "b")
        killing = [_as_value(v, f"b[{pos + 1}]") for pos, v in enumerate(raw_b)]
        for pos, v in enumerate(killing):
            if v < 0:
                raise SpecError("Killing coefficient must be non-negative", f"b[{pos + 1}]")

    raw_triples = document.get("triples", [])
    if not isinstance(raw_triples, list):
        raise SpecError("must be an array of entries", "triples")
    seen: dict[tuple[int, int, int], float] = {}
    for pos, entry in enumerate(raw_triples):
        path = f"triples[{pos}]"
        if not isinstance(entry, dict):
            raise SpecError("entry must be an object", path)
        try:
            i, j, k = entry["i"], entry["j"], entry["k"]
        except KeyError as exc:
            raise SpecError(f"missing key {exc.args[0]!r}", path) from exc
        for label, idx in (("i", i), ("j", j), ("k", k)):
            if isinstance(idx, bool) or not isinstance(idx, int):
                raise SpecError("index must be an integer", f"{path}.{label}")
            if not 1 <= idx <= s:
                raise SpecError(f"index {idx} out of range 1..{s}", f"{path}.{label}")
        if not (i <= j <= k):
            raise SpecError("indices must satisfy i <= j <= k", path)
        if "value" not in entry:
            raise SpecError("missing key 'value'", path)
        value = _as_value(entry["value"], f"{path}.value")
        if value < 0:
            raise SpecError("negative structure constant", f"{path}.value")
        multiset = (i, j, k)
        if multiset in seen:
            raise SpecError("duplicate multiset", path)
        seen[multiset] = value

    return HomogeneousSpaceSpec(
        name=name,
        d=tuple(dims),
        b=tuple(killing),
        triples=StructureConstantTable(entries=tuple(sorted(seen.items()))),
    )


def space_spec_to_document(spec: HomogeneousSpaceSpec) -> dict:
    """Inverse of :func:`load_space_spec`; floats round-trip bit-for-bit."""
    return {
        "name": spec.name,
        "d": list(spec.d),
        "b": list(spec.b),
        "triples": [
            {"i": i, "j": j, "k": k, "value": value}
            for (i, j, k), value in spec.triples.entries
        ],
    }


# ---------------------------------------------------------------------------
# Built-in catalog
# ---------------------------------------------------------------------------

_CATALOG: dict[str, dict] = {
    "E6_Sp3xSp1": {
        "name": "E6_Sp3xSp1",
        "d": [14, 28, 12],
        "b": [1, 1, 1],
        "triples": [{"i": 1, "j": 2, "k": 3, "value": "7/2"}],
    },
    "G2_U2_long": {
        "name": "G2_U2_long",
        "d": [4, 2, 4],
        "b": [1, 1, 1],
        "triples": [
            {"i": 1, "j": 1, "k": 2, "value": "2/3"},
            {"i": 1, "j": 2, "k": 3, "value": "1/2"},
        ],
    },
    "F4_SU3xSU2xU1": {
        "name": "F4_SU3xSU2xU1",
        "d": [12, 18, 4, 6],
        "b": [1, 1, 1, 1],
        "triples": [
            {"i": 1, "j": 1, "k": 2, "value": 2},
            {"i": 1, "j": 2, "k": 3, "value": 1},
            {"i": 1, "j": 3, "k": 4, "value": "2/3"},
            {"i": 2, "j": 2, "k": 4, "value": 2},
        ],
    },
}


def builtin_names() -> tuple[str, ...]:
    return tuple(sorted(_CATALOG))


def builtin_space(name: str) -> HomogeneousSpaceSpec:
    """One of the three catalogued spaces; raises on unknown names."""
    try:
        document = _CATALOG[name]
    except KeyError:
        known = ", ".join(builtin_names())
        raise SpecError(f"unknown builtin space {name!r} (known: {known})", "name") from None
    return load_space_spec(document)


def wallach_space(d: Sequence[int], value, name: str = "wallach") -> HomogeneousSpaceSpec:
    """Three-summand space whose only possibly nonzero constant is [123]."""
    dims = tuple(int(x) for x in d)
    if len(dims) != 3:
        raise SpecError("exactly three summand dimensions required", "d")
    a = _as_value(value, "triples[(1, 2, 3)].value")
    if a < 0:
        raise SpecError("negative structure constant", "triples[(1, 2, 3)].value")
    triples = [] if a == 0.0 else [{"i": 1, "j": 2, "k": 3, "value": a}]
    return load_space_spec({"name": name, "d": list(dims), "b": [1, 1, 1], "triples": triples})


def trace_Q_restricted(spec: HomogeneousSpaceSpec, z, index_set: Iterable[int]) -> float:
    """Background trace of the tensor restricted to the named summands,
    sum of d_i z_i over the set.  Covers both a subalgebra and its complement;
    the caller passes whichever index set it needs."""
    zs = coefficients_array(z, spec.s, "z")
    indices = sorted(set(int(i) for i in index_set))
    if not indices:
        raise ValueError("index set must be non-empty")
    for i in indices:
        if not 1 <= i <= spec.s:
            raise ValueError(f"index {i} out of range 1..{spec.s}")
    return float(sum(spec.d[i - 1] * zs[i - 1] for i in indices))
