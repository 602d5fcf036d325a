"""Subset-lattice indexing, exact rational entries, and the fast transforms.

Subsets of the ground set {1..n} are bitmasks: bit i-1 set means element i
belongs to the subset. The canonical order used everywhere is graded: first
by cardinality, then by bitmask value within each cardinality class. All
arithmetic is exact via fractions.Fraction; floats are rejected on sight so
no certification path can silently lose exactness.

The two transforms here convert between a moment vector w (indexed by all
subsets) and its pseudo-probability vector. The pseudo-probability of I is
the alternating superset sum

    p_I = sum over S containing I of (-1)^(|S|-|I|) * w_S

and the inverse is the plain superset sum w_I = sum over S containing I of
p_S. Both run in-place on a dense array in O(n * 2^n).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Union

# Vector kinds carried by LatticeVector.
MOMENTS = "moments"
PSEUDO_PROBABILITIES = "pseudo-probabilities"

DEFAULT_MAX_GROUND = 24
_ENV_MAX_GROUND = "LASSERRE_ADF_MAX_N"


class LatticeError(ValueError):
    """Invalid argument to a lattice operation."""


def max_ground_size() -> int:
    """Cap on the ground-set size n (dense arrays have 2^n entries).

    The environment variable LASSERRE_ADF_MAX_N overrides the default cap
    of 24; raising it is at the caller's own risk of memory exhaustion.
    """
    raw = os.environ.get(_ENV_MAX_GROUND)
    if raw is None:
        return DEFAULT_MAX_GROUND
    try:
        return int(raw)
    except ValueError as exc:
        raise LatticeError(
            f"{_ENV_MAX_GROUND} must be an integer, got {raw!r}"
        ) from exc


# ---------------------------------------------------------------------------
# rational text form
# ---------------------------------------------------------------------------

RationalLike = Union[int, str, Fraction]


def rat(value: RationalLike) -> Fraction:
    """Coerce an int, Fraction, or 'p/q' string to an exact Fraction.

    Floats are rejected: a binary float that leaked into a certificate
    would defeat the exactness guarantee, so the caller must convert
    explicitly if that is really intended.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise LatticeError(f"not a rational: {value!r}") from exc
    raise LatticeError(f"not a rational: {value!r}")


def rat_str(value: RationalLike) -> str:
    """Canonical text form: 'p/q' in lowest terms with q > 0, or a bare int."""
    q = rat(value)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# subset indices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubsetIndex:
    """A subset of {1..n}, stored as a bitmask together with its ground size."""

    bits: int
    n: int

    def __post_init__(self) -> None:
        if not 0 <= self.n <= max_ground_size():
            raise LatticeError(f"ground size {self.n} out of range")
        if not 0 <= self.bits < (1 << self.n):
            raise LatticeError(f"bitmask {self.bits} out of range for n={self.n}")

    @property
    def cardinality(self) -> int:
        return self.bits.bit_count()

    def members(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in range(self.n) if self.bits >> i & 1)

    def union(self, other: "SubsetIndex") -> "SubsetIndex":
        if other.n != self.n:
            raise LatticeError("union of subsets over different ground sets")
        return SubsetIndex(self.bits | other.bits, self.n)

    def complement(self) -> "SubsetIndex":
        return SubsetIndex(~self.bits & ((1 << self.n) - 1), self.n)

    def issubset(self, other: "SubsetIndex") -> bool:
        return self.bits & ~other.bits == 0

    def sort_key(self) -> tuple[int, int]:
        return (self.bits.bit_count(), self.bits)

    def __lt__(self, other: "SubsetIndex") -> bool:
        if other.n != self.n:
            raise LatticeError("comparing subsets over different ground sets")
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return "{" + ",".join(str(i) for i in self.members()) + "}"

    @classmethod
    def parse(cls, text: str, n: int) -> "SubsetIndex":
        """Parse the text form '{1,3}' (or '{}' for the empty set)."""
        body = text.strip()
        if not (body.startswith("{") and body.endswith("}")):
            raise LatticeError(f"not a subset: {text!r}")
        inner = body[1:-1].strip()
        bits = 0
        if inner:
            for part in inner.split(","):
                try:
                    i = int(part)
                except ValueError as exc:
                    raise LatticeError(f"not a subset: {text!r}") from exc
                if not 1 <= i <= n:
                    raise LatticeError(f"element {i} outside ground set of size {n}")
                if bits >> (i - 1) & 1:
                    raise LatticeError(f"repeated element {i} in {text!r}")
                bits |= 1 << (i - 1)
        return cls(bits, n)


def enumerate_subsets(n: int, t: int) -> list[SubsetIndex]:
    """All subsets of {1..n} with cardinality at most t, in graded order."""
    if n < 0 or n > max_ground_size():
        raise LatticeError(f"ground size {n} out of range")
    if not 0 <= t <= n:
        raise LatticeError(f"level {t} out of range for n={n}")
    out: list[SubsetIndex] = []
    for card in range(t + 1):
        masks = sorted(
            sum(1 << i for i in combo) for combo in combinations(range(n), card)
        )
        out.extend(SubsetIndex(m, n) for m in masks)
    return out


def _mask_of(index: Union[SubsetIndex, int], n: int) -> int:
    if isinstance(index, SubsetIndex):
        if index.n != n:
            raise LatticeError("subset over a different ground set")
        return index.bits
    if not 0 <= index < (1 << n):
        raise LatticeError(f"bitmask {index} out of range for n={n}")
    return index


# ---------------------------------------------------------------------------
# lattice vectors
# ---------------------------------------------------------------------------


class LatticeVector:
    """Exact rational vector indexed by subsets of {1..n}.

    Entries absent from the backing store read as zero. Small vectors keep a
    sparse mask->value map; once more than half the lattice is populated the
    store switches to a dense list of length 2^n.
    """

    __slots__ = ("n", "kind", "_dense", "_sparse")

    def __init__(
        self,
        n: int,
        kind: str,
        entries: Union[Mapping, Iterable[tuple], None] = None,
    ) -> None:
        if n < 0 or n > max_ground_size():
            raise LatticeError(f"ground size {n} out of range")
        if kind not in (MOMENTS, PSEUDO_PROBABILITIES):
            raise LatticeError(f"unknown vector kind {kind!r}")
        self.n = n
        self.kind = kind
        pairs = entries.items() if isinstance(entries, Mapping) else (entries or ())
        store: dict[int, Fraction] = {}
        for key, value in pairs:
            mask = _mask_of(key, n)
            val = rat(value)
            if val:
                store[mask] = val
            else:
                store.pop(mask, None)
        self._dense: Union[list[Fraction], None]
        self._sparse: Union[dict[int, Fraction], None]
        if len(store) > (1 << n) // 2:
            dense = [Fraction(0)] * (1 << n)
            for mask, val in store.items():
                dense[mask] = val
            self._dense = dense
            self._sparse = None
        else:
            self._dense = None
            self._sparse = store

    @classmethod
    def from_dense(cls, n: int, kind: str, values: list[Fraction]) -> "LatticeVector":
        if len(values) != (1 << n):
            raise LatticeError("dense vector has wrong length")
        vec = cls(n, kind)
        vec._sparse = None
        vec._dense = [rat(v) for v in values]
        return vec

    def get(self, index: Union[SubsetIndex, int]) -> Fraction:
        mask = _mask_of(index, self.n)
        if self._dense is not None:
            return self._dense[mask]
        return self._sparse.get(mask, Fraction(0))

    __getitem__ = get

    def items(self) -> Iterator[tuple[int, Fraction]]:
        """Nonzero (mask, value) pairs in graded order."""
        if self._dense is not None:
            pairs = [(m, v) for m, v in enumerate(self._dense) if v]
        else:
            pairs = list(self._sparse.items())
        pairs.sort(key=lambda mv: (mv[0].bit_count(), mv[0]))
        return iter(pairs)

    def to_dense(self) -> list[Fraction]:
        if self._dense is not None:
            return list(self._dense)
        out = [Fraction(0)] * (1 << self.n)
        for mask, val in self._sparse.items():
            out[mask] = val
        return out

    def nonzero_count(self) -> int:
        if self._dense is not None:
            return sum(1 for v in self._dense if v)
        return len(self._sparse)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LatticeVector):
            return NotImplemented
        if self.n != other.n or self.kind != other.kind:
            return False
        return dict(self.items()) == dict(other.items())

    def __repr__(self) -> str:
        return (
            f"LatticeVector(n={self.n}, kind={self.kind!r}, "
            f"nonzero={self.nonzero_count()})"
        )


# ---------------------------------------------------------------------------
# pair values and the transforms
# ---------------------------------------------------------------------------


def pair_value(
    w: LatticeVector, I: Union[SubsetIndex, int], J: Union[SubsetIndex, int]
) -> Fraction:
    """Alternating sum over the second argument:

        sum over H subset of J of (-1)^|H| * w_{H union I}

    With J the complement of I this is the pseudo-probability of I.
    """
    if w.kind != MOMENTS:
        raise LatticeError("pair_value expects a moment vector")
    imask = _mask_of(I, w.n)
    jmask = _mask_of(J, w.n)
    total = Fraction(0)
    sub = jmask
    while True:
        term = w.get(sub | imask)
        if term:
            total += -term if sub.bit_count() & 1 else term
        if sub == 0:
            break
        sub = (sub - 1) & jmask
    return total


def _superset_moebius(a: list[Fraction], n: int) -> None:
    for b in range(n):
        bit = 1 << b
        for mask in range(1 << n):
            if not mask & bit:
                a[mask] -= a[mask | bit]


def _superset_zeta(a: list[Fraction], n: int) -> None:
    for b in range(n):
        bit = 1 << b
        for mask in range(1 << n):
            if not mask & bit:
                a[mask] += a[mask | bit]


def to_pseudo_probabilities(w: LatticeVector) -> LatticeVector:
    """Full-lattice transform from moments to pseudo-probabilities."""
    if w.kind != MOMENTS:
        raise LatticeError("expected a moment vector")
    dense = w.to_dense()
    _superset_moebius(dense, w.n)
    return LatticeVector.from_dense(w.n, PSEUDO_PROBABILITIES, dense)


def from_pseudo_probabilities(p: LatticeVector) -> LatticeVector:
    """Inverse transform: superset sums of the pseudo-probabilities."""
    if p.kind != PSEUDO_PROBABILITIES:
        raise LatticeError("expected a pseudo-probability vector")
    dense = p.to_dense()
    _superset_zeta(dense, p.n)
    return LatticeVector.from_dense(p.n, MOMENTS, dense)


# ---------------------------------------------------------------------------
# constraint polynomials
# ---------------------------------------------------------------------------


class ConstraintPolynomial:
    """Multilinear polynomial g(x) = sum_K g_K * prod_{i in K} x_i.

    Over 0/1 points a monomial prod_{i in K} x_i is the indicator of
    K being contained in the support, so g evaluated at the point with
    support I is the subset sum of the coefficients over K inside I.
    """

    __slots__ = ("n", "_coef")

    def __init__(self, n: int, coefficients: Union[Mapping, Iterable[tuple]]) -> None:
        if n < 0 or n > max_ground_size():
            raise LatticeError(f"ground size {n} out of range")
        self.n = n
        pairs = (
            coefficients.items()
            if isinstance(coefficients, Mapping)
            else coefficients
        )
        coef: dict[int, Fraction] = {}
        for key, value in pairs:
            mask = _mask_of(key, n)
            val = rat(value)
            if val:
                coef[mask] = val
        self._coef = coef

    @classmethod
    def linear(
        cls,
        n: int,
        weights: Mapping[int, RationalLike],
        constant: RationalLike = 0,
    ) -> "ConstraintPolynomial":
        """Build constant + sum_i weights[i] * x_i (elements are 1-based)."""
        coef: dict[int, Fraction] = {0: rat(constant)}
        for i, wi in weights.items():
            if not 1 <= i <= n:
                raise LatticeError(f"element {i} outside ground set of size {n}")
            coef[1 << (i - 1)] = rat(wi)
        return cls(n, coef)

    def coefficient(self, index: Union[SubsetIndex, int]) -> Fraction:
        return self._coef.get(_mask_of(index, self.n), Fraction(0))

    def support(self) -> list[int]:
        """Masks with nonzero coefficient, in graded order."""
        return sorted(self._coef, key=lambda m: (m.bit_count(), m))

    def value_at(self, index: Union[SubsetIndex, int]) -> Fraction:
        """g evaluated at the 0/1 point whose support is the given subset."""
        imask = _mask_of(index, self.n)
        total = Fraction(0)
        for mask, val in self._coef.items():
            if mask & ~imask == 0:
                total += val
        return total

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConstraintPolynomial):
            return NotImplemented
        return self.n == other.n and self._coef == other._coef

    def __repr__(self) -> str:
        parts = ", ".join(
            f"{SubsetIndex(m, self.n)}: {rat_str(v)}"
            for m, v in sorted(self._coef.items())
        )
        return f"ConstraintPolynomial(n={self.n}, {{{parts}}})"
