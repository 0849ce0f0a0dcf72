"""N x N square generators: ring geometry and closed-form expectations.

Rings are numbered from the inside: R_1 is the centre (one vertex for odd N,
a 2 x 2 block for even N) and R_ceil(N/2) is the outer shell of the square.
All closed forms return exact fractions.
"""

import enum
import logging
from dataclasses import dataclass
from fractions import Fraction

from avalanche import expected_avalanche_size
from intervention import cornerstones_from_table, expected_size_given_remainder, intervention_table
from lattice import DomainError, GridConfig, Vertex
from waves import Generator, decompose_avalanche

logger = logging.getLogger(__name__)

DEFAULT_ANCHOR = Vertex(2, 2)


@dataclass(frozen=True)
class SquareSpec:
    n: int
    anchor: Vertex = DEFAULT_ANCHOR

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError(f"Square side must be at least 1, got {self.n}")
        if self.anchor.row < 1 or self.anchor.col < 1:
            raise DomainError(f"Square anchor {self.anchor} must have positive coordinates")

    @property
    def ring_count(self) -> int:
        return (self.n + 1) // 2

    def at(self, i: int, j: int) -> Vertex:
        """Vertex at 0-based offset ``(i, j)`` from the anchor."""
        return self.anchor.shifted(i, j)

    def offset(self, v: Vertex) -> tuple[int, int]:
        return v.row - self.anchor.row, v.col - self.anchor.col

    def contains(self, v: Vertex) -> bool:
        i, j = self.offset(v)
        return 0 <= i < self.n and 0 <= j < self.n

    def vertices(self) -> list[Vertex]:
        return [self.at(i, j) for i in range(self.n) for j in range(self.n)]

    def fits(self, side: int) -> bool:
        return self.anchor.row + self.n - 1 <= side and self.anchor.col + self.n - 1 <= side

    def ring_of(self, v: Vertex) -> int:
        i, j = self.offset(v)
        if not self.contains(v):
            raise DomainError(f"Vertex {v} is not inside the {self.n}x{self.n} square")
        return self.ring_count - min(i, j, self.n - 1 - i, self.n - 1 - j)

    def sub_square_corners(self, k: int) -> frozenset[Vertex]:
        """Corners of the concentric sub-square made of rings R_1..R_k (empty below side 3)."""
        if not 1 <= k <= self.ring_count:
            raise DomainError(f"Ring index {k} outside 1..{self.ring_count}")
        m = self.ring_count - k
        last = self.n - 1 - m
        if last - m + 1 < 3:
            return frozenset()
        return frozenset({self.at(m, m), self.at(m, last), self.at(last, m), self.at(last, last)})

    def inward_neighbor(self, v: Vertex) -> Vertex:
        """Neighbour of an outer-ring, non-corner vertex that lies in the interior."""
        i, j = self.offset(v)
        last = self.n - 1
        if i == 0:
            return self.at(1, j)
        if i == last:
            return self.at(last - 1, j)
        if j == 0:
            return self.at(i, 1)
        if j == last:
            return self.at(i, last - 1)
        raise DomainError(f"Vertex {v} is not on the outer ring")


@dataclass(frozen=True)
class RingPartition:
    rings: tuple[frozenset[Vertex], ...]
    inner_boundary: frozenset[Vertex]
    corners: frozenset[Vertex]
    interior: frozenset[Vertex]
    outer_boundary: frozenset[Vertex]

    def ring(self, k: int) -> frozenset[Vertex]:
        return self.rings[k - 1]


def ring_partition(spec: SquareSpec, side: int | None = None) -> RingPartition:
    """Rings, boundaries, corners and interior of the square.

    ``outer_boundary`` is clipped to the ``side`` x ``side`` box when given.
    For N <= 2 the corners, inner boundary and interior are empty.
    """
    rings: list[set[Vertex]] = [set() for _ in range(spec.ring_count)]
    for v in spec.vertices():
        rings[spec.ring_of(v) - 1].add(v)

    square = set(spec.vertices())
    if spec.n >= 3:
        corners = spec.sub_square_corners(spec.ring_count)
        inner_boundary = frozenset(rings[-1] - corners)
        interior = frozenset(square - rings[-1])
    else:
        corners = inner_boundary = interior = frozenset()

    outer = set()
    for v in square:
        for d_row, d_col in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            w = v.shifted(d_row, d_col)
            if w in square or w.row < 1 or w.col < 1:
                continue
            if side is not None and (w.row > side or w.col > side):
                continue
            outer.add(w)

    return RingPartition(
        rings=tuple(frozenset(r) for r in rings),
        inner_boundary=inner_boundary,
        corners=corners,
        interior=interior,
        outer_boundary=frozenset(outer),
    )


def build_embedded_square(side: int, spec: SquareSpec, background: int = 0) -> GridConfig:
    """All-3 square on a ``side`` x ``side`` lattice, ``background`` elsewhere."""
    if not 0 <= background <= 2:
        raise DomainError(f"Background height must be in [0, 2], got {background}")
    if not spec.fits(side):
        raise DomainError(f"A {spec.n}x{spec.n} square at {spec.anchor} does not fit in L={side}")
    rows = [[background] * side for _ in range(side)]
    for v in spec.vertices():
        rows[v.row - 1][v.col - 1] = 3
    return GridConfig.from_rows(rows)


def embedded_square(n: int, background: int = 0, margin: int = 1) -> tuple[GridConfig, SquareSpec]:
    """Square of side ``n`` with ``margin`` non-critical rows/columns on every side."""
    spec = SquareSpec(n, Vertex(margin + 1, margin + 1))
    return build_embedded_square(n + 2 * margin, spec, background), spec


# ---- Closed forms ----

def _require_side(n: int, minimum: int) -> None:
    if n < minimum:
        raise DomainError(f"Closed form needs N >= {minimum}, got {n}")


def _require_ring(n: int, k: int) -> None:
    _require_side(n, 3)
    if not 2 <= k <= (n + 1) // 2:
        raise DomainError(f"Ring index k must be in 2..{(n + 1) // 2} for N={n}, got {k}")


def _removal_base(n: int) -> int:
    return 3 * n**5 + 15 * n**4 + 15 * n**3 - 15 * n**2 - 18 * n


def _square_polynomial(n: int) -> int:
    return 3 * n**4 + 15 * n**3 + 20 * n**2 - 8


def square_expected_size(n: int) -> Fraction:
    _require_side(n, 1)
    return Fraction(_square_polynomial(n), 30 * n)


def square_depth(n: int) -> int:
    _require_side(n, 1)
    return (n + 1) // 2


def removal_center(n: int) -> Fraction:
    _require_side(n, 2)
    if n % 2:
        return Fraction((n**2 - 1) * (n**2 + 5 * n + 6), 10 * n)
    return Fraction(n**5 + 5 * n**4 + 5 * n**3 - 5 * n**2 - 6 * n - 30, 10 * n**2)


def removal_ring(n: int, k: int) -> Fraction:
    _require_ring(n, k)
    if n % 2:
        extra = 10 * (4 * k**3 - 24 * k**2 + 23 * k - 6)
    else:
        extra = 20 * k * (2 * k**2 - 9 * k + 1)
    return Fraction(_removal_base(n) + extra, 30 * n**2)


def removal_corner(n: int, k: int) -> Fraction:
    _require_ring(n, k)
    if n % 2:
        extra = 10 * (4 * k**3 - 24 * k**2 + 23 * k - 3)
    else:
        extra = 10 * (4 * k**3 - 18 * k**2 + 2 * k + 3)
    return Fraction(_removal_base(n) + extra, 30 * n**2)


def _given_remainder(n: int, value: Fraction) -> Fraction:
    return value * Fraction(n**2, n**2 - 1)


def remainder_center(n: int) -> Fraction:
    """Expectation after emptying a centre vertex, given the grain lands elsewhere in the square."""
    return _given_remainder(n, removal_center(n))


def remainder_ring(n: int, k: int) -> Fraction:
    return _given_remainder(n, removal_ring(n, k))


def remainder_corner(n: int, k: int) -> Fraction:
    return _given_remainder(n, removal_corner(n, k))


def square_stability_level(n: int) -> Fraction:
    _require_side(n, 1)
    small = {1: Fraction(0), 2: Fraction(9, 16), 3: Fraction(32, 41), 4: Fraction(15, 17)}
    if n in small:
        return small[n]
    offset = 450 if n % 2 else 480
    return Fraction(_removal_base(n) - offset, n * _square_polynomial(n))


class RegionKind(enum.Enum):
    CENTER = "R_1"
    RING_WITHOUT_CORNERS = "R_k minus sub-square corners"


@dataclass(frozen=True)
class CornerstoneRegion:
    kind: RegionKind
    ring: int

    def describe(self) -> str:
        if self.kind is RegionKind.CENTER:
            return "R_1"
        return f"R_{self.ring} minus the corners of R_1..R_{self.ring}"

    def vertices(self, spec: SquareSpec) -> frozenset[Vertex]:
        ring = ring_partition(spec).ring(self.ring)
        if self.kind is RegionKind.CENTER:
            return ring
        return ring - spec.sub_square_corners(self.ring)


def cornerstone_prediction(n: int) -> CornerstoneRegion:
    _require_side(n, 1)
    if n <= 2:
        return CornerstoneRegion(RegionKind.CENTER, 1)
    if n <= 4:
        return CornerstoneRegion(RegionKind.RING_WITHOUT_CORNERS, 2)
    return CornerstoneRegion(RegionKind.RING_WITHOUT_CORNERS, 3)


def removal_closed_form(spec: SquareSpec, target: Vertex) -> Fraction:
    """Closed-form E[X(after emptying target) | Y in square] for any square vertex."""
    if spec.n == 1:
        return Fraction(0)
    k = spec.ring_of(target)
    if k == 1:
        return removal_center(spec.n)
    if target in spec.sub_square_corners(k):
        return removal_corner(spec.n, k)
    return removal_ring(spec.n, k)


@dataclass(frozen=True)
class WavePrediction:
    size: int
    active: frozenset[Vertex]


def predicted_first_wave(spec: SquareSpec, target: Vertex | None = None) -> WavePrediction:
    """First wave of the square (optionally with ``target`` emptied) in a non-critical surrounding."""
    n = spec.n
    interior = ring_partition(spec).interior
    if target is None:
        return WavePrediction(n * n, interior)
    if not spec.contains(target):
        raise DomainError(f"Target {target} is not inside the square")
    if n == 1:
        raise DomainError("Emptying the only vertex of a 1x1 square leaves no generator")
    if n == 2:
        return WavePrediction(3, frozenset())
    if spec.ring_of(target) < spec.ring_count:
        return WavePrediction(n * n, interior - {target})
    if target in spec.sub_square_corners(spec.ring_count):
        return WavePrediction(n * n - 1, interior)
    return WavePrediction(n * n - 1, interior - {spec.inward_neighbor(target)})


# ---- Verification sweep ----

VERIFY_QUANTITIES = (
    "expected_size",
    "depth",
    "depth_waves",
    "removal_center",
    "removal_ring",
    "removal_corner",
    "remainder_center",
    "remainder_ring",
    "remainder_corner",
    "stability_level",
    "cornerstones",
)


@dataclass(frozen=True)
class VerificationRow:
    n: int
    quantity: str
    k: int | None
    closed_form: Fraction | int
    algorithmic: Fraction | int
    match: bool


def vertex_class(spec: SquareSpec, v: Vertex) -> tuple[str, int]:
    """``("center" | "ring" | "corner", k)`` for a square vertex."""
    k = spec.ring_of(v)
    if k == 1:
        return "center", 1
    if v in spec.sub_square_corners(k):
        return "corner", k
    return "ring", k


_REMOVAL_FORMS = {"center": lambda n, k: removal_center(n), "ring": removal_ring, "corner": removal_corner}
_REMAINDER_FORMS = {"center": lambda n, k: remainder_center(n), "ring": remainder_ring, "corner": remainder_corner}


def verify_square(n: int, background: int = 0, corrupt: str | None = None) -> list[VerificationRow]:
    """Every closed form for the N x N square against the algorithmic pipeline.

    Rows come out in a fixed order. ``corrupt`` names one quantity whose closed
    form is shifted by one, which must surface as a mismatch.
    """
    if corrupt is not None and corrupt not in VERIFY_QUANTITIES:
        raise DomainError(f"Unknown quantity {corrupt!r}")

    rows: list[VerificationRow] = []

    def add(quantity: str, k: int | None, closed: Fraction | int, algorithmic: Fraction | int, ok: bool = True) -> None:
        if quantity == corrupt:
            closed += 1
        rows.append(VerificationRow(n, quantity, k, closed, algorithmic, ok and closed == algorithmic))

    cfg, spec = embedded_square(n, background)
    generator = Generator(frozenset(spec.vertices()))
    report = expected_avalanche_size(cfg, generator)
    add("expected_size", None, square_expected_size(n), report.expected_size)
    add("depth", None, square_depth(n), report.depth)
    add("depth_waves", None, square_depth(n), max(len(decompose_avalanche(cfg, v)) for v in spec.vertices()))

    table = intervention_table(cfg, generator)
    by_class: dict[tuple[str, int], list[Fraction]] = {}
    representative: dict[tuple[str, int], Vertex] = {}
    if n >= 2:
        for row in table:
            cls = vertex_class(spec, row.target)
            by_class.setdefault(cls, []).append(row.expected_size_after)
            representative.setdefault(cls, row.target)

    order = {"center": 0, "ring": 1, "corner": 2}
    classes = sorted(by_class, key=lambda c: (order[c[0]], c[1]))
    for kind, k in classes:
        values = by_class[kind, k]
        closed = _REMOVAL_FORMS[kind](n, k)
        add(f"removal_{kind}", None if kind == "center" else k, closed, values[0], all(v == closed for v in values))
    for kind, k in classes:
        algorithmic = expected_size_given_remainder(cfg, generator, representative[kind, k])
        add(f"remainder_{kind}", None if kind == "center" else k, _REMAINDER_FORMS[kind](n, k), algorithmic)

    cornerstones = cornerstones_from_table(generator, table)
    add("stability_level", None, square_stability_level(n), cornerstones.stability_level)
    predicted = cornerstone_prediction(n).vertices(spec)
    add("cornerstones", None, len(predicted), len(cornerstones.cornerstones), predicted == cornerstones.cornerstones)

    mismatches = sum(not r.match for r in rows)
    logger.debug("Square N=%d (background %d): %d rows, %d mismatches", n, background, len(rows), mismatches)
    return rows
