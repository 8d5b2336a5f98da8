"""
Oriented link diagrams.

Every crossing stores its four arc labels counterclockwise. The first strand
runs slots[0] -> slots[2], the second runs slots[3] -> slots[1], so slots 0
and 3 are incoming and slots 1 and 2 are outgoing. The crossing kind says
which strand passes under: POSITIVE means the first strand is under,
NEGATIVE means it is over, SINGULAR marks a double point.

Includes: PD-code and braid parsers, braid closure, the crossing operations
used by skein recursion (switch, smoothings, singularization, resolution),
Reidemeister I/II simplification and a canonical encoding for memo keys.
"""

import itertools
import logging
import re
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from algebra import DiagramParseError, UnsupportedInputError

logger = logging.getLogger(__name__)

Slot = Tuple[int, int]  # (crossing index, position)

IN_POSITIONS = (0, 3)
OUT_POSITIONS = (1, 2)


class CrossingKind(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    SINGULAR = "singular"

    def flipped(self) -> "CrossingKind":
        if self is CrossingKind.POSITIVE:
            return CrossingKind.NEGATIVE
        if self is CrossingKind.NEGATIVE:
            return CrossingKind.POSITIVE
        return self


@dataclass(frozen=True)
class Crossing:
    slots: Tuple[int, int, int, int]
    kind: CrossingKind

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(int(label) for label in self.slots))
        if len(self.slots) != 4:
            raise UnsupportedInputError("a crossing has exactly four slots")

    @property
    def sign(self) -> int:
        if self.kind is CrossingKind.SINGULAR:
            raise UnsupportedInputError("a singular crossing has no sign")
        return 1 if self.kind is CrossingKind.POSITIVE else -1

    def is_under(self, position: int) -> bool:
        """True when the strand through ``position`` passes under (never for double points)."""
        if self.kind is CrossingKind.SINGULAR:
            return False
        return (position in (0, 2)) == (self.kind is CrossingKind.POSITIVE)

    def with_kind(self, kind: CrossingKind) -> "Crossing":
        return Crossing(self.slots, kind)

    def relabeled(self, mapping: Dict[int, int]) -> "Crossing":
        return Crossing(tuple(mapping.get(label, label) for label in self.slots), self.kind)


def _arc_table(crossings: Sequence[Crossing]) -> Dict[int, Tuple[Slot, Slot]]:
    """label -> (slot where the arc starts, slot where it ends)."""
    table: Dict[int, List[Optional[Slot]]] = {}
    for ci, crossing in enumerate(crossings):
        for pos, label in enumerate(crossing.slots):
            entry = table.setdefault(label, [None, None])
            index = 1 if pos in IN_POSITIONS else 0
            if entry[index] is not None:
                role = "incoming" if index else "outgoing"
                raise UnsupportedInputError(f"arc {label} is {role} at two crossings")
            entry[index] = (ci, pos)
    for label, (start, end) in table.items():
        if start is None or end is None:
            raise UnsupportedInputError(f"arc {label} is not closed up")
    return {label: (start, end) for label, (start, end) in table.items()}


@dataclass(frozen=True)
class LinkDiagram:
    """
    A closed, oriented link diagram: crossings plus a count of crossingless loops.

    Diagrams are immutable; every operation below returns a new diagram.
    """
    crossings: Tuple[Crossing, ...] = ()
    loops: int = 0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "crossings", tuple(self.crossings))
        if self.loops < 0:
            raise UnsupportedInputError("loop count must be non-negative")
        # validates the orientation bookkeeping eagerly
        self.__dict__["arcs"] = _arc_table(self.crossings)

    @cached_property
    def arcs(self) -> Dict[int, Tuple[Slot, Slot]]:
        return _arc_table(self.crossings)

    @property
    def crossing_count(self) -> int:
        return len(self.crossings)

    @property
    def singular_indices(self) -> List[int]:
        return [i for i, c in enumerate(self.crossings) if c.kind is CrossingKind.SINGULAR]

    @property
    def is_singular(self) -> bool:
        return bool(self.singular_indices)

    @cached_property
    def component_labels(self) -> List[List[int]]:
        """Arc labels of each crossed component in traversal order, components ordered by min label."""
        seen = set()
        out = []
        for label in sorted(self.arcs):
            if label in seen:
                continue
            comp = []
            cur = label
            while cur not in seen:
                seen.add(cur)
                comp.append(cur)
                ci, pos = self.arcs[cur][1]
                cur = self.crossings[ci].slots[(pos + 2) % 4]
            out.append(comp)
        return out

    def __str__(self) -> str:
        return serialize_pd(self)


@dataclass(frozen=True)
class BraidWord:
    strands: int
    letters: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(x) for x in self.letters))
        if self.strands < 1:
            raise UnsupportedInputError("a braid needs at least one strand")
        for letter in self.letters:
            if letter == 0 or abs(letter) >= self.strands:
                raise UnsupportedInputError(
                    f"generator {letter} is not valid on {self.strands} strands"
                )


# ============================================================================
# BASIC QUERIES
# ============================================================================

def components(d: LinkDiagram) -> int:
    return len(d.component_labels) + d.loops


def writhe(d: LinkDiagram) -> int:
    if d.is_singular:
        raise UnsupportedInputError("writhe is undefined on a diagram with double points")
    return sum(c.sign for c in d.crossings)


def crossing_count(d: LinkDiagram) -> int:
    return d.crossing_count


def mirror(d: LinkDiagram) -> LinkDiagram:
    return LinkDiagram(
        tuple(c.with_kind(c.kind.flipped()) for c in d.crossings),
        d.loops,
        name=f"{d.name}*" if d.name else "",
    )


# ============================================================================
# CROSSING OPERATIONS
# ============================================================================

def _check_index(d: LinkDiagram, idx: int) -> Crossing:
    if not 0 <= idx < len(d.crossings):
        raise UnsupportedInputError(f"crossing index {idx} out of range 0..{len(d.crossings) - 1}")
    return d.crossings[idx]


def _without(crossings: Sequence[Crossing], *indices: int) -> Tuple[Crossing, ...]:
    drop = set(indices)
    return tuple(c for i, c in enumerate(crossings) if i not in drop)


def _join(crossings: Sequence[Crossing], loops: int, pairs: Iterable[Tuple[int, int]]) -> Tuple[Tuple[Crossing, ...], int]:
    """Identify arc labels pairwise; a pair that closes a cycle adds a free loop."""
    parent: Dict[int, int] = {}

    def find(x: int) -> int:
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra == rb:
            loops += 1
        else:
            parent[max(ra, rb)] = min(ra, rb)
    mapping = {label: find(label) for label in list(parent)}
    return tuple(c.relabeled(mapping) for c in crossings), loops


def set_crossing_kind(d: LinkDiagram, idx: int, kind: CrossingKind) -> LinkDiagram:
    _check_index(d, idx)
    crossings = list(d.crossings)
    crossings[idx] = crossings[idx].with_kind(kind)
    return LinkDiagram(tuple(crossings), d.loops, name=d.name)


def switch_crossing(d: LinkDiagram, idx: int) -> LinkDiagram:
    c = _check_index(d, idx)
    if c.kind is CrossingKind.SINGULAR:
        raise UnsupportedInputError("cannot switch a double point")
    return set_crossing_kind(d, idx, c.kind.flipped())


def make_singular(d: LinkDiagram, idx: int) -> LinkDiagram:
    return set_crossing_kind(d, idx, CrossingKind.SINGULAR)


def smooth_oriented(d: LinkDiagram, idx: int) -> LinkDiagram:
    """The orientation-respecting smoothing L_0 at crossing idx."""
    c = _check_index(d, idx)
    if c.kind is CrossingKind.SINGULAR:
        raise UnsupportedInputError("oriented smoothing of a double point is not defined")
    p0, p1, p2, p3 = c.slots
    rest, loops = _join(_without(d.crossings, idx), d.loops, [(p0, p1), (p3, p2)])
    return LinkDiagram(rest, loops)


def smooth_unoriented(d: LinkDiagram, idx: int, mode: str) -> LinkDiagram:
    """
    Smoothing of the unoriented shadow. ``zero`` joins like the oriented
    smoothing, ``infinity`` joins the other pair of corners; the result is
    re-oriented along each new component.
    """
    c = _check_index(d, idx)
    if c.kind is CrossingKind.SINGULAR:
        raise UnsupportedInputError("smoothing a double point is not defined")
    p0, p1, p2, p3 = c.slots
    if mode == "zero":
        pairs = [(p0, p1), (p3, p2)]
    elif mode == "infinity":
        pairs = [(p0, p3), (p1, p2)]
    else:
        raise UnsupportedInputError(f"unknown smoothing mode {mode!r}")
    rest, loops = _join(_without(d.crossings, idx), d.loops, pairs)
    return LinkDiagram(_reorient(rest), loops)


def resolve_singulars(d: LinkDiagram) -> List[Tuple[int, LinkDiagram]]:
    """All 2^s resolutions of the double points, signed by the parity of negative choices."""
    singular = d.singular_indices
    out = []
    for choice in itertools.product((CrossingKind.POSITIVE, CrossingKind.NEGATIVE), repeat=len(singular)):
        crossings = list(d.crossings)
        sign = 1
        for idx, kind in zip(singular, choice):
            crossings[idx] = crossings[idx].with_kind(kind)
            if kind is CrossingKind.NEGATIVE:
                sign = -sign
        out.append((sign, LinkDiagram(tuple(crossings), d.loops, name=d.name)))
    return out


# ============================================================================
# ORIENTATION
# ============================================================================

def _occurrences(crossings: Sequence[Crossing]) -> Dict[int, List[Slot]]:
    occ: Dict[int, List[Slot]] = {}
    for ci, c in enumerate(crossings):
        for pos, label in enumerate(c.slots):
            occ.setdefault(label, []).append((ci, pos))
    return occ


class _OrientationConflict(Exception):
    def __init__(self, crossing_index: int):
        super().__init__(crossing_index)
        self.crossing_index = crossing_index


def _trace(crossings, occ, entry: Dict[Tuple[int, int], int], start: Slot, first_forward_only: bool) -> None:
    """Walk one component from ``start``, recording the entry position of every strand met."""
    cur = start
    while True:
        ci, pos = cur
        strand = 0 if pos in (0, 2) else 1
        if first_forward_only and strand == 0 and pos != 0:
            raise _OrientationConflict(ci)
        entry[(ci, strand)] = pos
        exit_pos = (pos + 2) % 4
        label = crossings[ci].slots[exit_pos]
        a, b = occ[label]
        cur = b if a == (ci, exit_pos) else a
        if cur == start:
            return


def _renormalize(crossings: Sequence[Crossing], entry: Dict[Tuple[int, int], int]) -> Tuple[Crossing, ...]:
    out = []
    for ci, c in enumerate(crossings):
        p0, p1, p2, p3 = c.slots
        first_forward = entry[(ci, 0)] == 0
        second_forward = entry[(ci, 1)] == 3
        if first_forward and second_forward:
            out.append(c)
        elif second_forward:
            out.append(Crossing((p3, p0, p1, p2), c.kind.flipped()))
        elif first_forward:
            out.append(Crossing((p1, p2, p3, p0), c.kind.flipped()))
        else:
            out.append(Crossing((p2, p3, p0, p1), c.kind))
    return tuple(out)


def _reorient(crossings: Sequence[Crossing]) -> Tuple[Crossing, ...]:
    """Give every component a consistent direction, keeping existing directions where they already agree."""
    occ = _occurrences(crossings)
    entry: Dict[Tuple[int, int], int] = {}
    for ci in range(len(crossings)):
        if (ci, 0) not in entry:
            _trace(crossings, occ, entry, (ci, 0), False)
        if (ci, 1) not in entry:
            _trace(crossings, occ, entry, (ci, 3), False)
    return _renormalize(crossings, entry)


# ============================================================================
# REIDEMEISTER I / II SIMPLIFICATION
# ============================================================================

def _reduce_once(crossings: Tuple[Crossing, ...], loops: int) -> Optional[Tuple[Tuple[Crossing, ...], int]]:
    for ci, c in enumerate(crossings):
        if c.kind is CrossingKind.SINGULAR:
            continue
        p0, p1, p2, p3 = c.slots
        if p0 == p1 or p2 == p3:
            rest, new_loops = _join(_without(crossings, ci), loops, [(p0, p1), (p3, p2)])
            return rest, new_loops - 1

    occ = _occurrences(crossings)
    for c1, first in enumerate(crossings):
        if first.kind is CrossingKind.SINGULAR:
            continue
        for i in range(4):
            x = first.slots[i]
            c2, j = next(s for s in occ[x] if s != (c1, i))
            if c2 == c1 or crossings[c2].kind is CrossingKind.SINGULAR:
                continue
            second = crossings[c2]
            y = first.slots[(i + 1) % 4]
            if (c2, (j - 1) % 4) not in occ[y]:
                continue
            if first.is_under(i) != second.is_under(j):
                continue
            pairs = [
                (first.slots[(i + 2) % 4], x),
                (x, second.slots[(j + 2) % 4]),
                (first.slots[(i + 3) % 4], y),
                (y, second.slots[(j + 1) % 4]),
            ]
            return _join(_without(crossings, c1, c2), loops, pairs)
    return None


def simplify(d: LinkDiagram) -> LinkDiagram:
    """Remove kinks and bigons (Reidemeister I and II) until none are left; double points are never touched."""
    crossings, loops = d.crossings, d.loops
    removed = 0
    while True:
        step = _reduce_once(crossings, loops)
        if step is None:
            break
        removed += len(crossings) - len(step[0])
        crossings, loops = step
    if not removed:
        return d
    logger.debug(f"simplify removed {removed} crossings ({len(crossings)} left)")
    return LinkDiagram(crossings, loops, name=d.name)


def first_descending_violation(d: LinkDiagram) -> Optional[int]:
    """
    Index of the first crossing met as an under-crossing before being met as
    an over-crossing, walking components in order of their smallest arc
    label from that label. None means the diagram is descending (an unlink).
    """
    seen = set()
    for comp in d.component_labels:
        start = comp[0]
        cur = start
        while True:
            ci, pos = d.arcs[cur][1]
            crossing = d.crossings[ci]
            if ci not in seen:
                seen.add(ci)
                if crossing.is_under(pos):
                    return ci
            cur = crossing.slots[(pos + 2) % 4]
            if cur == start:
                break
    return None


# ============================================================================
# CANONICAL ENCODING
# ============================================================================

def _connected_pieces(d: LinkDiagram) -> List[List[int]]:
    parent = {label: label for label in d.arcs}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in d.crossings:
        root = find(c.slots[0])
        for label in c.slots[1:]:
            other = find(label)
            if other != root:
                parent[other] = root
    groups: Dict[int, List[int]] = {}
    for label in sorted(d.arcs):
        groups.setdefault(find(label), []).append(label)
    return list(groups.values())


def _traversal_code(d: LinkDiagram, start: int) -> Tuple:
    order: Dict[int, int] = {}
    queue = deque([start])
    while queue:
        label = queue.popleft()
        while label not in order:
            order[label] = len(order)
            ci, pos = d.arcs[label][1]
            crossing = d.crossings[ci]
            queue.append(crossing.slots[3] if pos == 0 else crossing.slots[0])
            label = crossing.slots[(pos + 2) % 4]
    cells = sorted(
        (tuple(order[label] for label in c.slots), c.kind.value)
        for c in d.crossings
        if c.slots[0] in order
    )
    return tuple(cells)


def canonical_key(d: LinkDiagram) -> Tuple:
    """Relabeling-invariant encoding used for memo keys and diagram equality."""
    codes = sorted(
        min(_traversal_code(d, start) for start in piece)
        for piece in _connected_pieces(d)
    )
    return d.loops, tuple(codes)


def same_diagram(a: LinkDiagram, b: LinkDiagram) -> bool:
    return canonical_key(a) == canonical_key(b)


# ============================================================================
# PD CODES
# ============================================================================

_TOKEN = re.compile(r"\s*(?:(?P<int>-?\d+)|(?P<word>[A-Za-z]+)|(?P<sym>[\[\](),;=]))")


class _PDReader:
    """Recursive-descent reader for ``PD[X(a,b,c,d), S(...), ...]; loops=k``."""

    def __init__(self, text: str):
        self.text = text
        self.tokens: List[Tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            match = _TOKEN.match(text, pos)
            if match is None or match.end() == pos:
                bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
                raise DiagramParseError(f"unexpected character {text[bad]!r}", bad)
            kind = match.lastgroup
            self.tokens.append((kind, match.group(kind), match.start(kind)))
            pos = match.end()
        self.index = 0

    def _peek(self) -> Optional[Tuple[str, str, int]]:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def _position(self) -> int:
        token = self._peek()
        return token[2] if token else len(self.text)

    def _expect(self, value: str, hint: str = "") -> int:
        token = self._peek()
        if token is None or token[1] != value:
            found = token[1] if token else "end of input"
            raise DiagramParseError(f"expected {value!r}, found {found!r}{hint}", self._position())
        self.index += 1
        return token[2]

    def _integer(self) -> int:
        token = self._peek()
        if token is None or token[0] != "int":
            found = token[1] if token else "end of input"
            raise DiagramParseError(f"expected an arc label, found {found!r}", self._position())
        self.index += 1
        value = int(token[1])
        if value < 0:
            raise DiagramParseError(f"arc labels must be non-negative, got {value}", token[2])
        return value

    def read(self) -> Tuple[List[Tuple[str, Tuple[int, int, int, int], int]], int]:
        self._expect("PD")
        self._expect("[")
        cells = []
        token = self._peek()
        if token is not None and token[1] != "]":
            while True:
                cells.append(self._cell())
                token = self._peek()
                if token is not None and token[1] == ",":
                    self.index += 1
                    continue
                break
        self._expect("]")
        loops = 0
        if self._peek() is not None:
            self._expect(";")
            self._expect("loops")
            self._expect("=")
            loops = self._integer()
        if self._peek() is not None:
            raise DiagramParseError(f"unexpected trailing {self._peek()[1]!r}", self._position())
        return cells, loops

    def _cell(self):
        token = self._peek()
        if token is None or token[1] not in ("X", "S"):
            found = token[1] if token else "end of input"
            raise DiagramParseError(f"expected 'X' or 'S', found {found!r}", self._position())
        self.index += 1
        self._expect("(")
        labels = [self._integer()]
        for _ in range(3):
            self._expect(",", " (a crossing lists four arc labels)")
            labels.append(self._integer())
        self._expect(")", " (a crossing lists four arc labels)")
        return token[1], tuple(labels), token[2]


def parse_pd(text: str, name: str = "") -> LinkDiagram:
    """
    Parse a PD code. Each X lists its arcs counterclockwise from the incoming
    under-strand; the direction of each over-strand is recovered by tracing
    components. Components that only pass over are oriented by the usual
    consecutive-label rule.
    """
    cells, loops = _PDReader(text).read()
    raw = tuple(
        Crossing(labels, CrossingKind.POSITIVE if kind == "X" else CrossingKind.SINGULAR)
        for kind, labels, _ in cells
    )

    occ = _occurrences(raw)
    for label, places in occ.items():
        if len(places) != 2:
            where = cells[places[0][0]][2]
            raise DiagramParseError(f"arc {label} appears {len(places)} times, expected 2", where)

    entry: Dict[Tuple[int, int], int] = {}
    try:
        for ci in range(len(raw)):
            if (ci, 0) not in entry:
                _trace(raw, occ, entry, (ci, 0), True)
        for ci, c in enumerate(raw):
            if (ci, 1) not in entry:
                b, d = c.slots[1], c.slots[3]
                start = 3 if (b - d == 1 or d - b > 1) else 1
                _trace(raw, occ, entry, (ci, start), True)
    except _OrientationConflict as e:
        raise DiagramParseError("orientation inconsistency: an under-strand enters from its outgoing end", cells[e.crossing_index][2])

    diagram = LinkDiagram(_renormalize(raw, entry), loops, name=name)
    logger.debug(f"Parsed PD code: {len(raw)} crossings, {components(diagram)} components")
    return diagram


def serialize_pd(d: LinkDiagram) -> str:
    """PD text with arcs renumbered consecutively along each component."""
    mapping: Dict[int, int] = {}
    for comp in d.component_labels:
        for label in comp:
            mapping[label] = len(mapping) + 1
    cells = []
    for c in d.crossings:
        p0, p1, p2, p3 = (mapping[label] for label in c.slots)
        if c.kind is CrossingKind.POSITIVE:
            cells.append(f"X({p0},{p1},{p2},{p3})")
        elif c.kind is CrossingKind.NEGATIVE:
            cells.append(f"X({p3},{p0},{p1},{p2})")
        else:
            cells.append(f"S({p0},{p1},{p2},{p3})")
    text = f"PD[{', '.join(cells)}]"
    if d.loops:
        text += f"; loops={d.loops}"
    return text


# ============================================================================
# BRAIDS
# ============================================================================

_BRAID = re.compile(r"^\s*(?:braid\s+)?(\d+)\s*:(.*)$", re.IGNORECASE | re.DOTALL)


def parse_braid(text: str) -> BraidWord:
    """Parse ``braid n: w1 w2 ...`` (the ``braid`` keyword is optional)."""
    match = _BRAID.match(text)
    if match is None:
        raise DiagramParseError("expected 'braid <strands>: <letters>'", 0)
    strands = int(match.group(1))
    if strands < 1:
        raise DiagramParseError("a braid needs at least one strand", match.start(1))
    letters = []
    for token in re.finditer(r"[^\s,]+", match.group(2)):
        where = match.start(2) + token.start()
        try:
            letter = int(token.group())
        except ValueError:
            raise DiagramParseError(f"not a braid generator: {token.group()!r}", where)
        if letter == 0 or abs(letter) >= strands:
            raise DiagramParseError(f"generator {letter} is not valid on {strands} strands", where)
        letters.append(letter)
    return BraidWord(strands, tuple(letters))


def from_braid(b: BraidWord, name: str = "") -> LinkDiagram:
    """Closure of a braid read bottom to top; sigma_i crosses strand i over strand i+1."""
    cur = list(range(1, b.strands + 1))
    next_label = b.strands + 1
    crossings = []
    for letter in b.letters:
        i = abs(letter) - 1
        left, right = cur[i], cur[i + 1]
        new_left, new_right = next_label, next_label + 1
        next_label += 2
        kind = CrossingKind.POSITIVE if letter > 0 else CrossingKind.NEGATIVE
        crossings.append(Crossing((right, new_right, new_left, left), kind))
        cur[i], cur[i + 1] = new_left, new_right

    loops = 0
    mapping = {}
    for position, label in enumerate(cur, start=1):
        if label == position:
            loops += 1
        else:
            mapping[label] = position
    return LinkDiagram(tuple(c.relabeled(mapping) for c in crossings), loops, name=name)


def parse_link(text: str, name: str = "") -> LinkDiagram:
    """Accept either a PD code or a braid word."""
    stripped = text.strip()
    if stripped.upper().startswith("PD"):
        return parse_pd(stripped, name=name)
    return from_braid(parse_braid(stripped), name=name)
