"""Words in free groups, ball enumeration and limit-set sampling.

A word is a tuple of nonzero integers; ``i`` stands for the ``i``-th
generator (1-based) and ``-i`` for its inverse. Words are compared in the
letter order ``1 < -1 < 2 < -2 < ...``, shorter words first.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DomainError, EmptySampleError, ResourceError
from .hyperbolic import (
    BoundaryPoint,
    Kind,
    MoebiusMap,
    TWO_PI,
    classify,
    displacement,
    fixed_points,
)

Word = tuple

DEFAULT_CAP = 2_000_000


# ---------------------------------------------------------------- words

def letter_key(letter: int) -> tuple:
    return (abs(letter), 0 if letter > 0 else 1)


def word_key(word: Word) -> tuple:
    """Sort key: length first, then letterwise in the order 1, -1, 2, -2, ..."""
    return (len(word), tuple(letter_key(x) for x in word))


def alphabet(rank: int) -> list:
    out = []
    for i in range(1, rank + 1):
        out += [i, -i]
    return out


def reduce_word(word: Iterable[int]) -> Word:
    """Free reduction (cancel adjacent ``x, -x`` pairs)."""
    stack = []
    for x in word:
        x = int(x)
        if x == 0:
            raise DomainError("0 is not a generator index")
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


def is_reduced(word: Sequence[int]) -> bool:
    return all(a != -b for a, b in zip(word, word[1:])) and 0 not in word


def inverse_word(word: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(word))


def multiply_words(*words: Sequence[int]) -> Word:
    out = ()
    for w in words:
        out = reduce_word(out + tuple(w))
    return out


def power_word(word: Sequence[int], n: int) -> Word:
    base = tuple(word) if n >= 0 else inverse_word(word)
    return reduce_word(base * abs(n))


def cyclic_core(word: Sequence[int]) -> tuple:
    """Split a reduced word as ``u * core * u^-1`` with ``core`` cyclically reduced.

    Returns ``(u, core)``.
    """
    w = reduce_word(word)
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return w[:i], w[i:j + 1]


def primitive_root(word: Sequence[int]) -> tuple:
    """Write a cyclically reduced word as ``root^m`` with ``m`` maximal.

    Returns ``(root, m)``.
    """
    w = tuple(word)
    n = len(w)
    for p in range(1, n + 1):
        if n % p == 0 and w[:p] * (n // p) == w:
            return w[:p], n // p
    return w, 1


def rotations(word: Sequence[int]) -> list:
    w = tuple(word)
    return [w[i:] + w[:i] for i in range(max(len(w), 1))]


def word_to_str(word: Sequence[int]) -> str:
    """Compact spelling: ``a, b, c, d`` for generators and capitals for inverses.

    The empty word is ``e``; words using a generator beyond the fourth are
    spelled as dotted integers such as ``1.-5.2``.
    """
    if not word:
        return "e"
    if max(abs(x) for x in word) <= 4:
        return "".join(chr(ord("a") + x - 1) if x > 0 else chr(ord("A") - x - 1) for x in word)
    return ".".join(str(x) for x in word)


def parse_word(spec) -> Word:
    """Inverse of :func:`word_to_str`; also accepts integer sequences."""
    if isinstance(spec, str):
        s = spec.strip()
        if s in ("", "e"):
            return ()
        if "." in s or s.lstrip("-").isdigit():
            return reduce_word(int(t) for t in s.split("."))
        out = []
        for ch in s:
            if "a" <= ch <= "z":
                out.append(ord(ch) - ord("a") + 1)
            elif "A" <= ch <= "Z":
                out.append(-(ord(ch) - ord("A") + 1))
            else:
                raise DomainError(f"cannot parse word {spec!r}")
        return reduce_word(out)
    return reduce_word(spec)


def random_reduced_word(rng: np.random.Generator, rank: int, length: int) -> Word:
    letters = alphabet(rank)
    out = []
    while len(out) < length:
        x = letters[rng.integers(len(letters))]
        if out and out[-1] == -x:
            continue
        out.append(x)
    return tuple(out)


def ball_size(rank: int, L: int) -> int:
    """Number of nontrivial reduced words of length <= L."""
    return sum(2 * rank * (2 * rank - 1) ** (n - 1) for n in range(1, L + 1))


# ---------------------------------------------------------------- elements

def _as_moebius(g) -> MoebiusMap:
    return g if isinstance(g, MoebiusMap) else MoebiusMap.from_matrix(g)


def evaluate_word(generators: Sequence, word: Sequence[int]) -> MoebiusMap:
    """Left-to-right product of generator lifts."""
    gens = [_as_moebius(g) for g in generators]
    m = np.eye(2)
    for x in word:
        if not 1 <= abs(x) <= len(gens):
            raise DomainError(f"generator index {x} out of range")
        g = gens[abs(x) - 1]
        m = m @ (g.lift if x > 0 else g.inverse().lift)
    return MoebiusMap.from_matrix(m)


@dataclass(frozen=True)
class GroupElement:
    word: Word
    sl2: MoebiusMap
    displacement: float
    kind: Kind

    @classmethod
    def from_map(cls, word: Word, m: MoebiusMap) -> "GroupElement":
        return cls(tuple(word), m, displacement(m), classify(m))

    @property
    def length(self) -> int:
        return len(self.word)

    @property
    def trace(self) -> float:
        return self.sl2.trace

    @property
    def translation_length(self) -> float:
        if self.kind is not Kind.HYPERBOLIC:
            return 0.0
        return 2.0 * math.acosh(abs(self.trace) / 2.0)

    @property
    def name(self) -> str:
        return word_to_str(self.word)

    def inverse(self) -> "GroupElement":
        return GroupElement.from_map(inverse_word(self.word), self.sl2.inverse())


def enumerate_ball(generators: Sequence, L: int, cap: int = DEFAULT_CAP,
                   include_identity: bool = False, dedup: bool = False,
                   dedup_tol: float = 1e-8) -> list:
    """All nontrivial reduced words of length at most ``L``, evaluated.

    Words are produced layer by layer, each layer in lexicographic order, and
    every word is evaluated with one 2x2 product from its parent prefix.

    Parameters
    ----------
    generators : sequence of MoebiusMap or 2x2 arrays
        Generator lifts.
    L : int
        Maximal word length.
    cap : int
        Maximal number of elements; exceeding it raises :class:`ResourceError`.
    include_identity : bool
        Prepend the empty word.
    dedup : bool
        Drop words whose matrix agrees up to sign (within ``dedup_tol``) with
        an earlier word, for presentations that are not free.
    """
    gens = [_as_moebius(g) for g in generators]
    if not gens:
        raise DomainError("need at least one generator")
    if L < 1:
        raise DomainError("word length L must be at least 1")
    r = len(gens)
    total = ball_size(r, L)
    if total > cap:
        raise ResourceError(f"ball of radius {L} has {total} elements, cap is {cap}", cap=cap, requested=total)
    letters = alphabet(r)
    lifts = {}
    for i, g in enumerate(gens, start=1):
        lifts[i] = g.lift
        lifts[-i] = g.inverse().lift

    out = []
    seen = set()

    def keep(word, m):
        if dedup:
            n = m.matrix
            key = tuple(np.round(n.ravel() / dedup_tol).astype(np.int64))
            if key in seen:
                return False
            seen.add(key)
        out.append(GroupElement.from_map(word, m))
        return True

    identity = MoebiusMap.identity()
    if include_identity or dedup:
        keep((), identity)
        if not include_identity:
            out.pop()
    layer = [((), np.eye(2))]
    for _ in range(L):
        nxt = []
        for word, mat in layer:
            for x in letters:
                if word and word[-1] == -x:
                    continue
                prod = mat @ lifts[x]
                m = MoebiusMap.from_matrix(prod)
                w = word + (x,)
                if keep(w, m):
                    nxt.append((w, m.lift))
        layer = nxt
    return out


# ---------------------------------------------------------------- limit sets

@dataclass(frozen=True)
class LimitPoint:
    point: BoundaryPoint
    witness: GroupElement
    parabolic: bool = False

    @property
    def angle(self) -> float:
        return self.point.angle


@dataclass(frozen=True)
class LimitSample:
    """Angle-sorted boundary points, each the attracting (or parabolic) fixed point of its witness."""

    points: tuple
    delta: float

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    @property
    def angles(self) -> np.ndarray:
        return np.array([p.angle for p in self.points])

    def parabolic_points(self) -> list:
        return [p for p in self.points if p.parabolic]

    def conical_points(self) -> list:
        return [p for p in self.points if not p.parabolic]

    def nearest(self, x: BoundaryPoint) -> LimitPoint:
        ang = self.angles
        delta = np.abs(ang - x.angle) % TWO_PI
        delta = np.minimum(delta, TWO_PI - delta)
        return self.points[int(np.argmin(delta))]


def _candidates(ball: Iterable[GroupElement]) -> list:
    cands = []
    for g in ball:
        if g.kind is Kind.HYPERBOLIC:
            attr, rep = fixed_points(g.sl2)
            cands.append(LimitPoint(attr, g, False))
            cands.append(LimitPoint(rep, g.inverse(), False))
        elif g.kind is Kind.PARABOLIC:
            (p,) = fixed_points(g.sl2)
            cands.append(LimitPoint(p, g, True))
    return cands


def sample_limit_set(ball: Sequence[GroupElement], delta_angle: float,
                     max_points: Optional[int] = None) -> LimitSample:
    """Fixed points of the hyperbolic and parabolic elements of a ball.

    Candidates are visited shortest witness first (parabolic witnesses win
    ties) and a candidate is dropped when it lies within ``delta_angle`` of a
    point already kept, so every cluster keeps its shortest witness. At most
    ``max_points`` points are kept.
    """
    cands = _candidates(ball)
    if not cands:
        raise EmptySampleError("the ball contains no hyperbolic or parabolic element")
    cands.sort(key=lambda c: (len(c.witness.word), 0 if c.parabolic else 1, word_key(c.witness.word),
                              c.angle))
    kept_angles: list = []
    kept: list = []
    for c in cands:
        if max_points is not None and len(kept) >= max_points:
            break
        a = c.angle
        if kept_angles and _circle_gap(kept_angles, a) <= delta_angle:
            continue
        pos = bisect.bisect_left(kept_angles, a)
        kept_angles.insert(pos, a)
        kept.insert(pos, c)
    return LimitSample(tuple(kept), float(delta_angle))


def _circle_gap(sorted_angles: list, a: float) -> float:
    """Circular distance from ``a`` to the nearest angle of a sorted list."""
    n = len(sorted_angles)
    pos = bisect.bisect_left(sorted_angles, a)
    best = math.inf
    for j in (pos - 1, pos % n):
        dd = abs(sorted_angles[j] - a) % TWO_PI
        best = min(best, dd, TWO_PI - dd)
    return best


def _is_power_of_core(core: Word, base: Word) -> bool:
    """True if ``core`` is a cyclic rotation of ``base^n`` or ``base^-n`` for some n >= 1."""
    if not base or not core or len(core) % len(base):
        return False
    n = len(core) // len(base)
    rot = set(rotations(core))
    return (base * n) in rot or (inverse_word(base) * n) in rot


def peripheral_elements(ball: Iterable[GroupElement], declared: Sequence[Sequence[int]] = ()) -> list:
    """Parabolic elements plus words conjugate into a declared peripheral cyclic subgroup."""
    cores = [cyclic_core(w)[1] for w in declared]
    cores = [c for c in cores if c]
    out = []
    for g in ball:
        if g.kind is Kind.PARABOLIC:
            out.append(g)
            continue
        core = cyclic_core(g.word)[1]
        if any(_is_power_of_core(core, c) for c in cores):
            out.append(g)
    return out
