"""Weight algebras.

A semiring instance is a stateless object exposing ``zero``, ``one``,
``plus`` and ``times``.  Rings add ``minus``; division rings add
``inverse``.  Capability is expressed through the class hierarchy, so an
algorithm that needs subtraction checks ``isinstance(sr, Ring)`` once, up
front, instead of failing halfway through a run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .errors import CapabilityError, ParseError

__all__ = [
    "Semiring",
    "Ring",
    "DivisionRing",
    "BOOLEAN",
    "TROPICAL_MIN",
    "TROPICAL_MAX",
    "REAL",
    "LOG",
    "COUNT",
    "SEMIRINGS",
    "get_semiring",
    "require_ring",
    "OpCounts",
    "instrument",
]


class Semiring:
    name = "abstract"
    zero = None
    one = None

    def plus(self, a, b):
        raise NotImplementedError

    def times(self, a, b):
        raise NotImplementedError

    def sum(self, values):
        total = self.zero
        for v in values:
            total = self.plus(total, v)
        return total

    def product(self, values):
        total = self.one
        for v in values:
            total = self.times(total, v)
        return total

    def parse(self, token: str):
        raise NotImplementedError

    def format(self, w) -> str:
        return repr(w)

    def random(self, rng):
        """Draw a non-zero weight; used by generators and property tests."""
        raise NotImplementedError

    @property
    def is_ring(self) -> bool:
        return isinstance(self, Ring)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class Ring(Semiring):
    def minus(self, a, b):
        raise NotImplementedError


class DivisionRing(Ring):
    def inverse(self, a):
        raise NotImplementedError


def _parse_float(token):
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"bad weight literal {token!r}") from None


class BooleanSemiring(Semiring):
    name = "boolean"
    zero = False
    one = True

    def plus(self, a, b):
        return a or b

    def times(self, a, b):
        return a and b

    def parse(self, token):
        if token in ("0", "false", "False"):
            return False
        if token in ("1", "true", "True"):
            return True
        raise ParseError(f"bad boolean weight {token!r}")

    def format(self, w):
        return "1" if w else "0"

    def random(self, rng):
        return rng.random() < 0.85


class _Tropical(Semiring):
    one = 0.0

    def times(self, a, b):
        return a + b

    def parse(self, token):
        return _parse_float(token)

    def format(self, w):
        if math.isinf(w):
            return "inf" if w > 0 else "-inf"
        return repr(float(w))

    def random(self, rng):
        # small integers keep min/max/+ exact
        return float(rng.randint(0, 9))


class TropicalMinSemiring(_Tropical):
    """min-plus: shortest path."""

    name = "tropical-min"
    zero = math.inf

    def plus(self, a, b):
        return a if a <= b else b


class TropicalMaxSemiring(_Tropical):
    """max-plus: Viterbi in log space."""

    name = "tropical-max"
    zero = -math.inf

    def plus(self, a, b):
        return a if a >= b else b


class RealSemiring(DivisionRing):
    name = "real"
    zero = 0.0
    one = 1.0

    def plus(self, a, b):
        return a + b

    def times(self, a, b):
        return a * b

    def minus(self, a, b):
        return a - b

    def inverse(self, a):
        if a == 0.0:
            raise ZeroDivisionError("zero has no inverse")
        return 1.0 / a

    def parse(self, token):
        return _parse_float(token)

    def format(self, w):
        return repr(float(w))

    def random(self, rng):
        return 1.0 - rng.random()


class LogSemiring(Semiring):
    """Probabilities stored as natural logs; plus is log-add-exp.

    Deliberately not a ring here: subtraction in log space is numerically
    fragile, so algorithms route this semiring through the Fenwick path.
    """

    name = "log"
    zero = -math.inf
    one = 0.0

    def plus(self, a, b):
        if a < b:
            a, b = b, a
        if b == -math.inf:
            return a
        return a + math.log1p(math.exp(b - a))

    def times(self, a, b):
        return a + b

    def parse(self, token):
        return _parse_float(token)

    def format(self, w):
        if math.isinf(w):
            return "-inf" if w < 0 else "inf"
        return repr(float(w))

    def random(self, rng):
        return math.log(1.0 - rng.random())


class CountSemiring(Ring):
    """Integers under + and *; exact, with subtraction."""

    name = "count"
    zero = 0
    one = 1

    def plus(self, a, b):
        return a + b

    def times(self, a, b):
        return a * b

    def minus(self, a, b):
        return a - b

    def parse(self, token):
        try:
            return int(token)
        except ValueError:
            raise ParseError(f"bad count weight {token!r}") from None

    def format(self, w):
        return str(int(w))

    def random(self, rng):
        return rng.randint(1, 3)


BOOLEAN = BooleanSemiring()
TROPICAL_MIN = TropicalMinSemiring()
TROPICAL_MAX = TropicalMaxSemiring()
REAL = RealSemiring()
LOG = LogSemiring()
COUNT = CountSemiring()

SEMIRINGS = {
    sr.name: sr for sr in (BOOLEAN, TROPICAL_MIN, TROPICAL_MAX, REAL, LOG, COUNT)
}


def get_semiring(name: str) -> Semiring:
    try:
        return SEMIRINGS[name]
    except KeyError:
        raise ValueError(
            f"unknown semiring {name!r}; choose from {', '.join(SEMIRINGS)}"
        ) from None


def require_ring(sr: Semiring, what: str = "this operation") -> Ring:
    if not isinstance(sr, Ring):
        raise CapabilityError(f"{what} needs subtraction; semiring {sr.name!r} is not a ring")
    return sr


@dataclass
class OpCounts:
    oplus: int = 0
    otimes: int = 0
    ominus: int = 0
    inverse: int = 0

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


class _Instrumented(Semiring):
    def __init__(self, base: Semiring, counts: OpCounts):
        self.base = base
        self.counts = counts
        self.name = base.name
        self.zero = base.zero
        self.one = base.one

    def plus(self, a, b):
        self.counts.oplus += 1
        return self.base.plus(a, b)

    def times(self, a, b):
        self.counts.otimes += 1
        return self.base.times(a, b)

    def parse(self, token):
        return self.base.parse(token)

    def format(self, w):
        return self.base.format(w)

    def random(self, rng):
        return self.base.random(rng)


class _InstrumentedRing(_Instrumented, Ring):
    def minus(self, a, b):
        self.counts.ominus += 1
        return self.base.minus(a, b)


class _InstrumentedDivisionRing(_InstrumentedRing, DivisionRing):
    def inverse(self, a):
        self.counts.inverse += 1
        return self.base.inverse(a)


def instrument(sr: Semiring, counts: OpCounts) -> Semiring:
    """Wrap ``sr`` so every operation bumps ``counts``; capability is kept."""
    if isinstance(sr, _Instrumented):
        sr = sr.base
    if isinstance(sr, DivisionRing):
        return _InstrumentedDivisionRing(sr, counts)
    if isinstance(sr, Ring):
        return _InstrumentedRing(sr, counts)
    return _Instrumented(sr, counts)
