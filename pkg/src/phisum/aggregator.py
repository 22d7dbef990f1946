"""Keyed-sum containers with summand replacement, multipliers and undo.

All three variants share one contract: ``set(a, v)`` replaces the summand
for key ``a``; ``get(a)`` returns it scaled by every multiplier applied
after that set; ``value()`` is the ⊕ of all summands; ``mult(m)``
left-multiplies every summand; ``undo(n)`` reverts the last ``n`` set or
mult calls, including the interning of new keys.

Every mutating call pushes a sentinel and then one reverse record per
memory cell it overwrites, so undo costs no more than the original update.
"""
from __future__ import annotations

from .errors import UnderflowError
from .semiring import DivisionRing, Ring, Semiring, require_ring

__all__ = [
    "Aggregator",
    "FenwickAggregator",
    "RingAggregator",
    "DivisionRingAggregator",
    "aggregator_for",
    "AGGREGATORS",
]

_SENTINEL = None
_MISSING = object()


class Aggregator:
    """Shared key interning and undo bookkeeping."""

    kind = "abstract"

    def __init__(self, semiring: Semiring):
        self.sr = semiring
        self.index: dict = {}
        self.keys: list = []
        self._log: list = []
        self._updates = 0  # sentinels on the log
        self.sets = 0
        self.mults = 0
        self.undone = 0

    def __len__(self):
        return len(self.keys)

    @property
    def depth(self) -> int:
        """Number of updates that can still be undone."""
        return self._updates

    def _begin(self):
        self._log.append(_SENTINEL)
        self._updates += 1

    def _intern(self, a):
        n = self.index.get(a)
        if n is None:
            n = len(self.keys)
            self.index[a] = n
            self.keys.append(a)
            self._log.append(("key", a))
        return n

    def undo(self, n: int = 1) -> None:
        if n > self._updates:
            raise UnderflowError(f"cannot undo {n} updates; only {self._updates} recorded")
        log = self._log
        for _ in range(n):
            while True:
                rec = log.pop()
                if rec is _SENTINEL:
                    break
                self._revert(rec)
            self._updates -= 1
        self.undone += n

    def _revert(self, rec):
        if rec[0] == "key":
            del self.index[rec[1]]
            self.keys.pop()
        else:
            raise AssertionError(f"unknown undo record {rec!r}")

    def items(self):
        """(key, current scaled value) pairs in interning order."""
        return [(a, self.get(a)) for a in self.keys]

    def dump(self) -> dict:
        return {"kind": self.kind, "values": self.items(), "value": self.value()}

    # subclass API
    def set(self, a, v):  # pragma: no cover - abstract
        raise NotImplementedError

    def get(self, a):  # pragma: no cover - abstract
        raise NotImplementedError

    def value(self):  # pragma: no cover - abstract
        raise NotImplementedError

    def mult(self, m):  # pragma: no cover - abstract
        raise NotImplementedError

    def clone_snapshot(self) -> "Aggregator":  # pragma: no cover - abstract
        raise NotImplementedError

    @classmethod
    def from_items(cls, semiring, items):
        agg = cls(semiring)
        agg._load(items)
        return agg


# -- Fenwick tree with lazy multipliers ---------------------------------------


class FenwickAggregator(Aggregator):
    """Balanced binary tree over the interned keys.

    Node ``(level, i)`` covers leaves ``[i·2^level, (i+1)·2^level)``; the
    root is ``(height, 0)``.  Each node holds a pair ``(m, u)``: a lazy
    multiplier and, for internal nodes, the ⊕ of the children's scaled
    values ``m_k ⊗ u_k``.  Absent nodes read as ``(𝟙, 𝟘)``.
    """

    kind = "fenwick"

    def __init__(self, semiring: Semiring):
        super().__init__(semiring)
        self.nodes: dict = {}
        self.height = 0
        self.node_writes = 0
        self.last_set_writes = 0

    def _node(self, key):
        return self.nodes.get(key, (self.sr.one, self.sr.zero))

    def _write(self, key, pair, touched):
        self._log.append(("node", key, self.nodes.get(key, _MISSING)))
        self.nodes[key] = pair
        touched.add(key)

    def _revert(self, rec):
        tag = rec[0]
        if tag == "node":
            _, key, old = rec
            if old is _MISSING:
                del self.nodes[key]
            else:
                self.nodes[key] = old
        elif tag == "height":
            self.height = rec[1]
        else:
            super()._revert(rec)

    def _grow(self, touched):
        sr = self.sr
        old_root = (self.height, 0)
        m, u = self._node(old_root)
        self._log.append(("height", self.height))
        self.height += 1
        # the old root keeps its own multiplier; the new root starts neutral
        self._write((self.height, 0), (sr.one, sr.times(m, u)), touched)

    def set(self, a, v):
        sr = self.sr
        self._begin()
        self.sets += 1
        touched: set = set()
        n = self._intern(a)
        while n >= (1 << self.height):
            self._grow(touched)
        one = sr.one
        # push multipliers out of the way on the way down
        path = []
        for level in range(self.height, 0, -1):
            key = (level, n >> level)
            m, u = self._node(key)
            path.append(key)
            if m != one:
                for child in ((level - 1, 2 * (n >> level)), (level - 1, 2 * (n >> level) + 1)):
                    cm, cu = self._node(child)
                    self._write(child, (sr.times(m, cm), cu), touched)
                self._write(key, (one, u), touched)
        self._write((0, n), (one, v), touched)
        # restore partial sums on the way back up
        for key in reversed(path):
            level, i = key
            lm, lu = self._node((level - 1, 2 * i))
            rm, ru = self._node((level - 1, 2 * i + 1))
            total = sr.plus(sr.times(lm, lu), sr.times(rm, ru))
            self._write(key, (one, total), touched)
        self.last_set_writes = len(touched)
        self.node_writes += len(touched)

    def get(self, a):
        sr = self.sr
        n = self.index.get(a)
        if n is None:
            return sr.zero
        acc = sr.one
        for level in range(self.height, 0, -1):
            acc = sr.times(acc, self._node((level, n >> level))[0])
        m, u = self._node((0, n))
        return sr.times(acc, sr.times(m, u))

    def value(self):
        m, u = self._node((self.height, 0))
        return self.sr.times(m, u)

    def mult(self, m):
        self._begin()
        self.mults += 1
        root = (self.height, 0)
        rm, ru = self._node(root)
        self._write(root, (self.sr.times(m, rm), ru), set())

    def _scaled_leaves(self):
        """All scaled leaf values in O(N), pushing multipliers top-down."""
        sr = self.sr
        scale = {(self.height, 0): sr.one}
        for level in range(self.height, 0, -1):
            width = 1 << level
            for i in range((len(self.keys) + width - 1) // width):
                acc = sr.times(scale[(level, i)], self._node((level, i))[0])
                scale[(level - 1, 2 * i)] = acc
                scale[(level - 1, 2 * i + 1)] = acc
        out = []
        for n in range(len(self.keys)):
            m, u = self._node((0, n))
            out.append(sr.times(scale[(0, n)], sr.times(m, u)))
        return out

    def items(self):
        return list(zip(self.keys, self._scaled_leaves()))

    def _load(self, items):
        """Bulk build from (key, value) pairs, bottom-up in O(N)."""
        sr = self.sr
        one = sr.one
        for a, v in items:
            n = len(self.keys)
            self.index[a] = n
            self.keys.append(a)
            self.nodes[(0, n)] = (one, v)
        size = len(self.keys)
        height = 0
        while (1 << height) < size:
            height += 1
        self.height = height
        for level in range(1, height + 1):
            width = 1 << level
            for i in range((size + width - 1) // width):
                lm, lu = self._node((level - 1, 2 * i))
                rm, ru = self._node((level - 1, 2 * i + 1))
                self.nodes[(level, i)] = (one, sr.plus(sr.times(lm, lu), sr.times(rm, ru)))

    def clone_snapshot(self) -> "FenwickAggregator":
        return type(self).from_items(self.sr, self.items())

    def check_invariant(self) -> bool:
        """Each internal node's u equals the ⊕ of its children's scaled values."""
        sr = self.sr
        for (level, i), (m, u) in self.nodes.items():
            if level == 0:
                continue
            lm, lu = self._node((level - 1, 2 * i))
            rm, ru = self._node((level - 1, 2 * i + 1))
            if u != sr.plus(sr.times(lm, lu), sr.times(rm, ru)):
                return False
        return True

    def dump(self):
        d = super().dump()
        d["height"] = self.height
        d["nodes"] = sorted(self.nodes.items())
        return d


# -- segment tree of multipliers ------------------------------------------------


class _ProductLog:
    """Append-only list of multipliers with O(log I) suffix products.

    Node ``(level, i)`` holds ``m_hi ⊗ ... ⊗ m_lo`` for its range, later
    multipliers on the left.  Writes go through the owner's undo log.
    """

    def __init__(self, sr, owner):
        self.sr = sr
        self.owner = owner
        self.nodes: dict = {}
        self.count = 0

    def _put(self, key, value):
        self.owner._log.append(("mnode", key, self.nodes.get(key, _MISSING)))
        self.nodes[key] = value

    def append(self, m):
        sr = self.sr
        self.owner._log.append(("mcount", self.count))
        j, level, value = self.count, 0, m
        self.count += 1
        self._put((0, j), value)
        # a right child completes its parent's block
        while j & 1:
            value = sr.times(value, self.nodes[(level, j - 1)])
            j >>= 1
            level += 1
            self._put((level, j), value)

    def suffix(self, start):
        """Product of the multipliers with index >= ``start`` (0-based)."""
        sr = self.sr
        left, right = [], []
        lo, hi, level = start, self.count, 0
        while lo < hi:
            if lo & 1:
                left.append(self.nodes[(level, lo)])
                lo += 1
            if hi & 1:
                hi -= 1
                right.append(self.nodes[(level, hi)])
            lo >>= 1
            hi >>= 1
            level += 1
        acc = sr.one
        for v in left + right[::-1]:
            acc = sr.times(v, acc)
        return acc


class RingAggregator(Aggregator):
    """Constant-time replacement via ⊖ on the running total.

    Each key stores ``(v_n, i_n)``: the value as set and the number of
    multipliers applied before the set.  ``get`` scales ``v_n`` by the
    product of the multipliers applied afterwards.
    """

    kind = "ring"

    def __init__(self, semiring: Semiring):
        require_ring(semiring, "RingAggregator")
        super().__init__(semiring)
        self.vals: list = []
        self.epochs: list = []
        self.total = semiring.zero
        self.mlog = _ProductLog(semiring, self)

    def _revert(self, rec):
        tag = rec[0]
        if tag == "slot":
            _, n, v, i = rec
            self.vals[n] = v
            self.epochs[n] = i
        elif tag == "total":
            self.total = rec[1]
        elif tag == "mnode":
            _, key, old = rec
            if old is _MISSING:
                del self.mlog.nodes[key]
            else:
                self.mlog.nodes[key] = old
        elif tag == "mcount":
            self.mlog.count = rec[1]
        elif tag == "key":
            self.vals.pop()
            self.epochs.pop()
            super()._revert(rec)
        else:
            super()._revert(rec)

    def _scale(self, n):
        return self.mlog.suffix(self.epochs[n])

    def get(self, a):
        n = self.index.get(a)
        if n is None:
            return self.sr.zero
        if self.epochs[n] == self.mlog.count:
            return self.vals[n]
        return self.sr.times(self._scale(n), self.vals[n])

    def set(self, a, v):
        sr = self.sr
        self._begin()
        self.sets += 1
        old = self.get(a)
        n = self.index.get(a)
        if n is None:
            n = self._intern(a)
            self.vals.append(sr.zero)
            self.epochs.append(self.mlog.count)
        self._log.append(("slot", n, self.vals[n], self.epochs[n]))
        self._log.append(("total", self.total))
        self.total = sr.plus(self.total, sr.minus(v, old))
        self.vals[n] = v
        self.epochs[n] = self.mlog.count

    def value(self):
        return self.total

    def mult(self, m):
        self._begin()
        self.mults += 1
        self._log.append(("total", self.total))
        self.total = self.sr.times(m, self.total)
        self.mlog.append(m)

    def _load(self, items):
        sr = self.sr
        total = sr.zero
        for a, v in items:
            self.index[a] = len(self.keys)
            self.keys.append(a)
            self.vals.append(v)
            self.epochs.append(0)
            total = sr.plus(total, v)
        self.total = total

    def clone_snapshot(self) -> "RingAggregator":
        return type(self).from_items(self.sr, self.items())


class DivisionRingAggregator(Aggregator):
    """Constant-time everything: summands are stored pre-divided by M.

    A 𝟘 multiplier has no inverse.  Rather than storing a placeholder, a
    𝟘 multiplier starts a new epoch: every summand set before it reads as
    𝟘 from then on, and ``M`` restarts from the product of the non-𝟘
    multipliers that follow.
    """

    kind = "division"

    def __init__(self, semiring: Semiring):
        if not isinstance(semiring, DivisionRing):
            require_ring(semiring, "DivisionRingAggregator")
            raise TypeError("DivisionRingAggregator needs a division ring")
        super().__init__(semiring)
        self.vals: list = []
        self.epochs: list = []
        self.total = semiring.zero  # ⊕ of stored values in the current epoch
        self.M = semiring.one
        self.epoch = 0

    def _revert(self, rec):
        tag = rec[0]
        if tag == "slot":
            _, n, v, e = rec
            self.vals[n] = v
            self.epochs[n] = e
        elif tag == "regs":
            _, self.total, self.M, self.epoch = rec
        elif tag == "key":
            self.vals.pop()
            self.epochs.pop()
            super()._revert(rec)
        else:
            super()._revert(rec)

    def _stored(self, n):
        return self.vals[n] if self.epochs[n] == self.epoch else self.sr.zero

    def get(self, a):
        n = self.index.get(a)
        if n is None:
            return self.sr.zero
        return self.sr.times(self.M, self._stored(n))

    def set(self, a, v):
        sr = self.sr
        self._begin()
        self.sets += 1
        n = self.index.get(a)
        if n is None:
            n = self._intern(a)
            self.vals.append(sr.zero)
            self.epochs.append(self.epoch)
        stored = sr.times(sr.inverse(self.M), v) if self.M != sr.one else v
        self._log.append(("slot", n, self.vals[n], self.epochs[n]))
        self._log.append(("regs", self.total, self.M, self.epoch))
        self.total = sr.plus(self.total, sr.minus(stored, self._stored(n)))
        self.vals[n] = stored
        self.epochs[n] = self.epoch

    def value(self):
        return self.sr.times(self.M, self.total)

    def mult(self, m):
        sr = self.sr
        self._begin()
        self.mults += 1
        self._log.append(("regs", self.total, self.M, self.epoch))
        if m == sr.zero:
            self.epoch += 1
            self.total = sr.zero
            self.M = sr.one
        else:
            self.M = sr.times(m, self.M)

    def _load(self, items):
        sr = self.sr
        total = sr.zero
        for a, v in items:
            self.index[a] = len(self.keys)
            self.keys.append(a)
            self.vals.append(v)
            self.epochs.append(0)
            total = sr.plus(total, v)
        self.total = total

    def clone_snapshot(self) -> "DivisionRingAggregator":
        return type(self).from_items(self.sr, self.items())


AGGREGATORS = {
    "fenwick": FenwickAggregator,
    "ring": RingAggregator,
    "division": DivisionRingAggregator,
}


def aggregator_for(semiring: Semiring, kind: str | None = None):
    """Pick the aggregator class by capability unless ``kind`` overrides."""
    if kind is not None:
        try:
            return AGGREGATORS[kind]
        except KeyError:
            raise ValueError(f"unknown aggregator {kind!r}") from None
    if isinstance(semiring, DivisionRing):
        return DivisionRingAggregator
    if isinstance(semiring, Ring):
        return RingAggregator
    return FenwickAggregator
