"""Naive models used as test oracles."""


class ReferenceAggregator:
    """Dict of scaled values; every query recomputes from scratch."""

    def __init__(self, sr):
        self.sr = sr
        self.vals = {}
        self.history = []

    def set(self, a, v):
        self.history.append(dict(self.vals))
        self.vals[a] = v

    def mult(self, m):
        self.history.append(dict(self.vals))
        self.vals = {a: self.sr.times(m, v) for a, v in self.vals.items()}

    def undo(self, n=1):
        for _ in range(n):
            self.vals = self.history.pop()

    def get(self, a):
        return self.vals.get(a, self.sr.zero)

    def value(self):
        return self.sr.sum(self.vals.values())

    def __len__(self):
        return len(self.vals)

    @property
    def depth(self):
        return len(self.history)
