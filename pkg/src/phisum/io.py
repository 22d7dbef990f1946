"""Plain-text automaton format.

One directive per line, whitespace separated, ``#`` starts a comment::

    arc   <src> <dst> <symbol> <weight>
    phi   <src> <dst> [<weight>]
    init  <state> <weight>
    final <state> <weight>

State and symbol tokens are arbitrary.  Interning sorts tokens (numeric
tokens first, by value) so the result does not depend on line order.
"""
from __future__ import annotations

from pathlib import Path

from .automaton import Automaton
from .errors import ParseError
from .semiring import Semiring

__all__ = ["parse_automaton", "load_automaton", "format_automaton", "PHI_TOKEN"]

PHI_TOKEN = "phi"


def _token_key(tok: str):
    try:
        return (0, float(tok), tok)
    except ValueError:
        return (1, 0.0, tok)


def parse_automaton(text: str, semiring: Semiring, check: bool = True) -> Automaton:
    arcs, phis, inits, finals = [], [], [], []
    states, symbols = set(), set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind, args = parts[0], parts[1:]
        try:
            if kind == "arc":
                if len(args) != 4:
                    raise ParseError("arc needs <src> <dst> <symbol> <weight>")
                src, dst, sym, w = args
                if sym == PHI_TOKEN:
                    raise ParseError("'phi' is reserved; use a phi directive")
                arcs.append((src, sym, dst, semiring.parse(w)))
                states.update((src, dst))
                symbols.add(sym)
            elif kind == "phi":
                if len(args) not in (2, 3):
                    raise ParseError("phi needs <src> <dst> [<weight>]")
                w = semiring.parse(args[2]) if len(args) == 3 else semiring.one
                phis.append((args[0], args[1], w, lineno))
                states.update(args[:2])
            elif kind in ("init", "final"):
                if len(args) != 2:
                    raise ParseError(f"{kind} needs <state> <weight>")
                (inits if kind == "init" else finals).append(
                    (args[0], semiring.parse(args[1]), lineno)
                )
                states.add(args[0])
            else:
                raise ParseError(f"unknown directive {kind!r}")
        except ParseError as exc:
            if exc.lineno is None:
                raise ParseError(str(exc), lineno) from None
            raise

    state_names = sorted(states, key=_token_key)
    symbol_names = sorted(symbols, key=_token_key)
    sid = {s: i for i, s in enumerate(state_names)}
    yid = {s: i for i, s in enumerate(symbol_names)}

    def collect(entries, what):
        out = {}
        for s, w, lineno in entries:
            if sid[s] in out:
                raise ParseError(f"duplicate {what} weight for state {s!r}", lineno)
            out[sid[s]] = w
        return out

    return Automaton.build(
        semiring,
        len(state_names),
        arcs=[(sid[s], yid[y], sid[d], w) for s, y, d, w in arcs],
        phi=[(sid[s], sid[d], w) for s, d, w, _ in phis],
        init=collect(inits, "init"),
        final=collect(finals, "final"),
        n_symbols=len(symbol_names),
        state_names=state_names,
        symbol_names=symbol_names,
        check=check,
    )


def load_automaton(path, semiring: Semiring, check: bool = True) -> Automaton:
    return parse_automaton(Path(path).read_text(), semiring, check=check)


def format_automaton(a: Automaton) -> str:
    sr = a.semiring
    names, syms = a.state_names, a.symbol_names
    lines = []
    mentioned = set()
    for q, sym, dst, w in a.arcs():
        lines.append(f"arc {names[q]} {names[dst]} {syms[sym]} {sr.format(w)}")
        mentioned.update((q, dst))
    for q, f, w in a.phi_arcs():
        if w == sr.one:
            lines.append(f"phi {names[q]} {names[f]}")
        else:
            lines.append(f"phi {names[q]} {names[f]} {sr.format(w)}")
        mentioned.update((q, f))
    for q in range(a.n_states):
        if a.init[q] != sr.zero:
            lines.append(f"init {names[q]} {sr.format(a.init[q])}")
            mentioned.add(q)
    for q in range(a.n_states):
        # an explicit zero keeps otherwise isolated states in the file
        if a.final[q] != sr.zero or q not in mentioned:
            lines.append(f"final {names[q]} {sr.format(a.final[q])}")
    return "\n".join(lines) + "\n"
