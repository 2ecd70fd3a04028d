"""Self-similar groups given by invertible Mealy automata.

Letters are indices into the alphabet; an element is a reduced word in the
states and their inverses. Products act right to left, so ``g h`` means
"apply ``h`` first", and restrictions obey ``(gh)|_x = g|_{h.x} h|_x``.
Words are consumed leftmost letter first.
"""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DomainError
from .exact_linalg import IntMatrix, smith_normal_form
from .torus import adjugate

Letter = tuple[str, int]  # (state name, +1 or -1)
IDENTITY_NAMES = ("1", "e", "id")


@dataclass(frozen=True)
class MealyAutomaton:
    alphabet: tuple[str, ...]
    outputs: dict = field(hash=False)  # name -> tuple of output letters
    transitions: dict = field(hash=False)  # name -> tuple of state names

    def __post_init__(self):
        k = len(self.alphabet)
        if k == 0:
            raise DomainError("alphabet must be non-empty", "bad_automaton")
        for name, outs in self.outputs.items():
            if sorted(outs) != list(range(k)):
                raise DomainError(f"state {name!r} does not permute the alphabet", "bad_automaton")
            trans = self.transitions.get(name)
            if trans is None or len(trans) != k:
                raise DomainError(f"state {name!r} has malformed transitions", "bad_automaton")
            for t in trans:
                if t not in self.outputs:
                    raise DomainError(f"unknown state {t!r}", "bad_automaton")
        for name in self.identity_states:
            if any(t != name for t in self.transitions[name]):
                raise DomainError(f"identity state {name!r} must loop to itself", "bad_automaton")

    @property
    def states(self) -> list[str]:
        return list(self.outputs)

    @property
    def identity_states(self) -> list[str]:
        """States acting trivially on every word."""
        trivial = {s for s, o in self.outputs.items() if o == tuple(range(len(self.alphabet)))}
        changed = True
        while changed:
            changed = False
            for s in list(trivial):
                if any(t not in trivial for t in self.transitions[s]):
                    trivial.discard(s)
                    changed = True
        return sorted(trivial)

    @property
    def generators(self) -> list[str]:
        ids = set(self.identity_states)
        return [s for s in self.outputs if s not in ids]

    # construction -----------------------------------------------------------

    @classmethod
    def from_json(cls, data: dict) -> "MealyAutomaton":
        try:
            alphabet = tuple(str(a) for a in data["alphabet"])
            index = {a: i for i, a in enumerate(alphabet)}
            outputs, transitions = {}, {}
            for st in data["states"]:
                name = str(st["name"])
                wreath = st["wreath"]
                if len(wreath) != len(alphabet):
                    raise DomainError(f"state {name!r} needs one wreath entry per letter", "bad_automaton")
                outputs[name] = tuple(index[str(o)] for o, _ in wreath)
                transitions[name] = tuple(str(t) for _, t in wreath)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DomainError):
                raise
            raise DomainError(f"malformed automaton: {exc}", "bad_automaton") from None
        for name in IDENTITY_NAMES:
            if any(name in t for t in transitions.values()) and name not in outputs:
                outputs[name] = tuple(range(len(alphabet)))
                transitions[name] = (name,) * len(alphabet)
        return cls(alphabet, outputs, transitions)

    def to_json(self) -> dict:
        return {
            "alphabet": list(self.alphabet),
            "states": [{"name": s, "wreath": [[self.alphabet[o], t] for o, t in
                                              zip(self.outputs[s], self.transitions[s])]}
                       for s in self.outputs],
        }

    # words ------------------------------------------------------------------

    def parse_word(self, text: str | Sequence[str]) -> tuple[int, ...]:
        index = {a: i for i, a in enumerate(self.alphabet)}
        tokens = list(text) if isinstance(text, str) and all(len(a) == 1 for a in self.alphabet) \
            else (text.split(",") if isinstance(text, str) else list(text))
        try:
            return tuple(index[t.strip() if isinstance(t, str) else t] for t in tokens if t != "")
        except KeyError as exc:
            raise DomainError(f"letter {exc.args[0]!r} is not in the alphabet", "bad_letter") from None

    def format_word(self, word: Sequence[int]) -> str:
        sep = "" if all(len(a) == 1 for a in self.alphabet) else ","
        return sep.join(self.alphabet[x] for x in word)

    def element(self, spec: str | Sequence[Letter] = "") -> "GroupElement":
        if isinstance(spec, str):
            return GroupElement.parse(self, spec)
        return GroupElement.of(self, spec)

    def identity(self) -> "GroupElement":
        return GroupElement(self, ())


def _state_letter_tables(aut: MealyAutomaton):
    inv_out, inv_res = {}, {}
    for s, outs in aut.outputs.items():
        io = [0] * len(outs)
        ir = [""] * len(outs)
        for x, y in enumerate(outs):
            io[y] = x
            ir[y] = aut.transitions[s][x]
        inv_out[s], inv_res[s] = tuple(io), tuple(ir)
    return inv_out, inv_res


# per-automaton memo tables, keyed by identity (automata hold unhashable dicts)
_MEMO: dict[int, tuple[MealyAutomaton, dict]] = {}


def _memo(aut: MealyAutomaton) -> dict:
    hit = _MEMO.get(id(aut))
    if hit is None or hit[0] is not aut:
        hit = (aut, {"trivial": {}, "signature": {}})
        _MEMO[id(aut)] = hit
    return hit[1]


def _tables(aut: MealyAutomaton):
    memo = _memo(aut)
    if "tables" not in memo:
        memo["tables"] = (*_state_letter_tables(aut), set(aut.identity_states))
    return memo["tables"]


def _reduce(aut: MealyAutomaton, word: Iterable[Letter]) -> tuple[Letter, ...]:
    ids = _tables(aut)[2]
    out: list[Letter] = []
    for s, e in word:
        if s in ids:
            continue
        if out and out[-1] == (s, -e):
            out.pop()
        else:
            out.append((s, e))
    return tuple(out)


def _act_letter(aut: MealyAutomaton, word: tuple[Letter, ...], x: int) -> tuple[int, tuple[Letter, ...]]:
    inv_out, inv_res, _ = _tables(aut)
    res: list[Letter] = [("", 0)] * len(word)
    for pos in range(len(word) - 1, -1, -1):
        s, e = word[pos]
        if e == 1:
            res[pos] = (aut.transitions[s][x], 1)
            x = aut.outputs[s][x]
        else:
            res[pos] = (inv_res[s][x], -1)
            x = inv_out[s][x]
    return x, _reduce(aut, res)


def _is_trivial(aut: MealyAutomaton, word: tuple[Letter, ...], cache: dict) -> bool:
    """Whether the word acts trivially on every finite word (restriction closure)."""
    if not word:
        return True
    if word in cache:
        return cache[word]
    seen = {word}
    queue = deque([word])
    ok = True
    while queue and ok:
        w = queue.popleft()
        for x in range(len(aut.alphabet)):
            y, r = _act_letter(aut, w, x)
            if y != x:
                ok = False
                break
            if r and r not in seen:
                if cache.get(r) is False:
                    ok = False
                    break
                seen.add(r)
                queue.append(r)
    if ok:
        for w in seen:
            cache[w] = True
    else:
        cache[word] = False
    return ok


def _signature(aut: MealyAutomaton, word: tuple[Letter, ...], depth: int) -> tuple:
    if depth == 0:
        return ()
    out = []
    for x in range(len(aut.alphabet)):
        y, r = _act_letter(aut, word, x)
        out.append((y, _signature(aut, r, depth - 1)))
    return tuple(out)


@dataclass(frozen=True)
class GroupElement:
    automaton: MealyAutomaton = field(compare=False, hash=False, repr=False)
    word: tuple[Letter, ...]

    @classmethod
    def of(cls, aut: MealyAutomaton, word: Iterable[Letter]) -> "GroupElement":
        word = tuple(word)
        for s, e in word:
            if s not in aut.outputs or e not in (1, -1):
                raise DomainError(f"unknown state {s!r}", "bad_element")
        return cls(aut, _reduce(aut, word))

    @classmethod
    def parse(cls, aut: MealyAutomaton, text: str) -> "GroupElement":
        """Parse products such as ``"a"``, ``"a^-1 b"``, ``"ab"`` or ``"1"``."""
        names = sorted(aut.outputs, key=len, reverse=True)
        pattern = re.compile("(" + "|".join(re.escape(n) for n in names) + r")(\^-1|\^\(-1\)|')?")
        text = text.replace("*", " ").strip()
        pos, word = 0, []
        while pos < len(text):
            if text[pos].isspace():
                pos += 1
                continue
            m = pattern.match(text, pos)
            if not m:
                raise DomainError(f"cannot parse element {text!r} at position {pos}", "bad_element")
            word.append((m.group(1), -1 if m.group(2) else 1))
            pos = m.end()
        return cls.of(aut, word)

    # group structure --------------------------------------------------------

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.automaton, _reduce(self.automaton, self.word + other.word))

    def inverse(self) -> "GroupElement":
        return GroupElement(self.automaton, tuple((s, -e) for s, e in reversed(self.word)))

    def equals(self, other: "GroupElement") -> bool:
        """Equality of actions, decided by exploring restrictions of ``g h^-1``."""
        if self.word == other.word:
            return True
        return _is_trivial(self.automaton, (self * other.inverse()).word, _memo(self.automaton)["trivial"])

    @property
    def is_identity(self) -> bool:
        return _is_trivial(self.automaton, self.word, _memo(self.automaton)["trivial"])

    # action -----------------------------------------------------------------

    def act(self, word: Sequence[int]) -> tuple[int, ...]:
        return self.act_and_restrict(word)[0]

    def restrict(self, word: Sequence[int]) -> "GroupElement":
        return self.act_and_restrict(word)[1]

    def act_and_restrict(self, word: Sequence[int]) -> tuple[tuple[int, ...], "GroupElement"]:
        k = len(self.automaton.alphabet)
        g, image = self.word, []
        for x in word:
            if not 0 <= x < k:
                raise DomainError(f"letter {x!r} outside the alphabet", "bad_letter")
            y, g = _act_letter(self.automaton, g, x)
            image.append(y)
        return tuple(image), GroupElement(self.automaton, g)

    def signature(self, depth: int) -> tuple:
        """Action on all words of the given length (a hash for equality tests)."""
        cache = _memo(self.automaton)["signature"]
        key = (self.word, depth)
        if key not in cache:
            cache[key] = _signature(self.automaton, self.word, depth)
        return cache[key]

    def __str__(self) -> str:
        if not self.word:
            return "1"
        return " ".join(s if e == 1 else f"{s}^-1" for s, e in self.word) \
            if any(len(s) > 1 for s, _ in self.word) else \
            "".join(s if e == 1 else f"{s}^-1" for s, e in self.word)


def act_and_restrict(g: GroupElement, w: Sequence[int]) -> tuple[tuple[int, ...], GroupElement]:
    return g.act_and_restrict(w)


# --------------------------------------------------------------------------
# nucleus


class _ElementSet:
    """Elements up to equality of action, each kept with a shortest word."""

    def __init__(self, aut: MealyAutomaton, depth: int = 3):
        self.aut = aut
        self.depth = depth
        self.items: list[GroupElement] = []
        self.by_sig: dict[tuple, list[int]] = {}

    def find(self, g: GroupElement) -> int | None:
        for i in self.by_sig.get(g.signature(self.depth), ()):
            if self.items[i].equals(g):
                return i
        return None

    def add(self, g: GroupElement) -> tuple[int, bool]:
        i = self.find(g)
        if i is not None:
            if len(g.word) < len(self.items[i].word):
                self.items[i] = g
            return i, False
        self.items.append(g)
        self.by_sig.setdefault(g.signature(self.depth), []).append(len(self.items) - 1)
        return len(self.items) - 1, True

    def __len__(self):
        return len(self.items)


def _restriction_graph(start: Iterable[GroupElement], aut: MealyAutomaton, cap: int):
    """Closure under restriction. Returns (elements, edges) or None above ``cap``."""
    es = _ElementSet(aut)
    queue = deque()
    for g in start:
        i, new = es.add(g)
        if new:
            queue.append(i)
    edges: dict[int, list[int]] = {}
    while queue:
        i = queue.popleft()
        g = es.items[i]
        out = []
        for x in range(len(aut.alphabet)):
            j, new = es.add(g.restrict((x,)))
            out.append(j)
            if new:
                if len(es) > cap:
                    return None
                queue.append(j)
        edges[i] = out
    return es, edges


def _recurrent_part(n: int, edges: dict[int, list[int]]) -> list[int]:
    """Nodes reachable from a directed cycle."""
    on_cycle = set()
    for v in range(n):
        seen, stack = set(), list(edges[v])
        while stack:
            u = stack.pop()
            if u == v:
                on_cycle.add(v)
                break
            if u not in seen:
                seen.add(u)
                stack.extend(edges[u])
    reach, stack = set(on_cycle), list(on_cycle)
    while stack:
        for u in edges[stack.pop()]:
            if u not in reach:
                reach.add(u)
                stack.append(u)
    return sorted(reach)


@dataclass
class Nucleus:
    automaton: MealyAutomaton
    elements: list[GroupElement]
    moore_edges: list[tuple[int, int, int, int]]  # (source, x, y, target)

    @property
    def names(self) -> list[str]:
        return [str(g) for g in self.elements]

    def index_of(self, g: GroupElement) -> int | None:
        return next((i for i, h in enumerate(self.elements) if h.equals(g)), None)

    def to_json(self) -> dict:
        a = self.automaton.alphabet
        return {
            "size": len(self.elements),
            "elements": self.names,
            "moore_edges": [[self.names[s], f"{a[x]}|{a[y]}", self.names[t]]
                            for s, x, y, t in self.moore_edges],
        }


@dataclass(frozen=True)
class Undetermined:
    bound: int
    candidate_size: int

    def to_json(self) -> dict:
        return {"undetermined": True, "bound": self.bound, "candidate_size": self.candidate_size}


def _sort_key(g: GroupElement) -> tuple:
    return (len(g.word), str(g))


def nucleus(aut: MealyAutomaton, bound: int = 20) -> Nucleus | Undetermined:
    """Nucleus of the group by closure of deep restrictions.

    Start from the recurrent part of the restriction graph on generators,
    their inverses and the identity, then repeatedly absorb the recurrent
    restrictions of pairwise products. Gives up after ``bound`` rounds or
    when the candidate exceeds ``50 * bound`` elements.
    """
    cap = 50 * max(bound, 1)
    seeds = [aut.identity()] + [aut.element([(s, e)]) for s in aut.generators for e in (1, -1)]
    graph = _restriction_graph(seeds, aut, cap)
    if graph is None:
        return Undetermined(bound, cap)
    es, edges = graph
    core = _ElementSet(aut)
    for i in _recurrent_part(len(es), edges):
        core.add(es.items[i])
    for _ in range(bound):
        grew = False
        members = list(core.items)
        for g, h in itertools.product(members, repeat=2):
            graph = _restriction_graph([g * h], aut, cap)
            if graph is None:
                return Undetermined(bound, len(core))
            pes, pedges = graph
            for i in _recurrent_part(len(pes), pedges):
                _, new = core.add(pes.items[i])
                grew |= new
            if len(core) > cap:
                return Undetermined(bound, len(core))
        if not grew:
            break
    else:
        return Undetermined(bound, len(core))
    elements = sorted(core.items, key=_sort_key)
    nuc = Nucleus(aut, elements, [])
    for i, g in enumerate(elements):
        for x in range(len(aut.alphabet)):
            img, r = g.act_and_restrict((x,))
            j = nuc.index_of(r)
            if j is None:
                raise DomainError("nucleus is not closed under restriction")
            nuc.moore_edges.append((i, x, img[0], j))
    return nuc


# --------------------------------------------------------------------------
# regularity and limit space


@dataclass(frozen=True)
class RegularityResult:
    regular: bool
    witness: tuple[str, ...] = ()
    witness_word: str = ""

    def to_json(self) -> dict:
        out = {"regular": self.regular}
        if not self.regular:
            out["witness"] = list(self.witness)
            out["witness_word"] = self.witness_word
        return out


def is_regular(n: Nucleus) -> RegularityResult:
    """No directed cycle of fixing edges among non-trivial nucleus elements."""
    nontrivial = {i for i, g in enumerate(n.elements) if not g.is_identity}
    diag: dict[int, list[tuple[int, int]]] = {i: [] for i in nontrivial}
    for s, x, y, t in n.moore_edges:
        if x == y and s in nontrivial and t in nontrivial:
            diag[s].append((x, t))
    color = dict.fromkeys(nontrivial, 0)
    for root in sorted(nontrivial):
        if color[root]:
            continue
        path: list[tuple[int, int]] = []  # (node, letter used to leave it)
        stack = [(root, iter(diag[root]))]
        color[root] = 1
        while stack:
            node, it = stack[-1]
            step = next(it, None)
            if step is None:
                color[node] = 2
                stack.pop()
                if path:
                    path.pop()
                continue
            x, t = step
            if color[t] == 1:
                nodes = [v for v, _ in stack]
                letters = [lx for _, lx in path] + [x]
                start = nodes.index(t)
                cyc = nodes[start:]
                word = letters[start:]
                return RegularityResult(False, tuple(n.names[v] for v in cyc),
                                        n.automaton.format_word(word))
            if color[t] == 0:
                color[t] = 1
                path.append((node, x))
                stack.append((t, iter(diag[t])))
    return RegularityResult(True)


@dataclass
class TileComplex:
    level: int
    vertices: list[tuple[int, ...]]
    edges: list[tuple[int, int]]
    shift: list[int]  # vertex index -> index of the level-1 vertex
    components: list[list[int]]
    automaton: MealyAutomaton = field(repr=False)

    def degrees(self) -> list[int]:
        deg = [0] * len(self.vertices)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    @property
    def is_cycle(self) -> bool:
        """Connected, and a single closed cycle (two vertices joined by one edge count)."""
        if len(self.components) != 1:
            return False
        n = len(self.vertices)
        if n <= 2:
            return len(self.edges) == n - 1
        return len(self.edges) == n and all(d == 2 for d in self.degrees())

    def shift_fibres(self) -> list[int]:
        counts: dict[int, int] = {}
        for t in self.shift:
            counts[t] = counts.get(t, 0) + 1
        return [counts[k] for k in sorted(counts)]

    def to_json(self) -> dict:
        fmt = self.automaton.format_word
        return {
            "level": self.level,
            "vertex_count": len(self.vertices),
            "edge_count": len(self.edges),
            "component_count": len(self.components),
            "is_cycle": self.is_cycle,
            "shift_fibre_sizes": sorted(set(self.shift_fibres())),
            "vertices": [fmt(v) for v in self.vertices],
            "edges": [[fmt(self.vertices[a]), fmt(self.vertices[b])] for a, b in self.edges],
        }


def limit_space(aut: MealyAutomaton, level: int, nuc: Nucleus | None = None,
                bound: int = 20) -> TileComplex:
    """Level-``level`` tile graph: words joined when a nucleus element maps one to the other."""
    if level < 1:
        raise DomainError("limit space level must be at least 1")
    if nuc is None:
        got = nucleus(aut, bound)
        if isinstance(got, Undetermined):
            raise DomainError("nucleus undetermined within the bound", "undetermined")
        nuc = got
    k = len(aut.alphabet)
    vertices = list(itertools.product(range(k), repeat=level))
    index = {v: i for i, v in enumerate(vertices)}
    edge_set = set()
    for g in nuc.elements:
        for v in vertices:
            w = g.act(v)
            if w != v:
                a, b = index[v], index[w]
                edge_set.add((min(a, b), max(a, b)))
    edges = sorted(edge_set)
    lower = {v: i for i, v in enumerate(itertools.product(range(k), repeat=level - 1))}
    shift = [lower[v[:-1]] for v in vertices]
    # connected components by union-find
    parent = list(range(len(vertices)))

    def root(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in edges:
        parent[root(a)] = root(b)
    comps: dict[int, list[int]] = {}
    for i in range(len(vertices)):
        comps.setdefault(root(i), []).append(i)
    components = sorted(comps.values())
    # the shift must send edges to edges or collapse them
    lower_edges = set()
    if level > 1:
        lower_edges = {(min(a, b), max(a, b)) for a, b in limit_space(aut, level - 1, nuc).edges}
    for a, b in edges:
        sa, sb = shift[a], shift[b]
        if sa != sb and (min(sa, sb), max(sa, sb)) not in lower_edges:
            raise DomainError("shift does not respect the tile graph")
    return TileComplex(level, vertices, edges, shift, components, aut)


# --------------------------------------------------------------------------
# bundled automata


def odometer() -> MealyAutomaton:
    return MealyAutomaton.from_json({
        "alphabet": ["0", "1"],
        "states": [{"name": "a", "wreath": [["1", "1"], ["0", "a"]]}],
    })


def grigorchuk() -> MealyAutomaton:
    return MealyAutomaton.from_json({
        "alphabet": ["0", "1"],
        "states": [
            {"name": "a", "wreath": [["1", "1"], ["0", "1"]]},
            {"name": "b", "wreath": [["0", "a"], ["1", "c"]]},
            {"name": "c", "wreath": [["0", "a"], ["1", "d"]]},
            {"name": "d", "wreath": [["0", "1"], ["1", "b"]]},
        ],
    })


def trivial_automaton(alphabet: Sequence[str] = ("0", "1")) -> MealyAutomaton:
    k = len(alphabet)
    return MealyAutomaton(tuple(alphabet), {"1": tuple(range(k))}, {"1": ("1",) * k})


def dilation_automaton(A: IntMatrix) -> MealyAutomaton:
    """Self-similar action of Z^d by translations on base-A digit expansions.

    Digits are Smith-form coset representatives of Z^d / A Z^d. For a
    translation ``v`` and digit ``x``, ``v + x = x' + A v'`` defines the output
    digit ``x'`` and restriction ``v'``.
    """
    d = A.rows
    det = A.det()
    if abs(det) < 2:
        raise DomainError("dilation automaton needs |det A| >= 2", "unimodular")
    snf = smith_normal_form(A)
    diag = snf.diagonal
    Uinv = adjugate(snf.U).scale(snf.U.det())  # inverse of a unimodular matrix
    Aadj = adjugate(A)
    digits = []
    for c in itertools.product(*[range(s) for s in diag]):
        digits.append(tuple(Uinv.apply(c)))
    digit_index = {}
    for i, dg in enumerate(digits):
        digit_index[tuple(x % s for x, s in zip(snf.U.apply(dg), diag))] = i

    def split(u: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
        i = digit_index[tuple(x % s for x, s in zip(snf.U.apply(u), diag))]
        diff = [a - b for a, b in zip(u, digits[i])]
        num = Aadj.apply(diff)
        if any(x % det for x in num):
            raise DomainError("digit reduction failed")
        return i, tuple(x // det for x in num)

    def name(v: tuple[int, ...]) -> str:
        return "1" if not any(v) else "t(" + ",".join(map(str, v)) + ")"

    outputs, transitions = {}, {}
    gens = [tuple(int(i == j) for j in range(d)) for i in range(d)]
    queue = deque(gens + [(0,) * d])
    seen = set(queue)
    while queue:
        v = queue.popleft()
        outs, trans = [], []
        for x in range(len(digits)):
            y, r = split(tuple(a + b for a, b in zip(v, digits[x])))
            outs.append(y)
            trans.append(name(r))
            if r not in seen:
                seen.add(r)
                queue.append(r)
        outputs[name(v)] = tuple(outs)
        transitions[name(v)] = tuple(trans)
    return MealyAutomaton(tuple(str(i) for i in range(len(digits))), outputs, transitions)
