"""Coxeter graphs of root systems and Vinberg's finite-volume criterion.

Edge weights are ``m = 4 (v.w)^2 / (v.v w.w)``: ``m = 1`` is a plain
edge, ``m = 2`` an edge labelled 4, ``m = 3`` an edge labelled 6,
``m = 4`` a thick edge and ``m > 4`` a dotted edge.

Subdiagrams are classified by the exact signature of the Gram matrix of
their roots.  The named catalog is used for display only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from . import linalg
from .lattice import Lattice


class GraphError(ValueError):
    pass


@dataclass
class CoxeterGraph:
    """Weighted graph on a list of roots."""

    lattice: Lattice
    roots: List[Tuple[int, ...]]
    names: List[str]
    squares: List[int]
    gram: List[List[int]]
    weights: List[List[Fraction]]
    _cache: Dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return len(self.roots)

    def adjacent(self, i: int, j: int) -> bool:
        return i != j and self.weights[i][j] > 0

    def neighbours(self, i: int) -> List[int]:
        return [j for j in range(self.size) if self.adjacent(i, j)]

    def edges(self) -> List[Tuple[int, int, Fraction]]:
        return [(i, j, self.weights[i][j]) for i in range(self.size) for j in range(i + 1, self.size)
                if self.weights[i][j] > 0]

    def index(self, name: str) -> int:
        return self.names.index(name)

    def subgraph(self, idx: Sequence[int]) -> "CoxeterGraph":
        idx = list(idx)
        return build_graph(self.lattice, [self.roots[i] for i in idx], [self.names[i] for i in idx])

    def to_json(self) -> Dict:
        return {
            "vertices": [{"name": n, "coords": list(r), "square": s}
                         for n, r, s in zip(self.names, self.roots, self.squares)],
            "edges": [{"u": self.names[i], "v": self.names[j], "m": str(m)} for i, j, m in self.edges()],
        }


def build_graph(L: Lattice, roots: Sequence[Sequence[int]], names: Optional[Sequence[str]] = None) -> CoxeterGraph:
    """Coxeter graph of ``roots``; weights are exact rationals."""
    roots = [tuple(int(x) for x in r) for r in roots]
    if len(set(roots)) != len(roots):
        raise GraphError("duplicate roots")
    if names is None:
        names = [f"r{i + 1}" for i in range(len(roots))]
    names = list(names)
    k = len(roots)
    prods = [L.products(r) for r in roots]
    gram = [[sum(a * b for a, b in zip(prods[i], roots[j])) for j in range(k)] for i in range(k)]
    squares = [gram[i][i] for i in range(k)]
    weights = [[Fraction(0)] * k for _ in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            g = gram[i][j]
            if g:
                m = Fraction(4 * g * g, squares[i] * squares[j])
                weights[i][j] = weights[j][i] = m
    return CoxeterGraph(L, roots, names, squares, gram, weights)


# ---------------------------------------------------------------------------
# Names of connected elliptic and parabolic diagrams


def _components(G: CoxeterGraph, verts: Iterable[int]) -> List[List[int]]:
    verts = list(verts)
    left = set(verts)
    comps = []
    for v in verts:
        if v not in left:
            continue
        comp, stack = [], [v]
        left.discard(v)
        while stack:
            x = stack.pop()
            comp.append(x)
            for y in list(left):
                if G.adjacent(x, y):
                    left.discard(y)
                    stack.append(y)
        comps.append(sorted(comp))
    return comps


def _legs(G, comp, centre):
    """Lengths of the branches hanging off ``centre`` inside ``comp``."""
    inside = set(comp)
    legs = []
    for nb in G.neighbours(centre):
        if nb not in inside:
            continue
        length, prev, cur = 1, centre, nb
        while True:
            nxt = [y for y in G.neighbours(cur) if y in inside and y != prev]
            if len(nxt) != 1:
                break
            prev, cur = cur, nxt[0]
            length += 1
        legs.append(length)
    return sorted(legs)


def _shape(G, comp):
    inside = set(comp)
    deg = {v: sum(1 for y in G.neighbours(v) if y in inside) for v in comp}
    ws = sorted(G.weights[i][j] for i in comp for j in comp if i < j and G.weights[i][j] > 0)
    return deg, ws


def _path_order(G, comp, deg):
    inside = set(comp)
    ends = [v for v in comp if deg[v] <= 1]
    if not ends:
        return None
    order, prev, cur = [ends[0]], None, ends[0]
    while True:
        nxt = [y for y in G.neighbours(cur) if y in inside and y != prev]
        if not nxt:
            break
        prev, cur = cur, nxt[0]
        order.append(cur)
    return order


def elliptic_name(G: CoxeterGraph, comp: Sequence[int]) -> str:
    k = len(comp)
    if k == 1:
        return "A1"
    deg, ws = _shape(G, comp)
    if any(w == 3 for w in ws):
        return "G2" if k == 2 else f"X{k}"
    twos = ws.count(2)
    if twos == 0:
        if max(deg.values()) <= 2:
            return f"A{k}"
        centre = [v for v in comp if deg[v] == 3]
        if len(centre) == 1:
            legs = _legs(G, comp, centre[0])
            if legs[:2] == [1, 1]:
                return f"D{k}"
            if legs == [1, 2, 2]:
                return "E6"
            if legs == [1, 2, 3]:
                return "E7"
            if legs == [1, 2, 4]:
                return "E8"
        return f"X{k}"
    if twos == 1 and max(deg.values()) <= 2:
        order = _path_order(G, comp, deg)
        pos = [i for i in range(k - 1) if G.weights[order[i]][order[i + 1]] == 2][0]
        if pos in (0, k - 2):
            return f"B{k}"
        if k == 4:
            return "F4"
    return f"X{k}"


def parabolic_name(G: CoxeterGraph, comp: Sequence[int]) -> str:
    k = len(comp)
    if k == 2:
        return "~A1"
    deg, ws = _shape(G, comp)
    if any(w == 3 for w in ws):
        return "~G2" if k == 3 else f"~X{k - 1}"
    twos = ws.count(2)
    if all(d == 2 for d in deg.values()) and twos == 0:
        return f"~A{k - 1}"
    if twos == 0:
        branch = [v for v in comp if deg[v] >= 3]
        if len(branch) == 1 and deg[branch[0]] == 4:
            return "~D4"
        if len(branch) == 2:
            return f"~D{k - 1}"
        if len(branch) == 1:
            legs = _legs(G, comp, branch[0])
            if legs == [2, 2, 2]:
                return "~E6"
            if legs == [1, 3, 3]:
                return "~E7"
            if legs == [1, 2, 5]:
                return "~E8"
        return f"~X{k - 1}"
    if twos == 2 and max(deg.values()) <= 2:
        return f"~C{k - 1}"
    if twos == 1:
        if max(deg.values()) <= 2:
            if k == 5:
                return "~F4"
            return f"~X{k - 1}"
        return f"~B{k - 1}"
    return f"~X{k - 1}"


def _join_names(names: List[str]) -> str:
    counts: Dict[str, int] = {}
    for n in names:
        counts[n] = counts.get(n, 0) + 1

    def key(n):
        base = n.lstrip("~")
        return (base[0], int(base[1:]) if base[1:].isdigit() else 0, n)

    parts = []
    for n in sorted(counts, key=key):
        c = counts[n]
        parts.append(f"{c}{n}" if c > 1 else n)
    return "+".join(parts)


# ---------------------------------------------------------------------------
# Classification


@dataclass(frozen=True)
class SubdiagramClass:
    kind: str  # elliptic | parabolic | lanner | other
    name: str
    rank: int


def _inertia(G: CoxeterGraph, I: Sequence[int]):
    M = [[G.gram[i][j] for j in I] for i in I]
    return linalg.inertia(M)


def classify_subdiagram(G: CoxeterGraph, I: Iterable[int]) -> SubdiagramClass:
    """Elliptic, parabolic, Lanner or other, decided by exact signature."""
    I = sorted(set(I))
    if not I:
        raise GraphError("empty subdiagram")
    plus, minus, zero = _inertia(G, I)
    comps = _components(G, I)
    if minus == 0 and zero == 0:
        return SubdiagramClass("elliptic", _join_names([elliptic_name(G, c) for c in comps]), len(I))
    if minus == 0:
        ok = True
        names = []
        for c in comps:
            p, m, z = _inertia(G, c)
            if z != 1:
                ok = False
                break
            names.append(parabolic_name(G, c))
        if ok:
            return SubdiagramClass("parabolic", _join_names(names), len(I) - len(comps))
        return SubdiagramClass("other", "", len(I))
    if minus == 1 and zero == 0 and len(comps) == 1:
        if all(_inertia(G, [j for j in I if j != i])[1:] == (0, 0) for i in I):
            return SubdiagramClass("lanner", f"L{len(I)}", len(I))
    return SubdiagramClass("other", "", len(I))


def _bits(mask: int) -> List[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


class SubdiagramCensus:
    """All connected elliptic, connected parabolic and Lanner subdiagrams.

    Connected sets are grown one vertex at a time from connected elliptic
    sets; the sign of the Schur complement of the new vertex (from an
    incremental LDL factorization) decides the class of the extension.
    """

    def __init__(self, G: CoxeterGraph, max_size: Optional[int] = None):
        self.G = G
        k = G.size
        self.nbr = [0] * k
        for i in range(k):
            for j in G.neighbours(i):
                self.nbr[i] |= 1 << j
        self.elliptic: set = set()
        self.parabolic: List[int] = []
        self.lanner: List[int] = []
        self._par: set = set()
        self._lan: set = set()
        gram = [[mpq(x) for x in row] for row in G.gram]
        layer = {}
        for i in range(k):
            layer[1 << i] = ([i], [[]], [gram[i][i]])  # order, L rows, D
            self.elliptic.add(1 << i)
        limit = max_size or k
        size = 1
        while layer and size < limit:
            nxt = {}
            for mask, (order, Lr, D) in layer.items():
                frontier = 0
                for v in order:
                    frontier |= self.nbr[v]
                frontier &= ~mask
                for w in _bits(frontier):
                    new = mask | (1 << w)
                    if new in nxt or new in self.elliptic:
                        continue
                    # LDL row for w against ``order``
                    row = []
                    for a in range(len(order)):
                        s = gram[w][order[a]]
                        for b in range(a):
                            s -= row[b] * Lr[a][b] * D[b]
                        row.append(s / D[a])
                    d = gram[w][w] - sum(row[b] * row[b] * D[b] for b in range(len(order)))
                    if d > 0:
                        nxt[new] = (order + [w], Lr + [row], D + [d])
                    elif d == 0:
                        if new not in self._par:
                            self._par.add(new)
                            self.parabolic.append(new)
                    else:
                        self._maybe_lanner(new)
            for m in nxt:
                self.elliptic.add(m)
            layer = nxt
            size += 1

    def _maybe_lanner(self, mask):
        if mask in self._lan:
            return
        for v in _bits(mask):
            if not self.is_elliptic(mask & ~(1 << v)):
                return
        self._lan.add(mask)
        self.lanner.append(mask)

    def components(self, mask: int) -> List[int]:
        comps = []
        left = mask
        while left:
            low = left & -left
            comp = low
            frontier = low
            while frontier:
                grow = 0
                for v in _bits(frontier):
                    grow |= self.nbr[v]
                grow &= left & ~comp
                comp |= grow
                frontier = grow
            comps.append(comp)
            left &= ~comp
        return comps

    def is_elliptic(self, mask: int) -> bool:
        return all(c in self.elliptic for c in self.components(mask))

    def closed_neighbourhood(self, mask: int) -> int:
        out = mask
        for v in _bits(mask):
            out |= self.nbr[v]
        return out


@dataclass
class VolumeReport:
    """Witnesses for the finite-volume test.

    ``parabolic`` rows are ``(component, completion)`` where the completion
    is a list of further parabolic components giving total rank ``n - 1``
    (``None`` if none exists).  ``lanner`` rows are ``(S, T)`` with ``T``
    elliptic, disjoint from and not adjacent to ``S``, and
    ``|S| + |T| = n + 1`` (``None`` if none exists).

    ``criterion`` names the test that certified finiteness:
    ``"parabolic-lanner"`` for the two conditions above, ``"edge-count"``
    when every elliptic subdiagram of rank ``n - 1`` has exactly two
    ends.  ``edge_failure`` holds an elliptic set violating the latter.
    """

    n: int
    spans: bool = True
    connected: bool = True
    has_vertex: bool = True
    parabolic: List[Tuple[Tuple[int, ...], Optional[List[Tuple[int, ...]]]]] = field(default_factory=list)
    lanner: List[Tuple[Tuple[int, ...], Optional[Tuple[int, ...]]]] = field(default_factory=list)
    criterion: Optional[str] = None
    edge_failure: Optional[Tuple[Tuple[int, ...], int]] = None
    graph: Optional[CoxeterGraph] = None

    @property
    def finite(self) -> bool:
        return self.criterion is not None

    @property
    def conditions_hold(self) -> bool:
        """Whether the parabolic and Lanner conditions both hold."""
        return (self.spans and self.has_vertex and all(c is not None for _, c in self.parabolic)
                and all(t is not None for _, t in self.lanner))

    def _n(self, idx):
        return [self.graph.names[i] for i in idx]

    def parabolic_rows(self):
        """``(names, type, completion type)`` per connected parabolic diagram."""
        G = self.graph
        rows = []
        for comp, compl in self.parabolic:
            t = classify_subdiagram(G, comp).name
            ct = None
            if compl is not None:
                ct = _join_names([parabolic_name(G, c) for c in compl]) if compl else ""
            rows.append((self._n(comp), t, ct))
        return rows

    def lanner_rows(self):
        G = self.graph
        rows = []
        for S, T in self.lanner:
            rows.append((self._n(S), None if T is None else self._n(T),
                         None if T is None else (classify_subdiagram(G, T).name if T else "")))
        return rows

    def to_json(self) -> Dict:
        return {
            "n": self.n,
            "finite": self.finite,
            "criterion": self.criterion,
            "spans": self.spans,
            "has_vertex": self.has_vertex,
            "parabolic": [{"set": s, "type": t, "completion": c} for s, t, c in self.parabolic_rows()],
            "lanner": [{"S": s, "T": t, "T_type": tt} for s, t, tt in self.lanner_rows()],
        }


def _parabolic_completion(census, P, target, pars_by_mask):
    """Disjoint, mutually non-adjacent parabolic components of total rank ``target``."""
    blocked = census.closed_neighbourhood(P)
    cands = [(q, r) for q, r in pars_by_mask if not (q & blocked)]
    cands.sort(key=lambda t: -t[1])

    def rec(start, need, blocked, chosen):
        if need == 0:
            return list(chosen)
        for idx in range(start, len(cands)):
            q, r = cands[idx]
            if r > need or q & blocked:
                continue
            chosen.append(q)
            got = rec(idx + 1, need - r, blocked | census.closed_neighbourhood(q), chosen)
            if got is not None:
                return got
            chosen.pop()
        return None

    return rec(0, target, blocked, [])


def _elliptic_of_size(census, allowed: int, target: int) -> Optional[int]:
    """An elliptic subset of ``allowed`` (bitmask) with ``target`` vertices."""
    verts = _bits(allowed)
    if len(verts) < target:
        return None

    def rec(i, chosen, count):
        if count == target:
            return chosen
        if count + (len(verts) - i) < target:
            return None
        v = verts[i]
        new = chosen | (1 << v)
        # only the component containing v can change
        comp = next(c for c in census.components(new) if c >> v & 1)
        if comp in census.elliptic:
            got = rec(i + 1, new, count + 1)
            if got is not None:
                return got
        return rec(i + 1, chosen, count)

    return rec(0, 0, 0)


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _elliptic_sets(census, size: int):
    """All elliptic vertex sets with ``size`` vertices (as bitmasks)."""
    k = census.G.size

    def rec(i, chosen, count):
        if count == size:
            yield chosen
            return
        if count + (k - i) < size:
            return
        new = chosen | (1 << i)
        comp = next(c for c in census.components(new) if c >> i & 1)
        if comp in census.elliptic:
            yield from rec(i + 1, new, count + 1)
        yield from rec(i + 1, chosen, count)

    yield from rec(0, 0, 0)


def _ends(census, S: int) -> int:
    """Elliptic one-vertex extensions plus parabolic rank-preserving covers of ``S``."""
    k = census.G.size
    count = 0
    for w in range(k):
        if S >> w & 1:
            continue
        new = S | (1 << w)
        comp = next(c for c in census.components(new) if c >> w & 1)
        if comp in census.elliptic:
            count += 1
    if not S:
        return count
    comps = census.components(S)
    cands = [Q for Q in census.parabolic
             if _popcount(Q & ~S) == 1 and all(not (Q & C) or not (C & ~Q) for C in comps)]

    def covers(i, used, blocked):
        while i < len(comps) and comps[i] & used:
            i += 1
        if i == len(comps):
            return 1
        C = comps[i]
        total = 0
        for Q in cands:
            if C & ~Q or Q & blocked:
                continue
            total += covers(i + 1, used | Q, blocked | census.closed_neighbourhood(Q))
        return total

    return count + covers(0, 0, 0)


def finite_volume_check(G: CoxeterGraph, n: int, full_report: bool = True):
    """Finite-volume test for the polyhedron cut out by the roots of ``G``.

    Two certificates are tried.  The first is Vinberg's sufficient
    criterion: every connected parabolic diagram completes to a parabolic
    diagram of rank ``n - 1`` and every Lanner diagram ``S`` has an
    elliptic ``T`` away from ``S`` with ``|S| + |T| = n + 1``.  The second
    is the edge count for non-degenerate acute-angled polyhedra: some
    vertex exists and every elliptic diagram of rank ``n - 1`` extends in
    exactly two ways to an elliptic diagram of rank ``n`` or a parabolic
    diagram of rank ``n - 1``.  Both require the roots to span the space
    and the graph to be connected.

    Returns ``("finite", report)`` or ``("unknown", report)``; infinite
    volume is never claimed.
    """
    report = VolumeReport(n, graph=G)
    if G.size == 0 or linalg.rank(G.roots) != n + 1:
        report.spans = False
        return "unknown", report
    census = SubdiagramCensus(G)
    full = (1 << G.size) - 1
    if census.components(full) != [full]:
        report.connected = False
        return "unknown", report
    pars = [(q, _popcount(q) - 1) for q in census.parabolic]
    failed = False
    for q, r in sorted(pars, key=lambda t: (-t[1], t[0])):
        compl = _parabolic_completion(census, q, n - 1 - r, pars) if r <= n - 1 else None
        report.parabolic.append((tuple(_bits(q)), None if compl is None else [tuple(_bits(c)) for c in compl]))
        if compl is None:
            failed = True
            if not full_report:
                break
    if not failed or full_report:
        for S in sorted(census.lanner, key=lambda m: (_popcount(m), m)):
            size = _popcount(S)
            allowed = full & ~census.closed_neighbourhood(S)
            T = _elliptic_of_size(census, allowed, n + 1 - size)
            report.lanner.append((tuple(_bits(S)), None if T is None else tuple(_bits(T))))
            if T is None:
                failed = True
                if not full_report:
                    break
    has_vertex = any(c is not None for _, c in report.parabolic)
    if not has_vertex:
        has_vertex = _elliptic_of_size(census, full, n) is not None
    report.has_vertex = has_vertex
    if not has_vertex:
        return "unknown", report
    if not failed:
        report.criterion = "parabolic-lanner"
        return "finite", report
    for S in _elliptic_sets(census, n - 1):
        e = _ends(census, S)
        if e != 2:
            report.edge_failure = (tuple(_bits(S)), e)
            return "unknown", report
    report.criterion = "edge-count"
    return "finite", report


# ---------------------------------------------------------------------------
# Symmetries


@dataclass(frozen=True)
class GraphSymmetry:
    perm: Tuple[int, ...]

    def __call__(self, i: int) -> int:
        return self.perm[i]

    def compose(self, other: "GraphSymmetry") -> "GraphSymmetry":
        """``self`` after ``other``."""
        return GraphSymmetry(tuple(self.perm[other.perm[i]] for i in range(len(self.perm))))

    def inverse(self) -> "GraphSymmetry":
        inv = [0] * len(self.perm)
        for i, j in enumerate(self.perm):
            inv[j] = i
        return GraphSymmetry(tuple(inv))

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.perm))


def _refine(G: CoxeterGraph, colours: List) -> List[int]:
    k = G.size
    col = list(colours)
    while True:
        sig = [(col[i], tuple(sorted((col[j], G.weights[i][j]) for j in range(k) if j != i and G.weights[i][j] > 0)))
               for i in range(k)]
        ranks = {s: r for r, s in enumerate(sorted(set(sig), key=repr))}
        new = [ranks[s] for s in sig]
        if len(set(new)) == len(set(col)):
            return new
        col = new


def graph_symmetries(G: CoxeterGraph, max_vertices: int = 64) -> List[GraphSymmetry]:
    """All permutations preserving root squares and edge weights."""
    k = G.size
    if k > max_vertices:
        raise GraphError(f"graph has {k} vertices; the bound is {max_vertices}")
    if k == 0:
        return [GraphSymmetry(())]
    colours = _refine(G, [G.squares[i] for i in range(k)])
    cells: Dict[int, List[int]] = {}
    for i, c in enumerate(colours):
        cells.setdefault(c, []).append(i)
    order = sorted(range(k), key=lambda i: (len(cells[colours[i]]), i))
    W = G.weights
    out = []
    image = [-1] * k
    used = [False] * k

    def rec(pos):
        if pos == k:
            out.append(GraphSymmetry(tuple(image)))
            return
        v = order[pos]
        for w in cells[colours[v]]:
            if used[w]:
                continue
            ok = True
            for q in range(pos):
                u = order[q]
                if W[v][u] != W[w][image[u]]:
                    ok = False
                    break
            if not ok:
                continue
            image[v] = w
            used[w] = True
            rec(pos + 1)
            used[w] = False
            image[v] = -1

    rec(0)
    out.sort(key=lambda s: (not s.is_identity(), s.perm))
    return out


def is_symmetry(G: CoxeterGraph, perm: Sequence[int]) -> bool:
    k = G.size
    if sorted(perm) != list(range(k)):
        return False
    return all(G.squares[perm[i]] == G.squares[i] for i in range(k)) and all(
        G.weights[perm[i]][perm[j]] == G.weights[i][j] for i in range(k) for j in range(k))


# ---------------------------------------------------------------------------
# Output


_SHAPES = {2: "circle", 4: "square", 6: "circle"}
_FILL = {2: "white", 4: "black", 6: "black"}


def emit_dot(G: CoxeterGraph) -> str:
    """DOT text: hollow 2-roots, filled 6-roots, boxed 4-roots."""
    lines = ["graph coxeter {", "  node [label=\"\", width=0.2];"]
    for name, s in zip(G.names, G.squares):
        lines.append(f'  "{name}" [xlabel="{name}", shape={_SHAPES[s] if s in _SHAPES else "diamond"}, '
                     f'style=filled, fillcolor={_FILL.get(s, "gray")}];')
    for i, j, m in G.edges():
        a, b = G.names[i], G.names[j]
        if m == 1:
            attr = ""
        elif m == 2:
            attr = ' [label="4"]'
        elif m == 3:
            attr = ' [label="6"]'
        elif m == 4:
            attr = " [penwidth=3]"
        else:
            attr = f' [style=dotted, tooltip="m={m}"]'
        lines.append(f'  "{a}" -- "{b}"{attr};')
    lines.append("}")
    return "\n".join(lines) + "\n"
