"""Root systems at small rank, with exact integer arithmetic.

Roots are integer coordinate vectors in the simple-root basis; inner
products go through the Cartan matrix with the standard length
normalization (long roots of squared length 2), scaled by 6 so that
everything stays integral for B/C/G.  The fixed total order used for
Gauss normal forms lists negative roots first, by increasing height of
the absolute value with a deterministic tiebreak.
"""

from __future__ import annotations

import re
from functools import lru_cache
from itertools import combinations

import numpy as np


class RootSystemError(ValueError):
    """Unsupported type/rank or malformed root data."""


# Cartan matrices, cartan[i][j] = <alpha_i, alpha_j^vee>, and the
# normalized half-lengths d_i = (alpha_i,alpha_i)/2 scaled by 6.
def _cartan_and_lengths(letter: str, rank: int):
    if letter == "A" and 1 <= rank <= 3:
        c = 2 * np.eye(rank, dtype=int)
        for i in range(rank - 1):
            c[i, i + 1] = c[i + 1, i] = -1
        return c, [6] * rank
    if letter == "B" and rank == 2:
        return np.array([[2, -2], [-1, 2]]), [6, 3]
    if letter == "C" and rank == 2:
        return np.array([[2, -1], [-2, 2]]), [3, 6]
    if letter == "D" and rank == 4:
        c = 2 * np.eye(4, dtype=int)
        for i, j in ((0, 1), (1, 2), (1, 3)):
            c[i, j] = c[j, i] = -1
        return c, [6] * 4
    if letter == "G" and rank == 2:
        return np.array([[2, -3], [-1, 2]]), [6, 2]
    raise RootSystemError(f"unsupported root system {letter}{rank}")


SUPPORTED = ("A1", "A2", "A3", "B2", "C2", "D4", "G2")


class RootSystem:
    """An irreducible root system plus its fixed Gauss order."""

    def __init__(self, letter: str, rank: int):
        self.letter = letter
        self.rank = rank
        self.cartan, self._d6 = _cartan_and_lengths(letter, rank)
        # scaled inner products of simple roots: 6*(a_i, a_j) = d6[j]*cartan[i][j]
        self.ip6 = np.array(
            [[self._d6[j] * self.cartan[i][j] for j in range(rank)] for i in range(rank)],
            dtype=np.int64,
        )
        if not (self.ip6 == self.ip6.T).all():
            raise AssertionError("inner product matrix is not symmetric")
        self.roots = self._generate_roots()
        self.root_index = {r: i for i, r in enumerate(self.roots)}
        self.nroots = len(self.roots)
        self.simple = [self.root_index[tuple(int(i == j) for j in range(rank))]
                       for i in range(rank)]
        self.neg = np.array(
            [self.root_index[tuple(-c for c in r)] for r in self.roots], dtype=np.int32
        )
        self.height = np.array([sum(r) for r in self.roots], dtype=np.int32)
        self.sum_table: dict[tuple[int, int], int] = {}
        for i, a in enumerate(self.roots):
            for j, b in enumerate(self.roots):
                s = tuple(x + y for x, y in zip(a, b))
                k = self.root_index.get(s)
                if k is not None:
                    self.sum_table[(i, j)] = k
        self.gauss_order = self._gauss_order()
        self.order_pos = {r: k for k, r in enumerate(self.gauss_order)}
        self._check_invariants()

    # -- construction ---------------------------------------------------------

    def _generate_roots(self):
        simple = [tuple(int(i == j) for j in range(self.rank)) for i in range(self.rank)]
        seen = set(simple)
        frontier = list(simple)
        while frontier:
            nxt = []
            for beta in frontier:
                for j in range(self.rank):
                    pairing = sum(beta[i] * self.cartan[i][j] for i in range(self.rank))
                    refl = tuple(
                        beta[i] - (pairing if i == j else 0) for i in range(self.rank)
                    )
                    if refl not in seen:
                        seen.add(refl)
                        nxt.append(refl)
            frontier = nxt
        return sorted(seen)

    def _gauss_order(self):
        def key(i):
            r = self.roots[i]
            absr = r if self.height[i] > 0 else tuple(-c for c in r)
            return (sum(absr), tuple(-c for c in absr))

        negatives = sorted((i for i in range(self.nroots) if self.height[i] < 0), key=key)
        positives = sorted((i for i in range(self.nroots) if self.height[i] > 0), key=key)
        return negatives + positives

    def _check_invariants(self):
        if any(h == 0 for h in self.height):
            raise AssertionError("zero vector among the roots")
        counts = {"A1": 2, "A2": 6, "A3": 12, "B2": 8, "C2": 8, "D4": 24, "G2": 12}
        expect = counts[f"{self.letter}{self.rank}"]
        if self.nroots != expect:
            raise AssertionError(f"{self.letter}{self.rank}: {self.nroots} roots, want {expect}")
        # unbroken root strings
        for i in range(self.nroots):
            for j in range(self.nroots):
                if j == i or j == self.neg[i]:
                    continue
                p = self.string_down(i, j)
                q = self.string_up(i, j)
                for k in range(-p, q + 1):
                    shifted = tuple(
                        self.roots[j][t] + k * self.roots[i][t] for t in range(self.rank)
                    )
                    if shifted not in self.root_index:
                        raise AssertionError("broken root string")

    # -- exact geometry --------------------------------------------------------

    def inner6(self, i: int, j: int) -> int:
        """6*(root_i, root_j), an exact integer."""
        a, b = self.roots[i], self.roots[j]
        return int(
            sum(a[s] * self.ip6[s][t] * b[t] for s in range(self.rank) for t in range(self.rank))
        )

    def pairing(self, i: int, j: int) -> int:
        """<root_i, root_j^vee> = 2(a,b)/(b,b)."""
        num = 2 * self.inner6(i, j)
        den = self.inner6(j, j)
        if num % den:
            raise AssertionError("non-integral Cartan pairing")
        return num // den

    def add_roots(self, i: int, j: int):
        return self.sum_table.get((i, j))

    def string_down(self, i: int, j: int) -> int:
        """Largest p with root_j - p*root_i a root."""
        p = 0
        cur = self.roots[j]
        step = self.roots[i]
        while True:
            cur = tuple(c - s for c, s in zip(cur, step))
            if cur not in self.root_index:
                return p
            p += 1

    def string_up(self, i: int, j: int) -> int:
        q = 0
        cur = self.roots[j]
        step = self.roots[i]
        while True:
            cur = tuple(c + s for c, s in zip(cur, step))
            if cur not in self.root_index:
                return q
            q += 1

    def reflect(self, i: int, j: int) -> int:
        """Index of s_{root_j}(root_i)."""
        coeff = self.pairing(i, j)
        moved = tuple(
            self.roots[i][t] - coeff * self.roots[j][t] for t in range(self.rank)
        )
        return self.root_index[moved]

    def root_name(self, i: int) -> str:
        terms = []
        for k, c in enumerate(self.roots[i]):
            if c == 0:
                continue
            mag = f"a{k + 1}" if abs(c) == 1 else f"{abs(c)}a{k + 1}"
            terms.append(("-" if c < 0 else "+") + mag)
        s = "".join(terms)
        return s[1:] if s.startswith("+") else s

    def parse_root(self, expr: str) -> int:
        coords = [0] * self.rank
        s = expr.replace(" ", "").replace("-", "+-")
        for term in s.split("+"):
            if not term:
                continue
            m = re.match(r"^(-?)(\d*)a(\d+)$", term)
            if not m:
                raise RootSystemError(f"bad root expression {expr!r}")
            sign = -1 if m.group(1) else 1
            coef = int(m.group(2)) if m.group(2) else 1
            idx = int(m.group(3)) - 1
            if not 0 <= idx < self.rank:
                raise RootSystemError(f"no simple root a{idx + 1} in {self.letter}{self.rank}")
            coords[idx] += sign * coef
        t = tuple(coords)
        if t not in self.root_index:
            raise RootSystemError(f"{expr!r} is not a root of {self.letter}{self.rank}")
        return self.root_index[t]

    def __repr__(self):
        return f"RootSystem({self.letter}{self.rank})"


@lru_cache(maxsize=None)
def build_root_system(letter: str, rank: int) -> RootSystem:
    return RootSystem(letter, int(rank))


def from_name(name: str) -> RootSystem:
    m = re.match(r"^([A-G])(\d+)$", name.strip())
    if not m:
        raise RootSystemError(f"bad root system name {name!r}")
    return build_root_system(m.group(1), int(m.group(2)))


# ---------------------------------------------------------------------------
# Weyl group


class WeylElement:
    """A Weyl group element as a permutation of the root list."""

    __slots__ = ("rs", "perm")

    def __init__(self, rs: RootSystem, perm: tuple[int, ...]):
        self.rs = rs
        self.perm = perm

    def __mul__(self, other: "WeylElement") -> "WeylElement":
        return WeylElement(self.rs, tuple(self.perm[p] for p in other.perm))

    def inverse(self) -> "WeylElement":
        inv = [0] * len(self.perm)
        for i, p in enumerate(self.perm):
            inv[p] = i
        return WeylElement(self.rs, tuple(inv))

    def __call__(self, root: int) -> int:
        return self.perm[root]

    def __eq__(self, other):
        return isinstance(other, WeylElement) and self.perm == other.perm

    def __hash__(self):
        return hash(self.perm)

    def is_identity(self) -> bool:
        return all(i == p for i, p in enumerate(self.perm))


def simple_reflection(rs: RootSystem, j: int) -> WeylElement:
    return WeylElement(rs, tuple(rs.reflect(i, rs.simple[j]) for i in range(rs.nroots)))


def reflection(rs: RootSystem, root: int) -> WeylElement:
    return WeylElement(rs, tuple(rs.reflect(i, root) for i in range(rs.nroots)))


def weyl_group(rs: RootSystem) -> list[WeylElement]:
    """Closure of the simple reflections; deterministic BFS order."""
    gens = [simple_reflection(rs, j) for j in range(rs.rank)]
    identity = WeylElement(rs, tuple(range(rs.nroots)))
    seen = {identity.perm: identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for w in frontier:
            for g in gens:
                u = g * w
                if u.perm not in seen:
                    seen[u.perm] = u
                    nxt.append(u)
        frontier = nxt
    return [seen[p] for p in sorted(seen)]


def weyl_subgroup(rs: RootSystem, member_roots: frozenset[int]) -> list[WeylElement]:
    """Subgroup of W generated by the reflections in the given roots."""
    gens = [reflection(rs, r) for r in sorted(member_roots)]
    identity = WeylElement(rs, tuple(range(rs.nroots)))
    seen = {identity.perm: identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for w in frontier:
            for g in gens:
                u = g * w
                if u.perm not in seen:
                    seen[u.perm] = u
                    nxt.append(u)
        frontier = nxt
    return [seen[p] for p in sorted(seen)]


# ---------------------------------------------------------------------------
# subsystems and closed root sets


class Subsystem:
    """A symmetric, addition-closed subset of the roots."""

    def __init__(self, rs: RootSystem, members):
        self.rs = rs
        self.members = frozenset(int(m) for m in members)
        for m in self.members:
            if int(rs.neg[m]) not in self.members:
                raise RootSystemError("subsystem is not symmetric")
        for a in self.members:
            for b in self.members:
                s = rs.add_roots(a, b)
                if s is not None and s not in self.members:
                    raise RootSystemError("subsystem is not closed under addition")
        if len(self.members) >= rs.nroots:
            raise RootSystemError("subsystem must be a proper subset")

    def __contains__(self, r: int) -> bool:
        return int(r) in self.members

    def __len__(self):
        return len(self.members)


def subsystem_closure(rs: RootSystem, seed) -> frozenset[int]:
    """Smallest symmetric addition-closed subset containing the seed roots."""
    cur = set(int(s) for s in seed)
    cur |= {int(rs.neg[s]) for s in cur}
    changed = True
    while changed:
        changed = False
        for a in list(cur):
            for b in list(cur):
                s = rs.add_roots(a, b)
                if s is not None and s not in cur:
                    cur.add(s)
                    cur.add(int(rs.neg[s]))
                    changed = True
    return frozenset(cur)


class ClosedRootSet:
    """Addition-closed (not necessarily symmetric) subset of the roots."""

    def __init__(self, rs: RootSystem, members):
        self.rs = rs
        self.members = frozenset(int(m) for m in members)
        for a in self.members:
            for b in self.members:
                s = rs.add_roots(a, b)
                if s is not None and s not in self.members:
                    raise RootSystemError("root set is not closed under addition")

    def __contains__(self, r: int) -> bool:
        return int(r) in self.members

    def symmetric_part(self) -> frozenset[int]:
        return frozenset(m for m in self.members if int(self.rs.neg[m]) in self.members)


def irreducible_components(d: Subsystem) -> list[dict]:
    """Partition into mutually orthogonal irreducible subsystems; each entry
    carries an is_A1 flag."""
    rs = d.rs
    members = sorted(d.members)
    adj = {m: set() for m in members}
    for a, b in combinations(members, 2):
        if rs.inner6(a, b) != 0:
            adj[a].add(b)
            adj[b].add(a)
    seen: set[int] = set()
    comps = []
    for m in members:
        if m in seen:
            continue
        stack, comp = [m], set()
        while stack:
            x = stack.pop()
            if x in comp:
                continue
            comp.add(x)
            stack.extend(adj[x] - comp)
        seen |= comp
        comps.append({"members": frozenset(comp), "is_A1": len(comp) == 2})
    return comps
