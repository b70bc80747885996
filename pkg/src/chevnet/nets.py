"""Nets of ideals over (Phi, Delta, R).

A net assigns an ideal sigma_alpha to every root such that
sigma_alpha * sigma_beta <= sigma_{alpha+beta} whenever all three are
roots, and sigma_alpha = R on Delta.  Pointwise intersections with an
ideal keep only the first axiom, so they are a separate value kind
(IdealFamily) that net-requiring operations reject.
"""

from __future__ import annotations

from .ringkit import FiniteRing, Ideal, RingMap, zero_ideal, unit_ideal
from .rootsys import ClosedRootSet, RootSystem, Subsystem, WeylElement, weyl_group


class NetError(ValueError):
    pass


class IdealFamily:
    """A plain root -> ideal assignment (e.g. sigma cap I); not a Net."""

    def __init__(self, rs: RootSystem, ring: FiniteRing, sigma: dict[int, Ideal]):
        self.rs = rs
        self.ring = ring
        self.sigma = dict(sigma)

    def __getitem__(self, root: int) -> Ideal:
        return self.sigma[root]


class Net:
    """A validated net of ideals."""

    def __init__(self, rs: RootSystem, delta: Subsystem, ring: FiniteRing,
                 sigma: dict[int, Ideal], validate: bool = True):
        self.rs = rs
        self.delta = delta
        self.ring = ring
        self.sigma = dict(sigma)
        if len(self.sigma) != rs.nroots:
            raise NetError("sigma must be defined on every root")
        if validate:
            ok, violation = validate_net(self)
            if not ok:
                raise NetError(f"net axioms violated at {violation}")

    def __getitem__(self, root: int) -> Ideal:
        return self.sigma[root]

    def is_full(self) -> bool:
        return all(len(i) == self.ring.size for i in self.sigma.values())

    def describe(self) -> dict[str, str]:
        return {self.rs.root_name(r): self.sigma[r].describe()
                for r in self.rs.gauss_order}

    def __eq__(self, other):
        return (isinstance(other, Net) and self.ring is other.ring
                and all(self.sigma[r] == other.sigma[r] for r in self.sigma))

    def __hash__(self):
        return hash(tuple(self.sigma[r].members for r in sorted(self.sigma)))


def validate_net(n: Net):
    """Check both axioms exhaustively; returns (ok, first violation)."""
    for alpha in n.delta.members:
        if len(n.sigma[alpha]) != n.ring.size:
            return False, ("axiom2", alpha)
    for (a, b), s in n.rs.sum_table.items():
        prod = n.sigma[a].product(n.sigma[b])
        if not prod <= n.sigma[s]:
            return False, ("axiom1", (a, b))
    return True, None


def net_close(rs: RootSystem, delta: Subsystem, ring: FiniteRing,
              assignment: dict[int, list[int]] | None = None) -> Net:
    """Smallest net dominating the given partial root -> generators map."""
    assignment = assignment or {}
    sigma: dict[int, Ideal] = {}
    for r in range(rs.nroots):
        gens = assignment.get(r, [])
        sigma[r] = Ideal.from_gens(ring, gens) if gens else zero_ideal(ring)
    full = unit_ideal(ring)
    for r in delta.members:
        sigma[r] = full
    changed = True
    while changed:
        changed = False
        for (a, b), s in rs.sum_table.items():
            prod = sigma[a].product(sigma[b])
            if not prod <= sigma[s]:
                sigma[s] = sigma[s].sum(prod)
                changed = True
    return Net(rs, delta, ring, sigma)


def net_intersect_ideal(n: Net, ideal: Ideal) -> IdealFamily:
    """Pointwise sigma_alpha cap I; only the first net axiom survives."""
    if ideal.ring is not n.ring:
        raise NetError("ideal of a different ring")
    return IdealFamily(n.rs, n.ring,
                       {r: n.sigma[r].intersection(ideal) for r in n.sigma})


def net_image(n: Net, f: RingMap) -> Net:
    """Push a net through a unital ring map (ideal generated by the image)."""
    if f.domain is not n.ring:
        raise NetError("map domain does not match the net's ring")
    sigma = {}
    for r, ideal in n.sigma.items():
        sigma[r] = Ideal.from_gens(f.codomain, {int(f.table[x]) for x in ideal.members})
    return Net(n.rs, n.delta, f.codomain, sigma)


def weyl_stabilizer(n: Net) -> list[WeylElement]:
    """{w in W(Phi) : sigma_{w alpha} = sigma_alpha for all alpha}."""
    out = [w for w in weyl_group(n.rs)
           if all(n.sigma[w(r)] == n.sigma[r] for r in range(n.rs.nroots))]
    # subgroup sanity: closed under composition
    perms = {w.perm for w in out}
    for u in out:
        for v in out:
            if (u * v).perm not in perms:
                raise AssertionError("weyl stabilizer is not closed")
    return out


def delta_prime(n: Net, p: Ideal) -> ClosedRootSet:
    """Delta'_P = {alpha : sigma_alpha not contained in P}; closed, contains Delta."""
    from .ringkit import local_decomposition

    maximal = [f.max_ideal for f in local_decomposition(n.ring).factors]
    if all(p != m for m in maximal):
        raise NetError("P is not a maximal ideal")
    members = {r for r in n.sigma if not n.sigma[r] <= p}
    out = ClosedRootSet(n.rs, members)
    if not n.delta.members <= out.members:
        raise AssertionError("Delta'_P does not contain Delta")
    return out


def defining_primes(n: Net) -> list[Ideal]:
    """All maximal ideals minimal among those sharing their Delta'_P.  Over a
    finite ring every prime is maximal, so every prime is defining."""
    from .ringkit import local_decomposition

    maximal = [f.max_ideal for f in local_decomposition(n.ring).factors]
    groups: dict[frozenset, list[Ideal]] = {}
    for p in maximal:
        key = delta_prime(n, p).members
        groups.setdefault(key, []).append(p)
    out = []
    for ps in groups.values():
        for p in ps:
            if not any(q.members < p.members for q in ps):
                out.append(p)
    return out


def sigma_from_closed_set(rs: RootSystem, delta: Subsystem, ring: FiniteRing,
                          dprime: ClosedRootSet) -> Net:
    """The net sigma_{Delta'}: R on Delta', (0) outside."""
    if not delta.members <= dprime.members:
        raise NetError("Delta' must contain Delta")
    full = unit_ideal(ring)
    zero = zero_ideal(ring)
    sigma = {r: (full if r in dprime.members else zero) for r in range(rs.nroots)}
    return Net(rs, delta, ring, sigma)


def full_net(rs: RootSystem, delta: Subsystem, ring: FiniteRing) -> Net:
    full = unit_ideal(ring)
    return Net(rs, delta, ring, {r: full for r in range(rs.nroots)})
