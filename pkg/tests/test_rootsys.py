import math

import pytest

from chevnet.rootsys import (RootSystemError, Subsystem, build_root_system,
                             from_name, irreducible_components,
                             subsystem_closure, weyl_group)


def classical_b2_roots():
    """Independent B2 model: +-e1, +-e2, +-e1+-e2 with a1=e1-e2, a2=e2."""
    evecs = []
    for s1 in (1, -1):
        evecs.append((s1, 0))
        evecs.append((0, s1))
        for s2 in (1, -1):
            evecs.append((s1, s2))
    # change of basis: e1 = a1 + a2, e2 = a2
    out = set()
    for x, y in evecs:
        out.add((x, x + y))
    return out


def test_root_counts():
    assert from_name("A1").nroots == 2
    a2 = from_name("A2")
    assert a2.nroots == 6
    expected = {(1, 0), (0, 1), (1, 1), (-1, 0), (0, -1), (-1, -1)}
    assert set(a2.roots) == expected
    assert sum(a2.height[r] > 0 for r in range(6)) == 3
    assert from_name("A3").nroots == 12


def test_b2_against_classical_construction():
    b2 = from_name("B2")
    assert set(b2.roots) == classical_b2_roots()
    assert b2.nroots == 8


def test_unsupported_system_rejected():
    with pytest.raises(RootSystemError):
        build_root_system("E", 6)
    with pytest.raises(RootSystemError):
        build_root_system("A", 9)


@pytest.mark.parametrize("name,order", [
    ("A1", 2),                      # single flip
    ("A2", math.factorial(3)),      # S_3
    ("A3", math.factorial(4)),      # S_4
    ("B2", 2**2 * math.factorial(2)),
    ("C2", 2**2 * math.factorial(2)),
    ("D4", 2**3 * math.factorial(4)),
    ("G2", 12),
])
def test_weyl_group_orders(name, order):
    assert len(weyl_group(from_name(name))) == order


@pytest.mark.parametrize("name", ["A2", "B2", "A3"])
def test_weyl_preserves_root_sums(name):
    rs = from_name(name)
    for w in weyl_group(rs):
        for (i, j), k in rs.sum_table.items():
            assert rs.add_roots(w(i), w(j)) == w(k)


def test_weyl_group_closed_under_composition_and_inverse():
    rs = from_name("B2")
    ws = weyl_group(rs)
    perms = {w.perm for w in ws}
    for u in ws:
        assert u.inverse().perm in perms
        for v in ws:
            assert (u * v).perm in perms


def test_gauss_order_a2():
    rs = from_name("A2")
    assert [rs.root_name(i) for i in rs.gauss_order] == [
        "-a1", "-a2", "-a1-a2", "a1", "a2", "a1+a2"]


def test_gauss_order_a1():
    rs = from_name("A1")
    assert [rs.root_name(i) for i in rs.gauss_order] == ["-a1", "a1"]


def test_gauss_order_b2_heights():
    rs = from_name("B2")
    order = rs.gauss_order
    assert all(rs.height[i] < 0 for i in order[:4])
    assert all(rs.height[i] > 0 for i in order[4:])
    assert [abs(int(rs.height[i])) for i in order] == [1, 1, 2, 3, 1, 1, 2, 3]


def test_gauss_order_reproducible():
    assert from_name("B2").gauss_order == build_root_system("B", 2).gauss_order


def test_components_rank1():
    rs = from_name("A2")
    d = Subsystem(rs, subsystem_closure(rs, [rs.parse_root("a1")]))
    comps = irreducible_components(d)
    assert len(comps) == 1 and comps[0]["is_A1"]


def test_components_two_a1():
    rs = from_name("A3")
    # a1 and a3 are orthogonal in A3
    assert rs.inner6(rs.parse_root("a1"), rs.parse_root("a3")) == 0
    d = Subsystem(rs, subsystem_closure(rs, [rs.parse_root("a1"), rs.parse_root("a3")]))
    comps = irreducible_components(d)
    assert len(comps) == 2 and all(c["is_A1"] for c in comps)


def test_components_a2_inside_a3():
    rs = from_name("A3")
    d = Subsystem(rs, subsystem_closure(rs, [rs.parse_root("a1"), rs.parse_root("a2")]))
    comps = irreducible_components(d)
    assert len(comps) == 1 and not comps[0]["is_A1"]
    assert len(comps[0]["members"]) == 6


def test_subsystem_validation():
    rs = from_name("A2")
    with pytest.raises(RootSystemError):
        Subsystem(rs, [rs.parse_root("a1")])  # not symmetric
    with pytest.raises(RootSystemError):
        Subsystem(rs, range(rs.nroots))  # not proper


def test_subsystem_closure_idempotent():
    rs = from_name("A3")
    for seed in ([rs.parse_root("a1")], [rs.parse_root("a1"), rs.parse_root("a2")]):
        c1 = subsystem_closure(rs, seed)
        assert subsystem_closure(rs, c1) == c1


def test_parse_root_errors():
    rs = from_name("A2")
    with pytest.raises(RootSystemError):
        rs.parse_root("a3")
    with pytest.raises(RootSystemError):
        rs.parse_root("2a1")  # not a root
    assert rs.root_name(rs.parse_root("-a1-a2")) == "-a1-a2"
