import math
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from chevnet.chevalg import (LieElement, LSigma, bracket, check_condition_star,
                             compute_structure_constants, in_L_sigma)
from chevnet.cli import structure_constant_lines
from chevnet.nets import net_close
from chevnet.ringkit import zmod
from chevnet.rootsys import Subsystem, from_name, subsystem_closure

GOLDEN = Path(__file__).parent / "golden"


def string_down_oracle(rs, a, b):
    """Brute p: walk b - k*a through the coordinate set."""
    p = 0
    cur = rs.roots[b]
    while True:
        cur = tuple(x - y for x, y in zip(cur, rs.roots[a]))
        if cur not in rs.root_index:
            return p
        p += 1


def test_n_magnitudes_a2():
    rs = from_name("A2")
    sc = compute_structure_constants(rs)
    a1, a2 = rs.parse_root("a1"), rs.parse_root("a2")
    assert string_down_oracle(rs, a1, a2) == 0
    assert abs(sc.N[(a1, a2)]) == 1


def test_n_magnitudes_b2():
    rs = from_name("B2")
    sc = compute_structure_constants(rs)
    a1, a2, s = rs.parse_root("a1"), rs.parse_root("a2"), rs.parse_root("a1+a2")
    assert string_down_oracle(rs, a2, s) == 1  # (a1+a2) - a2 = a1 is a root
    assert abs(sc.N[(a2, s)]) == 2


@pytest.mark.parametrize("name", ["A2", "B2", "A3", "C2", "G2", "D4"])
def test_n_defined_exactly_on_summable_pairs(name):
    rs = from_name(name)
    sc = compute_structure_constants(rs)
    assert set(sc.N) == set(rs.sum_table)
    for (i, j), n in sc.N.items():
        assert abs(n) == string_down_oracle(rs, i, j) + 1
        assert sc.N[(j, i)] == -n
        assert sc.N[(int(rs.neg[i]), int(rs.neg[j]))] == -n


@pytest.mark.parametrize("name", ["A2", "B2"])
def test_jacobi_identity_brute_force(name):
    """Independent of the einsum check inside the builder: a plain triple
    loop over basis elements with exact integer arithmetic."""
    rs = from_name(name)
    sc = compute_structure_constants(rs)
    C = sc.bracket_table
    d = sc.dim

    def brk(u, v):
        out = np.zeros(d, dtype=np.int64)
        for i in range(d):
            if not u[i]:
                continue
            for j in range(d):
                if v[j]:
                    out += u[i] * v[j] * C[i, j]
        return out

    basis = np.eye(d, dtype=np.int64)
    for i in range(d):
        for j in range(d):
            for k in range(d):
                total = (brk(basis[i], brk(basis[j], basis[k]))
                         + brk(basis[j], brk(basis[k], basis[i]))
                         + brk(basis[k], brk(basis[i], basis[j])))
                assert not total.any(), (i, j, k)


def test_divided_powers_integral_and_example():
    rs = from_name("B2")
    sc = compute_structure_constants(rs)
    a1, a2 = rs.parse_root("a1"), rs.parse_root("a2")
    # m_{a2,a1,2} = (1/2) N(a2,a1) N(a2,a1+a2) = (1/2)(+-1)(+-2) = +-1
    expect = Fraction(sc.N[(a2, a1)] * sc.N[(a2, rs.parse_root("a1+a2"))], 2)
    assert expect.denominator == 1
    assert sc.divided[(a2, a1, 2)] == int(expect)
    assert all(isinstance(v, int) for v in sc.divided.values())


def test_template_at_zero_is_identity():
    rs = from_name("A2")
    sc = compute_structure_constants(rs)
    ring = zmod(4)
    for root in range(rs.nroots):
        mat = sc.template(root).evaluate(ring, 0)
        ident = np.zeros((sc.dim, sc.dim), dtype=np.int32)
        np.fill_diagonal(ident, ring.one)
        assert (mat == ident).all()


def test_template_action_on_opposite_root_vector():
    """x_a(xi) e_{-a} = e_{-a} + xi h_a - xi^2 e_a, against an exact
    matrix-exponential oracle over the rationals."""
    rs = from_name("A2")
    sc = compute_structure_constants(rs)
    a1 = rs.parse_root("a1")
    t = sc.template(a1)
    v = np.zeros(sc.dim, dtype=np.int64)
    v[sc.basis_pos[int(rs.neg[a1])]] = 1
    lin = t.powers[1] @ v
    quad = t.powers[2] @ v
    assert (lin[: rs.rank] == sc.coroot[a1]).all()
    assert quad[sc.basis_pos[a1]] == -1
    # oracle: exp(ad e_a) as an exact rational series
    A = sc.ad_matrix(a1).astype(object)
    E = np.eye(sc.dim, dtype=object)
    term = np.eye(sc.dim, dtype=object)
    k = 1
    while True:
        term = term @ A
        if not term.any():
            break
        E = E + term * Fraction(1, math.factorial(k))
        k += 1
    total = sum(p.astype(object) for p in t.powers)
    assert (E == total).all()


@pytest.mark.parametrize("name,n", [("A2", 4), ("A2", 3), ("B2", 3)])
def test_one_parameter_subgroup_exact(name, n):
    rs = from_name(name)
    sc = compute_structure_constants(rs)
    ring = zmod(n)
    for root in range(rs.nroots):
        t = sc.template(root)
        for xi in range(n):
            for zeta in range(n):
                lhs = t.evaluate(ring, xi)
                rhs = t.evaluate(ring, zeta)
                prod = _ring_matmul(ring, lhs, rhs)
                assert (prod == t.evaluate(ring, int(ring.add[xi, zeta]))).all()


def _ring_matmul(ring, a, b):
    d = a.shape[0]
    acc = ring.mul[a[:, 0][:, None], b[0, :][None, :]]
    for k in range(1, d):
        acc = ring.add[acc, ring.mul[a[:, k][:, None], b[k, :][None, :]]]
    return acc


def test_commutator_formula_matrix_exact_spot():
    rs = from_name("B2")
    sc = compute_structure_constants(rs)
    ring = zmod(4)
    a1, a2 = rs.parse_root("a1"), rs.parse_root("a2")
    terms = sc.commutator_terms(a1, a2)
    for xi in range(4):
        for zeta in range(4):
            ta, tb = sc.template(a1), sc.template(a2)
            lhs = _ring_matmul(ring, _ring_matmul(ring, ta.evaluate(ring, xi),
                                                  tb.evaluate(ring, zeta)),
                               _ring_matmul(ring,
                                            ta.evaluate(ring, int(ring.neg[xi])),
                                            tb.evaluate(ring, int(ring.neg[zeta]))))
            rhs = None
            for i, j, root, c in terms:
                arg = ring.mul[ring.from_int(c),
                               ring.mul[ring.pow(xi, i), ring.pow(zeta, j)]]
                m = sc.template(root).evaluate(ring, int(arg))
                rhs = m if rhs is None else _ring_matmul(ring, rhs, m)
            assert (lhs == rhs).all()


def test_g2_commutator_terms_derivable():
    """Triple-laced strings: the symbolic peeling must handle up to four
    factors per swap."""
    rs = from_name("G2")
    sc = compute_structure_constants(rs)
    a1, a2 = rs.parse_root("a1"), rs.parse_root("a2")
    terms = sc.commutator_terms(a2, a1)
    assert [(i, j) for i, j, _, _ in terms] == [(1, 1), (2, 1), (3, 1), (3, 2)]
    assert all(isinstance(c, int) for _, _, _, c in terms)


def test_condition_star_examples():
    rs = from_name("A2")
    sc = compute_structure_constants(rs)
    delta = Subsystem(rs, subsystem_closure(rs, [rs.parse_root("a1")]))
    ok, witness = check_condition_star(rs, delta, sc, zmod(4))
    assert ok and set(witness) == set(range(rs.nroots)) - delta.members

    empty = Subsystem(rs, [])
    ok2, failing = check_condition_star(rs, empty, sc, zmod(4))
    assert not ok2

    b2 = from_name("B2")
    scb = compute_structure_constants(b2)
    d_long = Subsystem(b2, subsystem_closure(b2, [b2.parse_root("a1")]))
    d_short = Subsystem(b2, subsystem_closure(b2, [b2.parse_root("a2")]))
    # the opposite long root has no Delta-partner at all: fails over any ring
    assert not check_condition_star(b2, d_long, scb, zmod(3))[0]
    assert not check_condition_star(b2, d_long, scb, zmod(2))[0]
    # short-root A1 needs the constant 2 to be a unit
    assert check_condition_star(b2, d_short, scb, zmod(3))[0]
    assert not check_condition_star(b2, d_short, scb, zmod(2))[0]


def test_bracket_over_ring():
    rs = from_name("A2")
    sc = compute_structure_constants(rs)
    ring = zmod(4)
    a1 = rs.parse_root("a1")
    e = LieElement.basis_e(sc, ring, a1)
    f = LieElement.basis_e(sc, ring, int(rs.neg[a1]))
    h = bracket(e, f)
    assert list(h.vec[: rs.rank]) == [ring.from_int(int(c)) for c in sc.coroot[a1]]
    assert not h.vec[rs.rank:].any()
    h1 = LieElement.basis_h(sc, ring, 0)
    h2 = LieElement.basis_h(sc, ring, 1)
    assert not bracket(h1, h2).vec.any()
    with pytest.raises(ValueError):
        bracket(e, LieElement.basis_h(sc, zmod(3), 0))


def test_L_sigma_membership_and_lemma2():
    rs = from_name("A2")
    ring = zmod(4)
    delta = Subsystem(rs, subsystem_closure(rs, [rs.parse_root("a1")]))
    net = net_close(rs, delta, ring, {rs.parse_root("a2"): [2]})
    L = LSigma(net)
    sc = L.sc
    a2 = rs.parse_root("a2")
    assert in_L_sigma(LieElement.basis_h(sc, ring, 0), L)
    assert in_L_sigma(LieElement.basis_e(sc, ring, a2, 2), L)
    assert not in_L_sigma(LieElement.basis_e(sc, ring, a2, 1), L)
    # Lemma: brackets of module generators stay inside
    gens = L.module_generators()
    for x in gens:
        for y in gens:
            assert in_L_sigma(bracket(x, y), L)


@pytest.mark.parametrize("name", ["A2", "B2"])
def test_golden_structure_constant_tables(name):
    got = structure_constant_lines(name)
    want = (GOLDEN / f"{name}_constants.txt").read_text().splitlines()
    assert got == want
