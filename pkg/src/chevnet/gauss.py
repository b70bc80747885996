"""Gauss normal forms for congruence-level elements.

A word in congruence torus elements and root elements with arguments in
a (nilpotent) ideal J is rewritten to the unique normal form

    h * prod_{gamma in gauss_order} x_gamma(xi_gamma)

by five local moves: torus-past-x commutation, torus merging, same-root
merging, non-opposite swaps via the Chevalley commutator formula, and
the opposite-root exchange (valid because 1 + xi1*xi2 is a unit when the
arguments sit in J).

gauss_extract peels a bare congruence matrix level by level along
J >= J^2 >= ...: at each level the leading coefficients are read off
through precomputed unit-coefficient probe entries, multiplied away,
and the collected tokens are fed back through the rewriter.
"""

from __future__ import annotations

import numpy as np

from .grp import AdjointGroup, CongruenceFilter
from .ringkit import Ideal

REWRITE_CAP = 10**6


class RewriteError(RuntimeError):
    pass


def char_at_root(ctx: AdjointGroup, chars, root: int) -> int:
    """Value of the torus character on the root's weight."""
    r = ctx.ring
    v = r.one
    for i, m in enumerate(ctx.rs.roots[root]):
        v = int(r.mul[v, r.pow(chars[i], m)])
    return v


def merge_chars(ctx: AdjointGroup, a, b):
    r = ctx.ring
    return tuple(int(r.mul[x, y]) for x, y in zip(a, b))


def _simplify(ctx: AdjointGroup, toks):
    """Drop trivial tokens, merge adjacent same-root x's and adjacent tori."""
    r = ctx.ring
    ident = tuple(r.one for _ in range(ctx.rs.rank))
    while True:
        out = []
        changed = False
        for tok in toks:
            if tok[0] == "x" and tok[2] == 0:
                changed = True
                continue
            if tok[0] == "torus" and tok[1] == ident:
                changed = True
                continue
            if out:
                prev = out[-1]
                if tok[0] == "x" and prev[0] == "x" and prev[1] == tok[1]:
                    out[-1] = ("x", tok[1], int(r.add[prev[2], tok[2]]))
                    changed = True
                    continue
                if tok[0] == "torus" and prev[0] == "torus":
                    out[-1] = ("torus", merge_chars(ctx, prev[1], tok[1]))
                    changed = True
                    continue
            out.append(tok)
        if not changed:
            return out
        toks = out


def gauss_rewrite(ctx: AdjointGroup, word, ideal_j: Ideal, net=None,
                  cap: int = REWRITE_CAP):
    """Rewrite a word over T(R,J)*E(... cap J) generators to normal form.

    Returns (chars, coeffs) with coeffs a dict root -> xi in gauss order.
    The matrix identity normal_form == word is asserted exactly; when a
    net is supplied every argument is asserted to stay inside its
    sigma_gamma cap J.
    """
    r = ctx.ring
    for tok in word:
        if tok[0] == "x":
            if tok[2] not in ideal_j:
                raise RewriteError(f"argument of {tok} is not in J")
            if net is not None and tok[2] not in net.sigma[tok[1]]:
                raise RewriteError(f"argument of {tok} is not in sigma")
        elif tok[0] == "torus":
            for c in tok[1]:
                if int(r.add[c, r.neg[r.one]]) not in ideal_j:
                    raise RewriteError("torus token is not congruent to 1 mod J")
        else:
            raise RewriteError(f"only x/torus tokens are rewritable, got {tok[0]}")
    target = ctx.evaluate_word(word)

    pos = {root: k for k, root in enumerate(ctx.rs.gauss_order)}
    toks = list(word)
    steps = 0
    while True:
        toks = _simplify(ctx, toks)
        applied = False
        for i in range(len(toks) - 1):
            a, b = toks[i], toks[i + 1]
            if a[0] == "x" and b[0] == "torus":
                # x_r(xi) * t  ->  t * x_r(chi(r)^{-1} xi)
                lam = char_at_root(ctx, b[1], a[1])
                xi2 = int(r.mul[r.inv[lam], a[2]])
                toks[i], toks[i + 1] = b, ("x", a[1], xi2)
                applied = True
                break
            if a[0] == "x" and b[0] == "x" and pos[a[1]] > pos[b[1]]:
                g1, xi1 = a[1], a[2]
                g2, xi2 = b[1], b[2]
                if g2 == int(ctx.rs.neg[g1]):
                    # x_g(xi1) x_{-g}(xi2) ->
                    #   x_{-g}(xi2 u^{-1}) x_g(xi1 u) h_g(u),  u = 1 + xi1 xi2
                    u = int(r.add[r.one, r.mul[xi1, xi2]])
                    if not r.units[u]:
                        raise RewriteError("1 + xi1*xi2 is not a unit")
                    h = ctx.h_alpha(g1, u)
                    repl = [
                        ("x", g2, int(r.mul[xi2, r.inv[u]])),
                        ("x", g1, int(r.mul[xi1, u])),
                        h.word[0],
                    ]
                else:
                    # swap and append the commutator tail
                    tail = []
                    for ci, cj, croot, c in ctx.sc.commutator_terms(g1, g2):
                        if c == 0:
                            continue
                        arg = int(r.mul[r.from_int(c),
                                        r.mul[r.pow(int(r.neg[xi1]), ci),
                                              r.pow(int(r.neg[xi2]), cj)]])
                        tail.append(("x", croot, arg))
                    repl = [b, a] + tail
                toks[i:i + 2] = repl
                applied = True
                break
        steps += 1
        if steps > cap:
            raise RewriteError(f"rewrite iteration cap exceeded; stuck word {toks!r}")
        if not applied:
            break

    chars = tuple(r.one for _ in range(ctx.rs.rank))
    coeffs = {root: 0 for root in ctx.rs.gauss_order}
    seen_x = set()
    for tok in toks:
        if tok[0] == "torus":
            if seen_x:
                raise RewriteError("torus token escaped normalization")
            chars = merge_chars(ctx, chars, tok[1])
        else:
            seen_x.add(tok[1])
            coeffs[tok[1]] = tok[2]
    # exactness and membership postconditions
    normal_word = [("torus", chars)] + [("x", root, coeffs[root])
                                        for root in ctx.rs.gauss_order if coeffs[root]]
    if ctx.evaluate_word(normal_word).tobytes() != target.tobytes():
        raise RewriteError("normal form does not reproduce the word's matrix")
    for root, xi in coeffs.items():
        if xi not in ideal_j:
            raise RewriteError("normal-form coefficient escaped J")
        if net is not None and xi not in net.sigma[root]:
            raise RewriteError("normal-form coefficient escaped sigma")
    for c in chars:
        if int(r.add[c, r.neg[r.one]]) not in ideal_j:
            raise RewriteError("normal-form torus part escaped T(R,J)")
    return chars, coeffs


# ---------------------------------------------------------------------------
# probes and extraction


def probe_table(ctx: AdjointGroup) -> dict[int, tuple[int, int, int]]:
    """For each root gamma a matrix entry (row, col) whose value on
    x_gamma(xi) is c*xi with c = +-1, and zero on every higher power."""
    sc = ctx.sc
    rs = ctx.rs
    out = {}
    for gamma in range(rs.nroots):
        t = sc.template(gamma)
        choice = None
        for i in range(rs.rank):
            if abs(int(sc.coroot[gamma, i])) == 1:
                row, col = i, sc.basis_pos[int(rs.neg[gamma])]
                choice = (row, col, int(sc.coroot[gamma, i]))
                break
        if choice is None:
            for beta in range(rs.nroots):
                s = rs.add_roots(gamma, beta)
                if s is None or beta == int(rs.neg[gamma]):
                    continue
                if abs(sc.N[(gamma, beta)]) == 1:
                    choice = (sc.basis_pos[s], sc.basis_pos[beta], sc.N[(gamma, beta)])
                    break
        if choice is None:
            raise RuntimeError(f"no unit probe for root {rs.root_name(gamma)}")
        row, col, c = choice
        if int(t.powers[1][row, col]) != c:
            raise AssertionError("probe does not read the linear coefficient")
        for k in range(2, len(t.powers)):
            if t.powers[k][row, col]:
                raise AssertionError("probe entry is contaminated by higher powers")
        out[gamma] = choice
    return out


def ideal_power_chain(ideal_j: Ideal) -> list[Ideal]:
    """J, J^2, ... down to (0); finite rings make every proper J nilpotent."""
    chain = [ideal_j]
    while not chain[-1].is_zero():
        nxt = chain[-1].product(ideal_j)
        if len(nxt) == len(chain[-1]):
            raise ValueError("ideal is not nilpotent")
        chain.append(nxt)
    return chain


def gauss_extract(ctx: AdjointGroup, mat: np.ndarray, ideal_j: Ideal):
    """Decompose a congruence-level matrix as (torus chars, {xi_gamma}).

    Peels the J-adic filtration level by level, then normalizes the
    collected tokens through gauss_rewrite.  The product is asserted to
    reproduce the input exactly; uniqueness is order-relative.
    """
    r = ctx.ring
    if not CongruenceFilter(ctx, ideal_j).is_member(mat):
        raise ValueError("matrix is not congruent to the identity mod J")
    probes = probe_table(ctx)
    chain = ideal_power_chain(ideal_j)
    residual = np.ascontiguousarray(mat, dtype=np.int32)
    torus_tokens = []
    x_tokens_per_level = []
    for level, j_l in enumerate(chain[:-1], start=1):
        if residual.tobytes() == ctx.identity_key:
            break
        if not CongruenceFilter(ctx, j_l).is_member(residual):
            raise AssertionError(f"residual escaped the level-{level} filtration")
        level_x = []
        correction = ctx.identity
        for root in ctx.rs.gauss_order:
            row, col, c = probes[root]
            v = int(residual[row, col])
            if v not in j_l.members:
                raise AssertionError("probe read outside the expected level")
            xi = v if c == 1 else int(r.neg[v])
            if xi:
                level_x.append(("x", root, xi))
                correction = ctx.mm(correction, ctx.x_mat(root, xi))
        u = ctx.mm(residual, ctx.matrix_inverse(correction))
        chars = []
        for i in range(ctx.rs.rank):
            p = ctx.sc.basis_pos[ctx.rs.simple[i]]
            chars.append(int(u[p, p]))
        chars = tuple(chars)
        for cchk in chars:
            if not r.units[cchk]:
                raise AssertionError("torus reading produced a non-unit")
        tmat = ctx.torus_mat(chars)
        residual = ctx.mm(ctx.matrix_inverse(tmat), u)
        torus_tokens.append(("torus", chars))
        x_tokens_per_level.append(level_x)
    if residual.tobytes() != ctx.identity_key:
        raise RuntimeError("extraction did not converge to the identity")
    word = list(torus_tokens)
    for level_x in reversed(x_tokens_per_level):
        word.extend(level_x)
    chars, coeffs = gauss_rewrite(ctx, word, ideal_j)
    normal_word = [("torus", chars)] + [("x", root, coeffs[root])
                                        for root in ctx.rs.gauss_order if coeffs[root]]
    if ctx.evaluate_word(normal_word).tobytes() != mat.tobytes():
        raise AssertionError("extracted decomposition does not reproduce the input")
    return chars, coeffs
