"""Mode expansion: slots against a brute-force series oracle, consistency
checks, triangularity, and the reference current-relation comparison."""

import pytest

from rhopf.algebra import L, LSTAR, PHI, PHISTAR, RewriteSystem, Toggles
from rhopf.errors import DomainError
from rhopf.expr import parse_expr
from rhopf.instances import get_instance
from rhopf.modes import (SeriesWindow, check_mode_consistency,
                         drinfeld_compare, load_reference_relations,
                         mode_allowed, mode_expand_relation)
from rhopf.rmatrix import RMatrix
from rhopf.symfield import RatExpr


def _rs(name="example1", flavor="double", toggles=None):
    return RewriteSystem(get_instance(name), flavor, toggles,
                         check_unitarity=False)


# -- brute-force oracle -------------------------------------------------------
#
# A two-variable polynomial p(z1, z2) times the double current series
# X(z1) Y(z2) = sum X[m'] Y[k'] z1^-m' z2^-k' is expanded literally and the
# coefficient of z1^-m z2^-k collected; written independently of the
# package's emission code.

def series_slot_oracle(poly: RatExpr, word_order, window, m, k):
    out = {}
    lim = window.N
    for mono, c in poly.num.terms.items():
        d = dict(mono)
        a = d.pop(5, 0)   # z1 has variable index 5
        b = d.pop(6, 0)   # z2 has variable index 6
        rest = RatExpr(type(poly.num)({tuple(sorted(d.items())): c}),
                       poly.den)
        for mp in range(-lim, lim + 1):
            for kp in range(-lim, lim + 1):
                if a - mp == -m and b - kp == -k:
                    key = ((word_order[0], mp if word_order[0][1] == "z1"
                            else kp),
                           (word_order[1], mp if word_order[1][1] == "z1"
                            else kp))
                    key = tuple((sym, mode) for (sym, _), mode in key)
                    cur = out.get(key)
                    out[key] = rest if cur is None else cur + rest
    return {w: c for w, c in out.items() if not c.is_zero()}


def test_phi_phi_slots_match_series_oracle():
    rs = _rs()
    w = SeriesWindow(4, 1)
    entry = mode_expand_relation(rs, "PhiPhi", w)[0]
    assert RatExpr(entry["clearing_factor"]) == parse_expr("q^2*z1 - z2") \
        or RatExpr(entry["clearing_factor"]) == parse_expr("z2 - q^2*z1")
    # oracle polynomials: clearing factor times each side's coefficient
    lhs_poly = parse_expr("(x - q^2)/(x*q^2 - 1)").substitute(
        {"x": {"z1": 1, "z2": -1}}) * RatExpr(entry["clearing_factor"])
    rhs_poly = RatExpr(entry["clearing_factor"])
    for (m, k) in [(0, 0), (1, -1), (-2, 3), (2, 2)]:
        got = entry["slots"].get((m, k), {})
        want = series_slot_oracle(lhs_poly, (("X", "z1"), ("X", "z2")),
                                  w, m, k)
        rhs = series_slot_oracle(rhs_poly, (("X", "z2"), ("X", "z1")),
                                 w, m, k)
        for word, c in rhs.items():
            cur = want.get(word)
            want[word] = -c if cur is None else cur - c
        want = {w2: c for w2, c in want.items() if not c.is_zero()}
        got_erased = {tuple(("X", p) for (_k, _r, _c, p) in w2): c
                      for w2, c in got.items()}
        assert got_erased == want, (m, k)


def test_identity_instance_modes_commute():
    rs = _rs("identity", "particle")
    w = SeriesWindow(3, 1)
    for entry in mode_expand_relation(rs, "PhiPhi", w):
        i, j = entry["indices"]
        for (m, k), wm in entry["slots"].items():
            assert len(wm) == 2
            a = wm.get(((PHI, i, 0, m), (PHI, j, 0, k)))
            b = wm.get(((PHI, j, 0, k), (PHI, i, 0, m)))
            if i == j and m == k:
                assert a is None and b is None  # identical words cancel
            else:
                assert a == RatExpr.from_int(1)
                assert b == RatExpr.from_int(-1)


def test_cross_bracket_modes_scalar():
    rs = _rs()
    w = SeriesWindow(3, 1)
    entry = mode_expand_relation(rs, "PhiPhistar", w)[0]
    # (q - q^-1) [Phi_m, Phistar_k] = q^((m-k)c/2) lstar[m+k]
    #                                 - q^((k-m)c/2) l[m+k];
    # the clearing factor is q^2 - 1, leaving the bracket side scaled by
    # q^2 - 1 and the single-mode side by q
    q = parse_expr("q")
    for (m, k) in [(0, 0), (1, 0), (-1, 2)]:
        wm = entry["slots"][(m, k)]
        assert wm[((PHI, 1, 0, m), (PHISTAR, 1, 0, k))] == \
            parse_expr("q^2 - 1")
        assert wm[((PHISTAR, 1, 0, k), (PHI, 1, 0, m))] == \
            parse_expr("1 - q^2")
        assert wm[((LSTAR, 1, 1, m + k),)] == \
            -(RatExpr.var("u1", m - k) * q)
        assert wm[((L, 1, 1, m + k),)] == RatExpr.var("u1", k - m) * q


def test_mode_consistency_example1():
    rep = check_mode_consistency(_rs(), SeriesWindow(5, 1), triangular=True)
    assert rep["consistent"]


def test_mode_consistency_example2_n2():
    rep = check_mode_consistency(_rs("example2-n2", "extended"),
                                 SeriesWindow(4, 1), triangular=True)
    assert rep["consistent"]


def test_mode_consistency_flags_literal_ll_star():
    rs = _rs(toggles=Toggles(ll_star="literal"))
    rep = check_mode_consistency(rs, SeriesWindow(4, 1), triangular=True)
    assert not rep["consistent"]
    bad = [r["relation"] for r in rep["relations"] if not r["consistent"]]
    assert bad == ["LLstar"]


def test_triangularity_flags():
    assert mode_allowed(L, 1, 1, 0) and mode_allowed(L, 2, 1, 0)
    assert not mode_allowed(L, 1, 2, 0)
    assert not mode_allowed(L, 1, 1, -1)
    assert mode_allowed(LSTAR, 1, 2, 0) and not mode_allowed(LSTAR, 2, 1, 0)
    assert mode_allowed(LSTAR, 1, 1, -3) and not mode_allowed(LSTAR, 1, 1, 2)
    assert mode_allowed(PHI, 1, 0, -7) and mode_allowed(PHISTAR, 1, 0, 7)


def test_truncated_delta_substitution_in_guard_band():
    # coefficients of f(z1) delta(z1/z2) and f(z2) delta(z1/z2) agree for
    # |n| <= N - deg f when delta is truncated at |nu| <= N
    N = 6
    f = {1: 1, 0: -3}  # f(t) = t - 3
    lhs = {}
    rhs = {}
    for nu in range(-N, N + 1):
        for d, c in f.items():
            lhs[(nu + d, -nu)] = lhs.get((nu + d, -nu), 0) + c
            rhs[(nu, d - nu)] = rhs.get((nu, d - nu), 0) + c
    deg = max(f)
    for a in range(-(N - 1 - deg), N - deg):
        for b in range(-(N - 1 - deg), N - deg):
            assert lhs.get((a, b), 0) == rhs.get((a, b), 0)
    # and they genuinely differ at the truncation edge
    assert any(lhs.get(k, 0) != rhs.get(k, 0)
               for k in set(lhs) | set(rhs))


def test_window_validation():
    with pytest.raises(DomainError):
        SeriesWindow(1, 1)
    with pytest.raises(DomainError):
        SeriesWindow(3, -1)


def test_reference_file_parses():
    refs = load_reference_relations()
    assert set(refs) == {"xplus", "xminus"}
    lhs, rhs = refs["xplus"]
    assert lhs == parse_expr("z1 - q^2*z2")
    assert rhs == parse_expr("q^2*z1 - z2")


def test_drinfeld_compare_windows():
    assert drinfeld_compare(SeriesWindow(5, 1))["match"]
    assert drinfeld_compare(SeriesWindow(2, 1))["match"]


def test_drinfeld_compare_q_cubed_control():
    Rq3 = RMatrix(1, "x",
                  {(1, 1, 1, 1): parse_expr("(x - q^6)/(x*q^6 - 1)")})
    rep = drinfeld_compare(SeriesWindow(5, 1), Rq3)
    assert not rep["match"]


def test_drinfeld_compare_rejects_matrix_instance():
    with pytest.raises(DomainError):
        drinfeld_compare(SeriesWindow(3, 1), get_instance("example2-n2"))
