"""Non-diagonal regression: a six-vertex-type unitary Yang-Baxter matrix.

The built-in instances are all diagonal, hence symmetric as matrices on
the tensor square; this instance is not, and distinguishes conventions
that symmetric matrices cannot: the transpose of a right-multiplied R,
and the product vs ratio middle argument of the Yang-Baxter check.
"""

import pytest

from rhopf.algebra import (FLAVOR_RELATIONS, RewriteSystem,
                           braid_consistency, relation_self_residual)
from rhopf.expr import parse_expr
from rhopf.hopf import HopfTables, check_axioms, check_hom_on_relation
from rhopf.rmatrix import RMatrix, unitarity_residual, ybe_residual


@pytest.fixture(scope="module")
def sixv():
    b = "q*(x - 1)/(x*q^2 - 1)"
    c_lo = "(q^2 - 1)/(x*q^2 - 1)"
    c_hi = "x*(q^2 - 1)/(x*q^2 - 1)"
    entries = {
        (1, 1, 1, 1): parse_expr("1"), (2, 2, 2, 2): parse_expr("1"),
        (1, 2, 1, 2): parse_expr(b), (1, 2, 2, 1): parse_expr(c_lo),
        (2, 1, 2, 1): parse_expr(b), (2, 1, 1, 2): parse_expr(c_hi),
    }
    return RMatrix(2, "x", entries, name="six-vertex")


def test_sixvertex_is_nonsymmetric(sixv):
    assert sixv.entry(1, 2, 2, 1) != sixv.entry(2, 1, 1, 2)


def test_sixvertex_conditions_discriminate_middle_argument(sixv):
    assert unitarity_residual(sixv) == {}
    assert ybe_residual(sixv, "prod") == {}
    # the literal ratio middle argument genuinely fails here, which no
    # diagonal instance can show
    assert ybe_residual(sixv, "ratio") != {}


def test_sixvertex_braid(sixv):
    assert braid_consistency(sixv)["agree"]


def test_sixvertex_full_double_verification(sixv):
    rs = RewriteSystem(sixv, "double")
    tables = HopfTables(rs)
    for rid in FLAVOR_RELATIONS["double"]:
        assert all(r.is_zero()
                   for _, r in relation_self_residual(rs, rid)), rid
        assert all(r.is_zero()
                   for _, r in check_hom_on_relation(rs, tables, rid)), rid
    for check_id, nterms in check_axioms(rs, tables):
        assert nterms == 0, check_id
