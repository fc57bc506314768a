"""R-matrix container and its side conditions.

Index convention (fixed for spec files and all internal contractions):
``R[i,j -> k,l]`` is the coefficient of e_k (x) e_l in R(e_i (x) e_j), with
the first tensor factor most significant, i.e. as an n^2 x n^2 matrix the
row is (k,l) and the column is (i,j), both row-major.

The Yang-Baxter residual is computed with the product convention for the
middle argument, R12(z) R13(z*w) R23(w), which is the one the braid
consistency tests validate; the literal ratio variant R13(z/w) is computed
alongside for reporting.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DomainError, SingularError
from .symfield import (LaurentPoly, RatExpr, S, VAR_INDEX, clear_denominators,
                       mono)

_R0 = RatExpr.from_int(0)
_R1 = RatExpr.from_int(1)


@dataclass(frozen=True)
class RMatrix:
    """n^2 x n^2 array of rational entries in one spectral ratio variable."""

    n: int
    var: str
    entries: dict  # (i, j, k, l) -> RatExpr, nonzero entries only
    name: str = ""

    def __post_init__(self):
        allowed = {VAR_INDEX[self.var], S}
        for key, val in self.entries.items():
            if not all(1 <= t <= self.n for t in key):
                raise DomainError(f"entry index {key} out of range")
            if not val.variables() <= allowed:
                raise DomainError(
                    f"entry {key} depends on variables other than "
                    f"{self.var} and q")

    def entry(self, i, j, k, l) -> RatExpr:
        return self.entries.get((i, j, k, l), _R0)

    def is_diagonal(self) -> bool:
        return all(i == k and j == l for (i, j, k, l) in self.entries)

    def flip(self) -> "RMatrix":
        """R21, with R21[i,j -> k,l] = R[j,i -> l,k]."""
        flipped = {(j, i, l, k): v for (i, j, k, l), v in self.entries.items()}
        return RMatrix(self.n, self.var, flipped, name=self.name + "_21")

    def at(self, arg: tuple) -> dict:
        """Entries with the spectral variable replaced by a monomial."""
        return {key: v.subs_monomial(self.var, arg)
                for key, v in self.entries.items()}

    def inverse_entries(self) -> dict:
        """Entries of R(x)^-1 over the function field."""
        if self.is_diagonal():
            out = {}
            for key, v in self.entries.items():
                if v.is_zero():
                    raise SingularError("zero diagonal entry")
                out[key] = v.inverse()
            return out
        n2 = self.n * self.n
        pairs = [(i, j) for i in range(1, self.n + 1)
                 for j in range(1, self.n + 1)]
        idx = {p: a for a, p in enumerate(pairs)}
        mat = [[_R0] * n2 for _ in range(n2)]
        for (i, j, k, l), v in self.entries.items():
            mat[idx[(k, l)]][idx[(i, j)]] = v
        inv = _invert_dense(mat)
        out = {}
        for r, (k, l) in enumerate(pairs):
            for c, (i, j) in enumerate(pairs):
                if not inv[r][c].is_zero():
                    out[(i, j, k, l)] = inv[r][c]
        return out

    def determinant(self) -> RatExpr:
        if self.is_diagonal():
            det = _R1
            seen = 0
            for v in self.entries.values():
                det = det * v
                seen += 1
            if seen < self.n * self.n:
                return _R0
            return det
        n2 = self.n * self.n
        pairs = [(i, j) for i in range(1, self.n + 1)
                 for j in range(1, self.n + 1)]
        idx = {p: a for a, p in enumerate(pairs)}
        mat = [[_R0] * n2 for _ in range(n2)]
        for (i, j, k, l), v in self.entries.items():
            mat[idx[(k, l)]][idx[(i, j)]] = v
        return _determinant_dense(mat)


def _invert_dense(mat):
    """Gauss-Jordan inverse of a dense RatExpr matrix."""
    n = len(mat)
    a = [row[:] for row in mat]
    inv = [[_R1 if i == j else _R0 for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if not a[r][col].is_zero():
                piv = r
                break
        if piv is None:
            raise SingularError("matrix is singular over the function field")
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        p = a[col][col].inverse()
        a[col] = [v * p for v in a[col]]
        inv[col] = [v * p for v in inv[col]]
        for r in range(n):
            if r == col or a[r][col].is_zero():
                continue
            f = a[r][col]
            a[r] = [a[r][c] - f * a[col][c] for c in range(n)]
            inv[r] = [inv[r][c] - f * inv[col][c] for c in range(n)]
    return inv


def _determinant_dense(mat):
    n = len(mat)
    a = [row[:] for row in mat]
    det = _R1
    for col in range(n):
        piv = None
        for r in range(col, n):
            if not a[r][col].is_zero():
                piv = r
                break
        if piv is None:
            return _R0
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det = det * a[col][col]
        p = a[col][col].inverse()
        for r in range(col + 1, n):
            if a[r][col].is_zero():
                continue
            f = a[r][col] * p
            a[r] = [a[r][c] - f * a[col][c] for c in range(n)]
    return det


@dataclass(frozen=True)
class ClearedRMatrix:
    """R' = f * R with f the minimal pole-clearing polynomial."""

    base: RMatrix
    f: LaurentPoly
    rprime: dict = field(repr=False)  # (i,j,k,l) -> RatExpr


# ---------------------------------------------------------------------------
# tensor-space composition helpers (dict maps input-tuple -> {output: val})
# ---------------------------------------------------------------------------

def _compose(after: dict, before: dict) -> dict:
    """(after o before)[in][out] = sum_mid before[in][mid] * after[mid][out]."""
    out: dict = {}
    for tin, mids in before.items():
        acc = out.setdefault(tin, {})
        for mid, v1 in mids.items():
            arow = after.get(mid)
            if not arow:
                continue
            for tout, v2 in arow.items():
                s = acc.get(tout)
                prod = v1 * v2
                if s is None:
                    if not prod.is_zero():
                        acc[tout] = prod
                else:
                    s = s + prod
                    if s.is_zero():
                        del acc[tout]
                    else:
                        acc[tout] = s
        if not acc:
            del out[tin]
    return out


def _embed3(entries: dict, n: int, slot_a: int, slot_b: int) -> dict:
    """Lift two-site entries onto sites (slot_a, slot_b) of V (x) V (x) V."""
    out: dict = {}
    others = [t for t in range(3) if t not in (slot_a, slot_b)]
    spare = others[0]
    for (i, j, k, l), v in entries.items():
        for m in range(1, n + 1):
            tin = [0, 0, 0]
            tout = [0, 0, 0]
            tin[slot_a], tin[slot_b], tin[spare] = i, j, m
            tout[slot_a], tout[slot_b], tout[spare] = k, l, m
            out.setdefault(tuple(tin), {})[tuple(tout)] = v
    return out


def _as_map2(entries: dict) -> dict:
    out: dict = {}
    for (i, j, k, l), v in entries.items():
        out.setdefault((i, j), {})[(k, l)] = v
    return out


def ybe_residual(R: RMatrix, middle: str = "prod") -> dict:
    """LHS - RHS of R12(z) R13(m) R23(w) = R23(w) R13(m) R12(z).

    ``middle`` selects m = z*w ("prod", the normative convention) or
    m = z/w ("ratio", the literal variant, reported alongside).  Fresh
    ratio variables z1 (z) and z2 (w) are used.  Returns a sparse dict
    ((i,j,k) in, (a,b,c) out) -> RatExpr of the nonzero residual entries.
    """
    z = mono(z1=1)
    w = mono(z2=1)
    if middle == "prod":
        m = mono(z1=1, z2=1)
    elif middle == "ratio":
        m = mono(z1=1, z2=-1)
    else:
        raise DomainError(f"unknown middle-argument convention {middle!r}")
    r12 = _embed3(R.at(z), R.n, 0, 1)
    r13 = _embed3(R.at(m), R.n, 0, 2)
    r23 = _embed3(R.at(w), R.n, 1, 2)
    lhs = _compose(r12, _compose(r13, r23))
    rhs = _compose(r23, _compose(r13, r12))
    return _map_sub(lhs, rhs)


def _map_sub(a: dict, b: dict) -> dict:
    out: dict = {}
    keys = set(a) | set(b)
    for tin in keys:
        ra = a.get(tin, {})
        rb = b.get(tin, {})
        for tout in set(ra) | set(rb):
            v = ra.get(tout, _R0) - rb.get(tout, _R0)
            if not v.is_zero():
                out[(tin, tout)] = v
    return out


def unitarity_residual(R: RMatrix) -> dict:
    """R21(x) R(1/x) - Id as a sparse ((i,j),(k,l)) -> RatExpr dict."""
    if R.determinant().is_zero():
        raise SingularError("R is singular; unitarity is ill-posed")
    x = mono(**{R.var: 1})
    xinv = mono(**{R.var: -1})
    r21 = _as_map2(R.flip().at(x))
    rinv_arg = _as_map2(R.at(xinv))
    prod = _compose(r21, rinv_arg)
    ident = {}
    for i in range(1, R.n + 1):
        for j in range(1, R.n + 1):
            ident[(i, j)] = {(i, j): _R1}
    return _map_sub(prod, ident)


def clear_poles(R: RMatrix) -> ClearedRMatrix:
    """Minimal f with f*R pole-free in the spectral variable."""
    entries = [v for v in R.entries.values()] or [_R1]
    f = clear_denominators(entries, R.var)
    fr = RatExpr(f)
    rprime = {key: v * fr for key, v in R.entries.items()}
    return ClearedRMatrix(base=R, f=f, rprime=rprime)
