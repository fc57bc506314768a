# cython: language_level=3, boundscheck=False, wraparound=False
"""Cython term-map kernels; drop-in twin of ``_poly_py``.

Coefficients stay Python ints (arbitrary precision is required), so the
speedup comes from typed loops over the tuple/dict plumbing, not from
native arithmetic.
"""

BACKEND = "c"


cpdef tuple mono_mul(tuple a, tuple b):
    cdef Py_ssize_t i = 0, j = 0, la = len(a), lb = len(b)
    cdef long va, vb
    cdef object ea, eb, e
    if la == 0:
        return b
    if lb == 0:
        return a
    out = []
    while i < la and j < lb:
        va = <long>(<tuple>a[i])[0]
        vb = <long>(<tuple>b[j])[0]
        if va == vb:
            ea = (<tuple>a[i])[1]
            eb = (<tuple>b[j])[1]
            e = ea + eb
            if e != 0:
                out.append((va, e))
            i += 1
            j += 1
        elif va < vb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    while i < la:
        out.append(a[i])
        i += 1
    while j < lb:
        out.append(b[j])
        j += 1
    return tuple(out)


cpdef tuple mono_pow(tuple a, object e):
    if e == 0:
        return ()
    if e == 1:
        return a
    return tuple([(v, x * e) for v, x in a])


cpdef dict poly_mul(dict p, dict q):
    cdef dict out = {}
    cdef tuple ma, mb, m
    cdef object ca, cb, c
    if not p or not q:
        return out
    if len(p) > len(q):
        p, q = q, p
    for ma, ca in p.items():
        for mb, cb in q.items():
            m = mono_mul(ma, mb)
            c = out.get(m)
            if c is None:
                out[m] = ca * cb
            else:
                c = c + ca * cb
                if c == 0:
                    del out[m]
                else:
                    out[m] = c
    return out


cpdef dict poly_add(dict p, dict q):
    cdef dict out = dict(p)
    cdef tuple m
    cdef object c, s
    for m, c in q.items():
        s = out.get(m)
        if s is None:
            out[m] = c
        else:
            s = s + c
            if s == 0:
                del out[m]
            else:
                out[m] = s
    return out


cpdef dict poly_sub(dict p, dict q):
    cdef dict out = dict(p)
    cdef tuple m
    cdef object c, s
    for m, c in q.items():
        s = out.get(m)
        if s is None:
            out[m] = -c
        else:
            s = s - c
            if s == 0:
                del out[m]
            else:
                out[m] = s
    return out


cpdef dict poly_neg(dict p):
    cdef dict out = {}
    cdef tuple m
    cdef object c
    for m, c in p.items():
        out[m] = -c
    return out


cpdef dict poly_scale(dict p, object c, tuple mono):
    cdef dict out = {}
    cdef tuple m
    cdef object k
    if c == 0:
        return out
    if len(mono) == 0:
        if c == 1:
            return dict(p)
        for m, k in p.items():
            out[m] = k * c
        return out
    for m, k in p.items():
        out[mono_mul(m, mono)] = k * c
    return out
