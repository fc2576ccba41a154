# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled queue and drift-plus-penalty kernels.

Mirrors ``_kernels_py`` operation for operation; keep both in sync.
"""
from edgeprov.errors import DomainError

BACKEND = "cython"


cpdef double queue_step(double Q, double a, double b) except? -1.0:
    cdef double v
    if Q < 0 or a < 0 or b < 0:
        raise DomainError(f"queue_step needs Q, a, b >= 0 (got {Q}, {a}, {b})")
    v = Q - b + a
    return v if v > 0.0 else 0.0


cpdef double virtual_queue_step(double Z, double y) except? -1.0:
    cdef double v
    if Z < 0:
        raise DomainError(f"virtual queue must be >= 0, got {Z}")
    v = Z + y
    return v if v > 0.0 else 0.0


cpdef double lyapunov(Qs, Zs):
    cdef double acc = 0.0, x
    for q in Qs:
        x = q
        acc += x * x
    for z in Zs:
        x = z
        acc += x * x
    return 0.5 * acc


cdef double _dpp(double V, double y0, Qs, as_, bs, Zs, ys) except? -1.0:
    cdef Py_ssize_t i, n = len(Qs), m = len(Zs)
    cdef double acc = V * y0
    if len(as_) != n or len(bs) != n or len(ys) != m:
        raise DomainError("dpp_objective: dimension mismatch")
    for i in range(n):
        acc += (<double>Qs[i]) * ((<double>as_[i]) - (<double>bs[i]))
    for i in range(m):
        acc += (<double>Zs[i]) * (<double>ys[i])
    return acc


cpdef double dpp_objective(double V, double y0, Qs, as_, bs, Zs, ys) except? -1.0:
    return _dpp(V, y0, Qs, as_, bs, Zs, ys)


cpdef list score_candidates(double V, Qs, as_, b_rows, y0s, Zs, y_rows):
    cdef Py_ssize_t c, n = len(y0s)
    if len(b_rows) != n or len(y_rows) != n:
        raise DomainError("score_candidates: candidate count mismatch")
    return [_dpp(V, y0s[c], Qs, as_, b_rows[c], Zs, y_rows[c]) for c in range(n)]


cpdef list replay_queue(double Q0, a_series, b_series):
    cdef Py_ssize_t i, n = len(a_series)
    cdef double q = Q0, v, ai, bi
    if len(b_series) != n:
        raise DomainError("replay_queue: a and b series differ in length")
    if Q0 < 0:
        raise DomainError(f"queue_step needs Q, a, b >= 0 (got {Q0}, 0, 0)")
    out = [q]
    for i in range(n):
        ai = a_series[i]
        bi = b_series[i]
        if ai < 0 or bi < 0:
            raise DomainError(f"queue_step needs Q, a, b >= 0 (got {q}, {ai}, {bi})")
        v = q - bi + ai
        q = v if v > 0.0 else 0.0
        out.append(q)
    return out


cpdef list replay_virtual(double Z0, y_series):
    cdef Py_ssize_t i, n = len(y_series)
    cdef double z = Z0, v
    if Z0 < 0:
        raise DomainError(f"virtual queue must be >= 0, got {Z0}")
    out = [z]
    for i in range(n):
        v = z + <double>y_series[i]
        z = v if v > 0.0 else 0.0
        out.append(z)
    return out
