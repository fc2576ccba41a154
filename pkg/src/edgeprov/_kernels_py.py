"""Pure-Python kernels; reference semantics for the compiled ``_kernels``.

Both backends evaluate every sum in the same left-to-right order so their
results agree bit for bit.
"""
from .errors import DomainError

BACKEND = "python"


def queue_step(Q, a, b):
    Q = float(Q)
    a = float(a)
    b = float(b)
    if Q < 0 or a < 0 or b < 0:
        raise DomainError(f"queue_step needs Q, a, b >= 0 (got {Q}, {a}, {b})")
    v = Q - b + a
    return v if v > 0.0 else 0.0


def virtual_queue_step(Z, y):
    Z = float(Z)
    if Z < 0:
        raise DomainError(f"virtual queue must be >= 0, got {Z}")
    v = Z + float(y)
    return v if v > 0.0 else 0.0


def lyapunov(Qs, Zs):
    acc = 0.0
    for q in Qs:
        acc += float(q) * float(q)
    for z in Zs:
        acc += float(z) * float(z)
    return 0.5 * acc


def dpp_objective(V, y0, Qs, as_, bs, Zs, ys):
    n = len(Qs)
    m = len(Zs)
    if len(as_) != n or len(bs) != n or len(ys) != m:
        raise DomainError("dpp_objective: dimension mismatch")
    acc = float(V) * float(y0)
    for i in range(n):
        acc += float(Qs[i]) * (float(as_[i]) - float(bs[i]))
    for k in range(m):
        acc += float(Zs[k]) * float(ys[k])
    return acc


def score_candidates(V, Qs, as_, b_rows, y0s, Zs, y_rows):
    """Objective of every candidate; row ``c`` of ``b_rows``/``y_rows`` and
    ``y0s[c]`` describe candidate ``c``."""
    if len(b_rows) != len(y0s) or len(y_rows) != len(y0s):
        raise DomainError("score_candidates: candidate count mismatch")
    return [dpp_objective(V, y0s[c], Qs, as_, b_rows[c], Zs, y_rows[c]) for c in range(len(y0s))]


def replay_queue(Q0, a_series, b_series):
    if len(a_series) != len(b_series):
        raise DomainError("replay_queue: a and b series differ in length")
    out = [float(Q0)]
    q = float(Q0)
    for a, b in zip(a_series, b_series):
        q = queue_step(q, a, b)
        out.append(q)
    return out


def replay_virtual(Z0, y_series):
    out = [float(Z0)]
    z = float(Z0)
    for y in y_series:
        z = virtual_queue_step(z, y)
        out.append(z)
    return out
