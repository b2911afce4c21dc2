"""Closed-form bound terms for the conjecture catalog.

Each function accepts either float scalars or equally shaped float arrays, so
the same source is compiled by numba for the per-graph loop kernels and run
directly on whole arrays of vertices/edges by the numpy path.  Every function
returns ``(value, clamped)`` where ``clamped`` flags a negative radicand that
was replaced by zero.
"""

import numpy as np


def clamped_sqrt(x):
    return np.sqrt(np.maximum(x, 0.0)), x < 0.0


def build(_root):
    """Return ``(vertex_term, edge_term)`` using ``_root`` as the clamped square root."""

    def vertex_term(cid, d, m):
        if cid == 2:
            return 2.0 * m * m / d, d < 0.0
        if cid == 3:
            return m * m / d + m, d < 0.0
        if cid == 15:
            return _root(4.0 * m * m * m / d)
        if cid == 28:
            return _root(4.0 * m ** 4 / (d * d) + 2.0 * d * m)
        if cid == 29:
            return _root(m * m + 3.0 * m * m * m / d)
        if cid == 31:
            return 4.0 * m * m / (m + d), d < 0.0
        if cid == 32:
            r, c = _root(m * m * m * (m + 3.0 * d))
            return r / d, c
        return np.nan * d, d < 0.0

    def edge_term(cid, dv, mv, dj, mj):
        # all catalog formulas are symmetric under (dv, mv) <-> (dj, mj)
        sd = dv + dj
        sm = mv + mj
        sq_m = mv * mv + mj * mj
        sq_d = dv * dv + dj * dj
        dm = dv * mv + dj * mj
        no = dv < 0.0
        if cid == 36:
            return 2.0 * sq_m / sd, no
        if cid == 41:
            r, c = _root(2.0 * sq_d - 4.0 * sm + 4.0)
            return 2.0 + sm - sd + r, c
        if cid == 43:
            r, c = _root(3.0 * sq_m - 2.0 * mv * mj - 4.0 * sd + 4.0)
            return 2.0 + r, c
        if cid == 49:
            r, c = _root(2.0 * sq_m + (dv - dj) ** 2 - 4.0 * sd + 4.0)
            return 2.0 + r, c
        if cid == 51:
            return 2.0 * sm - 4.0 * mv * mj / sd, no
        if cid == 52:
            inner, c1 = _root(8.0 * (mv ** 4 + mj ** 4) - 8.0 * sq_d + 4.0)
            r, c2 = _root(inner - 4.0 * sd + 6.0)
            return 2.0 + r, c1 | c2
        if cid == 53:
            inner, c1 = _root(8.0 * (mv ** 4 + mj ** 4) - 8.0 * dm + 4.0)
            r, c2 = _root(inner - 4.0 * sd + 6.0)
            return 2.0 + r, c1 | c2
        if cid == 54:
            r, c = _root(2.0 * sq_m + dm - sq_d - 4.0 * sd + 4.0)
            return 2.0 + r, c
        if cid == 55:
            r, c = _root(3.0 * sq_m - sq_d - 4.0 * sm + 4.0)
            return 2.0 + r, c
        if cid == 57:
            r, c = _root(2.0 * sq_m - 8.0 * sq_d / sm + 4.0)
            return 2.0 + r, c
        if cid == 58:
            r, c = _root(2.0 * (sq_m + mv * mj) - dm - 4.0 * sd + 4.0)
            return 2.0 + r, c
        if cid == 59:
            return (2.0 * (sq_m + mv * mj) - sq_d) / sm, no
        if cid == 60:
            r, c = _root(2.0 * (sq_m + mv * mj) - sq_d - 4.0 * sd + 4.0)
            return 2.0 + r, c
        if cid == 61:
            return 2.0 * sq_m / (2.0 + np.sqrt(2.0 * ((dv - 1.0) ** 2 + (dj - 1.0) ** 2))), no
        if cid == 62:
            r, c = _root(sq_m + 4.0 * mv * mj - 2.0 * dv * dj - 4.0 * sd + 4.0)
            return 2.0 + r, c
        if cid == 63:
            return sd + sm - 4.0 * dv * dj / sm, no
        if cid == 64:
            return mv * mj * sd / (dv * dj), no
        if cid == 65:
            return sm * dm / (2.0 * mv * mj), no
        if cid == 66:
            return (sq_m + 4.0 * mv * mj - dm) / sd, no
        if cid == 67:
            return sm * dm / (2.0 * dv * dj), no
        if cid == 68:
            r, c = _root((mv - mj) ** 2 + 4.0 * dv * dj - 4.0 * sm + 4.0)
            return 2.0 + r, c
        return np.nan * dv, no

    return vertex_term, edge_term


vertex_term, edge_term = build(clamped_sqrt)
