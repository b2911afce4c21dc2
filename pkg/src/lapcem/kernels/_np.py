"""Pure-numpy versions of the hot kernels.

These vectorize across the batch instead of looping per graph.  They compute
the same quantities as the numba kernels and are selected with
``LAPCEM_DISABLE_NUMBA=1``.
"""

import numpy as np
from scipy.special import erf

from . import formulas

vertex_term = formulas.vertex_term
edge_term = formulas.edge_term

_SQRT_HALF = np.sqrt(0.5)


def gelu(x):
    return 0.5 * x * (1.0 + erf(x * _SQRT_HALF))


def adjacency(bits, n):
    """Adjacency matrices for a (B, E) or (E,) bit array."""
    bits = np.asarray(bits, dtype=np.uint8)
    single = bits.ndim == 1
    bits = np.atleast_2d(bits)
    iu, ju = np.triu_indices(n, 1)
    a = np.zeros((bits.shape[0], n, n), dtype=np.uint8)
    a[:, iu, ju] = bits
    a[:, ju, iu] = bits
    return a[0] if single else a


def degree_profile(a):
    af = a.astype(np.float64)
    d = af.sum(axis=-1)
    s = (af @ d[..., None])[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.where(d > 0, s / np.where(d > 0, d, 1.0), 0.0)
    return d, m


def count_components(a):
    """Component counts via repeated squaring of the reachability relation."""
    single = a.ndim == 2
    a = np.atleast_3d(a) if not single else a[None]
    n = a.shape[-1]
    reach = (a > 0) | np.eye(n, dtype=bool)
    steps = 1
    while steps < n:
        nxt = (reach.astype(np.int64) @ reach.astype(np.int64)) > 0
        if np.array_equal(nxt, reach):
            break
        reach = nxt
        steps *= 2
    # a vertex is a component root iff it is the lowest index it can reach
    roots = np.argmax(reach, axis=-1) == np.arange(n)
    c = roots.sum(axis=-1)
    return int(c[0]) if single else c


def laplacian(a, d):
    lap = -a.astype(np.float64)
    idx = np.arange(a.shape[-1])
    lap[..., idx, idx] = d
    return lap


def jacobi_eigh(a0, max_sweeps):
    """Batched cyclic Jacobi. ``a0`` has shape (B, n, n)."""
    a = np.array(a0, dtype=np.float64, copy=True)
    batch, n, _ = a.shape
    v = np.broadcast_to(np.eye(n), (batch, n, n)).copy()
    iu, ju = np.triu_indices(n, 1)
    converged = np.zeros(batch, dtype=bool)
    rows = np.arange(batch)
    for sweep in range(max_sweeps):
        off = np.abs(a[:, iu, ju]).sum(axis=-1)
        converged = off == 0.0
        if converged.all():
            break
        act = rows[~converged]
        sub = a[act]
        vs = v[act]
        for p, q in zip(iu, ju):
            apq = sub[:, p, q].copy()
            app = sub[:, p, p].copy()
            aqq = sub[:, q, q].copy()
            g = 100.0 * np.abs(apq)
            if sweep > 3:
                tiny = (np.abs(app) + g == np.abs(app)) & (np.abs(aqq) + g == np.abs(aqq))
                apq[tiny] = 0.0
            live = apq != 0.0
            if not live.any():
                sub[:, p, q] = apq
                sub[:, q, p] = apq
                continue
            h = aqq - app
            t = np.zeros_like(apq)
            small_h = live & (np.abs(h) + g == np.abs(h))
            t[small_h] = apq[small_h] / h[small_h]
            big = live & ~small_h
            theta = 0.5 * h[big] / apq[big]
            tb = 1.0 / (np.abs(theta) + np.sqrt(1.0 + theta * theta))
            t[big] = np.where(theta < 0.0, -tb, tb)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            colp = sub[:, :, p].copy()
            colq = sub[:, :, q].copy()
            newp = c[:, None] * colp - s[:, None] * colq
            newq = s[:, None] * colp + c[:, None] * colq
            sub[:, :, p] = newp
            sub[:, :, q] = newq
            sub[:, p, :] = newp
            sub[:, q, :] = newq
            sub[:, p, p] = app - t * apq
            sub[:, q, q] = aqq + t * apq
            sub[:, p, q] = 0.0
            sub[:, q, p] = 0.0
            vp = vs[:, :, p].copy()
            vq = vs[:, :, q].copy()
            vs[:, :, p] = c[:, None] * vp - s[:, None] * vq
            vs[:, :, q] = s[:, None] * vp + c[:, None] * vq
        a[act] = sub
        v[act] = vs
    else:
        converged = np.abs(a[:, iu, ju]).sum(axis=-1) == 0.0
    w = np.diagonal(a, axis1=1, axis2=2).copy()
    return w, v, converged


def spectral_radius(lap, max_sweeps):
    """Batched largest eigenvalue (Rayleigh quotient) and residual norm."""
    lap = np.asarray(lap, dtype=np.float64)
    single = lap.ndim == 2
    if single:
        lap = lap[None]
    w, v, converged = jacobi_eigh(lap, max_sweeps)
    idx = np.argmax(w, axis=-1)
    x = np.take_along_axis(v, idx[:, None, None], axis=2)[..., 0]
    x /= np.linalg.norm(x, axis=-1, keepdims=True)
    y = (lap @ x[..., None])[..., 0]
    mu = np.sum(x * y, axis=-1)
    res = np.linalg.norm(y - mu[:, None] * x, axis=-1)
    if single:
        return float(mu[0]), float(res[0]), bool(converged[0])
    return mu, res, converged


def bound_value(cid, vertex_form, a, d, m):
    """Single-graph bound; same return tuple as the numba kernel."""
    with np.errstate(divide="ignore", invalid="ignore"):
        if vertex_form:
            vals, clamp = vertex_term(cid, d, m)
            vals = np.asarray(vals, dtype=np.float64)
            clamp = np.broadcast_to(clamp, vals.shape)
            if vals.size == 0:
                return -np.inf, -1, -1, False, False
            k = int(np.argmax(vals))
            return float(vals[k]), k, -1, bool(clamp.any()), bool(clamp[k])
        iu, ju = np.nonzero(np.triu(a, 1))
        if iu.size == 0:
            return -np.inf, -1, -1, False, False
        vals, clamp = edge_term(cid, d[iu], m[iu], d[ju], m[ju])
        vals = np.asarray(vals, dtype=np.float64)
        clamp = np.broadcast_to(clamp, vals.shape)
        k = int(np.argmax(vals))
        return float(vals[k]), int(iu[k]), int(ju[k]), bool(clamp.any()), bool(clamp[k])


def score_conjecture_batch(bits, n, cid, vertex_form, max_sweeps, tol):
    bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
    batch = bits.shape[0]
    rewards = np.empty(batch)
    status = np.zeros(batch, dtype=np.int8)
    a = adjacency(bits, n)
    comps = count_components(a)
    disc = comps > 1
    rewards[disc] = -(n + comps[disc]).astype(np.float64)
    ok = np.flatnonzero(~disc)
    if ok.size == 0:
        return rewards, status
    a = a[ok]
    d, m = degree_profile(a)
    mu, res, converged = spectral_radius(laplacian(a, d), max_sweeps)
    status[ok[~converged | (res > tol)]] = 1
    with np.errstate(divide="ignore", invalid="ignore"):
        if vertex_form:
            vals = np.asarray(vertex_term(cid, d, m)[0], dtype=np.float64)
            bound = vals.max(axis=-1)
        else:
            iu, ju = np.triu_indices(n, 1)
            vals = np.asarray(edge_term(cid, d[:, iu], m[:, iu], d[:, ju], m[:, ju])[0], dtype=np.float64)
            vals = np.where(a[:, iu, ju] > 0, vals, -np.inf)
            bound = vals.max(axis=-1)
    rewards[ok] = mu - bound
    return rewards, status


def rollout_batch(init_bits, uniforms, random_rows, theta, sizes):
    batch, n_slots = init_bits.shape
    weights = []
    pos = 0
    for fin, fout in zip(sizes[:-1], sizes[1:]):
        w = theta[pos:pos + fin * fout].reshape(fin, fout)
        pos += fin * fout
        weights.append((w, theta[pos:pos + fout]))
        pos += fout
    bits = init_bits.copy()
    actions = np.zeros((batch, n_slots), dtype=np.uint8)
    w1, b1 = weights[0]
    z1 = bits.astype(np.float64) @ w1[:n_slots] + b1
    policy_rows = ~random_rows
    for k in range(n_slots):
        h = gelu(z1 + w1[n_slots + k])
        for i, (w, b) in enumerate(weights[1:], start=1):
            h = h @ w + b
            if i < len(weights) - 1:
                h = gelu(h)
        mx = h.max(axis=1)
        e0 = np.exp(h[:, 0] - mx)
        e1 = np.exp(h[:, 1] - mx)
        p1 = e1 / (e0 + e1)
        u = uniforms[:, k]
        act = np.where(policy_rows, u < p1, u < 0.5)
        actions[:, k] = act
        bits[:, k] ^= act.astype(np.uint8)
        # toggled slots add (bit now 1) or remove (bit now 0) their weight row
        sign = np.where(bits[:, k] == 1, 1.0, -1.0) * act
        z1 += sign[:, None] * w1[k]
    return bits, actions
