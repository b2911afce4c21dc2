"""Loop kernels compiled with numba.

All kernels release the GIL so search instances running on separate threads
overlap their scoring and rollouts.
"""

import math

import numpy as np
from numba import njit

from . import formulas

_jit = njit(cache=True, nogil=True)
_SQRT_HALF = math.sqrt(0.5)

_vertex, _edge = formulas.build(_jit(formulas.clamped_sqrt))
vertex_term = _jit(_vertex)
edge_term = _jit(_edge)


@_jit
def adjacency(bits, n):
    a = np.zeros((n, n), dtype=np.uint8)
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            if bits[k]:
                a[i, j] = 1
                a[j, i] = 1
            k += 1
    return a


@_jit
def degree_profile(a):
    n = a.shape[0]
    d = np.zeros(n)
    for i in range(n):
        for j in range(n):
            d[i] += a[i, j]
    m = np.zeros(n)
    for i in range(n):
        if d[i] > 0:
            s = 0.0
            for j in range(n):
                if a[i, j]:
                    s += d[j]
            m[i] = s / d[i]
    return d, m


@_jit
def count_components(a):
    n = a.shape[0]
    label = -np.ones(n, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    c = 0
    for s in range(n):
        if label[s] >= 0:
            continue
        label[s] = c
        top = 0
        stack[0] = s
        top = 1
        while top > 0:
            top -= 1
            v = stack[top]
            for u in range(n):
                if a[v, u] and label[u] < 0:
                    label[u] = c
                    stack[top] = u
                    top += 1
        c += 1
    return c


@_jit
def laplacian(a, d):
    n = a.shape[0]
    lap = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            lap[i, j] = -float(a[i, j])
        lap[i, i] = d[i]
    return lap


@_jit
def jacobi_eigh(a0, max_sweeps):
    """Cyclic Jacobi on a symmetric matrix; returns (eigenvalues, vectors, converged)."""
    n = a0.shape[0]
    a = a0.copy()
    v = np.eye(n)
    converged = False
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += abs(a[p, q])
        if off == 0.0:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                g = 100.0 * abs(apq)
                if sweep > 3 and abs(a[p, p]) + g == abs(a[p, p]) and abs(a[q, q]) + g == abs(a[q, q]):
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                if apq == 0.0:
                    continue
                h = a[q, q] - a[p, p]
                if abs(h) + g == abs(h):
                    t = apq / h
                else:
                    theta = 0.5 * h / apq
                    t = 1.0 / (abs(theta) + math.sqrt(1.0 + theta * theta))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    if k == p or k == q:
                        continue
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[p, k] = a[k, p]
                    a[k, q] = s * akp + c * akq
                    a[q, k] = a[k, q]
                a[p, p] -= t * apq
                a[q, q] += t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    if not converged:
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += abs(a[p, q])
        converged = off == 0.0
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i]
    return w, v, converged


@_jit
def spectral_radius(lap, max_sweeps):
    """Largest eigenvalue as a Rayleigh quotient with its residual norm."""
    n = lap.shape[0]
    w, v, converged = jacobi_eigh(lap, max_sweeps)
    idx = 0
    for i in range(1, n):
        if w[i] > w[idx]:
            idx = i
    x = v[:, idx].copy()
    nrm = math.sqrt(np.sum(x * x))
    x /= nrm
    y = lap @ x
    mu = np.sum(x * y)
    r = 0.0
    for i in range(n):
        r += (y[i] - mu * x[i]) ** 2
    return mu, math.sqrt(r), converged


@_jit
def bound_value(cid, vertex_form, a, d, m):
    """Return (bound, witness_a, witness_b, clamped_any, clamped_at_argmax).

    ``witness_b`` is -1 for vertex-max conjectures.  ``bound`` is -inf when
    the domain is empty (edge-max on an edgeless graph).
    """
    n = a.shape[0]
    best = -np.inf
    wa = -1
    wb = -1
    any_c = False
    best_c = False
    if vertex_form:
        for v in range(n):
            val, c = vertex_term(cid, d[v], m[v])
            any_c = any_c or c
            if val > best:
                best = val
                wa = v
                best_c = c
    else:
        for v in range(n):
            for j in range(v + 1, n):
                if not a[v, j]:
                    continue
                val, c = edge_term(cid, d[v], m[v], d[j], m[j])
                any_c = any_c or c
                if val > best:
                    best = val
                    wa = v
                    wb = j
                    best_c = c
    return best, wa, wb, any_c, best_c


@_jit
def score_conjecture_batch(bits, n, cid, vertex_form, max_sweeps, tol):
    """Rewards for a batch of edge-bit rows; status 1 marks an eigensolve failure."""
    batch = bits.shape[0]
    rewards = np.empty(batch)
    status = np.zeros(batch, dtype=np.int8)
    for b in range(batch):
        a = adjacency(bits[b], n)
        c = count_components(a)
        if c > 1:
            rewards[b] = -float(n + c)
            continue
        d, m = degree_profile(a)
        mu, res, converged = spectral_radius(laplacian(a, d), max_sweeps)
        if not converged or res > tol:
            status[b] = 1
        bound = bound_value(cid, vertex_form, a, d, m)[0]
        rewards[b] = mu - bound
    return rewards, status


@_jit
def _gelu(x):
    return 0.5 * x * (1.0 + math.erf(x * _SQRT_HALF))


@_jit
def rollout_batch(init_bits, uniforms, random_rows, theta, sizes):
    """Build one graph per row by XOR-ing sampled actions into ``init_bits``.

    ``theta`` is the flat parameter vector (per layer: row-major weights of
    shape (fan_in, fan_out) followed by the bias).  Row ``b`` takes action 1
    at step ``k`` iff ``uniforms[b, k]`` is below the policy's probability of
    action 1, or below 0.5 when ``random_rows[b]`` is set.
    """
    batch, n_slots = init_bits.shape
    n_layers = sizes.shape[0] - 1
    w_off = np.empty(n_layers, dtype=np.int64)
    b_off = np.empty(n_layers, dtype=np.int64)
    pos = 0
    for layer in range(n_layers):
        w_off[layer] = pos
        pos += sizes[layer] * sizes[layer + 1]
        b_off[layer] = pos
        pos += sizes[layer + 1]
    width = 0
    for layer in range(1, n_layers + 1):
        if sizes[layer] > width:
            width = sizes[layer]
    h1 = sizes[1]

    bits = init_bits.copy()
    actions = np.zeros((batch, n_slots), dtype=np.uint8)
    z1 = np.empty(h1)
    cur = np.empty(width)
    nxt = np.empty(width)
    for b in range(batch):
        if random_rows[b]:
            for k in range(n_slots):
                if uniforms[b, k] < 0.5:
                    actions[b, k] = 1
                    bits[b, k] ^= 1
            continue
        # first-layer pre-activation for the edge-bit half of the observation
        for h in range(h1):
            z1[h] = theta[b_off[0] + h]
        for j in range(n_slots):
            if bits[b, j]:
                row = w_off[0] + j * h1
                for h in range(h1):
                    z1[h] += theta[row + h]
        for k in range(n_slots):
            row = w_off[0] + (n_slots + k) * h1
            for h in range(h1):
                cur[h] = _gelu(z1[h] + theta[row + h])
            for layer in range(1, n_layers):
                fin = sizes[layer]
                fout = sizes[layer + 1]
                for o in range(fout):
                    nxt[o] = theta[b_off[layer] + o]
                for i in range(fin):
                    ci = cur[i]
                    base = w_off[layer] + i * fout
                    for o in range(fout):
                        nxt[o] += ci * theta[base + o]
                if layer < n_layers - 1:
                    for o in range(fout):
                        cur[o] = _gelu(nxt[o])
            mx = max(nxt[0], nxt[1])
            e0 = math.exp(nxt[0] - mx)
            e1 = math.exp(nxt[1] - mx)
            p1 = e1 / (e0 + e1)
            if uniforms[b, k] < p1:
                actions[b, k] = 1
                bits[b, k] ^= 1
                row = w_off[0] + k * h1
                if bits[b, k]:
                    for h in range(h1):
                        z1[h] += theta[row + h]
                else:
                    for h in range(h1):
                        z1[h] -= theta[row + h]
    return bits, actions
