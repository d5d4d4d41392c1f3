"""Compiled inner loops. Falls back to plain Python when numba is missing."""
from __future__ import annotations

import math

import numpy as np

try:
    import numba

    def jit(fn):
        return numba.njit(cache=True, nogil=True)(fn)

except ImportError:  # pragma: no cover
    def jit(fn):
        return fn


EPS = 2.220446049250313e-16
PIVMIN = 1e-290


@jit
def sturm_count(diag, off, x):
    """Number of eigenvalues strictly below ``x`` (LDL^T inertia count)."""
    n = diag.shape[0]
    count = 0
    q = diag[0] - x
    if abs(q) < PIVMIN:
        q = -PIVMIN
    if q < 0.0:
        count += 1
    for i in range(1, n):
        q = diag[i] - x - off[i - 1] * off[i - 1] / q
        if abs(q) < PIVMIN:
            q = -PIVMIN
        if q < 0.0:
            count += 1
    return count


@jit
def gershgorin(diag, off):
    n = diag.shape[0]
    lo = np.inf
    hi = -np.inf
    for i in range(n):
        r = 0.0
        if i > 0:
            r += abs(off[i - 1])
        if i < n - 1:
            r += abs(off[i])
        lo = min(lo, diag[i] - r)
        hi = max(hi, diag[i] + r)
    return lo, hi


@jit
def bisect_eigenvalues(diag, off, k_lo, k_hi):
    """Eigenvalues with ascending indices ``k_lo <= k < k_hi`` by bisection."""
    glo, ghi = gershgorin(diag, off)
    pad = 2.0 * EPS * max(abs(glo), abs(ghi)) + 2.0 * PIVMIN
    glo -= pad
    ghi += pad
    out = np.empty(k_hi - k_lo)
    a_prev = glo
    for j in range(k_hi - k_lo):
        k = k_lo + j
        a = a_prev
        b = ghi
        for _ in range(400):
            tol = max(EPS, 2.0 * EPS * max(abs(a), abs(b)))
            if b - a <= tol:
                break
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            if sturm_count(diag, off, mid) > k:
                b = mid
            else:
                a = mid
        out[j] = 0.5 * (a + b)
        # eigenvalue k+1 >= eigenvalue k, so the lower bracket carries over
        a_prev = a
    return out


@jit
def _lu_tridiag(diag, off, shift, pivfloor, dl, d, du, du2, swap):
    n = diag.shape[0]
    for i in range(n):
        d[i] = diag[i] - shift
    for i in range(n - 1):
        dl[i] = off[i]
        du[i] = off[i]
        du2[i] = 0.0
    for i in range(n - 1):
        if abs(d[i]) >= abs(dl[i]):
            swap[i] = False
            if d[i] == 0.0:
                d[i] = pivfloor
            fact = dl[i] / d[i]
            dl[i] = fact
            d[i + 1] -= fact * du[i]
        else:
            swap[i] = True
            fact = d[i] / dl[i]
            d[i] = dl[i]
            dl[i] = fact
            temp = du[i]
            du[i] = d[i + 1]
            d[i + 1] = temp - fact * d[i + 1]
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -fact * du[i + 1]
    for i in range(n):
        if abs(d[i]) < pivfloor:
            d[i] = pivfloor if d[i] >= 0.0 else -pivfloor


@jit
def _lu_solve(dl, d, du, du2, swap, x):
    n = d.shape[0]
    for i in range(n - 1):
        if not swap[i]:
            x[i + 1] -= dl[i] * x[i]
        else:
            temp = x[i]
            x[i] = x[i + 1]
            x[i + 1] = temp - dl[i] * x[i]
    x[n - 1] /= d[n - 1]
    if n > 1:
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i]


@jit
def _residual_norm(diag, off, lam, x):
    n = diag.shape[0]
    s = 0.0
    for i in range(n):
        r = (diag[i] - lam) * x[i]
        if i > 0:
            r += off[i - 1] * x[i - 1]
        if i < n - 1:
            r += off[i] * x[i + 1]
        s += r * r
    return math.sqrt(s)


@jit
def inverse_iteration(diag, off, evals, cluster_rtol, max_iter):
    """Eigenvectors for sorted ``evals``; returns ``(vectors, failed_index)``.

    Vectors whose eigenvalues are closer than ``cluster_rtol * max(1, |ev|)`` to
    their predecessor are Gram-Schmidt orthogonalised against the rest of the
    cluster at every iteration. ``failed_index`` is -1 on success.
    """
    n = diag.shape[0]
    m = evals.shape[0]
    vecs = np.zeros((m, n))
    dl = np.empty(max(n - 1, 1))
    d = np.empty(n)
    du = np.empty(max(n - 1, 1))
    du2 = np.empty(max(n - 1, 1))
    swap = np.zeros(max(n - 1, 1), dtype=np.bool_)
    x = np.empty(n)
    hnorm = 0.0
    for i in range(n):
        r = abs(diag[i])
        if i > 0:
            r += abs(off[i - 1])
        if i < n - 1:
            r += abs(off[i])
        hnorm = max(hnorm, r)
    hnorm = max(hnorm, 1.0)
    cluster_start = 0
    for j in range(m):
        lam = evals[j]
        if j > 0 and lam - evals[j - 1] >= cluster_rtol * max(1.0, abs(lam)):
            cluster_start = j
        restol = 4.0 * n * EPS * (hnorm + abs(lam))
        # deterministic pseudo-random start vector
        seed = np.uint64(2654435761) * np.uint64(j + 1) + np.uint64(12345)
        for i in range(n):
            seed = seed * np.uint64(6364136223846793005) + np.uint64(1442695040888963407)
            x[i] = (float(seed >> np.uint64(11)) / 9007199254740992.0) - 0.5
        _lu_tridiag(diag, off, lam, EPS * hnorm, dl, d, du, du2, swap)
        converged_at = -1
        for it in range(max_iter):
            nrm = 0.0
            for i in range(n):
                nrm = max(nrm, abs(x[i]))
            for i in range(n):
                x[i] /= nrm
            _lu_solve(dl, d, du, du2, swap, x)
            for p in range(cluster_start, j):
                dot = 0.0
                for i in range(n):
                    dot += vecs[p, i] * x[i]
                for i in range(n):
                    x[i] -= dot * vecs[p, i]
            nrm = 0.0
            for i in range(n):
                nrm += x[i] * x[i]
            nrm = math.sqrt(nrm)
            if nrm == 0.0 or not math.isfinite(nrm):
                break
            for i in range(n):
                x[i] /= nrm
            if converged_at >= 0:
                break
            if _residual_norm(diag, off, lam, x) <= restol:
                converged_at = it
        if converged_at < 0:
            return vecs, j
        imax = 0
        for i in range(n):
            if abs(x[i]) > abs(x[imax]) * (1.0 + 1e-12):
                imax = i
        sign = 1.0 if x[imax] >= 0.0 else -1.0
        for i in range(n):
            vecs[j, i] = sign * x[i]
    return vecs, -1


@jit
def cocycle_orbit(theta0, freq, energy, eps, a0, a1, alpha, use_tan, n_steps, renorm_every,
                  guard):
    """Renormalised product of ``A(theta + k freq + i eps, E)`` along one orbit.

    Returns ``(log_norm_sum, used_steps, skipped, tail_min, tail_max)`` where the
    tail extrema are taken over running estimates in the last 10% of steps.
    """
    twopi = 2.0 * math.pi
    ch = math.cosh(twopi * eps)
    sh = math.sinh(twopi * eps)
    m11 = 1.0 + 0.0j
    m12 = 0.0 + 0.0j
    m21 = 0.0 + 0.0j
    m22 = 1.0 + 0.0j
    log_sum = 0.0
    used = 0
    skipped = 0
    tail_from = n_steps - n_steps // 10
    tail_min = np.inf
    tail_max = -np.inf
    for k in range(n_steps):
        t = theta0 + k * freq
        t -= math.floor(t)
        if use_tan:
            if abs(t - 0.5) < guard:
                skipped += 1
                continue
            tn = math.tan(math.pi * t)
            v = complex(a0 * tn * tn)
        else:
            c = complex(math.cos(twopi * t) * ch, -math.sin(twopi * t) * sh)
            v = (a0 + a1 * c) / (1.0 - alpha * c)
        if v.real > 1e300:
            v = complex(1e300, v.imag)
        elif v.real < -1e300:
            v = complex(-1e300, v.imag)
        z = energy - v
        # left-multiply by ((z, -1), (1, 0))
        n11 = z * m11 - m21
        n12 = z * m12 - m22
        m21 = m11
        m22 = m12
        m11 = n11
        m12 = n12
        used += 1
        if used % renorm_every == 0:
            nrm = math.sqrt(abs(m11) ** 2 + abs(m12) ** 2 + abs(m21) ** 2 + abs(m22) ** 2)
            m11 /= nrm
            m12 /= nrm
            m21 /= nrm
            m22 /= nrm
            log_sum += math.log(nrm)
            if k >= tail_from:
                est = log_sum / used
                tail_min = min(tail_min, est)
                tail_max = max(tail_max, est)
    nrm = math.sqrt(abs(m11) ** 2 + abs(m12) ** 2 + abs(m21) ** 2 + abs(m22) ** 2)
    log_sum += math.log(nrm)
    if used > 0:
        est = log_sum / used
        tail_min = min(tail_min, est)
        tail_max = max(tail_max, est)
    return log_sum, used, skipped, tail_min, tail_max
