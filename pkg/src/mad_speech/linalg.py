"""Dense symmetric eigensolver.

Householder reduction to tridiagonal form followed by the implicit-shift QL
iteration. Only symmetric input is accepted, so eigenvalues are real and the
eigenvectors come out orthonormal.
"""

import math

import numpy as np

from .errors import EigenFailure, NotSymmetric

_EPS = np.finfo(np.float64).eps
MAX_QL_ITERATIONS = 60  # per eigenvalue


def _check_symmetric(a, tol):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NotSymmetric("matrix has non-finite entries")
    asym = np.max(np.abs(a - a.T)) if a.size else 0.0
    if asym > tol:
        raise NotSymmetric(f"max |A - A^T| = {asym:.3g} exceeds {tol:.1g}")
    return a


def tridiagonalize(a, compute_q=True):
    """Reduce symmetric ``a`` to tridiagonal form ``T = Q^T a Q``.

    Returns ``(d, e, q)`` where ``d`` is the diagonal, ``e[i] = T[i+1, i]``
    (with ``e[-1] = 0``) and ``q`` the orthogonal transform, or ``None`` when
    ``compute_q`` is false.
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    reflectors = []
    for k in range(n - 2):
        x = a[k + 1:, k]
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0:
            reflectors.append(None)
            continue
        alpha = -math.copysign(xnorm, x[0])
        v = x.copy()
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            reflectors.append(None)
            continue
        v /= vnorm
        sub = a[k + 1:, k + 1:]
        p = sub @ v
        w = p - (v @ p) * v
        vw = np.stack((v, w), axis=1)
        sub -= 2.0 * (vw @ vw[:, ::-1].T)
        a[k + 1, k] = a[k, k + 1] = alpha
        a[k + 2:, k] = 0.0
        a[k, k + 2:] = 0.0
        reflectors.append(v)

    d = np.diag(a).copy()
    e = np.zeros(n)
    if n > 1:
        e[:-1] = np.diag(a, -1)

    q = None
    if compute_q:
        q = np.eye(n)
        for k in range(len(reflectors) - 1, -1, -1):
            v = reflectors[k]
            if v is None:
                continue
            block = q[k + 1:, :]
            block -= 2.0 * np.outer(v, v @ block)
    return d, e, q


def tridiagonal_ql(d, e, z=None, max_iter=MAX_QL_ITERATIONS):
    """Implicit-shift QL on a symmetric tridiagonal matrix.

    ``d`` and ``e`` follow the :func:`tridiagonalize` convention. When ``z``
    is given, its columns are rotated in place so that ``z`` ends up holding
    the eigenvectors of the matrix whose tridiagonal form was ``(d, e)``.
    Returns the (unsorted) eigenvalues as a float64 array.
    """
    d = [float(x) for x in d]
    e = [float(x) for x in e]
    n = len(d)
    if n == 0:
        return np.zeros(0)
    e[-1] = 0.0
    anorm = max(abs(d[i]) + abs(e[i]) + (abs(e[i - 1]) if i else 0.0) for i in range(n))
    # off-diagonals below eps*||T|| are at the backward-error level already
    tiny = anorm * _EPS
    eps = _EPS

    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd or abs(e[m]) <= tiny:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                raise EigenFailure(it)
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if z is not None:
                    zi1 = z[:, i + 1].copy()
                    z[:, i + 1] = s * z[:, i] + c * zi1
                    z[:, i] = c * z[:, i] - s * zi1
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.array(d)


def symmetric_eigh(a, symmetry_tol=1e-12):
    """Eigenvalues (non-increasing) and orthonormal eigenvectors (columns) of ``a``."""
    a = _check_symmetric(a, symmetry_tol)
    a = 0.5 * (a + a.T)
    d, e, q = tridiagonalize(a, compute_q=True)
    w = tridiagonal_ql(d, e, z=q)
    order = np.argsort(-w, kind="stable")
    return w[order], q[:, order]


def symmetric_eigvalsh(a, symmetry_tol=1e-12):
    """Eigenvalues of ``a`` in non-increasing order."""
    a = _check_symmetric(a, symmetry_tol)
    a = 0.5 * (a + a.T)
    d, e, _ = tridiagonalize(a, compute_q=False)
    w = tridiagonal_ql(d, e)
    return np.sort(w)[::-1]
