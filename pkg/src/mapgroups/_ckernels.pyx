# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: small dense complex exponentials and Magnus products.

Mirrors ``mapgroups._pykernels`` function for function. Matrices are row-major
contiguous complex128 blocks handled through raw pointers.
"""

import numpy as np

from libc.math cimport sqrt, isfinite, NAN
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy

from mapgroups._pykernels import PADE_COEFFS, SCALED_NORM

ctypedef double complex cplx

cdef double _C[7]
for _k in range(7):
    _C[_k] = PADE_COEFFS[_k]
cdef double _SCALED = SCALED_NORM
cdef double _COMM = sqrt(3.0) / 12.0


cdef inline double _abs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef void _matmul(const cplx* a, const cplx* b, cplx* out, int n) noexcept nogil:
    cdef int i, j, k
    cdef cplx s
    for i in range(n):
        for j in range(n):
            s = 0
            for k in range(n):
                s = s + a[i * n + k] * b[k * n + j]
            out[i * n + j] = s


cdef int _solve(cplx* q, cplx* p, int n) noexcept nogil:
    """Overwrite p with q^{-1} p (q destroyed). Returns -1 if q is singular."""
    cdef int col, row, piv, j
    cdef double best, cur
    cdef cplx tmp, factor
    for col in range(n):
        piv = col
        best = _abs2(q[col * n + col])
        for row in range(col + 1, n):
            cur = _abs2(q[row * n + col])
            if cur > best:
                best = cur
                piv = row
        if best == 0.0:
            return -1
        if piv != col:
            for j in range(n):
                tmp = q[col * n + j]
                q[col * n + j] = q[piv * n + j]
                q[piv * n + j] = tmp
                tmp = p[col * n + j]
                p[col * n + j] = p[piv * n + j]
                p[piv * n + j] = tmp
        for row in range(col + 1, n):
            factor = q[row * n + col] / q[col * n + col]
            if factor != 0:
                for j in range(col, n):
                    q[row * n + j] = q[row * n + j] - factor * q[col * n + j]
                for j in range(n):
                    p[row * n + j] = p[row * n + j] - factor * p[col * n + j]
    for col in range(n - 1, -1, -1):
        for j in range(n):
            tmp = p[col * n + j]
            for row in range(col + 1, n):
                tmp = tmp - q[col * n + row] * p[row * n + j]
            p[col * n + j] = tmp / q[col * n + col]
    return 0


cdef int _expm(const cplx* a, cplx* out, int n, cplx* work) noexcept nogil:
    """Scaling and squaring with the [6/6] Padé approximant. ``work`` holds 6 n^2."""
    cdef int nn = n * n
    cdef cplx* x = work
    cdef cplx* x2 = work + nn
    cdef cplx* x4 = work + 2 * nn
    cdef cplx* x6 = work + 3 * nn
    cdef cplx* u = work + 4 * nn
    cdef cplx* v = work + 5 * nn
    cdef double norm = 0.0, scale = 1.0
    cdef int i, s = 0
    cdef cplx odd, even
    for i in range(nn):
        norm += _abs2(a[i])
    norm = sqrt(norm)
    if not isfinite(norm):
        return -1
    while norm / scale >= _SCALED:
        scale *= 2.0
        s += 1
    for i in range(nn):
        x[i] = a[i] / scale
    _matmul(x, x, x2, n)
    _matmul(x2, x2, x4, n)
    _matmul(x4, x2, x6, n)
    # u <- c1 I + c3 x2 + c5 x4 (then times x), v <- even part
    for i in range(nn):
        u[i] = _C[3] * x2[i] + _C[5] * x4[i]
        v[i] = _C[2] * x2[i] + _C[4] * x4[i] + _C[6] * x6[i]
    for i in range(n):
        u[i * n + i] = u[i * n + i] + _C[1]
        v[i * n + i] = v[i * n + i] + _C[0]
    _matmul(x, u, x2, n)
    # x2 now holds the odd part; build q = v - u in x4 and p = v + u in out
    for i in range(nn):
        odd = x2[i]
        even = v[i]
        x4[i] = even - odd
        out[i] = even + odd
    if _solve(x4, out, n) != 0:
        return -1
    for i in range(s):
        _matmul(out, out, x, n)
        memcpy(out, x, nn * sizeof(cplx))
    return 0


def expm(a):
    cdef const cplx[:, ::1] src = np.ascontiguousarray(a, dtype=np.complex128)
    cdef int n = src.shape[0]
    res = np.empty((n, n), dtype=np.complex128)
    cdef cplx[:, ::1] dst = res
    cdef cplx* work = <cplx*> malloc(6 * n * n * sizeof(cplx))
    cdef int status
    try:
        status = _expm(&src[0, 0], &dst[0, 0], n, work)
    finally:
        free(work)
    if status != 0:
        res[...] = np.nan
    return res


def expm_batch(stack):
    cdef const cplx[:, :, ::1] src = np.ascontiguousarray(stack, dtype=np.complex128)
    cdef int count = src.shape[0], n = src.shape[1], k, i
    res = np.empty((count, n, n), dtype=np.complex128)
    cdef cplx[:, :, ::1] dst = res
    cdef cplx* work = <cplx*> malloc(6 * n * n * sizeof(cplx))
    cdef int status
    try:
        with nogil:
            for k in range(count):
                status = _expm(&src[k, 0, 0], &dst[k, 0, 0], n, work)
                if status != 0:
                    for i in range(n * n):
                        (&dst[k, 0, 0])[i] = NAN
    finally:
        free(work)
    return res


def magnus4(xi1, xi2, h, bint dense=False):
    cdef const cplx[:, :, ::1] a = np.ascontiguousarray(xi1, dtype=np.complex128)
    cdef const cplx[:, :, ::1] b = np.ascontiguousarray(xi2, dtype=np.complex128)
    cdef const double[::1] hs = np.ascontiguousarray(h, dtype=np.float64)
    cdef int steps = a.shape[0], n = a.shape[1], nn = n * n
    cdef int j, i, bad = -1
    cdef double hj, w1, w2
    cdef const cplx* pa
    cdef const cplx* pb
    out_arr = np.empty((steps + 1 if dense else 1, n, n), dtype=np.complex128)
    cdef cplx[:, :, ::1] out = out_arr
    cdef cplx* buf = <cplx*> malloc((6 + 5) * nn * sizeof(cplx))
    cdef cplx* work = buf
    cdef cplx* g = buf + 6 * nn
    cdef cplx* ab = g + nn
    cdef cplx* ba = ab + nn
    cdef cplx* omega = ba + nn
    cdef cplx* e = omega + nn
    try:
        with nogil:
            for i in range(nn):
                g[i] = 0
            for i in range(n):
                g[i * n + i] = 1
            if dense:
                memcpy(&out[0, 0, 0], g, nn * sizeof(cplx))
            for j in range(steps):
                hj = hs[j]
                pa = &a[j, 0, 0]
                pb = &b[j, 0, 0]
                _matmul(pa, pb, ab, n)
                _matmul(pb, pa, ba, n)
                w1 = 0.5 * hj
                w2 = _COMM * hj * hj
                for i in range(nn):
                    omega[i] = w1 * (pa[i] + pb[i]) + w2 * (ab[i] - ba[i])
                if _expm(omega, e, n, work) != 0:
                    bad = j
                    break
                _matmul(g, e, ab, n)
                memcpy(g, ab, nn * sizeof(cplx))
                for i in range(nn):
                    if not (isfinite(g[i].real) and isfinite(g[i].imag)):
                        bad = j
                        break
                if bad >= 0:
                    break
                if dense:
                    memcpy(&out[j + 1, 0, 0], g, nn * sizeof(cplx))
            if not dense:
                memcpy(&out[0, 0, 0], g, nn * sizeof(cplx))
    finally:
        free(buf)
    if dense:
        return out_arr, bad
    return out_arr[0], bad
