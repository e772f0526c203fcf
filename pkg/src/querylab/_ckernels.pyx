# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of ``_pykernels``: same signatures, same results."""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, fabs

cnp.import_array()


def walk_vertices(flips, long long start=0):
    cdef cnp.int64_t[:] f = np.ascontiguousarray(flips, dtype=np.int64)
    cdef Py_ssize_t m = f.shape[0], i
    out = np.empty(m + 1, dtype=np.int64)
    cdef cnp.int64_t[:] o = out
    cdef long long v = start
    o[0] = v
    for i in range(m):
        v ^= (<long long>1) << f[i]
        o[i + 1] = v
    return out


def cut_cycles(verts):
    cdef cnp.int64_t[:] a = np.ascontiguousarray(verts, dtype=np.int64)
    cdef Py_ssize_t m = a.shape[0], i
    cdef dict last = {}
    for i in range(m):
        last[a[i]] = i
    out = []
    i = 0
    while i < m:
        out.append(int(a[i]))
        i = <Py_ssize_t>last[a[i]] + 1
    return out


def max_cycle_length(verts):
    cdef cnp.int64_t[:] a = np.ascontiguousarray(verts, dtype=np.int64)
    cdef Py_ssize_t m = a.shape[0], i, j
    cdef dict first = {}
    cdef Py_ssize_t best = 0
    for i in range(m):
        j = first.setdefault(a[i], i)
        if i - j > best:
            best = i - j
    return best


cdef inline void _eval_one(const cnp.int8_t* sig, int n, int res, double step,
                           const double* x, double* out, Py_ssize_t* strides) noexcept nogil:
    cdef int l, corner, bit
    cdef double t, w
    cdef Py_ssize_t base[8]
    cdef double frac[8]
    cdef Py_ssize_t off
    for l in range(n):
        t = x[l] * res
        base[l] = <Py_ssize_t>floor(t)
        if base[l] < 0:
            base[l] = 0
        if base[l] > res - 1:
            base[l] = res - 1
        frac[l] = t - base[l]
        out[l] = 0.0
    for corner in range(1 << n):
        w = 1.0
        off = 0
        for l in range(n):
            bit = (corner >> l) & 1
            if bit:
                w *= frac[l]
            else:
                w *= 1.0 - frac[l]
            off += (base[l] + bit) * strides[l]
        if w != 0.0:
            for l in range(n):
                out[l] += w * sig[off + l]
    for l in range(n):
        t = x[l] + step * out[l]
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
        out[l] = t


cdef void _strides(int n, int res, Py_ssize_t* strides):
    cdef int l
    cdef Py_ssize_t s = n
    for l in range(n - 1, -1, -1):
        strides[l] = s
        s *= res + 1


def field_eval(sig, int shape_n, int res, double step, pts):
    if shape_n > 8:
        raise ValueError("compiled field_eval supports n <= 8")
    cdef cnp.int8_t[::1] s = np.ascontiguousarray(sig, dtype=np.int8).reshape(-1)
    cdef double[:, ::1] p = np.ascontiguousarray(np.atleast_2d(pts), dtype=np.float64)
    cdef Py_ssize_t m = p.shape[0], i
    out = np.empty((m, shape_n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t strides[8]
    _strides(shape_n, res, strides)
    with nogil:
        for i in range(m):
            _eval_one(&s[0], shape_n, res, step, &p[i, 0], &o[i, 0], strides)
    return out


cdef inline bint _passes(const cnp.int8_t* sig, int n, int res, double step, int k,
                         long long* a, double slack, Py_ssize_t* strides) noexcept nogil:
    cdef double x[8]
    cdef double y[8]
    cdef double near, d0, d1
    cdef int l
    for l in range(n):
        x[l] = a[l] / <double>k
    _eval_one(sig, n, res, step, x, y, strides)
    for l in range(n):
        near = floor(y[l] * k + 0.5)
        if near < 0:
            near = 0
        if near > k:
            near = k
        d0 = x[l] - y[l]
        d1 = near / k - y[l]
        if d0 * d0 > d1 * d1 + slack:
            return False
    return True


def scan_pure_fixed_grid(sig, int shape_n, int res, double step, int k, chunk=None):
    """Same contract as the Python version; skips fine cells that cannot qualify.

    A qualifying a needs |a_i/k - f_i(a/k)| <= 1/k in every coordinate.  In a
    fine cell where coordinate j has one sign s at all corners, |f_j - x_j|
    is at least min(step, distance to the wall ahead), so if that exceeds
    1/k no grid point of the cell can qualify.
    """
    if shape_n > 8:
        raise ValueError("compiled scan supports n <= 8")
    sig_c = np.ascontiguousarray(sig, dtype=np.int8)
    cdef cnp.int8_t[::1] s = sig_c.reshape(-1)
    cdef int n = shape_n, l, j, corner
    cdef Py_ssize_t strides[8]
    cdef long long a[8]
    cdef long long q[8]
    cdef long long lo[8]
    cdef long long hi[8]
    cdef double slack = 3.0 / (4.0 * k * k) + 1e-12
    cdef double thresh = 1.0 / k + 1e-9
    cdef double bound
    cdef int smin, smax, v
    cdef Py_ssize_t off
    cdef bint skip
    _strides(n, res, strides)
    # first grid index of each fine cell along an axis (x = a/k in cell floor(x*res))
    first = np.empty(res + 1, dtype=np.int64)
    cdef cnp.int64_t[:] fst = first
    cdef long long c, aa
    for c in range(res + 1):
        fst[c] = k + 1
    for aa in range(k, -1, -1):
        c = <long long>floor((aa / <double>k) * res)
        if c > res - 1:
            c = res - 1
        fst[c] = aa
    for c in range(res - 1, -1, -1):
        if fst[c] > fst[c + 1]:
            fst[c] = fst[c + 1]
    found = []
    for l in range(n):
        q[l] = 0
    while True:
        skip = False
        for j in range(n):
            smin = 2
            smax = -2
            for corner in range(1 << n):
                off = j
                for l in range(n):
                    off += (q[l] + ((corner >> l) & 1)) * strides[l]
                v = s[off]
                if v < smin:
                    smin = v
                if v > smax:
                    smax = v
            bound = 0.0
            if smin == 1:
                bound = 1.0 - (q[j] + 1) / <double>res
            elif smax == -1:
                bound = q[j] / <double>res
            else:
                continue
            if bound > step:
                bound = step
            if bound > thresh:
                skip = True
                break
        if not skip:
            for l in range(n):
                lo[l] = fst[q[l]]
                hi[l] = fst[q[l] + 1] if q[l] + 1 < res else k + 1
                a[l] = lo[l]
            empty = False
            for l in range(n):
                if lo[l] >= hi[l]:
                    empty = True
            if not empty:
                while True:
                    if _passes(&s[0], n, res, step, k, a, slack, strides):
                        found.append([a[l] for l in range(n)])
                    l = n - 1
                    while l >= 0:
                        a[l] += 1
                        if a[l] < hi[l]:
                            break
                        a[l] = lo[l]
                        l -= 1
                    if l < 0:
                        break
        l = n - 1
        while l >= 0:
            q[l] += 1
            if q[l] < res:
                break
            q[l] = 0
            l -= 1
        if l < 0:
            break
    if not found:
        return np.zeros((0, n), dtype=np.int64)
    out = np.array(found, dtype=np.int64)
    return out[np.lexsort(out.T[::-1])]
