# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled tableau kernels (same API as ``_kernels_py``)."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, uint8_t, int8_t

cnp.import_array()

BACKEND = "cython"

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline int _g(const uint64_t* ax, const uint64_t* az,
                   const uint64_t* bx, const uint64_t* bz, Py_ssize_t w) noexcept nogil:
    cdef Py_ssize_t k
    cdef uint64_t a_x, a_y, a_z, b_x, b_y, b_z, plus, minus
    cdef int s = 0
    for k in range(w):
        a_x = ax[k] & ~az[k]
        a_y = ax[k] & az[k]
        a_z = az[k] & ~ax[k]
        b_x = bx[k] & ~bz[k]
        b_y = bx[k] & bz[k]
        b_z = bz[k] & ~bx[k]
        plus = (a_x & b_y) | (a_y & b_z) | (a_z & b_x)
        minus = (a_y & b_x) | (a_z & b_y) | (a_x & b_z)
        s += __builtin_popcountll(plus) - __builtin_popcountll(minus)
    return ((s % 4) + 4) % 4


cdef inline int _anti(const uint64_t* ax, const uint64_t* az,
                      const uint64_t* bx, const uint64_t* bz, Py_ssize_t w) noexcept nogil:
    cdef Py_ssize_t k
    cdef int s = 0
    for k in range(w):
        s += __builtin_popcountll((ax[k] & bz[k]) ^ (az[k] & bx[k]))
    return s & 1


cdef inline void _rowmul(uint64_t[:, ::1] X, uint64_t[:, ::1] Z, uint8_t[::1] R,
                         Py_ssize_t h, Py_ssize_t i) noexcept nogil:
    cdef Py_ssize_t w = X.shape[1], k
    cdef int g = _g(&X[h, 0], &Z[h, 0], &X[i, 0], &Z[i, 0], w)
    R[h] = <uint8_t>((R[h] + R[i] + g) % 4)
    for k in range(w):
        X[h, k] ^= X[i, k]
        Z[h, k] ^= Z[i, k]


cdef int _peek(uint64_t[:, ::1] X, uint64_t[:, ::1] Z, uint8_t[::1] R, Py_ssize_t n,
               const uint64_t* px, const uint64_t* pz, int pr,
               uint64_t* ax, uint64_t* az) noexcept nogil:
    cdef Py_ssize_t w = X.shape[1], i, k
    cdef int r = 0
    for i in range(n, 2 * n):
        if _anti(&X[i, 0], &Z[i, 0], px, pz, w):
            return 0
    for k in range(w):
        ax[k] = 0
        az[k] = 0
    for i in range(n):
        if _anti(&X[i, 0], &Z[i, 0], px, pz, w):
            r += R[n + i] + _g(ax, az, &X[n + i, 0], &Z[n + i, 0], w)
            for k in range(w):
                ax[k] ^= X[n + i, k]
                az[k] ^= Z[n + i, k]
    if ((pr - r) % 4 + 4) % 4 == 0:
        return 1
    return -1


def anticommute_mask(X, Z, px, pz):
    cdef uint64_t[:, ::1] Xv = X
    cdef uint64_t[:, ::1] Zv = Z
    cdef const uint64_t[::1] pxv = px
    cdef const uint64_t[::1] pzv = pz
    cdef Py_ssize_t m = Xv.shape[0], w = Xv.shape[1], i
    out = np.zeros(m, dtype=np.bool_)
    cdef uint8_t[::1] ov = out.view(np.uint8)
    with nogil:
        for i in range(m):
            ov[i] = _anti(&Xv[i, 0], &Zv[i, 0], &pxv[0], &pzv[0], w)
    return out


def rowmul(X, Z, R, Py_ssize_t h, Py_ssize_t i):
    _rowmul(X, Z, R, h, i)


def mul_rows_by_pauli(X, Z, R, mask, px, pz, int extra):
    cdef uint64_t[:, ::1] Xv = X
    cdef uint64_t[:, ::1] Zv = Z
    cdef uint8_t[::1] Rv = R
    cdef const uint8_t[::1] mv = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef const uint64_t[::1] pxv = px
    cdef const uint64_t[::1] pzv = pz
    cdef Py_ssize_t m = Xv.shape[0], w = Xv.shape[1], i, k
    cdef int g
    with nogil:
        for i in range(m):
            if mv[i]:
                g = _g(&Xv[i, 0], &Zv[i, 0], &pxv[0], &pzv[0], w)
                Rv[i] = <uint8_t>(((Rv[i] + g + extra) % 4 + 4) % 4)
                for k in range(w):
                    Xv[i, k] ^= pxv[k]
                    Zv[i, k] ^= pzv[k]


def peek(X, Z, R, Py_ssize_t n, px, pz, int pr):
    cdef const uint64_t[::1] pxv = px
    cdef const uint64_t[::1] pzv = pz
    cdef uint64_t[::1] ax = np.zeros(X.shape[1], dtype=np.uint64)
    cdef uint64_t[::1] az = np.zeros(X.shape[1], dtype=np.uint64)
    return _peek(X, Z, R, n, &pxv[0], &pzv[0], pr, &ax[0], &az[0])


cdef int _measure(uint64_t[:, ::1] X, uint64_t[:, ::1] Z, uint8_t[::1] R, Py_ssize_t n,
                  const uint64_t* px, const uint64_t* pz, int pr, int rand_bit,
                  uint64_t* ax, uint64_t* az, int* det) noexcept nogil:
    cdef Py_ssize_t w = X.shape[1], i, k, p = -1
    cdef int v
    for i in range(n, 2 * n):
        if _anti(&X[i, 0], &Z[i, 0], px, pz, w):
            p = i
            break
    if p < 0:
        det[0] = 1
        v = _peek(X, Z, R, n, px, pz, pr, ax, az)
        return 0 if v == 1 else 1
    det[0] = 0
    for i in range(2 * n):
        if i != p and _anti(&X[i, 0], &Z[i, 0], px, pz, w):
            _rowmul(X, Z, R, i, p)
    for k in range(w):
        X[p - n, k] = X[p, k]
        Z[p - n, k] = Z[p, k]
        X[p, k] = px[k]
        Z[p, k] = pz[k]
    R[p - n] = R[p]
    R[p] = <uint8_t>((pr + 2 * rand_bit) % 4)
    return rand_bit


def measure(X, Z, R, Py_ssize_t n, px, pz, int pr, int rand_bit):
    cdef const uint64_t[::1] pxv = px
    cdef const uint64_t[::1] pzv = pz
    cdef uint64_t[::1] ax = np.zeros(X.shape[1], dtype=np.uint64)
    cdef uint64_t[::1] az = np.zeros(X.shape[1], dtype=np.uint64)
    cdef int det = 0
    cdef int b = _measure(X, Z, R, n, &pxv[0], &pzv[0], pr, rand_bit, &ax[0], &az[0], &det)
    return b, bool(det)


def measure_batch(X, Z, R, Py_ssize_t n, PX, PZ, PR, rand_bits):
    cdef uint64_t[:, ::1] Xv = X
    cdef uint64_t[:, ::1] Zv = Z
    cdef uint8_t[::1] Rv = R
    cdef const uint64_t[:, ::1] PXv = PX
    cdef const uint64_t[:, ::1] PZv = PZ
    cdef const uint8_t[::1] PRv = np.ascontiguousarray(PR, dtype=np.uint8)
    cdef const uint8_t[::1] rb = np.ascontiguousarray(rand_bits, dtype=np.uint8)
    cdef Py_ssize_t m = PXv.shape[0], j
    cdef uint64_t[::1] ax = np.zeros(Xv.shape[1], dtype=np.uint64)
    cdef uint64_t[::1] az = np.zeros(Xv.shape[1], dtype=np.uint64)
    bits = np.zeros(m, dtype=np.uint8)
    det = np.zeros(m, dtype=np.uint8)
    cdef uint8_t[::1] bv = bits
    cdef uint8_t[::1] dv = det
    cdef int d
    with nogil:
        for j in range(m):
            bv[j] = <uint8_t>_measure(Xv, Zv, Rv, n, &PXv[j, 0], &PZv[j, 0], PRv[j], rb[j],
                                      &ax[0], &az[0], &d)
            dv[j] = <uint8_t>d
    return bits, det


def peek_batch(X, Z, R, Py_ssize_t n, PX, PZ, PR):
    cdef uint64_t[:, ::1] Xv = X
    cdef uint64_t[:, ::1] Zv = Z
    cdef uint8_t[::1] Rv = R
    cdef const uint64_t[:, ::1] PXv = PX
    cdef const uint64_t[:, ::1] PZv = PZ
    cdef const uint8_t[::1] PRv = np.ascontiguousarray(PR, dtype=np.uint8)
    cdef Py_ssize_t m = PXv.shape[0], j
    cdef uint64_t[::1] ax = np.zeros(Xv.shape[1], dtype=np.uint64)
    cdef uint64_t[::1] az = np.zeros(Xv.shape[1], dtype=np.uint64)
    out = np.zeros(m, dtype=np.int8)
    cdef int8_t[::1] ov = out
    with nogil:
        for j in range(m):
            ov[j] = <int8_t>_peek(Xv, Zv, Rv, n, &PXv[j, 0], &PZv[j, 0], PRv[j], &ax[0], &az[0])
    return out


def syndrome_batch(X, Z, R, Py_ssize_t n, GX, GZ, GR, EX, EZ):
    cdef uint64_t[:, ::1] Xv = X
    cdef uint64_t[:, ::1] Zv = Z
    cdef uint8_t[::1] Rv = R
    cdef const uint64_t[:, ::1] GXv = GX
    cdef const uint64_t[:, ::1] GZv = GZ
    cdef const uint8_t[::1] GRv = np.ascontiguousarray(GR, dtype=np.uint8)
    cdef const uint64_t[:, ::1] EXv = EX
    cdef const uint64_t[:, ::1] EZv = EZ
    cdef Py_ssize_t ne = EXv.shape[0], ng = GXv.shape[0], w = Xv.shape[1]
    cdef Py_ssize_t e, g, i, rows = Xv.shape[0]
    cdef uint64_t[::1] ax = np.zeros(w, dtype=np.uint64)
    cdef uint64_t[::1] az = np.zeros(w, dtype=np.uint64)
    flip_arr = np.zeros(rows, dtype=np.uint8)
    cdef uint8_t[::1] flip = flip_arr
    out = np.zeros((ne, ng), dtype=np.int8)
    cdef int8_t[:, ::1] ov = out
    with nogil:
        for e in range(ne):
            for i in range(rows):
                flip[i] = <uint8_t>_anti(&Xv[i, 0], &Zv[i, 0], &EXv[e, 0], &EZv[e, 0], w)
                if flip[i]:
                    Rv[i] ^= 2
            for g in range(ng):
                ov[e, g] = <int8_t>_peek(Xv, Zv, Rv, n, &GXv[g, 0], &GZv[g, 0], GRv[g],
                                         &ax[0], &az[0])
            for i in range(rows):
                if flip[i]:
                    Rv[i] ^= 2
    return out


def symplectic_matrix(AX, AZ, BX, BZ):
    cdef const uint64_t[:, ::1] AXv = AX
    cdef const uint64_t[:, ::1] AZv = AZ
    cdef const uint64_t[:, ::1] BXv = BX
    cdef const uint64_t[:, ::1] BZv = BZ
    cdef Py_ssize_t a = AXv.shape[0], b = BXv.shape[0], w = AXv.shape[1], i, j
    out = np.zeros((a, b), dtype=np.uint8)
    cdef uint8_t[:, ::1] ov = out
    with nogil:
        for i in range(a):
            for j in range(b):
                ov[i, j] = <uint8_t>_anti(&AXv[i, 0], &AZv[i, 0], &BXv[j, 0], &BZv[j, 0], w)
    return out
