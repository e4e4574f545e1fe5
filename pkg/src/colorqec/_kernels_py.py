"""Pure-numpy tableau kernels; reference behaviour for the compiled module.

Layout: ``X`` and ``Z`` are (rows, words) uint64 arrays with qubit ``q`` at
word ``q // 64``, bit ``q % 64``.  ``R`` holds each row's phase exponent
(mod 4) of ``i``.  Rows ``0..n-1`` are destabilizers, ``n..2n-1``
stabilizers.
"""
from __future__ import annotations

import numpy as np

BACKEND = "python"


def _pc(a) -> np.ndarray:
    return np.bitwise_count(a).astype(np.int64)


def phase_of_product(ax, az, bx, bz):
    """Phase exponent picked up by P_a * P_b (word arrays, summed over last axis)."""
    a_x = ax & ~az
    a_y = ax & az
    a_z = az & ~ax
    b_x = bx & ~bz
    b_y = bx & bz
    b_z = bz & ~bx
    plus = (a_x & b_y) | (a_y & b_z) | (a_z & b_x)
    minus = (a_y & b_x) | (a_z & b_y) | (a_x & b_z)
    return (_pc(plus).sum(axis=-1) - _pc(minus).sum(axis=-1)) % 4


def anticommute_mask(X, Z, px, pz) -> np.ndarray:
    return (_pc((X & pz) ^ (Z & px)).sum(axis=-1) & 1).astype(bool)


def rowmul(X, Z, R, h: int, i: int) -> None:
    """row h <- row h * row i."""
    g = int(phase_of_product(X[h], Z[h], X[i], Z[i]))
    R[h] = (int(R[h]) + int(R[i]) + g) % 4
    X[h] ^= X[i]
    Z[h] ^= Z[i]


def mul_rows_by_pauli(X, Z, R, mask, px, pz, extra: int) -> None:
    """rows[mask] <- i**extra * rows[mask] * P."""
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        return
    g = phase_of_product(X[idx], Z[idx], px[None, :], pz[None, :])
    R[idx] = ((R[idx].astype(np.int64) + g + extra) % 4).astype(np.uint8)
    X[idx] ^= px
    Z[idx] ^= pz


def _stab_product_phase(X, Z, R, n, sel):
    """Phase exponent of the ordered product of the selected stabilizer rows."""
    w = X.shape[1]
    ax = np.zeros(w, dtype=np.uint64)
    az = np.zeros(w, dtype=np.uint64)
    r = 0
    for i in sel:
        row = n + i
        r += int(R[row]) + int(phase_of_product(ax, az, X[row], Z[row]))
        ax ^= X[row]
        az ^= Z[row]
    return r % 4


def peek(X, Z, R, n: int, px, pz, pr: int) -> int:
    """+1/-1 if the Pauli has a definite value, else 0.  No state change."""
    if anticommute_mask(X[n:], Z[n:], px, pz).any():
        return 0
    sel = np.nonzero(anticommute_mask(X[:n], Z[:n], px, pz))[0]
    rs = _stab_product_phase(X, Z, R, n, sel)
    return 1 if (pr - rs) % 4 == 0 else -1


def measure(X, Z, R, n: int, px, pz, pr: int, rand_bit: int):
    """Projective measurement; returns (outcome bit, deterministic)."""
    anti = anticommute_mask(X, Z, px, pz)
    stab_hits = np.nonzero(anti[n:])[0]
    if stab_hits.size == 0:
        v = peek(X, Z, R, n, px, pz, pr)
        return (0 if v == 1 else 1), True
    p = n + int(stab_hits[0])
    for i in np.nonzero(anti)[0]:
        i = int(i)
        if i != p:
            rowmul(X, Z, R, i, p)
    X[p - n] = X[p]
    Z[p - n] = Z[p]
    R[p - n] = R[p]
    X[p] = px
    Z[p] = pz
    R[p] = (pr + 2 * rand_bit) % 4
    return int(rand_bit), False


def measure_batch(X, Z, R, n: int, PX, PZ, PR, rand_bits):
    m = PX.shape[0]
    bits = np.zeros(m, dtype=np.uint8)
    det = np.zeros(m, dtype=np.uint8)
    for k in range(m):
        b, d = measure(X, Z, R, n, PX[k], PZ[k], int(PR[k]), int(rand_bits[k]))
        bits[k] = b
        det[k] = d
    return bits, det


def peek_batch(X, Z, R, n: int, PX, PZ, PR):
    m = PX.shape[0]
    out = np.zeros(m, dtype=np.int8)
    for k in range(m):
        out[k] = peek(X, Z, R, n, PX[k], PZ[k], int(PR[k]))
    return out


def syndrome_batch(X, Z, R, n: int, GX, GZ, GR, EX, EZ):
    """For each error row: apply it, read every generator, undo it."""
    ne, ng = EX.shape[0], GX.shape[0]
    out = np.zeros((ne, ng), dtype=np.int8)
    for e in range(ne):
        flip = anticommute_mask(X, Z, EX[e], EZ[e])
        R[flip] ^= 2
        for g in range(ng):
            out[e, g] = peek(X, Z, R, n, GX[g], GZ[g], int(GR[g]))
        R[flip] ^= 2
    return out


def symplectic_matrix(AX, AZ, BX, BZ) -> np.ndarray:
    """out[a, b] = symplectic product of row a of A with row b of B."""
    t = (AX[:, None, :] & BZ[None, :, :]) ^ (AZ[:, None, :] & BX[None, :, :])
    return (_pc(t).sum(axis=-1) & 1).astype(np.uint8)
