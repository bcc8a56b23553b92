"""Inner loops shared by the codec and the receivers.

Every kernel exists as ``*_nb`` (numba) and ``*_np`` (numpy).  Both are
importable regardless of the backend switch; the public modules pick one
through :data:`shortblock._accel.USE_NUMBA`.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

# --------------------------------------------------------------------------
# Hadamard transforms.  Rows of ``buf`` are transformed independently and the
# returned count is the number of additions/subtractions spent on one row.


@njit(cache=True)
def fht_rows_nb(buf):
    rows, n = buf.shape
    ops = 0
    h = 1
    while h < n:
        for r in range(rows):
            for start in range(0, n, 2 * h):
                for k in range(start, start + h):
                    a = buf[r, k]
                    b = buf[r, k + h]
                    buf[r, k] = a + b
                    buf[r, k + h] = a - b
        ops += n
        h *= 2
    return ops


def fht_rows_np(buf):
    rows, n = buf.shape
    ops = 0
    h = 1
    while h < n:
        view = buf.reshape(rows, n // (2 * h), 2, h)
        a = view[:, :, 0, :].copy()
        b = view[:, :, 1, :]
        view[:, :, 0, :] += b
        view[:, :, 1, :] = a - b
        ops += n
        h *= 2
    return ops


@njit(cache=True)
def naive_rows_nb(u, h, out):
    rows, n = u.shape
    for r in range(rows):
        for j in range(n):
            acc = 0.0
            for t in range(n):
                if h[t, j] > 0:
                    acc += u[r, t]
                else:
                    acc -= u[r, t]
            out[r, j] = acc
    return n * n


def naive_rows_np(u, h, out):
    n = u.shape[1]
    out[...] = u @ h
    return n * n


@njit(cache=True)
def naive_parity_rows_nb(u, out):
    # sign of H[t, j] recomputed as the parity of popcount(t & j)
    rows, n = u.shape
    for r in range(rows):
        for j in range(n):
            acc = 0.0
            for t in range(n):
                v = t & j
                p = 0
                while v:
                    p ^= 1
                    v &= v - 1
                if p == 0:
                    acc += u[r, t]
                else:
                    acc -= u[r, t]
            out[r, j] = acc
    return n * n


def naive_parity_rows_np(u, out):
    n = u.shape[1]
    idx = np.arange(n)
    and_ = idx[:, None] & idx[None, :]
    parity = np.zeros_like(and_)
    while np.any(and_):
        parity ^= and_ & 1
        and_ >>= 1
    out[...] = u @ (1 - 2 * parity).astype(u.dtype)
    return n * n


# --------------------------------------------------------------------------
# Length-31 Gold sequence, x1 = 1 0 0 ... 0, x2 = bits of c_init.

_NC = 1600


@njit(cache=True)
def gold_nb(c_init, length):
    total = length + _NC
    x1 = np.zeros(total + 31, dtype=np.uint8)
    x2 = np.zeros(total + 31, dtype=np.uint8)
    x1[0] = 1
    for i in range(31):
        x2[i] = (c_init >> i) & 1
    for n in range(total):
        x1[n + 31] = x1[n + 3] ^ x1[n]
        x2[n + 31] = x2[n + 3] ^ x2[n + 2] ^ x2[n + 1] ^ x2[n]
    out = np.empty(length, dtype=np.uint8)
    for n in range(length):
        out[n] = x1[n + _NC] ^ x2[n + _NC]
    return out


def gold_np(c_init, length):
    total = length + _NC
    x1 = np.zeros(total + 31 + 28, dtype=np.uint8)
    x2 = np.zeros(total + 31 + 28, dtype=np.uint8)
    x1[0] = 1
    x2[:31] = (int(c_init) >> np.arange(31)) & 1
    # each recursion only reaches 31 taps back, so 28 outputs are ready at once
    for n in range(0, total, 28):
        x1[n + 31:n + 59] = x1[n + 3:n + 31] ^ x1[n:n + 28]
        x2[n + 31:n + 59] = x2[n + 3:n + 31] ^ x2[n + 2:n + 30] ^ x2[n + 1:n + 29] ^ x2[n:n + 28]
    return x1[_NC:_NC + length] ^ x2[_NC:_NC + length]


# --------------------------------------------------------------------------
# Candidate metrics from per-region correlations.
#   pil[b, i, r]     = x_p^H y_p  on antenna i, region r
#   dat[b, i, c, r]  = x_d^H y_d  for candidate c
# kind 0: sum |pil + dat|^2          (non-coherent)
# kind 1: three-term expansion       (estimator-correlator)
# kind 2: 2 Re sum pil * conj(dat)   (quasi-coherent)

NONCOHERENT, FULL_EC, QUASI_COHERENT = 0, 1, 2


@njit(cache=True)
def candidate_metrics_nb(pil, dat, kind):
    nb, nr, nc, ng = dat.shape
    out = np.zeros((nb, nc))
    for b in range(nb):
        for c in range(nc):
            acc = 0.0
            for i in range(nr):
                for g in range(ng):
                    p = pil[b, i, g]
                    d = dat[b, i, c, g]
                    if kind == 0:
                        s = p + d
                        acc += s.real * s.real + s.imag * s.imag
                    elif kind == 1:
                        acc += p.real * p.real + p.imag * p.imag
                        acc += d.real * d.real + d.imag * d.imag
                        acc += 2.0 * (p.real * d.real + p.imag * d.imag)
                    else:
                        acc += 2.0 * (p.real * d.real + p.imag * d.imag)
            out[b, c] = acc
    return out


def candidate_metrics_np(pil, dat, kind):
    p = pil[:, :, None, :]
    if kind == NONCOHERENT:
        terms = np.abs(p + dat) ** 2
    elif kind == FULL_EC:
        terms = np.abs(p) ** 2 + np.abs(dat) ** 2 + 2.0 * np.real(p * np.conj(dat))
    else:
        terms = 2.0 * np.real(p * np.conj(dat))
    return terms.sum(axis=(1, 3))


if USE_NUMBA:
    fht_rows = fht_rows_nb
    naive_rows = naive_rows_nb
    naive_parity_rows = naive_parity_rows_nb
    gold = gold_nb
    candidate_metrics = candidate_metrics_nb
else:
    fht_rows = fht_rows_np
    naive_rows = naive_rows_np
    naive_parity_rows = naive_parity_rows_np
    gold = gold_np
    candidate_metrics = candidate_metrics_np
