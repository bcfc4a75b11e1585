"""Independent brute-force oracles used to cross-check library results.

Everything here is deliberately naive — direct summation loops,
characteristic polynomials, bisection — and shares no code path with the
library implementations it checks.
"""

import mpmath
import numpy as np


def dft_power(frame, nfft):
    """O(n^2) direct DFT power spectrum, bins 0..nfft//2."""
    padded = np.zeros(nfft)
    padded[: len(frame)] = frame
    out = np.zeros(nfft // 2 + 1)
    for k in range(nfft // 2 + 1):
        re = sum(padded[n] * np.cos(2 * np.pi * k * n / nfft) for n in range(nfft))
        im = -sum(padded[n] * np.sin(2 * np.pi * k * n / nfft) for n in range(nfft))
        out[k] = re * re + im * im
    return out


def dct2_ortho(values, k):
    """Direct-sum orthonormal DCT-II, coefficients 0..k-1."""
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    out = np.zeros(k)
    for m in range(k):
        acc = 0.0
        for j in range(n):
            acc += values[j] * np.cos(np.pi * (2 * j + 1) * m / (2 * n))
        scale = np.sqrt(1.0 / n) if m == 0 else np.sqrt(2.0 / n)
        out[m] = scale * acc
    return out


def mel_center_frequencies(n_filters, rate):
    """Centers of mel-spaced triangles recomputed from the definition."""
    def mel(f):
        return 2595.0 * np.log10(1.0 + f / 700.0)

    def inv(m):
        return 700.0 * (10.0 ** (m / 2595.0) - 1.0)

    top = mel(rate / 2.0)
    return np.array([inv((j + 1) * top / (n_filters + 1)) for j in range(n_filters)])


def covariance_two_pass(rows, center):
    """Double-loop covariance of rows around center, (1/N) normalization."""
    rows = np.asarray(rows, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    n, d = rows.shape
    cov = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            acc = 0.0
            for t in range(n):
                acc += (rows[t, i] - center[i]) * (rows[t, j] - center[j])
            cov[i, j] = acc / n
    return cov


def gmm_density_mp(weights, means, variances, x, dps=50):
    """Mixture density at x summed term by term in 50-digit arithmetic."""
    with mpmath.workdps(dps):
        total = mpmath.mpf(0)
        for w, mu, var in zip(weights, means, variances):
            quad = mpmath.mpf(0)
            lognorm = mpmath.mpf(0)
            for xd, md, vd in zip(x, mu, var):
                vd = mpmath.mpf(float(vd))
                quad += (mpmath.mpf(float(xd)) - mpmath.mpf(float(md))) ** 2 / vd
                lognorm += mpmath.log(2 * mpmath.pi * vd)
            total += mpmath.mpf(float(w)) * mpmath.exp(-(lognorm + quad) / 2)
        return float(mpmath.log(total))


def _char_poly_coeffs(a):
    """Faddeev-LeVerrier: coefficients of det(lambda*I - A), leading 1."""
    n = a.shape[0]
    coeffs = [1.0]
    m = np.eye(n)
    for k in range(1, n + 1):
        m = a @ m
        c = -np.trace(m) / k
        coeffs.append(c)
        m = m + c * np.eye(n)
    return np.array(coeffs)


def _poly_eval(coeffs, x):
    acc = 0.0
    for c in coeffs:
        acc = acc * x + c
    return acc


def _solve_linear(a, b):
    """Gaussian elimination with partial pivoting."""
    a = a.astype(np.float64).copy()
    b = b.astype(np.float64).copy()
    n = a.shape[0]
    for col in range(n):
        pivot = col + int(np.argmax(np.abs(a[col:, col])))
        if a[pivot, col] == 0.0:
            a[pivot, col] = 1e-300
        if pivot != col:
            a[[col, pivot]] = a[[pivot, col]]
            b[[col, pivot]] = b[[pivot, col]]
        for row in range(col + 1, n):
            factor = a[row, col] / a[col, col]
            a[row, col:] -= factor * a[col, col:]
            b[row] -= factor * b[col]
    x = np.zeros(n)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - a[row, row + 1:] @ x[row + 1:]) / a[row, row]
    return x


def brute_force_symmetric_eig(a, grid=200001):
    """Eigenpairs via characteristic polynomial bisection + inverse iteration.

    Returns (values desc, vectors as columns) or None when the spectrum
    is not resolved as simple roots (caller should pick another matrix).
    """
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    coeffs = _char_poly_coeffs(a)
    radius = np.max(np.sum(np.abs(a), axis=1)) + 1.0
    xs = np.linspace(-radius, radius, grid)
    ys = np.array([_poly_eval(coeffs, x) for x in xs])

    roots = []
    for i in range(grid - 1):
        if ys[i] == 0.0:
            roots.append(xs[i])
        elif ys[i] * ys[i + 1] < 0:
            lo, hi = xs[i], xs[i + 1]
            for _ in range(200):
                mid = (lo + hi) / 2
                if _poly_eval(coeffs, lo) * _poly_eval(coeffs, mid) <= 0:
                    hi = mid
                else:
                    lo = mid
            roots.append((lo + hi) / 2)
    if len(roots) != n:
        return None
    roots = sorted(roots, reverse=True)
    if n > 1 and min(r1 - r2 for r1, r2 in zip(roots, roots[1:])) < 1e-3:
        return None

    vectors = np.zeros((n, n))
    for idx, lam in enumerate(roots):
        shifted = a - (lam + 1e-9) * np.eye(n)
        v = np.ones(n) / np.sqrt(n)
        for _ in range(5):
            v = _solve_linear(shifted, v)
            v = v / np.sqrt(v @ v)
        vectors[:, idx] = v
    return np.array(roots), vectors
