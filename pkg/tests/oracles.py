"""Independent reference implementations used only by the tests.

Written in plain Python (lists, loops, mpmath) so that they share no code
path with the vectorized library.
"""

import math
from fractions import Fraction

import mpmath


def windows_bruteforce(bits, k, m):
    """Every complete k-bit window as a '0'/'1' string, honoring the m-bit skip."""
    s = "".join(str(int(b)) for b in bits)
    out = []
    pos = 0
    while pos + k <= len(s):
        out.append(s[pos : pos + k])
        pos += k + m
    return out


def moonshine_bruteforce(bits, k, m):
    """Reference distiller operating on string windows and dictionaries."""
    windows = windows_bruteforce(bits, k, m)
    counts = {}
    first = {}
    for i, w in enumerate(windows):
        counts[w] = counts.get(w, 0) + 1
        first.setdefault(w, i)
    if len(counts) < 2:
        return None
    ranked = sorted(counts, key=lambda w: (counts[w], int(w, 2)))
    keep = ranked[: min(len(counts) // 2, 2 ** (k - 1))]
    keep.sort(key=lambda w: first[w])
    index = {w: format(i, f"0{k - 1}b") for i, w in enumerate(keep)}
    return "".join(index[w] for w in windows if w in index)


def von_neumann_bruteforce(bits):
    s = "".join(str(int(b)) for b in bits)
    out = []
    for i in range(0, len(s) - 1, 2):
        if s[i] != s[i + 1]:
            out.append(s[i])
    return "".join(out)


def det_ratio_mp(lags, dps=50):
    """|K_p| / |K_{p-1}| with extended-precision determinants."""
    with mpmath.workdps(dps):
        r = [mpmath.mpf(float(x)) for x in lags]
        n = len(r)
        K = mpmath.matrix(n, n)
        for i in range(n):
            for j in range(n):
                K[i, j] = r[abs(i - j)]
        Km = K[: n - 1, : n - 1] if n > 1 else None
        return float(mpmath.det(K) / mpmath.det(Km))


def erfc_mp(x):
    with mpmath.workdps(40):
        return float(mpmath.erfc(mpmath.mpf(x)))


def igamc_mp(a, x):
    with mpmath.workdps(40):
        return float(mpmath.gammainc(mpmath.mpf(a), mpmath.mpf(x), mpmath.inf, regularized=True))


def renyi2(dist):
    return -math.log2(sum(p * p for p in dist))


def shannon(dist):
    return -sum(p * math.log2(p) for p in dist if p > 0)


def convolve_exact(p, q):
    """Law of X + Z for independent X ~ p, Z ~ q on {0..len-1}, in Fractions."""
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def random_fraction_dist(rng, size):
    w = [int(rng.integers(0, 20)) for _ in range(size)]
    if sum(w) == 0:
        w[0] = 1
    total = sum(w)
    return [Fraction(x, total) for x in w]


def empirical_acf(x, max_lag):
    """Unbiased raw-moment ACF, E[x_t x_{t+j}], without mean removal."""
    n = len(x)
    return [sum(x[t] * x[t + j] for t in range(n - j)) / (n - j) for j in range(max_lag + 1)]
