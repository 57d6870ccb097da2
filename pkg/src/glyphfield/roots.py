"""Real polynomial root finders used by the distance and clipping code.

The cubic solver is vectorized (closed form, one Newton polish step); the
quartic solver works on one polynomial at a time through the companion
matrix, which is what ``numpy.roots`` does internally.
"""

from __future__ import annotations

import numpy as np

_DEGENERATE = 1e-9


def _polish(roots, a, b, c, d):
    f = ((a * roots + b) * roots + c) * roots + d
    df = (3.0 * a * roots + 2.0 * b) * roots + c
    ok = np.isfinite(roots) & (df != 0.0)
    step = np.where(ok, f / np.where(ok, df, 1.0), 0.0)
    return np.where(np.isfinite(roots), roots - step, roots)


def solve_cubic(a, b, c, d):
    """Real roots of ``a t^3 + b t^2 + c t + d`` for broadcastable arrays.

    Returns an array of shape ``broadcast_shape + (3,)``; missing roots are
    NaN. Leading coefficients that are tiny relative to the others fall back
    to the quadratic or linear formula. Every root gets one Newton step
    against the full cubic.
    """
    a, b, c, d = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c, d)))
    shape = a.shape
    a, b, c, d = (v.ravel() for v in (a, b, c, d))
    out = np.full((a.size, 3), np.nan)

    scale = np.maximum.reduce([np.abs(a), np.abs(b), np.abs(c), np.abs(d)])
    scale = np.where(scale == 0.0, 1.0, scale)
    cubic = np.abs(a) > _DEGENERATE * scale
    quad = ~cubic & (np.abs(b) > _DEGENERATE * scale)
    lin = ~cubic & ~quad & (np.abs(c) > _DEGENERATE * scale)

    if cubic.any():
        aa = a[cubic]
        B, C, D = b[cubic] / aa, c[cubic] / aa, d[cubic] / aa
        shift = B / 3.0
        p = C - B * B / 3.0
        q = (2.0 * B**3 - 9.0 * B * C + 27.0 * D) / 27.0
        disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
        roots = np.full((aa.size, 3), np.nan)

        one = disc > 0.0
        if one.any():
            qq = q[one]
            sq = np.sqrt(disc[one])
            u = np.cbrt(-qq / 2.0 - np.where(qq >= 0.0, sq, -sq))
            safe = u != 0.0
            v = np.where(safe, -p[one] / (3.0 * np.where(safe, u, 1.0)), 0.0)
            roots[one, 0] = u + v - shift[one]

        three = ~one
        if three.any():
            pp = p[three]
            r = np.sqrt(np.maximum(-pp / 3.0, 0.0))
            r3 = r**3
            ratio = np.where(r3 > 0.0, (-q[three] / 2.0) / np.where(r3 > 0.0, r3, 1.0), 1.0)
            phi = np.arccos(np.clip(ratio, -1.0, 1.0))
            for k in range(3):
                roots[three, k] = 2.0 * r * np.cos((phi - 2.0 * np.pi * k) / 3.0) - shift[three]
        out[cubic] = roots

    if quad.any():
        A, Bq, Cq = b[quad], c[quad], d[quad]
        disc = Bq * Bq - 4.0 * A * Cq
        real = disc >= 0.0
        sq = np.sqrt(np.where(real, disc, 0.0))
        # numerically stable pair
        qv = -0.5 * (Bq + np.where(Bq >= 0.0, sq, -sq))
        r1 = np.where(real, qv / A, np.nan)
        r2 = np.where(real & (qv != 0.0), Cq / np.where(qv != 0.0, qv, 1.0), np.nan)
        r2 = np.where(real & (qv == 0.0), 0.0, r2)
        out[quad, 0] = r1
        out[quad, 1] = r2

    if lin.any():
        out[lin, 0] = -d[lin] / c[lin]

    out = _polish(out, a[:, None], b[:, None], c[:, None], d[:, None])
    return out.reshape(shape + (3,))


def solve_quadratic(a: float, b: float, c: float) -> list[float]:
    """Real roots of ``a t^2 + b t + c`` (scalar); degenerate forms handled."""
    scale = max(abs(a), abs(b), abs(c))
    if scale == 0.0:
        return []
    if abs(a) <= _DEGENERATE * scale:
        if abs(b) <= _DEGENERATE * scale:
            return []
        return [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        if disc > -1e-14 * b * b:
            return [-b / (2.0 * a)] * 2
        return []
    sq = np.sqrt(disc)
    q = -0.5 * (b + (sq if b >= 0.0 else -sq))
    if q == 0.0:
        return [0.0, 0.0]
    return sorted([q / a, c / q])


def real_roots(coeffs, imag_tol: float = 1e-7) -> list[float]:
    """Real roots of a polynomial given highest-degree-first coefficients.

    Companion-matrix eigenvalues (via ``numpy.roots``), near-real complex
    values accepted, then two Newton steps on the original polynomial. A
    double root shows up twice in the result.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    scale = np.max(np.abs(coeffs)) if coeffs.size else 0.0
    if scale == 0.0:
        return []
    coeffs = coeffs / scale
    nz = np.nonzero(np.abs(coeffs) > 1e-13)[0]
    if nz.size == 0:
        return []
    coeffs = coeffs[nz[0]:]
    if coeffs.size == 1:
        return []
    if coeffs.size == 3:
        return solve_quadratic(*coeffs)
    if coeffs.size == 2:
        return [-coeffs[1] / coeffs[0]]
    vals = np.roots(coeffs)
    deriv = np.polyder(coeffs)
    out = []
    for z in vals:
        if abs(z.imag) > imag_tol * (1.0 + abs(z.real)):
            continue
        t = float(z.real)
        for _ in range(2):
            df = np.polyval(deriv, t)
            if df == 0.0:
                break
            step = np.polyval(coeffs, t) / df
            if not np.isfinite(step) or abs(step) > 1e-3 * (1.0 + abs(t)):
                break
            t -= step
        out.append(t)
    return sorted(out)
