"""All complex roots of an eliminant at a fixed time.

Roots come from Aberth-Ehrlich simultaneous iteration on the double-precision
coefficients, followed by Newton polishing.  Previous roots can seed the
iteration, which is how the tracker warm-starts along the time grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from worldline.errors import ConjugateClosureError, ConvergenceError
from worldline.poly import UniPolyInT, as_rational, evaluate_complex

TOL_ROOT = 1e-12
EPS_REAL = 1e-9
EPS_CONJ = 1e-8
EPS_CLUSTER = 1e-6
MAX_ITER = 500


@dataclass(frozen=True)
class RootSet:
    t: Fraction
    roots: tuple[complex, ...]
    condition: tuple[float, ...]
    clusters: tuple[int, ...]
    residual: float

    def __len__(self) -> int:
        return len(self.roots)

    def array(self) -> np.ndarray:
        return np.array(self.roots, dtype=complex)


@dataclass(frozen=True)
class Classification:
    tags: tuple[str, ...]          # "real" or "pair"
    values: tuple[complex, ...]    # real roots snapped onto the axis
    partner: tuple[int, ...]       # conjugate partner index, -1 for real roots


def _horner(c_high: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = np.full(z.shape, c_high[0], dtype=complex)
    dp = np.zeros(z.shape, dtype=complex)
    for c in c_high[1:]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _abs_scale(c_high: np.ndarray, z: np.ndarray) -> np.ndarray:
    a = np.abs(c_high)
    r = np.abs(z)
    s = np.full(z.shape, a[0])
    for c in a[1:]:
        s = s * r + c
    return s


def scaled_residual(c_high: np.ndarray, z: np.ndarray) -> np.ndarray:
    p, _ = _horner(c_high, z)
    return np.abs(p) / np.maximum(_abs_scale(c_high, z), np.finfo(float).tiny)


def initial_guesses(c_high: np.ndarray) -> np.ndarray:
    """Roots of unity on the Cauchy radius, rotated off the real axis."""
    n = len(c_high) - 1
    radius = 1.0 + float(np.max(np.abs(c_high[1:] / c_high[0])))
    k = np.arange(n)
    return radius * np.exp(1j * (2 * np.pi * k / n + 0.7 / n + 0.1))


def aberth(c_high: np.ndarray, z0: np.ndarray, tol: float = TOL_ROOT,
           max_iter: int = MAX_ITER) -> tuple[np.ndarray, int]:
    """Aberth-Ehrlich iteration; returns (roots, iterations used)."""
    z = np.array(z0, dtype=complex)
    n = len(z)
    if n == 0:
        return z, 0
    eps = np.finfo(float).eps
    active = np.ones(n, dtype=bool)
    for it in range(1, max_iter + 1):
        p, dp = _horner(c_high, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            sums = inv.sum(axis=1)
            ratio = p / dp
            corr = ratio / (1.0 - ratio * sums)
        bad = ~np.isfinite(corr)
        if bad.any():
            # derivative vanished or roots coincided: nudge deterministically
            corr[bad] = -(1e-3 * (1 + np.abs(z[bad]))) * np.exp(1j * (0.3 + np.arange(bad.sum())))
        corr[~active] = 0.0
        z = z - corr
        small = np.abs(corr) <= 4 * eps * (1 + np.abs(z))
        # a root sitting at the rounding floor can jitter forever; stop it there
        floor = np.abs(p) <= 16 * eps * _abs_scale(c_high, z + corr)
        active &= ~(small | floor)
        if not active.any():
            break
    return z, it


def _polish(c_high: np.ndarray, z: np.ndarray, steps: int = 2) -> np.ndarray:
    z = z.copy()
    res = scaled_residual(c_high, z)
    for _ in range(steps):
        p, dp = _horner(c_high, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = p / dp
        cand = z - np.where(np.isfinite(step), step, 0)
        cres = scaled_residual(c_high, cand)
        # keep a Newton step only when it helps and stays local to its root
        sep = _separation(z)
        ok = (cres < res) & (np.abs(cand - z) < 0.25 * sep)
        z = np.where(ok, cand, z)
        res = np.where(ok, cres, res)
    return z


def _separation(z: np.ndarray) -> np.ndarray:
    if len(z) < 2:
        return np.full(z.shape, np.inf)
    d = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(d, np.inf)
    return d.min(axis=1)


def symmetrize(z: np.ndarray, eps_real: float = EPS_REAL, eps_conj: float = EPS_CONJ) -> np.ndarray:
    """Replace matched conjugate pairs by exact conjugates of their average."""
    z = z.copy()
    scale = 1 + np.abs(z)
    upper = np.where(z.imag > eps_real * scale)[0]
    lower = np.where(z.imag < -eps_real * scale)[0]
    if len(upper) == 0 or len(lower) == 0:
        return z
    cost = np.abs(z[upper][:, None] - np.conj(z[lower])[None, :])
    rows, cols = linear_sum_assignment(cost)
    for r, c in zip(rows, cols):
        i, j = upper[r], lower[c]
        if cost[r, c] <= eps_conj * scale[i]:
            m = 0.5 * (z[i] + np.conj(z[j]))
            z[i], z[j] = m, np.conj(m)
    return z


def cluster_labels(z: Sequence[complex], eps_cluster: float = EPS_CLUSTER) -> tuple[int, ...]:
    """Union roots closer than eps_cluster * (1 + |root|); labels are 0, 1, 2, ... in order."""
    z = np.asarray(z, dtype=complex)
    n = len(z)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(z[i] - z[j]) < eps_cluster * (1 + abs(z[i])):
                parent[find(j)] = find(i)
    labels: dict[int, int] = {}
    return tuple(labels.setdefault(find(i), len(labels)) for i in range(n))


def sort_roots(z: np.ndarray) -> np.ndarray:
    order = np.lexsort((z.imag, z.real))
    return z[order]


def solve_coefficients(coeffs_low: Sequence[complex], t=Fraction(0), warm_start: Sequence[complex] | None = None,
                       tol_root: float = TOL_ROOT, eps_real: float = EPS_REAL, eps_conj: float = EPS_CONJ,
                       eps_cluster: float = EPS_CLUSTER, max_iter: int = MAX_ITER) -> RootSet:
    c_high = np.array(list(coeffs_low)[::-1], dtype=complex)
    if len(c_high) == 0 or c_high[0] == 0:
        raise ConvergenceError("leading coefficient vanishes")
    n = len(c_high) - 1
    zeros = next((k for k, c in enumerate(coeffs_low) if c != 0), n)
    if zeros:
        # exact roots at 0; no residual test can certify them numerically
        if warm_start is not None and len(warm_start) == n:
            ws = sorted(warm_start, key=abs)[zeros:]
        else:
            ws = None
        rest = solve_coefficients(list(coeffs_low)[zeros:], t, ws, tol_root, eps_real, eps_conj,
                                  eps_cluster, max_iter) if zeros < n else None
        z = np.concatenate([np.zeros(zeros, dtype=complex), rest.array() if rest else np.zeros(0)])
        if warm_start is None:
            z = sort_roots(z)
        _, dp = _horner(c_high, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            cond = _abs_scale(c_high, z) / (np.abs(dp) * np.maximum(np.abs(z), 1.0))
        return RootSet(Fraction(t), tuple(complex(v) for v in z), tuple(float(c) for c in cond),
                       cluster_labels(z, eps_cluster), rest.residual if rest else 0.0)
    if warm_start is not None and len(warm_start) == n:
        # real starts on a real polynomial never leave the axis, so a pair that
        # went complex since the last solve would be missed; nudge asymmetrically
        z0 = np.array(warm_start, dtype=complex)
        z0 = z0 + 1e-7 * (1 + np.abs(z0)) * np.exp(1j * (np.arange(n) + 0.5))
    else:
        z0 = initial_guesses(c_high) if n else np.zeros(0, dtype=complex)
    z, _ = aberth(c_high, z0, tol_root, max_iter)
    z = _polish(c_high, z)
    res = scaled_residual(c_high, z) if n else np.zeros(0)
    worst = float(res.max()) if n else 0.0
    if not np.isfinite(z).all() or worst > tol_root:
        if warm_start is not None:
            # a stale warm start can stall; retry from the deterministic cold start
            return solve_coefficients(coeffs_low, t, None, tol_root, eps_real, eps_conj, eps_cluster, max_iter)
        raise ConvergenceError(f"root iteration did not converge at t={t}", best=tuple(z), residual=worst)
    z = symmetrize(z, eps_real * 1e-3, eps_conj)
    if warm_start is None:
        z = sort_roots(z)
    _, dp = _horner(c_high, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = _abs_scale(c_high, z) / (np.abs(dp) * np.maximum(np.abs(z), 1.0))
    res = scaled_residual(c_high, z) if n else np.zeros(0)
    return RootSet(
        t=Fraction(t),
        roots=tuple(complex(v) for v in z),
        condition=tuple(float(c) for c in cond),
        clusters=cluster_labels(z, eps_cluster),
        residual=float(res.max()) if n else 0.0,
    )


def solve_at(e, t_value, warm_start: RootSet | Sequence[complex] | None = None, **tols) -> RootSet:
    """All N complex roots of an eliminant (or UniPolyInT) at a rational time."""
    u: UniPolyInT = e.poly if hasattr(e, "poly") else e
    t_value = as_rational(t_value)
    coeffs = evaluate_complex(u, t_value)
    ws = warm_start.roots if isinstance(warm_start, RootSet) else warm_start
    return solve_coefficients(coeffs, Fraction(t_value), ws, **tols)


def classify_real(roots: RootSet | Sequence[complex], eps_real: float = EPS_REAL,
                  eps_conj: float = EPS_CONJ) -> Classification:
    """Tag each root real or conjugate-pair member, snapping real roots onto the axis."""
    z = np.array(roots.roots if isinstance(roots, RootSet) else roots, dtype=complex)
    n = len(z)
    scale = 1 + np.abs(z)
    is_real = np.abs(z.imag) < eps_real * scale
    values = z.copy()
    values[is_real] = values[is_real].real
    partner = [-1] * n
    upper = [i for i in range(n) if not is_real[i] and z[i].imag > 0]
    lower = [i for i in range(n) if not is_real[i] and z[i].imag < 0]
    if len(upper) != len(lower):
        raise ConjugateClosureError(f"{len(upper)} roots above the axis but {len(lower)} below")
    if upper:
        cost = np.abs(z[upper][:, None] - np.conj(z[lower])[None, :])
        rows, cols = linear_sum_assignment(cost)
        for r, c in zip(rows, cols):
            i, j = upper[r], lower[c]
            if cost[r, c] > eps_conj * scale[i]:
                raise ConjugateClosureError(f"root {z[i]} has no conjugate partner (closest {z[j]})")
            partner[i], partner[j] = j, i
    tags = tuple("real" if is_real[i] else "pair" for i in range(n))
    return Classification(tags, tuple(complex(v) for v in values), tuple(partner))
