"""Soft-covering exponents for random superposition codebooks.

A codebook of 2^{nR1} outer words, each carrying 2^{nR2} inner words,
approximates the output distribution Q_W^n through a memoryless kernel
Q_{W|U,V}.  The relative entropy between the codebook-induced output and
Q_W^n falls like n 2^{-n gamma} except with doubly-exponentially small
probability; this module computes gamma, optimizes it over the confidence
parameters (delta1, delta2), and evaluates the finite-n tail bound.

All rates, divergences, and exponents are in bits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .prob import (
    LN2,
    ZERO_MASS,
    JointPmf,
    _marginal_mass,
    _renyi_from_logs,
    mutual_information,
)

_ALPHA_GRID = 1.0 + np.geomspace(1e-9, 63.0, 400)
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _log_ratio_terms(p: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mask = p.ravel() > ZERO_MASS
    return np.log(p.ravel()[mask]), np.log(q.ravel()[mask])


@dataclass(frozen=True)
class SoftCoverSpec:
    """A superposition covering problem: joint over (U, V, W), rates, confidences."""

    joint: JointPmf
    r1: float
    r2: float
    d1: float
    d2: float

    def __post_init__(self) -> None:
        if set(self.joint.names) != {"U", "V", "W"}:
            raise ValueError(f"joint must have axes U, V, W, got {self.joint.names}")
        if self.r1 < 0.0 or self.r2 < 0.0:
            raise ValueError(f"rates must be nonnegative, got ({self.r1}, {self.r2})")

    @cached_property
    def rate_margins(self) -> tuple[float, float]:
        """(r1 - I(U;W), r1 + r2 - I(U,V;W)), both of which must be exceeded."""
        i_uw = mutual_information(self.joint, ("U",), ("W",))
        i_uvw = mutual_information(self.joint, ("U", "V"), ("W",))
        return self.r1 - i_uw, self.r1 + self.r2 - i_uvw

    def is_valid(self) -> bool:
        """Whether (d1, d2) sit inside the region where the tail bound bites."""
        m1, m2 = self.rate_margins
        return 0.0 < self.d1 < m1 and 0.0 < self.d2 < m2 and self.d1 < self.d2 < 2.0 * self.d1


@dataclass(frozen=True)
class GammaResult:
    """An achieved exponent, the order attaining it, and the level coefficient."""

    gamma: float
    alpha: float
    c: float
    degenerate: bool


def _divergence_tables(joint: JointPmf) -> tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray], float]:
    """Log-mass pairs for d_alpha(Q_UW || Q_U Q_W) and d_alpha(Q_UVW || Q_UV Q_W),
    plus log2 of the inverse smallest supported W mass (for the coefficient c)."""
    m_uw = _marginal_mass(joint, ("U", "W"))
    m_u = m_uw.sum(axis=1)
    m_w = m_uw.sum(axis=0)
    m_uvw = _marginal_mass(joint, ("U", "V", "W"))
    m_uv = m_uvw.sum(axis=2)
    pair1 = _log_ratio_terms(m_uw, np.multiply.outer(m_u, m_w))
    pair2 = _log_ratio_terms(m_uvw, np.multiply.outer(m_uv, m_w))
    qw_min = m_w[m_w > ZERO_MASS].min()
    return pair1, pair2, float(np.log2(1.0 / qw_min))


def beta_exponents(spec: SoftCoverSpec, order: float) -> tuple[float, float]:
    """The two exponent candidates at a given Renyi order alpha > 1.

    beta1 = ((a-1)/(2a-1)) (r1 - d1 - d_a(Q_UW || Q_U Q_W))
    beta2 = ((a-1)/(2a-1)) (r1 + r2 - d2 - d_a(Q_UVW || Q_UV Q_W))
    """
    if not order > 1.0:
        raise ValueError(f"order must exceed 1, got {order!r}")
    (lp1, lq1), (lp2, lq2), _ = _divergence_tables(spec.joint)
    orders = np.array([order])
    d_a1 = _renyi_from_logs(lp1, lq1, orders)[0]
    d_a2 = _renyi_from_logs(lp2, lq2, orders)[0]
    factor = (order - 1.0) / (2.0 * order - 1.0)
    return (
        float(factor * (spec.r1 - spec.d1 - d_a1)),
        float(factor * (spec.r1 + spec.r2 - spec.d2 - d_a2)),
    )


def _beta_curves(spec: SoftCoverSpec) -> tuple[np.ndarray, np.ndarray, float]:
    """beta1 and beta2 on the alpha grid, plus log2 of 1/min supported Q_W."""
    (lp1, lq1), (lp2, lq2), log2_inv_qw = _divergence_tables(spec.joint)
    factor = (_ALPHA_GRID - 1.0) / (2.0 * _ALPHA_GRID - 1.0)
    b1 = factor * (spec.r1 - spec.d1 - _renyi_from_logs(lp1, lq1, _ALPHA_GRID))
    b2 = factor * (spec.r1 + spec.r2 - spec.d2 - _renyi_from_logs(lp2, lq2, _ALPHA_GRID))
    return b1, b2, log2_inv_qw


def _refine_alpha(objective_at, t_lo: float, t_hi: float) -> tuple[float, float]:
    """Golden-section maximum of objective(alpha) over alpha = 1 + e^t."""
    a, b = t_lo, t_hi
    fa_x = a + (1.0 - _GOLDEN) * (b - a)
    fb_x = a + _GOLDEN * (b - a)
    fa, fb = objective_at(1.0 + math.exp(fa_x)), objective_at(1.0 + math.exp(fb_x))
    while b - a > 1e-9:
        if fa < fb:
            a, fa_x, fa = fa_x, fb_x, fb
            fb_x = a + _GOLDEN * (b - a)
            fb = objective_at(1.0 + math.exp(fb_x))
        else:
            b, fb_x, fb = fb_x, fa_x, fa
            fa_x = a + (1.0 - _GOLDEN) * (b - a)
            fa = objective_at(1.0 + math.exp(fa_x))
    alpha = 1.0 + math.exp(0.5 * (a + b))
    return alpha, objective_at(alpha)


def _maximize_over_alpha(spec: SoftCoverSpec, cap: float | None) -> tuple[float, float]:
    """sup over alpha of min(beta1, beta2[, cap]); returns (alpha, value)."""
    b1, b2, _ = _beta_curves(spec)
    curve = np.minimum(b1, b2)
    if cap is not None:
        curve = np.minimum(curve, cap)
    k = int(np.argmax(curve))
    t = np.log(_ALPHA_GRID - 1.0)
    t_lo, t_hi = t[max(k - 1, 0)], t[min(k + 1, t.size - 1)]

    (lp1, lq1), (lp2, lq2), _ = _divergence_tables(spec.joint)

    def objective_at(alpha: float) -> float:
        orders = np.array([alpha])
        f = (alpha - 1.0) / (2.0 * alpha - 1.0)
        v1 = f * (spec.r1 - spec.d1 - _renyi_from_logs(lp1, lq1, orders)[0])
        v2 = f * (spec.r1 + spec.r2 - spec.d2 - _renyi_from_logs(lp2, lq2, orders)[0])
        v = min(v1, v2)
        return v if cap is None else min(v, cap)

    alpha, refined = _refine_alpha(objective_at, t_lo, t_hi)
    if refined < curve[k]:
        alpha, refined = float(_ALPHA_GRID[k]), float(curve[k])
    return alpha, float(refined)


def _coefficient(spec: SoftCoverSpec) -> float:
    """The level coefficient c: the tail bound controls D >= c n 2^{-n gamma}."""
    _, sup_min = _maximize_over_alpha(spec, cap=None)
    _, _, log2_inv_qw = _beta_curves(spec)
    log2_e = 1.0 / LN2
    return 4.0 * (log2_e + 2.0 * sup_min) + log2_e + 2.0 * log2_inv_qw


def gamma_exponent(spec: SoftCoverSpec) -> GammaResult:
    """The soft-covering exponent sup_alpha min{beta1, beta2, d1/4}.

    The supremum over alpha > 1 is never negative (both betas vanish as
    alpha -> 1), so the result is clamped at zero; `degenerate` flags specs
    whose confidence parameters fall outside the valid region or whose
    exponent is zero.
    """
    alpha, value = _maximize_over_alpha(spec, cap=spec.d1 / 4.0)
    valid = spec.is_valid()
    gamma = max(0.0, value) if valid else 0.0
    return GammaResult(
        gamma=gamma,
        alpha=alpha,
        c=_coefficient(spec),
        degenerate=(not valid) or gamma <= 0.0,
    )


@dataclass(frozen=True)
class BestGammaResult:
    """The exponent optimized over the confidence parameters (d1, d2)."""

    gamma: float
    alpha: float
    d1: float
    d2: float
    c: float
    degenerate: bool


def best_gamma(joint: JointPmf, r1: float, r2: float) -> BestGammaResult:
    """Optimize the exponent over 0 < d1 < d2 < 2 d1 inside the rate margins.

    Coarse grid plus three zoom rounds; the winning (d1, d2) pair is then
    re-evaluated with the refined alpha search.
    """
    probe = SoftCoverSpec(joint, r1, r2, 1.0, 1.5)
    m1, m2 = probe.rate_margins
    if m1 <= 0.0 or m2 <= 0.0:
        raise ValueError(
            f"rates sit below the covering thresholds: margins are ({m1!r}, {m2!r})"
        )

    (lp1, lq1), (lp2, lq2), _ = _divergence_tables(joint)
    factor = (_ALPHA_GRID - 1.0) / (2.0 * _ALPHA_GRID - 1.0)
    a1 = factor * (r1 - _renyi_from_logs(lp1, lq1, _ALPHA_GRID))
    a2 = factor * (r1 + r2 - _renyi_from_logs(lp2, lq2, _ALPHA_GRID))

    def value(d1: float, d2: float) -> float:
        curve = np.minimum(np.minimum(a1 - factor * d1, a2 - factor * d2), d1 / 4.0)
        return float(curve.max())

    def scan(d1s: np.ndarray, n2: int, best: tuple[float, float, float]) -> tuple[float, float, float]:
        for d1 in d1s:
            hi = min(2.0 * d1, m2)
            if hi <= d1:
                continue
            width = hi - d1
            d2s = np.linspace(d1 + 1e-4 * width, hi - 1e-4 * width, n2)
            rows = np.minimum(a1 - factor * d1, d1 / 4.0)
            curve = np.minimum(rows[None, :], a2[None, :] - factor[None, :] * d2s[:, None])
            vals = curve.max(axis=1)
            j = int(np.argmax(vals))
            if vals[j] > best[0]:
                best = (float(vals[j]), float(d1), float(d2s[j]))
        return best

    best = (-math.inf, m1 / 2.0, min(0.75 * m1, m2 * 0.99))
    best = scan(np.linspace(m1 * 1e-3, m1 * (1.0 - 1e-3), 48), 48, best)
    span = m1 / 48.0
    for _ in range(3):
        lo = max(best[1] - 2.0 * span, m1 * 1e-6)
        hi = min(best[1] + 2.0 * span, m1 * (1.0 - 1e-6))
        best = scan(np.linspace(lo, hi, 15), 15, best)
        span *= 4.0 / 15.0

    spec = SoftCoverSpec(joint, r1, r2, best[1], best[2])
    res = gamma_exponent(spec)
    return BestGammaResult(
        gamma=res.gamma,
        alpha=res.alpha,
        d1=best[1],
        d2=best[2],
        c=res.c,
        degenerate=res.degenerate,
    )


@dataclass(frozen=True)
class FailureBound:
    """The finite-n tail bound P(D >= threshold) <= 2^{log2_bound}."""

    n: int
    threshold: float
    log2_bound: float
    vacuous: bool

    @property
    def probability(self) -> float:
        if self.log2_bound >= 0.0:
            return 1.0
        if self.log2_bound < -1074.0:
            return 0.0
        return float(2.0 ** self.log2_bound)


def failure_probability_bound(spec: SoftCoverSpec, n: int, w_alphabet_size: int) -> FailureBound:
    """Evaluate the three-term tail bound at blocklength n.

    ln-domain terms (W = w_alphabet_size):
      t1 = n r2 ln 2 - (1/3) 2^{n d1}
      t2 = n ln W + n r1 ln 2 - 2^{n d2 / 2}
      t3 = n ln W - (1/3) 2^{n (d2 - d1) / 2}
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n!r}")
    if w_alphabet_size < 1:
        raise ValueError(f"w_alphabet_size must be positive, got {w_alphabet_size!r}")
    res = gamma_exponent(spec)
    threshold = res.c * n * 2.0 ** (-n * res.gamma)

    def pow2(x: float) -> float:
        return float(2.0 ** min(x, 1020.0))

    ln_w = n * math.log(w_alphabet_size)
    t1 = n * spec.r2 * LN2 - pow2(n * spec.d1) / 3.0
    t2 = ln_w + n * spec.r1 * LN2 - pow2(n * spec.d2 / 2.0)
    t3 = ln_w - pow2(n * (spec.d2 - spec.d1) / 2.0) / 3.0
    ln_total = np.logaddexp(np.logaddexp(t1, t2), t3)
    log2_bound = float(ln_total / LN2)
    return FailureBound(
        n=n,
        threshold=float(threshold),
        log2_bound=log2_bound,
        vacuous=(not spec.is_valid()) or log2_bound >= 0.0,
    )
