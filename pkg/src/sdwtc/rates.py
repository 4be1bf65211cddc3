"""Closed-form achievable-rate expressions for wiretap channels with state.

Every functional takes a joint PMF (or the kernels that induce one) and
returns a RateReport carrying all minimand values, which minimand was
active, and a feasibility flag.  Values are reported raw: minima can be
negative for poor policies, and clamping to zero is the caller's choice.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import ERASURE, InputPolicy, RlnModel, SdWtcModel, assemble_joint, gp_policy
from .prob import Channel, JointPmf, Pmf, entropy, mutual_information

FEAS_TOL = 1e-10
INDEP_TOL = 1e-9


@dataclass(frozen=True)
class RateReport:
    """The value of a min-of-terms rate expression and its breakdown."""

    value: float
    active_term: str
    terms: tuple[tuple[str, float], ...]
    feasible: bool = True


def _report(terms: list[tuple[str, float]], feasible: bool = True) -> RateReport:
    values = [v for _, v in terms]
    k = int(np.argmin(values))
    return RateReport(
        value=float(values[k]),
        active_term=terms[k][0],
        terms=tuple((lbl, float(v)) for lbl, v in terms),
        feasible=feasible,
    )


def rate_RA(joint: JointPmf) -> RateReport:
    """The three-term inner-layer/outer-layer secrecy rate.

    Terms over a joint with axes S, U, V, X, Y, Z:
      I(V;Y|U) - I(V;Z|U),
      I(U,V;Y) - I(U,V;S),
      I(U,V;Y) - I(U;S) - I(V;Z|U).
    """
    i_vy_u = mutual_information(joint, ("V",), ("Y",), ("U",))
    i_vz_u = mutual_information(joint, ("V",), ("Z",), ("U",))
    i_uvy = mutual_information(joint, ("U", "V"), ("Y",))
    i_uvs = mutual_information(joint, ("U", "V"), ("S",))
    i_us = mutual_information(joint, ("U",), ("S",))
    return _report(
        [
            ("I(V;Y|U)-I(V;Z|U)", i_vy_u - i_vz_u),
            ("I(U,V;Y)-I(U,V;S)", i_uvy - i_uvs),
            ("I(U,V;Y)-I(U;S)-I(V;Z|U)", i_uvy - i_us - i_vz_u),
        ]
    )


def rate_RA_alt(joint: JointPmf) -> RateReport:
    """The two-term variant, feasible when I(U;Y) >= I(U;S).

    Shares the first two minimands of rate_RA; the constraint replaces the
    third.  Infeasibility is a report state, not an error.
    """
    i_vy_u = mutual_information(joint, ("V",), ("Y",), ("U",))
    i_vz_u = mutual_information(joint, ("V",), ("Z",), ("U",))
    i_uvy = mutual_information(joint, ("U", "V"), ("Y",))
    i_uvs = mutual_information(joint, ("U", "V"), ("S",))
    i_uy = mutual_information(joint, ("U",), ("Y",))
    i_us = mutual_information(joint, ("U",), ("S",))
    feasible = i_uy - i_us >= -FEAS_TOL
    return _report(
        [
            ("I(V;Y|U)-I(V;Z|U)", i_vy_u - i_vz_u),
            ("I(U,V;Y)-I(U,V;S)", i_uvy - i_uvs),
        ],
        feasible=feasible,
    )


def constraint_gap(joint: JointPmf) -> float:
    """I(U;Y) - I(U;S), the feasibility margin of rate_RA_alt."""
    return mutual_information(joint, ("U",), ("Y",)) - mutual_information(joint, ("U",), ("S",))


def _erasure_symbol(v_symbols: tuple) -> str:
    mark = ERASURE
    while mark in v_symbols:
        mark += ERASURE
    return mark


def _erasure_augmented_policy(policy: InputPolicy, eps: float) -> InputPolicy:
    """Replace U by U' = (U, V-through-an-erasure-channel), keep V and X.

    The erasure happens with probability eps independently of everything
    else, so the new kernel is Q(u,v,x|s) * BEC(v -> v~).
    """
    mark = _erasure_symbol(policy.v_symbols)
    v_out = policy.v_symbols + (mark,)
    bec = np.zeros((len(policy.v_symbols), len(v_out)))
    for vi in range(len(policy.v_symbols)):
        bec[vi, vi] = 1.0 - eps
        bec[vi, len(policy.v_symbols)] = eps
    # q'[s, u, v~, v, x] then merge (u, v~) into the new inner auxiliary
    k = np.einsum("suvx,vt->sutvx", policy.kernel.kernel, bec)
    n_s = len(policy.s_symbols)
    u_lift = tuple((u, t) for u in policy.u_symbols for t in v_out)
    k = k.reshape(n_s, len(u_lift), len(policy.v_symbols), len(policy.x_symbols))
    return gp_policy(policy.s_symbols, u_lift, policy.v_symbols, policy.x_symbols, k)


def transform_to_alt(joint: JointPmf, model: SdWtcModel, policy: InputPolicy) -> InputPolicy:
    """Repair an infeasible policy for rate_RA_alt without losing rate.

    When the three-term rate is positive but I(U;Y) < I(U;S), augmenting the
    inner auxiliary with an erased copy of V restores the constraint: the
    margin is linear in the erasure probability, positive at eps = 0 and
    negative at eps = 1, so bisection pins the zero crossing.  The returned
    policy sits at the bracket endpoint where the margin is still >= 0, and
    its two-term value is no worse than the original three-term value (up
    to the bisection tolerance).  Feasible policies are returned unchanged.
    """
    if rate_RA(joint).value <= 0.0 or constraint_gap(joint) >= 0.0:
        return policy

    def margin(eps: float) -> tuple[float, InputPolicy]:
        cand = _erasure_augmented_policy(policy, eps)
        return constraint_gap(assemble_joint(model, cand)), cand

    lo, hi = 0.0, 1.0
    gap_lo, cand_lo = margin(lo)
    gap_hi, _ = margin(hi)
    if gap_lo < 0.0 or gap_hi >= 0.0:
        raise ValueError(
            f"erasure bisection bracket failed: margin({lo}) = {gap_lo!r}, "
            f"margin({hi}) = {gap_hi!r}"
        )
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        gap_mid, cand_mid = margin(mid)
        if gap_mid >= 0.0:
            lo, gap_lo, cand_lo = mid, gap_mid, cand_mid
        else:
            hi = mid
    return cand_lo


def rate_CHV(joint: JointPmf) -> RateReport:
    """The single-auxiliary rate min{I(V;Y)-I(V;Z), I(V;Y)-I(V;S)}."""
    i_vy = mutual_information(joint, ("V",), ("Y",))
    i_vz = mutual_information(joint, ("V",), ("Z",))
    i_vs = mutual_information(joint, ("V",), ("S",))
    return _report(
        [
            ("I(V;Y)-I(V;Z)", i_vy - i_vz),
            ("I(V;Y)-I(V;S)", i_vy - i_vs),
        ]
    )


def rate_CEG(joint: JointPmf) -> RateReport:
    """The causal-selection rate for a state-informed decoder.

    Terms over a joint with axes S, T, X, Y, Z and T independent of S:
      I(T;Y|S),
      H(S|T,Z) + max(0, I(T;Y,S) - I(T;Z)).
    """
    i_ts = mutual_information(joint, ("T",), ("S",))
    if i_ts > INDEP_TOL:
        raise ValueError(f"T must be independent of S, got I(T;S) = {i_ts!r} bits")
    i_tys = mutual_information(joint, ("T",), ("Y", "S"))
    i_tz = mutual_information(joint, ("T",), ("Z",))
    bracket = max(0.0, i_tys - i_tz)
    return _report(
        [
            ("I(T;Y|S)", mutual_information(joint, ("T",), ("Y",), ("S",))),
            ("H(S|T,Z)+[I(T;Y,S)-I(T;Z)]+", entropy(joint, ("S",), ("T", "Z")) + bracket),
        ]
    )


def ceg_joint(p_t: Pmf, p_x_given_ts: Channel, model: SdWtcModel) -> JointPmf:
    """The joint over (S, T, X, Y, Z) of a selection variable T independent of S."""
    if p_x_given_ts.in_names != ("T", "S") or p_x_given_ts.out_names != ("X",):
        raise ValueError(
            f"need a kernel (T, S) -> (X,), got {p_x_given_ts.in_names} -> {p_x_given_ts.out_names}"
        )
    if p_x_given_ts.in_axes[0][1] != p_t.symbols:
        raise ValueError("selection kernel T alphabet does not match the T pmf")
    if p_x_given_ts.in_axes[1][1] != model.s_symbols:
        raise ValueError("selection kernel state alphabet does not match the model")
    if p_x_given_ts.out_axes[0][1] != model.x_symbols:
        raise ValueError("selection kernel X alphabet does not match the model")
    mass = np.einsum(
        "s,t,tsx,xsyz->stxyz",
        model.state_pmf.probs,
        p_t.probs,
        p_x_given_ts.kernel,
        model.channel.kernel,
    )
    axes = (
        ("S", model.s_symbols),
        ("T", p_t.symbols),
        ("X", model.x_symbols),
        ("Y", model.y_symbols),
        ("Z", model.z_symbols),
    )
    return JointPmf(axes, mass)


def rln_joint(
    p_x: Pmf,
    p_a_given_s: Channel,
    p_b_given_a: Channel,
    rln: RlnModel,
) -> JointPmf:
    """The joint over (S, A, B, X, S1, S2, Y, Z) of a product-form policy."""
    if p_a_given_s.in_names != ("S",) or p_a_given_s.out_names != ("A",):
        raise ValueError(f"need a kernel (S,) -> (A,), got {p_a_given_s.in_names} -> {p_a_given_s.out_names}")
    if p_b_given_a.in_names != ("A",) or p_b_given_a.out_names != ("B",):
        raise ValueError(f"need a kernel (A,) -> (B,), got {p_b_given_a.in_names} -> {p_b_given_a.out_names}")
    if p_a_given_s.in_axes[0][1] != rln.s_symbols:
        raise ValueError("A-kernel state alphabet does not match the model")
    if p_a_given_s.out_axes[0][1] != p_b_given_a.in_axes[0][1]:
        raise ValueError("B-kernel input alphabet does not match the A alphabet")
    if p_x.symbols != rln.x_symbols:
        raise ValueError("input pmf alphabet does not match the model's X alphabet")
    mass = np.einsum(
        "s,sa,ab,x,scd,xyz->sabxcdyz",
        rln.state_pmf.probs,
        p_a_given_s.kernel,
        p_b_given_a.kernel,
        p_x.probs,
        rln.state_channel.kernel,
        rln.main_channel.kernel,
    )
    axes = (
        ("S", rln.s_symbols),
        ("A", p_a_given_s.out_axes[0][1]),
        ("B", p_b_given_a.out_axes[0][1]),
        ("X", rln.x_symbols),
        ("S1", rln.s1_symbols),
        ("S2", rln.s2_symbols),
        ("Y", rln.y_symbols),
        ("Z", rln.z_symbols),
    )
    return JointPmf(axes, mass)


def rate_RLN(
    p_x: Pmf,
    p_a_given_s: Channel,
    p_b_given_a: Channel,
    rln: RlnModel,
) -> RateReport:
    """min{I(A;S1|B) - I(A;S2|B), I(X;Y) - I(A;S|S1)} for product policies."""
    joint = rln_joint(p_x, p_a_given_s, p_b_given_a, rln)
    t1 = mutual_information(joint, ("A",), ("S1",), ("B",)) - mutual_information(
        joint, ("A",), ("S2",), ("B",)
    )
    t2 = mutual_information(joint, ("X",), ("Y",)) - mutual_information(
        joint, ("A",), ("S",), ("S1",)
    )
    return _report(
        [
            ("I(A;S1|B)-I(A;S2|B)", t1),
            ("I(X;Y)-I(A;S|S1)", t2),
        ]
    )


def _xs_joint(p_x_given_s: Channel, model: SdWtcModel) -> JointPmf:
    if p_x_given_s.in_names != ("S",) or p_x_given_s.out_names != ("X",):
        raise ValueError(f"need a kernel (S,) -> (X,), got {p_x_given_s.in_names} -> {p_x_given_s.out_names}")
    if p_x_given_s.in_axes[0][1] != model.s_symbols:
        raise ValueError("input kernel state alphabet does not match the model")
    if p_x_given_s.out_axes[0][1] != model.x_symbols:
        raise ValueError("input kernel X alphabet does not match the model")
    mass = np.einsum(
        "s,sx,xsyz->sxyz",
        model.state_pmf.probs,
        p_x_given_s.kernel,
        model.channel.kernel,
    )
    axes = (
        ("S", model.s_symbols),
        ("X", model.x_symbols),
        ("Y", model.y_symbols),
        ("Z", model.z_symbols),
    )
    return JointPmf(axes, mass)


def semidet_objective(p_x_given_s: Channel, model: SdWtcModel) -> RateReport:
    """min{H(Y|Z), H(Y|S)} for models with a deterministic legitimate output."""
    joint = _xs_joint(p_x_given_s, model)
    h_y_xs = entropy(joint, ("Y",), ("X", "S"))
    if h_y_xs > INDEP_TOL:
        raise ValueError(
            f"model is not semi-deterministic: H(Y|X,S) = {h_y_xs!r} bits"
        )
    return _report(
        [
            ("H(Y|Z)", entropy(joint, ("Y",), ("Z",))),
            ("H(Y|S)", entropy(joint, ("Y",), ("S",))),
        ]
    )


def rate_LN_encdec(p_x_given_s: Channel, model: SdWtcModel) -> RateReport:
    """min{I(X;Y|S), I(X;Y|S) - I(X;Z|S) + H(S|Z)} for state-informed ends."""
    joint = _xs_joint(p_x_given_s, model)
    i_xy_s = mutual_information(joint, ("X",), ("Y",), ("S",))
    i_xz_s = mutual_information(joint, ("X",), ("Z",), ("S",))
    h_s_z = entropy(joint, ("S",), ("Z",))
    return _report(
        [
            ("I(X;Y|S)", i_xy_s),
            ("I(X;Y|S)-I(X;Z|S)+H(S|Z)", i_xy_s - i_xz_s + h_s_z),
        ]
    )
