"""Codebook sampling, likelihood encoding, typicality decoding, exact
enumerations, and the Monte Carlo experiments."""
from __future__ import annotations

import math
from itertools import product as iter_product

import numpy as np
import pytest

from sdwtc.models import (
    ERASURE,
    SdWtcModel,
    assemble_joint,
    build_rln_example,
    gp_policy,
)
from sdwtc.prob import (
    Channel,
    JointPmf,
    Pmf,
    bernoulli,
    binary_entropy,
    channel_from_joint,
    inv_binary_entropy,
    is_letter_typical,
    marginalize,
    mutual_information,
)
from sdwtc.simulate import (
    CodeRates,
    Codebook,
    EncoderFailure,
    approximation_gap,
    binning_otp_protocol,
    exact_message_channel,
    exact_output_divergence,
    index_count,
    leakage_capacity,
    likelihood_encode,
    run_reliability_experiment,
    sample_codebook,
    typicality_decode,
    wilson_interval,
)

RNG_SEED = 20240822

CHI2_CRIT_1DF_999 = 10.827566170662733  # chi-square(1) quantile at 1 - 1e-3


def bsc_wiretap(q: float, tap: str = "const") -> SdWtcModel:
    """Y = BSC(q)(X) ignoring the state; Z constant or a perfect copy of X."""
    if tap == "const":
        kern = np.zeros((2, 2, 2, 1))
        for x in (0, 1):
            kern[x, :, x, 0] = 1.0 - q
            kern[x, :, 1 - x, 0] = q
        z_axis = ("Z", (0,))
    else:
        kern = np.zeros((2, 2, 2, 2))
        for x in (0, 1):
            kern[x, :, x, x] = 1.0 - q
            kern[x, :, 1 - x, x] = q
        z_axis = ("Z", (0, 1))
    ch = Channel((("X", (0, 1)), ("S", (0, 1))), (("Y", (0, 1)), z_axis), kern)
    return SdWtcModel(state_pmf=bernoulli(0.5), channel=ch)


def uniform_input_policy(model: SdWtcModel):
    """U a singleton, V = X uniform and independent of the state."""
    nx = len(model.x_symbols)
    k = np.zeros((len(model.s_symbols), 1, nx, nx))
    for v in range(nx):
        k[:, 0, v, v] = 1.0 / nx
    return gp_policy(model.s_symbols, (0,), model.x_symbols, model.x_symbols, k)


def chain_covering_setup():
    """U -> V -> W chain used for the divergence-trend checks."""
    bsc02 = np.array([[0.8, 0.2], [0.2, 0.8]])
    bsc01 = np.array([[0.9, 0.1], [0.1, 0.9]])
    mass = 0.5 * bsc02[:, :, None] * bsc01[None, :, :]
    j = JointPmf((("U", (0, 1)), ("V", (0, 1)), ("W", (0, 1))), mass)
    q_u = Pmf((0, 1), np.array([0.5, 0.5]))
    q_v_given_u = Channel((("U", (0, 1)),), (("V", (0, 1)),), bsc02)
    q_w_given_uv = Channel(
        (("U", (0, 1)), ("V", (0, 1))),
        (("W", (0, 1)),),
        np.broadcast_to(bsc01[None, :, :], (2, 2, 2)).copy(),
    )
    q_w = Pmf((0, 1), np.array([0.5, 0.5]))
    return j, q_u, q_v_given_u, q_w_given_uv, q_w


def tiny_codebook() -> tuple[Codebook, Channel, Channel]:
    """Fixed n=3 codebook with four (i, j) pairs and known kernels."""
    q_s_uv = Channel(
        (("U", (0, 1)), ("V", (0, 1))),
        (("S", (0, 1)),),
        np.array([[[0.8, 0.2], [0.5, 0.5]], [[0.3, 0.7], [0.9, 0.1]]]),
    )
    q_x_uvs = Channel(
        (("U", (0, 1)), ("V", (0, 1)), ("S", (0, 1))),
        (("X", (0, 1)),),
        np.full((2, 2, 2, 2), 0.5),
    )
    cb = Codebook(
        n=3,
        r1=0.4,
        r2=0.4,
        r=0.0,
        u_symbols=(0, 1),
        v_symbols=(0, 1),
        u_words=np.array([[0, 0, 1], [1, 0, 1]]),
        v_words=np.array([[[[0, 1, 1]], [[1, 0, 0]]], [[[0, 0, 1]], [[1, 1, 0]]]]),
        seed=0,
    )
    return cb, q_s_uv, q_x_uvs


# ---------------------------------------------------------------------------
# index sizes and intervals


def test_index_count_floor_convention():
    assert index_count(10, 0.0) == 1
    assert index_count(4, 0.5) == 4
    assert index_count(3, 0.5) == 2  # floor(2^1.5)
    assert index_count(10, 0.3) == 8  # 2^3 exactly
    with pytest.raises(ValueError):
        index_count(10, -0.1)


def test_wilson_interval_basics():
    assert wilson_interval(0, 0) == (0.0, 1.0)
    lo, hi = wilson_interval(3, 40)
    assert 0.0 <= lo < 3 / 40 < hi <= 1.0
    # z = 0 collapses the interval onto the point estimate
    assert wilson_interval(3, 40, z=0.0) == pytest.approx((0.075, 0.075))
    w_small = np.diff(wilson_interval(5, 50))[0]
    w_large = np.diff(wilson_interval(50, 500))[0]
    assert w_large < w_small


# ---------------------------------------------------------------------------
# codebook sampling


def test_codebook_degenerate_rates_single_pair():
    q_u = bernoulli(0.3)
    q_v = Channel((("U", (0, 1)),), (("V", (0, 1)),), np.array([[0.9, 0.1], [0.2, 0.8]]))
    cb = sample_codebook(Pmf((0, 1), q_u.probs), q_v, 5, 0.0, 0.0, 0.0, seed=1)
    assert cb.num_u == cb.num_v == cb.num_messages == 1
    assert cb.u_words.shape == (1, 5)
    assert cb.v_words.shape == (1, 1, 1, 5)


def test_codebook_seed_determinism():
    q_u = Pmf((0, 1), np.array([0.4, 0.6]))
    q_v = Channel((("U", (0, 1)),), (("V", (0, 1)),), np.array([[0.7, 0.3], [0.1, 0.9]]))
    a = sample_codebook(q_u, q_v, 6, 0.4, 0.3, 0.2, seed=99)
    b = sample_codebook(q_u, q_v, 6, 0.4, 0.3, 0.2, seed=99)
    c = sample_codebook(q_u, q_v, 6, 0.4, 0.3, 0.2, seed=100)
    assert np.array_equal(a.u_words, b.u_words)
    assert np.array_equal(a.v_words, b.v_words)
    assert not (np.array_equal(a.u_words, c.u_words) and np.array_equal(a.v_words, c.v_words))


def test_codebook_inner_word_frequencies():
    # n=8, R1=0.5 -> 16 inner words; per-seed chi-square never rejects at 1e-3
    q_u = Pmf((0, 1), np.array([0.3, 0.7]))
    q_v = Channel((("U", (0, 1)),), (("V", (0, 1)),), np.array([[0.6, 0.4], [0.4, 0.6]]))
    for s in range(100):
        cb = sample_codebook(q_u, q_v, 8, 0.5, 0.0, 0.0, seed=60000 + s)
        assert cb.num_u == 16
        counts = np.bincount(cb.u_words.ravel(), minlength=2)
        expected = counts.sum() * q_u.probs
        stat = float(((counts - expected) ** 2 / expected).sum())
        assert stat < CHI2_CRIT_1DF_999


def test_codebook_size_guard():
    q_u = Pmf((0, 1), np.array([0.5, 0.5]))
    q_v = Channel((("U", (0, 1)),), (("V", (0, 1)),), np.full((2, 2), 0.5))
    with pytest.raises(ValueError, match="codebook"):
        sample_codebook(q_u, q_v, 20, 0.9, 0.9, 0.9, seed=0)


def test_codebook_kernel_validation():
    q_u = Pmf((0, 1), np.array([0.5, 0.5]))
    bad_axes = Channel((("A", (0, 1)),), (("V", (0, 1)),), np.full((2, 2), 0.5))
    with pytest.raises(ValueError):
        sample_codebook(q_u, bad_axes, 4, 0.5, 0.0, 0.0, seed=0)
    bad_alpha = Channel((("U", (0, 1, 2)),), (("V", (0, 1)),), np.full((3, 2), 0.5))
    with pytest.raises(ValueError):
        sample_codebook(q_u, bad_alpha, 4, 0.5, 0.0, 0.0, seed=0)
    with pytest.raises(ValueError):
        sample_codebook(q_u, Channel((("U", (0, 1)),), (("V", (0, 1)),), np.full((2, 2), 0.5)), 0, 0.0, 0.0, 0.0, seed=0)


# ---------------------------------------------------------------------------
# likelihood encoder


def test_encoder_single_pair_always_selected():
    cb, q_s_uv, q_x_uvs = tiny_codebook()
    solo = Codebook(
        n=3, r1=0.0, r2=0.0, r=0.0, u_symbols=(0, 1), v_symbols=(0, 1),
        u_words=cb.u_words[:1], v_words=cb.v_words[:1, :1], seed=0,
    )
    for k in range(20):
        i, j, x = likelihood_encode(0, (0, 1, 0), solo, q_s_uv, q_x_uvs, seed=k)
        assert (i, j) == (0, 0)
        assert len(x) == 3 and set(x) <= {0, 1}


def test_encoder_skips_zero_likelihood_pair():
    # P(S=0 | u=0, v) = 0, so the state (0,) forces the u=1 row
    q_s_uv = Channel(
        (("U", (0, 1)), ("V", (0,))),
        (("S", (0, 1)),),
        np.array([[[0.0, 1.0]], [[0.5, 0.5]]]),
    )
    q_x_uvs = Channel(
        (("U", (0, 1)), ("V", (0,)), ("S", (0, 1))),
        (("X", (0, 1)),),
        np.full((2, 1, 2, 2), 0.5),
    )
    cb = Codebook(
        n=1, r1=1.0, r2=0.0, r=0.0, u_symbols=(0, 1), v_symbols=(0,),
        u_words=np.array([[0], [1]]), v_words=np.zeros((2, 1, 1, 1), dtype=np.int64),
        seed=0,
    )
    for k in range(50):
        i, _, _ = likelihood_encode(0, (0,), cb, q_s_uv, q_x_uvs, seed=k)
        assert i == 1


def test_encoder_failure_when_state_unreachable():
    q_s_uv = Channel(
        (("U", (0,)), ("V", (0,))), (("S", (0, 1)),), np.array([[[0.0, 1.0]]])
    )
    q_x_uvs = Channel(
        (("U", (0,)), ("V", (0,)), ("S", (0, 1))), (("X", (0,)),), np.ones((1, 1, 2, 1))
    )
    cb = Codebook(
        n=2, r1=0.0, r2=0.0, r=0.0, u_symbols=(0,), v_symbols=(0,),
        u_words=np.zeros((1, 2), dtype=np.int64),
        v_words=np.zeros((1, 1, 1, 2), dtype=np.int64), seed=0,
    )
    with pytest.raises(EncoderFailure):
        likelihood_encode(0, (0, 0), cb, q_s_uv, q_x_uvs, seed=3)


def test_encoder_argument_validation():
    cb, q_s_uv, q_x_uvs = tiny_codebook()
    with pytest.raises(ValueError, match="message"):
        likelihood_encode(1, (0, 1, 0), cb, q_s_uv, q_x_uvs, seed=0)
    with pytest.raises(ValueError, match="length"):
        likelihood_encode(0, (0, 1), cb, q_s_uv, q_x_uvs, seed=0)
    with pytest.raises(ValueError, match="alphabet"):
        likelihood_encode(0, (0, 2, 0), cb, q_s_uv, q_x_uvs, seed=0)


def test_encoder_selection_frequencies_match_exact_law():
    # tiny instance (n=3, 4 pairs): 1e5 draws vs the exact posterior, 3 sigma
    cb, q_s_uv, q_x_uvs = tiny_codebook()
    s_seq = (0, 1, 0)
    exact = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            p = 1.0
            for t in range(3):
                p *= q_s_uv.kernel[cb.u_words[i, t], cb.v_words[i, j, 0, t], s_seq[t]]
            exact[i, j] = p
    exact /= exact.sum()

    draws = 100_000
    counts = np.zeros((2, 2))
    ones = 0
    for k in range(draws):
        i, j, x = likelihood_encode(0, s_seq, cb, q_s_uv, q_x_uvs, seed=77_000 + k)
        counts[i, j] += 1
        ones += sum(x)
    for idx in np.ndindex(2, 2):
        p = exact[idx]
        assert abs(counts[idx] - draws * p) <= 3.0 * math.sqrt(draws * p * (1 - p))
    # the input sampler is an unbiased coin here
    assert abs(ones / (3 * draws) - 0.5) < 0.01


# ---------------------------------------------------------------------------
# typicality decoder


def _scan_decode(y, cb, q_uvy, eps):
    """Brute-force reference: test every triple with is_letter_typical."""
    order = [q_uvy.names.index(a) for a in ("U", "V", "Y")]
    mass = np.transpose(q_uvy.mass, order)
    symbols = tuple(iter_product(q_uvy.alphabet("U"), q_uvy.alphabet("V"), q_uvy.alphabet("Y")))
    flat = Pmf(symbols, mass.ravel())
    hits = []
    for i in range(cb.num_u):
        for j in range(cb.num_v):
            for m in range(cb.num_messages):
                word = tuple(
                    (cb.u_symbols[cb.u_words[i, t]], cb.v_symbols[cb.v_words[i, j, m, t]], y[t])
                    for t in range(cb.n)
                )
                try:
                    ok = is_letter_typical(word, flat, eps)
                except ValueError:
                    ok = False
                if ok:
                    hits.append((i, j, m))
    return hits[0] if len(hits) == 1 else ERASURE


def test_decoder_matches_full_scan():
    model = bsc_wiretap(0.11)
    policy = uniform_input_policy(model)
    joint = assemble_joint(model, policy)
    q_uvy = marginalize(joint, ("U", "V", "Y"))
    q_u = Pmf(joint.alphabet("U"), np.array([1.0]))
    q_v_given_u = channel_from_joint(joint, ("U",), ("V",))

    rng = np.random.default_rng(RNG_SEED)
    agreements = 0
    for trial in range(60):
        cb = sample_codebook(q_u, q_v_given_u, 6, 0.3, 0.3, 0.3, seed=int(rng.integers(2**31)))
        for _ in range(5):
            y = tuple(rng.integers(0, 2, size=6).tolist())
            eps = float(rng.choice([0.2, 0.5, 0.9, 1.2]))
            assert typicality_decode(y, cb, q_uvy, eps) == _scan_decode(y, cb, q_uvy, eps)
            agreements += 1
    assert agreements == 300


def test_decoder_unique_exact_word():
    model = bsc_wiretap(0.0)
    policy = uniform_input_policy(model)
    joint = assemble_joint(model, policy)
    q_uvy = marginalize(joint, ("U", "V", "Y"))
    cb = Codebook(
        n=4, r1=0.0, r2=0.0, r=0.0, u_symbols=(0,), v_symbols=(0, 1),
        u_words=np.zeros((1, 4), dtype=np.int64),
        v_words=np.array([0, 1, 1, 0]).reshape(1, 1, 1, 4), seed=0,
    )
    assert typicality_decode((0, 1, 1, 0), cb, q_uvy, 1.0) == (0, 0, 0)


def test_decoder_erases_on_ambiguity_and_unknown_symbols():
    model = bsc_wiretap(0.0)
    policy = uniform_input_policy(model)
    joint = assemble_joint(model, policy)
    q_uvy = marginalize(joint, ("U", "V", "Y"))
    word = np.array([0, 1, 1, 0])
    cb = Codebook(
        n=4, r1=0.0, r2=0.25, r=0.0, u_symbols=(0,), v_symbols=(0, 1),
        u_words=np.zeros((1, 4), dtype=np.int64),
        v_words=np.stack([word, word]).reshape(1, 2, 1, 4), seed=0,
    )
    assert typicality_decode((0, 1, 1, 0), cb, q_uvy, 1.0) == ERASURE
    assert typicality_decode((0, 1, 1, 7), cb, q_uvy, 1.0) == ERASURE


def test_decoder_argument_validation():
    model = bsc_wiretap(0.0)
    policy = uniform_input_policy(model)
    joint = assemble_joint(model, policy)
    q_uvy = marginalize(joint, ("U", "V", "Y"))
    cb = Codebook(
        n=4, r1=0.0, r2=0.0, r=0.0, u_symbols=(0,), v_symbols=(0, 1),
        u_words=np.zeros((1, 4), dtype=np.int64),
        v_words=np.zeros((1, 1, 1, 4), dtype=np.int64), seed=0,
    )
    with pytest.raises(ValueError, match="joint"):
        typicality_decode((0, 0, 0, 0), cb, marginalize(joint, ("U", "V", "Z")), 0.5)
    with pytest.raises(ValueError, match="length"):
        typicality_decode((0, 0), cb, q_uvy, 0.5)
    with pytest.raises(ValueError, match="eps"):
        typicality_decode((0, 0, 0, 0), cb, q_uvy, -0.1)


# ---------------------------------------------------------------------------
# exact output divergence


def test_divergence_zero_for_constant_kernel():
    q_w = Pmf((0, 1), np.array([0.35, 0.65]))
    kernel = Channel(
        (("U", (0, 1)), ("V", (0, 1))),
        (("W", (0, 1)),),
        np.broadcast_to(q_w.probs, (2, 2, 2)).copy(),
    )
    q_u = Pmf((0, 1), np.array([0.5, 0.5]))
    q_v = Channel((("U", (0, 1)),), (("V", (0, 1)),), np.full((2, 2), 0.5))
    cb = sample_codebook(q_u, q_v, 5, 0.4, 0.4, 0.0, seed=8)
    assert exact_output_divergence(cb, kernel, q_w) <= 1e-12


def test_divergence_zero_for_exhaustive_codebook():
    # v-words enumerate every sequence once; W copies V; target is uniform
    n = 4
    words = np.array(list(iter_product((0, 1), repeat=n)))
    cb = Codebook(
        n=n, r1=0.0, r2=1.0, r=0.0, u_symbols=(0,), v_symbols=(0, 1),
        u_words=np.zeros((1, n), dtype=np.int64),
        v_words=words.reshape(1, 16, 1, n), seed=0,
    )
    copy_v = Channel(
        (("U", (0,)), ("V", (0, 1))), (("W", (0, 1)),), np.eye(2)[None, :, :].copy()
    )
    assert exact_output_divergence(cb, copy_v, Pmf((0, 1), np.array([0.5, 0.5]))) <= 1e-12


def test_divergence_single_word_deterministic_channel():
    word = (0, 1, 0, 1)
    cb = Codebook(
        n=4, r1=0.0, r2=0.0, r=0.0, u_symbols=(0,), v_symbols=(0, 1),
        u_words=np.zeros((1, 4), dtype=np.int64),
        v_words=np.array(word).reshape(1, 1, 1, 4), seed=0,
    )
    copy_v = Channel(
        (("U", (0,)), ("V", (0, 1))), (("W", (0, 1)),), np.eye(2)[None, :, :].copy()
    )
    q_w = Pmf((0, 1), np.array([0.3, 0.7]))
    expected = sum(math.log2(1.0 / q_w.probs[w]) for w in word)
    assert exact_output_divergence(cb, copy_v, q_w) == pytest.approx(expected, abs=1e-12)


def test_divergence_trend_with_covering_margins():
    j, q_u, q_v_given_u, q_w_given_uv, q_w = chain_covering_setup()
    r1 = mutual_information(j, ("U",), ("W",)) + 0.45
    r2 = mutual_information(j, ("U", "V"), ("W",)) + 0.45 - r1
    medians = {}
    for n in (4, 10):
        ds = [
            exact_output_divergence(
                sample_codebook(q_u, q_v_given_u, n, r1, r2, 0.0, 5000 + s),
                q_w_given_uv,
                q_w,
            )
            for s in range(20)
        ]
        medians[n] = float(np.median(ds))
    assert medians[10] < medians[4]


def test_divergence_guards_and_validation():
    q_w = Pmf((0, 1), np.array([0.5, 0.5]))
    copy_v = Channel(
        (("U", (0,)), ("V", (0, 1))), (("W", (0, 1)),), np.eye(2)[None, :, :].copy()
    )
    big = Codebook(
        n=30, r1=0.0, r2=0.0, r=0.0, u_symbols=(0,), v_symbols=(0, 1),
        u_words=np.zeros((1, 30), dtype=np.int64),
        v_words=np.zeros((1, 1, 1, 30), dtype=np.int64), seed=0,
    )
    with pytest.raises(ValueError, match="enumeration"):
        exact_output_divergence(big, copy_v, q_w)
    small = Codebook(
        n=2, r1=0.0, r2=0.0, r=0.0, u_symbols=(0,), v_symbols=(0, 1),
        u_words=np.zeros((1, 2), dtype=np.int64),
        v_words=np.zeros((1, 1, 1, 2), dtype=np.int64), seed=0,
    )
    bad_inputs = Channel((("A", (0,)), ("V", (0, 1))), (("W", (0, 1)),), np.eye(2)[None].copy())
    with pytest.raises(ValueError):
        exact_output_divergence(small, bad_inputs, q_w)
    mismatched = Pmf((0, 1, 2), np.array([0.2, 0.3, 0.5]))
    with pytest.raises(ValueError):
        exact_output_divergence(small, copy_v, mismatched)


# ---------------------------------------------------------------------------
# induced vs idealized joints


def _correlated_state_policy(model: SdWtcModel):
    """U a singleton; V tracks S with fidelity 0.8; X = V."""
    k = np.zeros((2, 1, 2, 2))
    for s in (0, 1):
        for v in (0, 1):
            k[s, 0, v, v] = 0.8 if v == s else 0.2
    return gp_policy((0, 1), (0,), (0, 1), (0, 1), k)


def test_approximation_gap_normalization_and_structure():
    model = bsc_wiretap(0.0)
    policy = _correlated_state_policy(model)
    joint = assemble_joint(model, policy)
    q_u = Pmf(joint.alphabet("U"), np.array([1.0]))
    q_v_given_u = channel_from_joint(joint, ("U",), ("V",))
    cb = sample_codebook(q_u, q_v_given_u, 4, 0.0, 0.75, 0.25, seed=5)
    res = approximation_gap(model, policy, cb)
    assert res.induced.sum() == pytest.approx(1.0, abs=1e-10)
    assert res.idealized.sum() == pytest.approx(1.0, abs=1e-10)
    assert all(0.0 <= tv <= 1.0 for tv in res.per_message)
    assert res.total_variation == pytest.approx(float(np.mean(res.per_message)), abs=1e-12)
    m = len(res.per_message)
    assert res.tv_under([1.0 / m] * m) == pytest.approx(res.total_variation, abs=1e-12)
    point = [0.0] * m
    point[0] = 1.0
    assert res.tv_under(point) == pytest.approx(res.per_message[0], abs=1e-12)
    with pytest.raises(ValueError):
        res.tv_under([1.0] * (m + 1))
    with pytest.raises(ValueError):
        res.tv_under([0.7] * m)


def test_approximation_gap_single_pair_oracle():
    # single (u, v) pair: induced S-marginal is W_S^n, idealized is Q_{S|u,v}^n
    model = bsc_wiretap(0.0)
    policy = _correlated_state_policy(model)
    joint = assemble_joint(model, policy)
    q_u = Pmf(joint.alphabet("U"), np.array([1.0]))
    q_v_given_u = channel_from_joint(joint, ("U",), ("V",))
    cb = sample_codebook(q_u, q_v_given_u, 4, 0.0, 0.0, 0.0, seed=11)
    res = approximation_gap(model, policy, cb)
    expected = 0.0
    for k in range(5):
        expected += math.comb(4, k) * abs(0.5**4 - 0.8**k * 0.2 ** (4 - k))
    expected *= 0.5
    assert res.total_variation == pytest.approx(expected, rel=1e-10)
    assert res.total_variation > 0.25


def test_approximation_gap_shrinks_with_huge_rates():
    model = bsc_wiretap(0.0)
    policy = _correlated_state_policy(model)
    joint = assemble_joint(model, policy)
    q_u = Pmf(joint.alphabet("U"), np.array([1.0]))
    q_v_given_u = channel_from_joint(joint, ("U",), ("V",))
    tvs = []
    for s in range(5):
        cb = sample_codebook(q_u, q_v_given_u, 4, 0.0, 2.4, 0.0, seed=21 + s)
        tvs.append(approximation_gap(model, policy, cb).total_variation)
    assert float(np.median(tvs)) < 0.05


# ---------------------------------------------------------------------------
# exact leakage


def test_leakage_zero_when_tap_is_constant():
    model = bsc_wiretap(0.1, tap="const")
    policy = uniform_input_policy(model)
    joint = assemble_joint(model, policy)
    q_u = Pmf(joint.alphabet("U"), np.array([1.0]))
    q_v_given_u = channel_from_joint(joint, ("U",), ("V",))
    cb = sample_codebook(q_u, q_v_given_u, 4, 0.0, 0.0, 0.25, seed=2)
    ch = exact_message_channel(model, policy, cb)
    assert ch.in_names == ("M",) and ch.out_names == ("Zn",)
    assert ch.kernel.shape[0] == cb.num_messages
    cap = leakage_capacity(ch)
    assert cap.bits <= 1e-9
    assert cap.upper - cap.lower <= 1e-9


def test_leakage_full_bit_when_tap_copies_distinct_words():
    model = bsc_wiretap(0.0, tap="copy")
    policy = uniform_input_policy(model)
    joint = assemble_joint(model, policy)
    q_u = Pmf(joint.alphabet("U"), np.array([1.0]))
    q_v_given_u = channel_from_joint(joint, ("U",), ("V",))
    cb = sample_codebook(q_u, q_v_given_u, 4, 0.0, 0.0, 0.25, seed=7)
    assert not np.array_equal(cb.v_words[0, 0, 0], cb.v_words[0, 0, 1])
    cap = leakage_capacity(exact_message_channel(model, policy, cb))
    assert cap.bits == pytest.approx(1.0, abs=1e-9)
    assert cap.bits <= math.log2(cb.num_messages) + 1e-12


def test_leakage_capacity_identity_and_independence():
    ident = Channel((("M", (0, 1)),), (("Z", (0, 1)),), np.eye(2))
    assert leakage_capacity(ident).bits == pytest.approx(1.0, abs=1e-9)
    flat = Channel((("M", (0, 1, 2)),), (("Z", (0, 1)),), np.full((3, 2), 0.5))
    assert leakage_capacity(flat).bits <= 1e-9


def test_leakage_capacity_matches_simplex_grid():
    k = np.array([[0.7, 0.2, 0.1], [0.1, 0.8, 0.1], [0.25, 0.25, 0.5]])
    cap = leakage_capacity(Channel((("M", (0, 1, 2)),), (("Z", (0, 1, 2)),), k))
    step = 1e-3
    p1 = np.arange(0.0, 1.0 + step / 2, step)
    grids = []
    row_gain = (k * np.log2(np.where(k > 0, k, 1.0))).sum(axis=1)
    best = 0.0
    for a in p1:
        b = np.arange(0.0, 1.0 - a + step / 2, step)
        pm = np.stack([np.full_like(b, a), b, 1.0 - a - b], axis=1)
        pm = np.clip(pm, 0.0, 1.0)
        q = pm @ k
        h_q = -(q * np.log2(np.where(q > 0, q, 1.0))).sum(axis=1)
        best = max(best, float((pm @ row_gain + h_q).max()))
    assert cap.bits == pytest.approx(best, abs=1e-4)
    assert cap.lower <= cap.bits <= cap.upper


# ---------------------------------------------------------------------------
# reliability experiment


def test_reliability_noiseless_single_message_is_perfect():
    model = bsc_wiretap(0.0)
    policy = uniform_input_policy(model)
    res = run_reliability_experiment(
        model, policy, 6, CodeRates(0.0, 0.0, 0.0), eps=1.5, trials=40, seed=12
    )
    assert res.num_messages == 1
    assert res.average_error_rate == 0.0
    assert res.erasures == 0 and res.encoder_failures == 0
    lo, hi = res.average_interval
    assert lo == 0.0 and hi < 0.2


def test_reliability_is_deterministic_with_records():
    model = bsc_wiretap(0.11)
    policy = uniform_input_policy(model)
    run = lambda: run_reliability_experiment(
        model, policy, 6, (0.0, 0.0, 0.3), eps=1.0, trials=25, seed=42, keep_records=True
    )
    a, b = run(), run()
    assert a == b
    assert len(a.records) == 25
    for rec in a.records:
        assert rec.decoded == ERASURE or (
            0 <= rec.decoded[0] < 1 and 0 <= rec.decoded[2] < a.num_messages
        )
        assert len(rec.state) == 6 and len(rec.received) == 6
    assert a.message_trials == (9, 8, 8)  # messages cycle through the set


def test_reliability_error_improves_with_blocklength():
    # error at n=12 below error at n=6 in >= 80% of 20 seeds
    model = bsc_wiretap(0.11)
    policy = uniform_input_policy(model)
    wins = 0
    for s in range(20):
        e6 = run_reliability_experiment(
            model, policy, 6, (0.0, 0.0, 0.3), eps=1.0, trials=30, seed=900 + s
        ).average_error_rate
        e12 = run_reliability_experiment(
            model, policy, 12, (0.0, 0.0, 0.3), eps=1.0, trials=30, seed=900 + s
        ).average_error_rate
        wins += e12 < e6
    assert wins >= 16


def test_reliability_stays_bad_above_capacity():
    # message rate 0.2 bits above the main channel capacity: no error decay
    model = bsc_wiretap(0.25)
    policy = uniform_input_policy(model)
    rate = (1.0 - binary_entropy(0.25)) + 0.2
    medians = {}
    for n in (6, 9, 12):
        errs = [
            run_reliability_experiment(
                model, policy, n, (0.0, 0.0, rate), eps=0.9, trials=10, seed=300 + s
            ).average_error_rate
            for s in range(20)
        ]
        medians[n] = float(np.median(errs))
    assert min(medians.values()) >= 0.5


def test_reliability_validation():
    model = bsc_wiretap(0.1)
    policy = uniform_input_policy(model)
    with pytest.raises(ValueError, match="trials"):
        run_reliability_experiment(model, policy, 4, (0.0, 0.0, 0.0), trials=0)


# ---------------------------------------------------------------------------
# binning / one-time-pad protocol


def _surrogate_example():
    alpha_star = inv_binary_entropy(1.0 - binary_entropy(0.25))
    return build_rln_example(alpha_star, 0.05), alpha_star


def test_binning_rejects_impossible_rates():
    ex, _ = _surrogate_example()
    with pytest.raises(ValueError, match="pad"):
        binning_otp_protocol(ex, 8, 0.6, 0.3, 0.5, trials=5, seed=0)
    with pytest.raises(ValueError, match="nonnegative"):
        binning_otp_protocol(ex, 8, 0.6, -0.1, 0.2, trials=5, seed=0)
    with pytest.raises(ValueError, match="trials"):
        binning_otp_protocol(ex, 8, 0.6, 0.3, 0.2, trials=0, seed=0)


def test_binning_requires_constant_s2():
    from identities import random_rln_model

    rng = np.random.default_rng(RNG_SEED)
    rln = random_rln_model(rng, ns2=2)
    with pytest.raises(ValueError, match="S2"):
        binning_otp_protocol(rln, 6, 0.6, 0.3, 0.2, trials=5, seed=0)


def test_binning_is_deterministic():
    ex, _ = _surrogate_example()
    a = binning_otp_protocol(ex, 6, 0.9, 0.2, 0.5, trials=15, seed=5, eps=1.25)
    b = binning_otp_protocol(ex, 6, 0.9, 0.2, 0.5, trials=15, seed=5, eps=1.25)
    assert a == b
    assert a.num_bins == index_count(6, 0.2)
    assert a.num_keys == index_count(6, 0.7)
    assert a.num_messages == index_count(6, 0.5)
    assert a.csi_failures + a.x_decode_failures + a.key_decode_failures <= a.errors
    assert a.errors <= a.trials


def test_binning_error_falls_with_blocklength():
    # rates 10% inside the region; medians over 20 seeds
    ex, alpha_star = _surrogate_example()
    hs = binary_entropy(0.25)
    cap = 1.0 - binary_entropy(alpha_star)
    r_a = 1.1 * hs
    r_bin = r_a - 0.9 * 0.95 * hs
    r = 0.9 * (cap - r_bin)
    medians = {}
    for n in (6, 12):
        errs = [
            binning_otp_protocol(ex, n, r_a, r_bin, r, trials=20, seed=4200 + s, eps=1.25).error_rate
            for s in range(20)
        ]
        medians[n] = float(np.median(errs))
    assert medians[12] < medians[6]


def test_binning_pad_key_close_to_uniform():
    ex, _ = _surrogate_example()
    hs = binary_entropy(0.25)
    r_a = 1.1 * hs
    res = binning_otp_protocol(ex, 12, r_a, r_a - 0.25, 0.2, trials=400, seed=77, eps=0.4)
    assert res.num_keys == 8
    assert res.trials - res.csi_failures > 150  # enough picks to estimate the law
    assert res.key_tv_from_uniform < 0.1
