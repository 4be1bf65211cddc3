"""Desk-scale realization of the layered likelihood-encoder coding scheme.

Codebooks are sampled at blocklengths small enough that the induced
distributions can be enumerated exactly: soft-covering divergence, the
induced-vs-idealized approximation gap, and the exact message-to-
eavesdropper channel are all computed by full summation, while
reliability and the binning/one-time-pad protocol run as seeded Monte
Carlo.  Index sets use the floor convention |I| = max(1, floor(2^{nR})).

All likelihood arithmetic is log-domain; typicality tests match
prob.is_letter_typical bit for bit so the vectorized decoder can be
checked against a full scan.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iter_product
from typing import Hashable, NamedTuple, Sequence

import numpy as np

from .models import ERASURE, InputPolicy, RlnModel, SdWtcModel, assemble_joint
from .prob import (
    ZERO_MASS,
    Channel,
    JointPmf,
    Pmf,
    _marginal_mass,
    channel_from_joint,
    marginalize,
)
from .rng import derive_seeds

DEFAULT_EPS = 0.15  # loose typicality for n <= 12
_MAX_CODEWORDS = 2 ** 24
_MAX_ENUM_OPS = 10 ** 8


class EncoderFailure(RuntimeError):
    """The state sequence has zero likelihood under every codeword pair."""


class CodeRates(NamedTuple):
    r1: float
    r2: float
    r: float


def index_count(n: int, rate: float) -> int:
    """Floor-convention index set size max(1, floor(2^{n rate}))."""
    if rate < 0.0:
        raise ValueError(f"rates must be nonnegative, got {rate!r}")
    return max(1, int(math.floor(2.0 ** (n * rate) + 1e-9)))


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval (95% by default) for a binomial proportion."""
    if trials <= 0:
        return 0.0, 1.0
    p_hat = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p_hat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p_hat * (1.0 - p_hat) / trials + z * z / (4.0 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def _symbol_indices(seq: Sequence[Hashable], alphabet: tuple) -> np.ndarray | None:
    lookup = {sym: k for k, sym in enumerate(alphabet)}
    try:
        return np.array([lookup[sym] for sym in seq], dtype=np.int64)
    except KeyError:
        return None


def _typical_rows(codes: np.ndarray, probs: np.ndarray, eps: float, n: int) -> np.ndarray:
    """is_letter_typical over rows of combined-letter codes (same arithmetic)."""
    out = np.empty(codes.shape[0], dtype=bool)
    for r in range(codes.shape[0]):
        freq = np.bincount(codes[r], minlength=probs.size) / n
        out[r] = not np.any(np.abs(freq - probs) > eps * probs)
    return out


def _inverse_cdf(rows: np.ndarray, draws: np.ndarray) -> np.ndarray:
    """Sample one index per row of a row-stochastic array given uniforms."""
    cdf = np.cumsum(rows, axis=-1)
    cdf[..., -1] = 1.0
    idx = (draws[..., None] > cdf).sum(axis=-1)
    return np.minimum(idx, rows.shape[-1] - 1)


def _all_sequences(alphabet_size: int, n: int) -> np.ndarray:
    """(alphabet_size^n, n) array of all index sequences, lexicographic."""
    count = alphabet_size ** n
    idx = np.arange(count)
    out = np.empty((count, n), dtype=np.int64)
    for t in range(n):
        out[:, t] = (idx // alphabet_size ** (n - 1 - t)) % alphabet_size
    return out


def _product_chain(rows: np.ndarray) -> np.ndarray:
    """(C, n, K) per-letter rows -> (C, K^n) product distributions."""
    c, n, k = rows.shape
    cur = np.ones((c, 1))
    for t in range(n):
        cur = (cur[:, :, None] * rows[:, t, None, :]).reshape(c, -1)
    return cur


# ---------------------------------------------------------------------------
# codebooks


@dataclass(frozen=True)
class Codebook:
    """u(i) drawn i.i.d. Q_U^n; v(i,j,m) drawn i.i.d. Q_{V|U=u(i)}^n.

    u_words has shape (N1, n) and v_words (N1, N2, M, n), both holding
    alphabet indices; N1 = floor(2^{nR1}), N2 = floor(2^{nR2}),
    M = floor(2^{nR}).
    """

    n: int
    r1: float
    r2: float
    r: float
    u_symbols: tuple
    v_symbols: tuple
    u_words: np.ndarray
    v_words: np.ndarray
    seed: int

    @property
    def num_u(self) -> int:
        return self.u_words.shape[0]

    @property
    def num_v(self) -> int:
        return self.v_words.shape[1]

    @property
    def num_messages(self) -> int:
        return self.v_words.shape[2]


def sample_codebook(
    q_u: Pmf,
    q_v_given_u: Channel,
    n: int,
    r1: float,
    r2: float,
    r: float,
    seed: int,
) -> Codebook:
    """Draw a layered codebook; reproducible from the seed."""
    if n < 1:
        raise ValueError(f"blocklength must be positive, got {n!r}")
    if q_v_given_u.in_names != ("U",) or q_v_given_u.out_names != ("V",):
        raise ValueError(
            f"need a kernel (U,) -> (V,), got {q_v_given_u.in_names} -> {q_v_given_u.out_names}"
        )
    if q_v_given_u.in_axes[0][1] != q_u.symbols:
        raise ValueError("codebook kernel U alphabet does not match the U pmf")
    n1, n2, m = index_count(n, r1), index_count(n, r2), index_count(n, r)
    total = n1 + n1 * n2 * m
    if total > _MAX_CODEWORDS:
        raise ValueError(f"codebook would hold {total} words; guard is {_MAX_CODEWORDS}")
    rng = np.random.default_rng(seed)
    u_words = rng.choice(len(q_u.symbols), size=(n1, n), p=q_u.probs)
    rows = q_v_given_u.kernel[u_words]  # (N1, n, |V|)
    draws = rng.random((n1, n2, m, n))
    cdf = np.cumsum(rows, axis=-1)
    cdf[..., -1] = 1.0
    v_words = (draws[..., None] > cdf[:, None, None, :, :]).sum(axis=-1)
    v_words = np.minimum(v_words, len(q_v_given_u.out_axes[0][1]) - 1)
    return Codebook(
        n=n,
        r1=r1,
        r2=r2,
        r=r,
        u_symbols=q_u.symbols,
        v_symbols=q_v_given_u.out_axes[0][1],
        u_words=u_words.astype(np.int64),
        v_words=v_words.astype(np.int64),
        seed=seed,
    )


# ---------------------------------------------------------------------------
# encoder / decoder


def likelihood_encode(
    m: int,
    s: Sequence[Hashable],
    cb: Codebook,
    q_s_given_uv: Channel,
    q_x_given_uvs: Channel,
    seed: int,
) -> tuple[int, int, tuple]:
    """Sample (i, j) with probability proportional to Q^n_{S|U,V}(s | u(i), v(i,j,m)),
    then draw the channel input x from Q^n_{X|U,V,S}."""
    if not 0 <= m < cb.num_messages:
        raise ValueError(f"message {m!r} outside [0, {cb.num_messages})")
    if len(s) != cb.n:
        raise ValueError(f"state sequence has length {len(s)}, codebook has n={cb.n}")
    if q_s_given_uv.in_names != ("U", "V") or q_s_given_uv.out_names != ("S",):
        raise ValueError("need a kernel (U, V) -> (S,)")
    if q_x_given_uvs.in_names != ("U", "V", "S") or q_x_given_uvs.out_names != ("X",):
        raise ValueError("need a kernel (U, V, S) -> (X,)")
    s_idx = _symbol_indices(s, q_s_given_uv.out_axes[0][1])
    if s_idx is None:
        raise ValueError("state sequence contains symbols outside the S alphabet")

    with np.errstate(divide="ignore"):
        log_k = np.log(q_s_given_uv.kernel)
    u = cb.u_words[:, None, :]  # (N1, 1, n)
    v = cb.v_words[:, :, m, :]  # (N1, N2, n)
    loglik = log_k[u, v, s_idx[None, None, :]].sum(axis=-1)  # (N1, N2)
    top = loglik.max()
    if top == -np.inf:
        raise EncoderFailure(
            f"state sequence has zero likelihood under all {loglik.size} codeword pairs"
        )
    weights = np.exp(loglik - top)
    weights /= weights.sum()

    rng = np.random.default_rng(seed)
    flat = int(rng.choice(weights.size, p=weights.ravel()))
    i, j = divmod(flat, cb.num_v)

    rows = q_x_given_uvs.kernel[cb.u_words[i], cb.v_words[i, j, m], s_idx]  # (n, |X|)
    x_idx = _inverse_cdf(rows, rng.random(cb.n))
    x_alphabet = q_x_given_uvs.out_axes[0][1]
    return i, j, tuple(x_alphabet[k] for k in x_idx)


def typicality_decode(
    y: Sequence[Hashable],
    cb: Codebook,
    q_uvy: JointPmf,
    eps: float,
) -> tuple[int, int, int] | str:
    """The unique triple (i, j, m) with (u(i), v(i,j,m), y) letter-typical for
    Q_{U,V,Y}; the erasure symbol when zero or several triples qualify."""
    if set(q_uvy.names) != {"U", "V", "Y"}:
        raise ValueError(f"need a joint over U, V, Y, got axes {q_uvy.names}")
    if q_uvy.alphabet("U") != cb.u_symbols or q_uvy.alphabet("V") != cb.v_symbols:
        raise ValueError("joint alphabets do not match the codebook")
    if len(y) != cb.n:
        raise ValueError(f"output sequence has length {len(y)}, codebook has n={cb.n}")
    if eps < 0.0:
        raise ValueError(f"eps must be nonnegative, got {eps!r}")
    y_alphabet = q_uvy.alphabet("Y")
    y_idx = _symbol_indices(y, y_alphabet)
    if y_idx is None:
        return ERASURE

    n_v, n_y = len(cb.v_symbols), len(y_alphabet)
    probs = _marginal_mass(q_uvy, ("U", "V", "Y")).ravel()
    codes = (cb.u_words[:, None, None, :] * n_v + cb.v_words) * n_y + y_idx
    flat = codes.reshape(-1, cb.n)
    hits = np.nonzero(_typical_rows(flat, probs, eps, cb.n))[0]
    if hits.size != 1:
        return ERASURE
    i, rest = divmod(int(hits[0]), cb.num_v * cb.num_messages)
    j, m = divmod(rest, cb.num_messages)
    return i, j, m


# ---------------------------------------------------------------------------
# exact enumerations


def exact_output_divergence(cb: Codebook, q_w_given_uv: Channel, q_w: Pmf) -> float:
    """D(P_W^(B) || Q_W^n) in bits, enumerating every w in W^n.

    The induced output averages the per-codeword product laws uniformly
    over all (i, j, m).
    """
    if q_w_given_uv.in_names != ("U", "V"):
        raise ValueError(f"need a kernel with inputs (U, V), got {q_w_given_uv.in_names}")
    if len(q_w_given_uv.out_axes) != 1:
        raise ValueError("output kernel must have a single output axis")
    if q_w_given_uv.out_axes[0][1] != q_w.symbols:
        raise ValueError("reference pmf alphabet does not match the kernel output")
    n_w = len(q_w.symbols)
    n_cw = cb.num_u * cb.num_v * cb.num_messages
    ops = n_w ** cb.n * n_cw
    if ops > _MAX_ENUM_OPS:
        raise ValueError(f"enumeration needs ~{ops} operations; guard is {_MAX_ENUM_OPS}")

    u = np.broadcast_to(cb.u_words[:, None, None, :], cb.v_words.shape).reshape(-1, cb.n)
    v = cb.v_words.reshape(-1, cb.n)
    rows = q_w_given_uv.kernel[u, v]  # (Ncw, n, |W|)
    induced = _product_chain(rows).mean(axis=0)
    reference = _product_chain(q_w.probs[None, None, :].repeat(cb.n, axis=1))[0]

    mask = induced > ZERO_MASS
    if np.any(reference[mask] <= ZERO_MASS):
        return math.inf
    div = float(np.sum(induced[mask] * np.log2(induced[mask] / reference[mask])))
    return max(0.0, div)


def _encoder_tables(
    model: SdWtcModel, policy: InputPolicy, cb: Codebook
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Enumerate all state sequences and the exact per-(m,i,j) likelihoods.

    Returns (s_seqs, ln_ws, loglik, p_hat) with loglik and p_hat of shape
    (M, N1, N2, Ns); p_hat rows with no support fall back to uniform so the
    induced joint stays normalized.
    """
    joint = assemble_joint(model, policy)
    if cb.u_symbols != joint.alphabet("U") or cb.v_symbols != joint.alphabet("V"):
        raise ValueError("codebook alphabets do not match the policy")
    q_s_given_uv = channel_from_joint(joint, ("U", "V"), ("S",))
    n_s = len(model.s_symbols)
    num_seqs = n_s ** cb.n
    ops = cb.num_messages * cb.num_u * cb.num_v * num_seqs * cb.n
    if ops > _MAX_ENUM_OPS:
        raise ValueError(f"enumeration needs ~{ops} operations; guard is {_MAX_ENUM_OPS}")

    s_seqs = _all_sequences(n_s, cb.n)
    with np.errstate(divide="ignore"):
        ln_ws = np.log(model.state_pmf.probs)[s_seqs].sum(axis=1)
        log_k = np.log(q_s_given_uv.kernel)

    t_grid = np.broadcast_to(np.arange(cb.n), s_seqs.shape)
    loglik = np.empty((cb.num_messages, cb.num_u, cb.num_v, num_seqs))
    for m in range(cb.num_messages):
        table = log_k[cb.u_words[:, None, :], cb.v_words[:, :, m, :]]  # (N1,N2,n,|S|)
        gathered = table[:, :, t_grid, s_seqs]  # (N1, N2, Ns, n)
        loglik[m] = gathered.sum(axis=-1)

    top = loglik.max(axis=(1, 2), keepdims=True)
    safe_top = np.where(np.isneginf(top), 0.0, top)
    w = np.exp(loglik - safe_top)
    norm = w.sum(axis=(1, 2), keepdims=True)
    p_hat = np.where(norm > 0.0, w / np.where(norm > 0.0, norm, 1.0), 1.0 / (cb.num_u * cb.num_v))
    return s_seqs, ln_ws, loglik, p_hat


@dataclass(frozen=True)
class InducedVsIdealized:
    """Exact joints over (m, i, j, s-sequence) and their distance.

    induced carries P_M(m) W_S^n(s) P_hat(i,j | m,s); idealized carries
    P_M(m) / (N1 N2) * Q^n_{S|U,V}(s | u(i), v(i,j,m)); per_message holds
    the conditional total variation given each m, and total_variation
    averages them under the uniform message law.
    """

    induced: np.ndarray
    idealized: np.ndarray
    per_message: tuple[float, ...]
    total_variation: float

    def tv_under(self, p_m: Sequence[float]) -> float:
        """Total variation when the message is drawn from p_m."""
        weights = np.asarray(p_m, dtype=float)
        if weights.shape != (len(self.per_message),) or abs(weights.sum() - 1.0) > 1e-9:
            raise ValueError("p_m must be a distribution over the message set")
        return float(weights @ np.array(self.per_message))


def approximation_gap(model: SdWtcModel, policy: InputPolicy, cb: Codebook) -> InducedVsIdealized:
    """Exact TV between the scheme-induced joint and its idealized stand-in."""
    s_seqs, ln_ws, loglik, p_hat = _encoder_tables(model, policy, cb)
    ws = np.exp(ln_ws)  # (Ns,)
    m_count = cb.num_messages
    pairs = cb.num_u * cb.num_v

    induced = (p_hat * ws[None, None, None, :]) / m_count
    idealized = np.exp(loglik) / (pairs * m_count)
    per_message = tuple(
        float(0.5 * np.abs(induced[m] - idealized[m]).sum() * m_count) for m in range(m_count)
    )
    total = float(sum(per_message) / m_count)
    return InducedVsIdealized(
        induced=induced,
        idealized=idealized,
        per_message=per_message,
        total_variation=total,
    )


def exact_message_channel(model: SdWtcModel, policy: InputPolicy, cb: Codebook) -> Channel:
    """The exact channel from the message to the eavesdropper's sequence.

    P(z^n | m) = sum_s W_S^n(s) sum_{i,j} P_hat(i,j|m,s) prod_t K(z_t | ...),
    where K marginalizes the input sampling step: K(z | u,v,s) =
    sum_x Q_{X|U,V,S}(x|u,v,s) W_Z(z|x,s).
    """
    s_seqs, ln_ws, _, p_hat = _encoder_tables(model, policy, cb)
    joint = assemble_joint(model, policy)
    q_x_given_uvs = channel_from_joint(joint, ("U", "V", "S"), ("X",))
    w_z = model.channel.kernel.sum(axis=2)  # (|X|, |S|, |Z|)
    k_z = np.einsum("uvsx,xsz->uvsz", q_x_given_uvs.kernel, w_z)

    n_z = len(model.z_symbols)
    num_seqs = s_seqs.shape[0]
    chains = cb.num_u * cb.num_v * num_seqs
    ops = cb.num_messages * chains * n_z ** cb.n
    if ops > _MAX_ENUM_OPS:
        raise ValueError(f"enumeration needs ~{ops} operations; guard is {_MAX_ENUM_OPS}")

    ws = np.exp(ln_ws)
    kernel = np.empty((cb.num_messages, n_z ** cb.n))
    for m in range(cb.num_messages):
        rows = k_z[
            cb.u_words[:, None, None, :],
            cb.v_words[:, :, m, :][:, :, None, :],
            s_seqs[None, None, :, :],
        ]  # (N1, N2, Ns, n, |Z|)
        chain = _product_chain(rows.reshape(chains, cb.n, n_z))
        weights = (p_hat[m] * ws[None, None, :]).reshape(chains)
        kernel[m] = weights @ chain

    z_seqs = tuple(iter_product(model.z_symbols, repeat=cb.n))
    return Channel(
        (("M", tuple(range(cb.num_messages))),),
        (("Zn", z_seqs),),
        kernel,
    )


@dataclass(frozen=True)
class CapacityResult:
    """Capacity iteration output with the standard sandwich bounds."""

    bits: float
    lower: float
    upper: float
    iterations: int


def leakage_capacity(induced_channel: Channel) -> CapacityResult:
    """max over P_M of I(M; Z-sequence), by alternating maximization.

    Iterates until the standard upper/lower capacity bounds agree to 1e-9
    bits; raises after 10^4 iterations with the residual gap.
    """
    k = induced_channel.kernel.reshape(
        int(np.prod(induced_channel.in_shape)), int(np.prod(induced_channel.out_shape))
    )
    rows, _ = k.shape
    p = np.full(rows, 1.0 / rows)
    support = k > ZERO_MASS
    with np.errstate(divide="ignore"):
        log_k = np.where(support, np.log2(np.where(support, k, 1.0)), 0.0)

    gap = math.inf
    for it in range(1, 10_001):
        q = p @ k
        with np.errstate(divide="ignore"):
            log_q = np.where(q > ZERO_MASS, np.log2(np.where(q > ZERO_MASS, q, 1.0)), 0.0)
        d = np.where(support, k * (log_k - log_q[None, :]), 0.0).sum(axis=1)
        lower = float(p @ d)
        upper = float(d.max())
        gap = upper - lower
        if gap <= 1e-9:
            return CapacityResult(bits=lower, lower=lower, upper=upper, iterations=it)
        p = p * np.exp2(d - d.max())
        p /= p.sum()
    raise RuntimeError(f"capacity iteration did not converge; residual gap {gap!r} bits")


# ---------------------------------------------------------------------------
# Monte Carlo experiments


@dataclass(frozen=True)
class TrialRecord:
    message: int
    chosen: tuple[int, int]
    state: tuple
    channel_input: tuple
    received: tuple
    eavesdropped: tuple
    decoded: tuple[int, int, int] | str


@dataclass(frozen=True)
class ReliabilityResult:
    """Per-message and pooled decoding-error estimates."""

    n: int
    trials: int
    num_messages: int
    message_trials: tuple[int, ...]
    message_errors: tuple[int, ...]
    erasures: int
    encoder_failures: int
    records: tuple[TrialRecord, ...] | None = None

    @property
    def average_error_rate(self) -> float:
        return sum(self.message_errors) / self.trials

    @property
    def max_error_rate(self) -> float:
        return max(
            e / t for e, t in zip(self.message_errors, self.message_trials) if t > 0
        )

    @property
    def average_interval(self) -> tuple[float, float]:
        return wilson_interval(sum(self.message_errors), self.trials)

    def message_intervals(self) -> tuple[tuple[float, float], ...]:
        return tuple(
            wilson_interval(e, t) for e, t in zip(self.message_errors, self.message_trials)
        )


def run_reliability_experiment(
    model: SdWtcModel,
    policy: InputPolicy,
    n: int,
    rates: CodeRates | tuple[float, float, float],
    eps: float = DEFAULT_EPS,
    trials: int = 200,
    seed: int = 0,
    keep_records: bool = False,
) -> ReliabilityResult:
    """Monte Carlo decoding-error estimate of the layered scheme.

    Each trial draws a fresh codebook, state sequence, and channel noise
    from generators derived off (seed, trial); messages cycle through the
    message set so per-message estimates stay balanced.  A decode counts
    as an error when the decoded message differs from the sent one
    (erasures included); encoder failures are folded in as errors.
    """
    r1, r2, r = rates
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials!r}")
    joint = assemble_joint(model, policy)
    q_u = Pmf(joint.alphabet("U"), _marginal_mass(joint, ("U",)))
    q_v_given_u = channel_from_joint(joint, ("U",), ("V",))
    q_s_given_uv = channel_from_joint(joint, ("U", "V"), ("S",))
    q_x_given_uvs = channel_from_joint(joint, ("U", "V", "S"), ("X",))
    q_uvy = marginalize(joint, ("U", "V", "Y"))

    num_messages = index_count(n, r)
    msg_trials = [0] * num_messages
    msg_errors = [0] * num_messages
    erasures = 0
    encoder_failures = 0
    records: list[TrialRecord] = []

    x_lookup = {sym: k for k, sym in enumerate(model.x_symbols)}
    yz_rows = model.channel.kernel.reshape(
        len(model.x_symbols), len(model.s_symbols), -1
    )
    n_z = len(model.z_symbols)
    seeds = derive_seeds(seed, 3 * trials)
    for t in range(trials):
        cb_seed, enc_seed, noise_seed = seeds[3 * t : 3 * t + 3]
        cb = sample_codebook(q_u, q_v_given_u, n, r1, r2, r, cb_seed)
        noise = np.random.default_rng(noise_seed)
        m = t % num_messages
        msg_trials[m] += 1

        s_idx = noise.choice(len(model.s_symbols), size=n, p=model.state_pmf.probs)
        s = tuple(model.s_symbols[k] for k in s_idx)
        try:
            i, j, x = likelihood_encode(m, s, cb, q_s_given_uv, q_x_given_uvs, enc_seed)
        except EncoderFailure:
            encoder_failures += 1
            msg_errors[m] += 1
            continue

        x_idx = np.array([x_lookup[sym] for sym in x])
        yz = _inverse_cdf(yz_rows[x_idx, s_idx], noise.random(n))
        y_idx, z_idx = yz // n_z, yz % n_z
        y = tuple(model.y_symbols[k] for k in y_idx)
        z = tuple(model.z_symbols[k] for k in z_idx)

        decoded = typicality_decode(y, cb, q_uvy, eps)
        if decoded == ERASURE:
            erasures += 1
            msg_errors[m] += 1
        elif decoded[2] != m:
            msg_errors[m] += 1
        if keep_records:
            records.append(TrialRecord(m, (i, j), s, x, y, z, decoded))

    return ReliabilityResult(
        n=n,
        trials=trials,
        num_messages=num_messages,
        message_trials=tuple(msg_trials),
        message_errors=tuple(msg_errors),
        erasures=erasures,
        encoder_failures=encoder_failures,
        records=tuple(records) if keep_records else None,
    )


@dataclass(frozen=True)
class BinningResult:
    """Outcome of the binned CSI + one-time-pad protocol."""

    n: int
    trials: int
    num_bins: int
    num_keys: int
    num_messages: int
    errors: int
    csi_failures: int
    x_decode_failures: int
    key_decode_failures: int
    key_tv_from_uniform: float

    @property
    def error_rate(self) -> float:
        return self.errors / self.trials

    @property
    def error_interval(self) -> tuple[float, float]:
        return wilson_interval(self.errors, self.trials)


def binning_otp_protocol(
    rln_example: RlnModel,
    n: int,
    r_a: float,
    r_bin: float,
    r: float,
    trials: int = 200,
    seed: int = 0,
    eps: float = DEFAULT_EPS,
) -> BinningResult:
    """Monte Carlo run of the binned-CSI one-time-pad protocol.

    Per trial: draw 2^{nR_A} description words i.i.d. from the state law,
    split into 2^{nR_bin} bins; pick the first word jointly typical with
    the realized state; pad the message with the in-bin key; send the
    (pad, bin) x-codeword over the main channel; the receiver decodes the
    x-codeword by joint typicality with y, recovers the key from its side
    information s1, and unpads.  Failures at any stage count as errors.
    The reported key TV measures how far the selected keys are from
    uniform — the pad leaks nothing exactly when the key is uniform.
    """
    if len(rln_example.s2_symbols) != 1:
        raise ValueError("protocol needs a constant S2 (eavesdropper side information)")
    if r < 0.0 or r_bin < 0.0 or r_a < 0.0:
        raise ValueError("rates must be nonnegative")
    if r > r_a - r_bin + 1e-12:
        raise ValueError(
            f"message rate {r} exceeds the key rate {r_a} - {r_bin}; pad impossible"
        )
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials!r}")

    num_bins = index_count(n, r_bin)
    num_keys = index_count(n, r_a - r_bin)
    num_messages = index_count(n, r)
    num_x = num_messages * num_bins
    if num_bins * num_keys + num_x > _MAX_CODEWORDS:
        raise ValueError("codebooks exceed the size guard")

    ws = rln_example.state_pmf.probs
    n_s = len(rln_example.s_symbols)
    n_x = len(rln_example.x_symbols)
    n_s1 = len(rln_example.s1_symbols)
    n_s2 = len(rln_example.s2_symbols)
    n_y = len(rln_example.y_symbols)
    n_z = len(rln_example.z_symbols)

    # A = S, X uniform: the typicality targets collapse to these joints.
    p_sa = (np.eye(n_s) * ws[:, None]).ravel()  # (s, a) combined codes s*n_s + a
    w_s1 = rln_example.state_channel.kernel.sum(axis=2)  # (|S|, |S1|)
    p_as1 = (ws[:, None] * w_s1).ravel()  # (a, s1)
    p_xy = (rln_example.main_channel.kernel.sum(axis=2) / n_x).ravel()  # (x, y)

    yz_rows = rln_example.main_channel.kernel.reshape(n_x, -1)
    s12_rows = rln_example.state_channel.kernel.reshape(n_s, -1)

    errors = csi_failures = x_failures = key_failures = 0
    key_counts = np.zeros(num_keys, dtype=np.int64)
    key_picks = 0
    seeds = derive_seeds(seed, 2 * trials)
    for t in range(trials):
        book_rng = np.random.default_rng(seeds[2 * t])
        noise = np.random.default_rng(seeds[2 * t + 1])
        a_words = book_rng.choice(n_s, size=(num_bins, num_keys, n), p=ws)
        x_words = book_rng.integers(0, n_x, size=(num_messages, num_bins, n))

        s_idx = noise.choice(n_s, size=n, p=ws)
        sa_codes = (s_idx[None, None, :] * n_s + a_words).reshape(-1, n)
        typical = _typical_rows(sa_codes, p_sa, eps, n)
        hits = np.nonzero(typical)[0]
        if hits.size == 0:
            csi_failures += 1
            errors += 1
            continue
        b, k = divmod(int(hits[0]), num_keys)
        key_counts[k] += 1
        key_picks += 1

        m = int(noise.integers(num_messages))
        m_tilde = (m + k) % num_messages

        x_idx = x_words[m_tilde, b]
        yz = _inverse_cdf(yz_rows[x_idx], noise.random(n))
        y_idx, z_idx = yz // n_z, yz % n_z
        s12 = _inverse_cdf(s12_rows[s_idx], noise.random(n))
        s1_idx = s12 // n_s2

        xy_codes = (x_words * n_y + y_idx[None, None, :]).reshape(-1, n)
        xy_hits = np.nonzero(_typical_rows(xy_codes, p_xy, eps, n))[0]
        if xy_hits.size != 1:
            x_failures += 1
            errors += 1
            continue
        m_tilde_hat, b_hat = divmod(int(xy_hits[0]), num_bins)

        as1_codes = a_words[b_hat] * n_s1 + s1_idx[None, :]
        key_hits = np.nonzero(_typical_rows(as1_codes, p_as1, eps, n))[0]
        if key_hits.size != 1:
            key_failures += 1
            errors += 1
            continue
        m_hat = (m_tilde_hat - int(key_hits[0])) % num_messages
        if m_hat != m:
            errors += 1

    if key_picks:
        key_tv = float(0.5 * np.abs(key_counts / key_picks - 1.0 / num_keys).sum())
    else:
        key_tv = 1.0
    return BinningResult(
        n=n,
        trials=trials,
        num_bins=num_bins,
        num_keys=num_keys,
        num_messages=num_messages,
        errors=errors,
        csi_failures=csi_failures,
        x_decode_failures=x_failures,
        key_decode_failures=key_failures,
        key_tv_from_uniform=key_tv,
    )
