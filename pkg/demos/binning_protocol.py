"""End-to-end run of the binned-CSI one-time-pad protocol on the benchmark.

The encoder describes the state at rate R_A, bins the description codebook,
uses the in-bin index as a one-time pad, and sends (padded message, bin)
over the main channel; the receiver recovers the key from its erased state
view.  The eavesdropper sees X exactly, so secrecy rests entirely on the
pad key being uniform.
"""
import numpy as np

from sdwtc import (
    binary_entropy,
    binning_otp_protocol,
    build_rln_example,
    entropy,
    inv_binary_entropy,
)

SIGMA = 0.05
ALPHA = inv_binary_entropy(1.0 - binary_entropy(0.25))  # makes the state Bernoulli(0.25)
TRIALS = 60

ex = build_rln_example(ALPHA, SIGMA)
h_s = entropy(ex.state_pmf)
cap = 1.0 - binary_entropy(ALPHA)
RA = 1.1 * h_s                 # describe the state with 10% headroom
RBIN = RA - 0.9 * 0.95 * h_s   # keep ~85% of H(S) as key rate
R = 0.9 * (cap - RBIN)         # message rate 10% inside the main channel

print(f"benchmark: alpha = {ALPHA:.4f}, sigma = {SIGMA}, H(S) = {h_s:.4f}, main capacity = {cap:.4f}")
print(f"rates: R_A = {RA:.4f}, R_bin = {RBIN:.4f}, key = {RA - RBIN:.4f}, R = {R:.4f}\n")

# single seeds are noisy at these lengths, so show cross-seed medians
print(f"{'n':>4} {'keys':>5} {'bins':>5} {'msgs':>5} {'median err (20 seeds)':>22} {'csi/x/key fails':>16}")
for n in (6, 12):
    runs = [
        binning_otp_protocol(ex, n, RA, RBIN, R, trials=TRIALS, seed=4200 + s, eps=1.25)
        for s in range(20)
    ]
    med = float(np.median([r.error_rate for r in runs]))
    fails = (
        f"{np.median([r.csi_failures for r in runs]):.0f}"
        f"/{np.median([r.x_decode_failures for r in runs]):.0f}"
        f"/{np.median([r.key_decode_failures for r in runs]):.0f}"
    )
    res = runs[0]
    print(
        f"{n:4d} {res.num_keys:5d} {res.num_bins:5d} {res.num_messages:5d} "
        f"{med:22.3f} {fails:>16}"
    )

# a tighter typicality window makes the selected pad key nearly uniform
res = binning_otp_protocol(ex, 12, RA, RA - 0.25, 0.2, trials=200, seed=77, eps=0.4)
print(f"\npad-key law at n = 12 (eps = 0.4, {res.num_keys} keys over {res.trials - res.csi_failures} picks):")
print(f"  TV from uniform = {res.key_tv_from_uniform:.3f}")
print("\nerrors ease with blocklength, slowly: every stage (state coverage, x decode,")
print("key recovery) must succeed at once; the near-uniform pad is what keeps the")
print("eavesdropper's view message independent")
