"""Trajectory-level simulation of the two-step recovery protocol.

Measuring every bond inside A and inside its complement pins the sampled
configuration down to one relative-alignment bit tau across the cut; the
protocol guesses tau with a coin weighted by the Boltzmann weights of the two
completions.  Success of that guess is a purely classical event, so no
quantum state is ever constructed and trials scale to large lattices.
The weights are evaluated in log domain from the boundary energy of the
tau=+1 completion, which is algebraically identical to the nested
syndrome-product formula (the identity is unit-tested, see
reconstruct_e_vector).

The same ambiguity bit defines a repetition code on the boundary pairs;
repetition_iid and threshold_scan study its iid-noise analogue, where the
exact binomial tail provides the success lower bound.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from .gibbs import ChainConfig, ChainStats, chain_stats, run_chain
from .lattice import (
    Bipartition,
    LatticeSpec,
    boundary_pairs,
    check_config,
    is_contiguous,
    neighbor_table,
)
from .rng import SplitMix64, stream_seed


@dataclass
class SyndromeRecord:
    """Bond measurement outcomes for one sampled configuration.

    mu[k] is the measured Z_iZ_j on interior bond k (ordered like
    part.interior_bonds); pairs are the facing (site in A, site in Abar)
    boundary pairs; e_vector[k] = sigma_i * sigma_ibar over those pairs.
    """

    mu: np.ndarray
    pairs: np.ndarray
    e_vector: np.ndarray


@dataclass
class DecoderTrial:
    tau_true: int
    tau_guess: int
    weight_ratio: float
    success: bool


def make_syndrome_record(spec: LatticeSpec, part: Bipartition, sigma) -> SyndromeRecord:
    check_config(spec, sigma)
    ib = part.interior_bonds
    mu = (sigma[ib[:, 0]] * sigma[ib[:, 1]]).astype(np.int8)
    pairs = boundary_pairs(part)
    e = (sigma[pairs[:, 0]] * sigma[pairs[:, 1]]).astype(np.int8)
    return SyndromeRecord(mu, pairs, e)


def reconstruct_e_vector(spec: LatticeSpec, part: Bipartition, mu, tau: int) -> np.ndarray:
    """Rebuild the boundary-pair alignment from interior syndromes alone.

    Spanning-tree products of mu inside A and inside the complement determine
    every sigma_i sigma_ibar up to the single relative sign tau; this is the
    generalized nested-product relation and the independent check on the
    energy-based decoder weights.
    """
    mu = np.asarray(mu, dtype=np.int8)
    nbrs = neighbor_table(spec)
    ib = part.interior_bonds
    adj = {}
    for k in range(len(ib)):
        i, j = int(ib[k, 0]), int(ib[k, 1])
        adj.setdefault(i, []).append((j, int(mu[k])))
        adj.setdefault(j, []).append((i, int(mu[k])))

    pairs = boundary_pairs(part)
    root_a, root_abar = int(pairs[0, 0]), int(pairs[0, 1])
    sign = np.zeros(spec.n_sites, dtype=np.int8)

    def fill(root, mask):
        sign[root] = 1
        stack = [root]
        while stack:
            site = stack.pop()
            for other, m in adj.get(site, ()):  # interior bonds only
                if mask[other] == mask[root] and sign[other] == 0:
                    sign[other] = sign[site] * m
                    stack.append(other)

    fill(root_a, part.a_mask)
    fill(root_abar, part.a_mask)
    e = tau * sign[pairs[:, 0]] * sign[pairs[:, 1]]
    if np.any(e == 0):
        raise ValueError("syndrome graph does not reach every boundary pair "
                         "(region not contiguous?)")
    return e.astype(np.int8)


def completion_boundary_energy(spec: LatticeSpec, part: Bipartition, sigma) -> float:
    """Boundary energy of the tau=+1 completion of sigma's syndrome record."""
    pairs = boundary_pairs(part)
    e = sigma[pairs[:, 0]].astype(np.int64) * sigma[pairs[:, 1]]
    tau_true = int(e[0])
    return -spec.coupling * float(tau_true * e.sum())


def protocol_trial(spec: LatticeSpec, part: Bipartition, sigma,
                   rng: SplitMix64, _skip_checks: bool = False) -> DecoderTrial:
    """One weighted-coin decode of a Gibbs-sampled configuration.

    The guess tau is drawn with probability proportional to the Boltzmann
    weight of the corresponding completion; succeeds when it matches the
    sampled relative alignment.  Restricted to contiguous bipartitions.
    """
    if not _skip_checks:
        check_config(spec, sigma)
        if not is_contiguous(spec, part):
            raise ValueError("protocol_trial requires a contiguous bipartition "
                             "(both A and its complement connected)")
    pairs = boundary_pairs(part)
    e = sigma[pairs[:, 0]].astype(np.int64) * sigma[pairs[:, 1]]
    tau_true = int(e[0])
    pi_sum = int(tau_true * e.sum())
    # log(w_+/w_-) = 2 beta J sum(pi) = -2 beta H_boundary[tau=+1 completion]
    log_ratio = 2.0 * spec.beta * spec.coupling * pi_sum
    p_plus = 0.5 * (1.0 + math.tanh(0.5 * log_ratio))
    tau_guess = 1 if rng.uniform() < p_plus else -1
    try:
        ratio = math.exp(log_ratio)
    except OverflowError:
        ratio = math.inf
    return DecoderTrial(tau_true, tau_guess, ratio, tau_guess == tau_true)


@dataclass
class ProtocolResult:
    beta: float
    n_trials: int
    success_rate: float
    std_error: float
    fidelity_formula_value: float
    fidelity_formula_error: float
    stats: ChainStats


def run_protocol_trials(spec: LatticeSpec, part: Bipartition,
                        chain_cfg: ChainConfig) -> ProtocolResult:
    """Decode every measured configuration of one Gibbs chain.

    Reports the empirical success rate (binning error bar, since consecutive
    trials are correlated) next to the closed-form fidelity estimated from
    the same trajectory — the central cross-check tying the protocol to the
    tanh formula.
    """
    if not is_contiguous(spec, part):
        raise ValueError("protocol trials require a contiguous bipartition")
    pairs = boundary_pairs(part)
    p0, p1 = pairs[:, 0].copy(), pairs[:, 1].copy()
    bj = spec.beta * spec.coupling
    # the trial coin rides on its own stream, keyed off the chain seed
    trial_rng = SplitMix64(stream_seed(chain_cfg.seed, 1))

    def success_obs(sigma):
        e = sigma[p0].astype(np.int64) * sigma[p1]
        tau_true = int(e[0])
        log_ratio = 2.0 * bj * tau_true * int(e.sum())
        p_plus = 0.5 * (1.0 + math.tanh(0.5 * log_ratio))
        tau_guess = 1 if trial_rng.uniform() < p_plus else -1
        return 1.0 if tau_guess == tau_true else 0.0

    def tanh_obs(sigma):
        e_sum = int(np.sum(sigma[p0].astype(np.int64) * sigma[p1]))
        return math.tanh(-bj * e_sum)

    st_succ, st_tanh = run_chain(spec, chain_cfg, [success_obs, tanh_obs])
    return ProtocolResult(
        beta=spec.beta, n_trials=len(st_succ.samples),
        success_rate=st_succ.mean, std_error=st_succ.std_error,
        fidelity_formula_value=0.5 * (1.0 - st_tanh.mean),
        fidelity_formula_error=0.5 * st_tanh.std_error,
        stats=st_succ,
    )


# ---------------------------------------------------------------------------
# Repetition code under iid noise
# ---------------------------------------------------------------------------

def repetition_decode_ml(syndromes, log_odds: float, rng: SplitMix64) -> int:
    """Maximum-likelihood relative sign from adjacent-pair syndromes.

    syndromes[k] = e_k * e_{k+1} along the chain of boundary pairs; log_odds
    is the per-bit log-likelihood ratio ln[P(e_i=+1)/P(e_i=-1)] of the noise
    model (2 beta J for Boltzmann completions, ln((1-p)/p) for iid flips).
    Ties are broken by a fair coin.
    """
    s = np.asarray(syndromes, dtype=np.int64)
    if np.any(np.abs(s) != 1):
        raise ValueError("syndromes must be +-1")
    e_plus = np.concatenate([[1], np.cumprod(s)])  # completion with e_0 = +1
    score = log_odds * float(e_plus.sum())
    if score > 0:
        return 1
    if score < 0:
        return -1
    return 1 if rng.coin() else -1


@dataclass
class RepetitionResult:
    n_bits: int
    p_flip: float
    n_trials: int
    success_rate: float
    std_error: float
    lower_bound: float


def majority_lower_bound(n_bits: int, p_flip: float) -> float:
    """P(fewer than n/2 flips) — the analytic success lower bound."""
    return float(binom.cdf(math.ceil(n_bits / 2) - 1, n_bits, p_flip))


def repetition_iid(n_bits: int, p_flip: float, n_trials: int,
                   decoder: str = "majority", seed: int = 0) -> RepetitionResult:
    """Empirical success rate of the n-bit repetition code under iid flips.

    Majority vote and ML coincide for p < 1/2; the ML decoder reads the sign
    of the per-bit log odds, so it inverts the vote for p > 1/2 and tosses
    coins everywhere at p = 1/2.  Exact-tie trials are settled by fair coin.
    """
    if not 0.0 <= p_flip <= 1.0:
        raise ValueError("p_flip must be in [0, 1]")
    if decoder not in ("majority", "ml"):
        raise ValueError(f"unknown decoder {decoder!r}")
    gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    flips = gen.random((n_trials, n_bits)) < p_flip
    votes = n_bits - 2 * flips.sum(axis=1)  # sum of e_i
    if decoder == "ml" and p_flip != 0.5:
        log_odds = math.log((1.0 - p_flip) / p_flip) if p_flip > 0 else math.inf
        votes = votes * np.sign(log_odds)
    if decoder == "ml" and p_flip == 0.5:
        success = gen.random(n_trials) < 0.5
    else:
        coin = gen.random(n_trials) < 0.5
        success = (votes > 0) | ((votes == 0) & coin)
    rate = float(success.mean())
    err = math.sqrt(max(rate * (1.0 - rate), 1e-300) / n_trials)
    return RepetitionResult(n_bits, p_flip, n_trials, rate, err,
                            majority_lower_bound(n_bits, p_flip))


def threshold_scan(n_bits_list, p_grid, n_trials: int, seed: int = 0):
    """Success-rate surface over code sizes and flip rates."""
    out = []
    for i, n_bits in enumerate(n_bits_list):
        for j, p in enumerate(p_grid):
            out.append(repetition_iid(int(n_bits), float(p), n_trials,
                                      seed=seed + 1000 * i + j))
    return out


# ---------------------------------------------------------------------------
# Boundary domain-wall statistics
# ---------------------------------------------------------------------------

@dataclass
class DomainWallResult:
    density: ChainStats
    p_half: float
    p_half_error: float


def domain_wall_density(spec: LatticeSpec, part: Bipartition,
                        chain_cfg: ChainConfig) -> DomainWallResult:
    """Fraction of frustrated crossing bonds k/|dA| over Gibbs samples.

    Also reports the empirical probability of k/|dA| >= 1/2, the event whose
    vanishing makes the recovery decoder succeed.
    """
    pairs = boundary_pairs(part)
    p0, p1 = pairs[:, 0].copy(), pairs[:, 1].copy()
    n_b = len(pairs)

    def density_obs(sigma):
        k = int(np.sum(sigma[p0].astype(np.int64) * sigma[p1] == -1))
        return k / n_b

    st = run_chain(spec, chain_cfg, [density_obs])[0]
    half = chain_stats((st.samples >= 0.5).astype(np.float64))
    return DomainWallResult(st, half.mean, half.std_error)
