import math
from dataclasses import replace

import numpy as np
import pytest

from ghzmc import oracle
from ghzmc.estimators import (
    SamplingMode,
    boundary_tanh,
    dN_dT_single_site,
    estimate_fidelity,
    estimate_negativity,
    negativity_temperature_sweep,
)
from ghzmc.gibbs import UpdateRule, make_chain_config
from ghzmc.lattice import (
    Boundary,
    LatticeSpec,
    flip_region,
    make_bipartition,
    preset_mask,
)
from conftest import arc_mask, half_part, single_site_part


def cfg_fast(seed, n=60000, rule=UpdateRule.METROPOLIS, **kw):
    return make_chain_config(rule, n_thermalization_sweeps=500,
                             n_measurement_sweeps=n, seed=seed, **kw)


def test_zero_beta_is_exactly_zero():
    spec = LatticeSpec(2, (4, 4), beta=0.0)
    est = estimate_negativity(spec, half_part(spec), cfg_fast(1, n=5000))
    assert est.value == 0.0
    assert est.std_error == 0.0


def test_two_site_chain_closed_forms():
    spec = LatticeSpec(1, (2,), Boundary.OPEN, 1.0, 1.0)
    part = make_bipartition(spec, arc_mask(2, [0]))
    neg = estimate_negativity(spec, part, cfg_fast(2, n=200000))
    # the single-bond |tanh| observable is constant, so this is exact
    assert abs(neg.value - 0.5 * math.tanh(1.0)) < 3 * neg.std_error + 1e-14
    fid = estimate_fidelity(spec, part, cfg_fast(3, n=200000))
    assert abs(fid.value - 0.5 * (1 + math.tanh(1.0) ** 2)) < 3 * fid.std_error


def test_explicit_q_mode_same_target():
    spec = LatticeSpec(1, (2,), Boundary.OPEN, 1.0, 1.0)
    part = make_bipartition(spec, arc_mask(2, [0]))
    est = estimate_negativity(spec, part, cfg_fast(4, n=200000),
                              mode=SamplingMode.EXPLICIT_Q)
    assert est.sampling_mode is SamplingMode.EXPLICIT_Q
    assert abs(est.value - 0.5 * math.tanh(1.0)) < 3 * est.std_error + 1e-14


def test_observable_even_under_forced_complement_flip():
    """DirectP and ExplicitQ measure identical numbers on matched configs."""
    spec = LatticeSpec(2, (4, 4), beta=0.6)
    part = half_part(spec)
    obs = boundary_tanh(spec, part)
    rng = np.random.default_rng(5)
    for _ in range(200):
        s = (2 * rng.integers(0, 2, size=spec.n_sites) - 1).astype(np.int8)
        flipped = flip_region(s, ~part.a_mask)
        assert abs(obs(flipped)) == abs(obs(s))
        assert obs(flipped) == -obs(s)


def test_samplewise_bound_half():
    spec = LatticeSpec(2, (4, 4), beta=1.5)
    est = estimate_negativity(spec, half_part(spec), cfg_fast(6, n=20000))
    assert est.value <= 0.5


@pytest.mark.parametrize("beta", [0.2, 0.44, 0.8])
def test_mc_matches_oracle_3x3(beta):
    spec = LatticeSpec(2, (3, 3), Boundary.PERIODIC, 1.0, beta)
    part = half_part(spec)
    neg = estimate_negativity(spec, part, cfg_fast(7, n=150000))
    assert abs(neg.value - oracle.exact_negativity(spec, part)) < 3 * neg.std_error
    fid = estimate_fidelity(spec, part, cfg_fast(8, n=150000))
    assert abs(fid.value - oracle.exact_fidelity(spec, part)) < 3 * fid.std_error


def test_mc_matches_oracle_ring_with_wolff():
    spec = LatticeSpec(1, (6,), Boundary.PERIODIC, 1.0, 0.7)
    part = make_bipartition(spec, arc_mask(6, [0, 1, 2]))
    est = estimate_negativity(
        spec, part, cfg_fast(9, n=120000, rule=UpdateRule.WOLFF, measure_every=3)
    )
    assert abs(est.value - oracle.exact_negativity(spec, part)) < 3 * est.std_error


def test_sweep_monotone_and_bounded():
    """Single-site negativity decreases with T; oracle confirms on 3x3."""
    temps = [1.5, 2.5, 4.0]
    spec3 = LatticeSpec(2, (3, 3), Boundary.PERIODIC, 1.0, 1.0)
    oracle_curve = [
        oracle.exact_negativity(replace(spec3, beta=1.0 / t), single_site_part(spec3))
        for t in temps
    ]
    assert oracle_curve[0] > oracle_curve[1] > oracle_curve[2]

    spec16 = LatticeSpec(2, (16, 16), beta=1.0)
    ests = negativity_temperature_sweep(spec16, "single-site", temps,
                                        cfg_fast(10, n=50000))
    assert all(e.value <= 0.5 + 3 * e.std_error for e in ests)
    assert ests[0].value > ests[1].value > ests[2].value


def test_sweep_deterministic_rerun():
    spec = LatticeSpec(2, (4, 4), beta=1.0)
    a = negativity_temperature_sweep(spec, "half-cylinder", [2.0, 3.0],
                                     cfg_fast(11, n=4000))
    b = negativity_temperature_sweep(spec, "half-cylinder", [2.0, 3.0],
                                     cfg_fast(11, n=4000))
    assert [e.value for e in a] == [e.value for e in b]
    assert [e.std_error for e in a] == [e.std_error for e in b]


def test_sweep_input_validation():
    spec = LatticeSpec(2, (4, 4), beta=1.0)
    cfg = cfg_fast(12, n=2000)
    with pytest.raises(ValueError, match="sorted"):
        negativity_temperature_sweep(spec, "single-site", [3.0, 2.0], cfg)
    with pytest.raises(ValueError, match="positive"):
        negativity_temperature_sweep(spec, "single-site", [-1.0, 2.0], cfg)
    with pytest.raises(ValueError, match="h must be > 0"):
        dN_dT_single_site(spec, [2.0], cfg, h=0.0)


def test_dndt_matches_oracle_3x3():
    spec = LatticeSpec(2, (3, 3), Boundary.PERIODIC, 1.0, 1.0)
    h, t = 0.05, 2.5
    part = single_site_part(spec)
    exact = (
        oracle.exact_negativity(replace(spec, beta=1.0 / (t + h)), part)
        - oracle.exact_negativity(replace(spec, beta=1.0 / (t - h)), part)
    ) / (2 * h)
    point = dN_dT_single_site(spec, [t], cfg_fast(13, n=200000), h=h)[0]
    assert abs(point.value - exact) < 3 * point.std_error
    assert not point.below_resolution


def test_dndt_oracle_sign_and_decay():
    """Exact 3x3 curve: negative slope above T_c, vanishing as T grows."""
    spec = LatticeSpec(2, (3, 3), Boundary.PERIODIC, 1.0, 1.0)
    part = single_site_part(spec)
    h = 0.05

    def exact_deriv(t):
        return (
            oracle.exact_negativity(replace(spec, beta=1.0 / (t + h)), part)
            - oracle.exact_negativity(replace(spec, beta=1.0 / (t - h)), part)
        ) / (2 * h)

    derivs = [exact_deriv(t) for t in (2.5, 3.0, 4.0, 8.0, 20.0)]
    assert all(d < 0 for d in derivs)
    assert abs(derivs[-1]) < abs(derivs[0]) / 10


def test_dndt_richardson_fields():
    spec = LatticeSpec(2, (3, 3), Boundary.PERIODIC, 1.0, 1.0)
    point = dN_dT_single_site(spec, [3.0], cfg_fast(14, n=40000), h=0.1,
                              richardson=True)[0]
    assert math.isfinite(point.value_half_step)
    assert math.isfinite(point.richardson)
    assert abs(point.richardson - point.value) < 5 * point.std_error + 0.05


def test_fidelity_negativity_consistency():
    """|tanh| >= -tanh samplewise, so N >= F - 1/2 up to noise."""
    for spec, mask in (
        (LatticeSpec(2, (4, 4), beta=0.44), preset_mask(LatticeSpec(2, (4, 4)), "half-cylinder")),
        (LatticeSpec(1, (6,), Boundary.PERIODIC, 1.0, 0.2), arc_mask(6, [0, 1])),
    ):
        part = make_bipartition(spec, mask)
        neg = estimate_negativity(spec, part, cfg_fast(15, n=40000))
        fid = estimate_fidelity(spec, part, cfg_fast(16, n=40000))
        combined = math.hypot(neg.std_error, fid.std_error)
        assert neg.value >= fid.value - 0.5 - 3 * combined


def test_estimator_rejects_negative_beta():
    spec = LatticeSpec(2, (4, 4), beta=0.5)
    part = half_part(spec)
    bad = replace(spec)
    object.__setattr__(bad, "beta", -0.1)  # bypass spec validation on purpose
    with pytest.raises(ValueError):
        estimate_negativity(bad, part, cfg_fast(17, n=2000))
