import math

import numpy as np
import pytest

from kerrcat.fock import coherent_state, fidelity, partial_trace, tensor, trace_distance
from kerrcat.measurements import duan_s, p_two_clicks_analytic
from kerrcat.protocols import (
    EcsSpec,
    MixedCatSpec,
    cat_state,
    conditional_cat,
    ecs_from_cat,
    generate_entangled_state,
    mixed_ecs_density,
    outcome_fidelities,
    rotation_coincidence,
    split_sum_state,
)


def test_cat_state_parity():
    even, odd = cat_state(1.2), cat_state(1.2, -1)
    assert np.allclose(even.amplitudes[1::2], 0)
    assert np.allclose(odd.amplitudes[0::2], 0)
    with pytest.raises(ValueError):
        cat_state(1.0, 0)


def test_zero_phase_gives_product():
    psi = generate_entangled_state(0.8, 1.1, 0.0)
    ref = tensor(coherent_state(0.8, psi.space.mode_dims[0]), coherent_state(1.1, psi.space.mode_dims[1]))
    assert fidelity(psi, ref) == pytest.approx(1.0, abs=1e-12)


def test_pi_phase_matches_sector_oracle():
    # n_a n_b parity: |n_a> picks up (-1)^n_a on |gamma>, i.e. |gamma> -> |-gamma> for odd n_a
    a, g = 1.3, 0.9
    psi = generate_entangled_state(a, g, math.pi)
    assert fidelity(psi, split_sum_state(a, g, psi.space.mode_dims)) == pytest.approx(1.0, abs=1e-12)


def test_marginals_invariant_under_kerr_phase():
    for phi in (0.3, 1.7, math.pi):
        psi = generate_entangled_state(1.0, 0.7, phi)
        pa = np.diag(partial_trace(psi, [0]).matrix).real
        pb = np.diag(partial_trace(psi, [1]).matrix).real
        ref = generate_entangled_state(1.0, 0.7, 0.0)
        assert np.allclose(pa, np.diag(partial_trace(ref, [0]).matrix).real, atol=1e-14)
        assert np.allclose(pb, np.diag(partial_trace(ref, [1]).matrix).real, atol=1e-14)


def test_conditional_cat_ideal_detectors():
    outs = conditional_cat(1.5, 1.0)
    probs = {o.label: o.probability for o in outs}
    assert sum(probs.values()) == pytest.approx(1.0, abs=1e-10)
    assert probs["inconclusive"] < 0.02
    assert probs["inconclusive"] == pytest.approx(math.exp(-2 * 1.5 ** 2), rel=1e-6)
    fids = outcome_fidelities(outs, 1.0)
    assert fids["even"] == pytest.approx(1.0, abs=1e-9)
    assert fids["odd"] == pytest.approx(1.0, abs=1e-9)
    even = next(o for o in outs if o.label == "even").conditional_state
    odd = next(o for o in outs if o.label == "odd").conditional_state
    assert abs(np.trace(even.matrix @ odd.matrix)) < 1e-12


def test_conditional_cat_alpha_one():
    probs = {o.label: o.probability for o in conditional_cat(1.0, 1.0)}
    assert probs["inconclusive"] == pytest.approx(math.exp(-2), rel=1e-6)


def test_conditional_cat_lossy_detectors():
    outs = conditional_cat(1.5, 1.0, eta=0.7)
    assert sum(o.probability for o in outs) == pytest.approx(1.0, abs=1e-10)
    fids = outcome_fidelities(outs, 1.0)
    assert fids["even"] == pytest.approx(1.0, abs=1e-9)
    ideal = {o.label: o.probability for o in conditional_cat(1.5, 1.0)}
    lossy = {o.label: o.probability for o in outs}
    assert lossy["inconclusive"] > ideal["inconclusive"]
    two = conditional_cat(1.5, 1.0, eta=0.7, exponent=2)
    assert sum(o.probability for o in two) == pytest.approx(1.0, abs=1e-10)


def test_ecs_from_pure_cat_is_ecs():
    for g in (0.6, 1.5):
        rho = ecs_from_cat(cat_state(g))
        ecs = EcsSpec(g).state(rho.space.mode_dims)
        assert fidelity(ecs, rho) == pytest.approx(1.0, abs=1e-10)


def test_ecs_from_odd_cat():
    g = 1.0
    rho = ecs_from_cat(cat_state(g, -1))
    d = rho.space.mode_dims
    b = g / math.sqrt(2)
    v = (np.kron(coherent_state(b, d[0]).amplitudes, coherent_state(-b, d[1]).amplitudes)
         - np.kron(coherent_state(-b, d[0]).amplitudes, coherent_state(b, d[1]).amplitudes))
    v /= np.linalg.norm(v)
    assert np.vdot(v, rho.matrix @ v).real == pytest.approx(1.0, abs=1e-10)


def test_mixed_cat_density():
    with pytest.raises(ValueError):
        MixedCatSpec(1.0, 1.5)
    rho = MixedCatSpec(1.0, 0.4).density()
    assert rho.trace.real == pytest.approx(1.0)
    rho1 = MixedCatSpec(1.2, 1.0).density()
    pure = cat_state(1.2, dim=rho1.space.dim)
    assert trace_distance(rho1, pure) < 1e-10


def test_mixed_ecs_oracle_and_separable_limit():
    for c in (0.0, 0.5, 1.0):
        rho = ecs_from_cat(MixedCatSpec(1.0, c))
        assert trace_distance(rho, mixed_ecs_density(1.0, c, rho.space.mode_dims)) < 1e-12
    assert duan_s(ecs_from_cat(MixedCatSpec(1.0, 0.0))).total_variance >= 2.0 - 1e-10
    rho = ecs_from_cat(MixedCatSpec(1.0, 1.0))
    assert trace_distance(rho, EcsSpec(1.0).state(rho.space.mode_dims)) < 1e-10


def test_printed_norm_identity():
    g = 0.9
    e = math.exp(-2 * g * g)
    for alpha in (0.0, 1.0, math.pi):
        psi = EcsSpec(g).state(alpha=alpha, printed_norm=True)
        assert psi.norm ** 2 == pytest.approx((1 + e * math.cos(alpha)) / (1 + e), abs=1e-12)


def test_rotation_coincidence_dark_detectors():
    assert rotation_coincidence(2.0, 0.5, 0.999, 0.0).numeric == 0.0


def test_rotation_coincidence_ideal_matches_cosine_family():
    g, eta = 1.5, 0.8
    alphas = np.linspace(0, 2 * math.pi, 7)
    values = [p_two_clicks_analytic(g, eta, a) for a in alphas]
    # closed form is an offset cosine in alpha
    a0, a1 = (max(values) + min(values)) / 2, (max(values) - min(values)) / 2
    assert np.allclose(values, a0 + a1 * np.cos(alphas), atol=1e-14)
    r = rotation_coincidence(g, 0.0, 1.0, eta)
    assert r.theta == 0.0
    assert r.numeric == pytest.approx(r.analytic, abs=1e-12)


def test_rotation_angle_bookkeeping():
    for t in (0.99, 0.999):
        r = rotation_coincidence(2.0, 0.5, t, 0.9)
        assert r.theta == pytest.approx(r.ancilla_amplitude * math.sqrt(1 - t))
        assert 0.0 <= r.numeric <= 1.0
    with pytest.raises(ValueError):
        rotation_coincidence(2.0, 0.5, 0.99, 1.5)
