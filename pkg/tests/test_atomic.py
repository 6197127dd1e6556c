import math

import numpy as np
import pytest

from kerrcat.atomic import (
    FourLevelParams,
    MediumParams,
    SixLevelParams,
    TrackingError,
    build_h_pk,
    build_h_si,
    chi3_si,
    figure_of_merit,
    group_velocity,
    kerr_rate_chi,
    lambda_pk_approx,
    lambda_pk_full,
    lambda_si,
    phase_shift,
    polarizability_a,
    pr_yso_parameters,
    rwa_averaged_eigenvalue,
    tracked_eigenvalue,
)

TWO_PI = 2 * math.pi
OD, DL, LW = TWO_PI * 1e6, TWO_PI * 1e6, TWO_PI * 5e4


def four(ratio):
    w = OD / ratio
    return FourLevelParams(w, w, OD, DL, LW, LW)


def six(ratio, **kw):
    w = OD / ratio
    return SixLevelParams(**{**dict(omega_a=w, omega_b=w, omega_d=OD, delta=DL, gamma=LW), **kw})


def medium(**kw):
    base = dict(density=1e21, d24=1e-32, d26=1e-32, omega_a=3e15, omega_b=3e15,
                length=1e-3, area=7.85e-9)
    return MediumParams(**{**base, **kw})


def test_decoupled_ground_state_has_zero_energy():
    h = build_h_si(FourLevelParams(0, 0, OD, DL, LW, LW)).matrix
    assert np.allclose(h[0], 0) and np.allclose(h[:, 0], 0)
    h6 = build_h_pk(six(50, omega_a=0, omega_b=0)).matrix
    e2 = np.zeros(6)
    e2[1] = 1
    assert np.allclose(h6 @ e2, 0)


def test_hamiltonians_non_hermitian_with_decay():
    assert not np.allclose(build_h_si(four(50)).matrix, build_h_si(four(50)).matrix.conj().T)
    h = build_h_pk(six(50, gamma=0.0), 0.0).matrix
    assert np.allclose(h, h.conj().T)


def test_tracking_starts_at_zero():
    r = tracked_eigenvalue(build_h_si, four(50))
    assert r.continuation_path[0] == (0.0, 0j)
    assert len(r.continuation_path) == 50
    with pytest.raises(ValueError):
        tracked_eigenvalue(build_h_si, four(50), steps=1)


def test_four_level_tracking_converges():
    errs = [abs(tracked_eigenvalue(build_h_si, four(r)).value / lambda_si(four(r)) - 1)
            for r in (50, 100, 200)]
    assert errs[0] < 0.02
    assert errs[1] < errs[0] and errs[2] < errs[1]


def test_six_level_phase_averaged_tracking_converges():
    errs = [abs(rwa_averaged_eigenvalue(six(r)).value / lambda_pk_approx(six(r)) - 1)
            for r in (50, 100, 200)]
    assert errs[0] < 0.02
    assert errs[1] < errs[0] and errs[2] < errs[1]


def test_tracking_error_on_degenerate_candidates():
    # two near-zero eigenvalues whose eigenvectors overlap equally with the start level
    v = np.array([[1, 1, 0], [1, -1, 0], [0, 0, math.sqrt(2)]]) / math.sqrt(2)
    m = v @ np.diag([0.0, 1e-14, 1.0]) @ np.linalg.inv(v)
    with pytest.raises(TrackingError):
        tracked_eigenvalue(lambda q: m, four(50))


def test_closed_form_zero_probe():
    assert lambda_pk_approx(six(50, omega_a=0)) == 0
    assert lambda_pk_full(six(50, omega_b=0)) == 0
    with pytest.raises(ZeroDivisionError):
        lambda_pk_approx(six(50, omega_d=0))


def test_full_vs_approx_first_order():
    for ratio in (20, 50, 100, 200):
        p = six(ratio)
        x = (abs(p.omega_a) ** 2 + abs(p.omega_b) ** 2) / abs(p.omega_d) ** 2
        oracle = (1j * LW - DL) / ((1 + x) * (1j * LW * (1 + x) - DL))
        assert lambda_pk_full(p) / lambda_pk_approx(p) == pytest.approx(oracle, rel=1e-12)
    errs = [abs(lambda_pk_full(six(r)) / lambda_pk_approx(six(r)) - 1) for r in (50, 100, 200)]
    assert errs[1] < 3e-4
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.01)


def test_chi3_limits():
    p = four(50)
    base = abs(chi3_si(p, medium()))
    far = abs(chi3_si(FourLevelParams(p.omega_1, p.omega_2, OD, 1e30, LW, LW), medium()))
    assert far < 1e-20 * base
    z = chi3_si(FourLevelParams(p.omega_1, p.omega_2, OD, DL, LW, 0.0), medium())
    assert z.imag == 0.0 and z.real != 0.0


def test_polarizability_limits():
    m = medium()
    assert polarizability_a(six(50, omega_b=0), m) == 0
    z = polarizability_a(six(50, delta=0.0), m)
    assert z.real == pytest.approx(0.0, abs=1e-12 * abs(z)) and z.imag > 0


def test_figure_of_merit_is_re_over_im():
    p, m = six(50, gamma=TWO_PI * 1e5), medium()
    z = polarizability_a(p, m)
    assert figure_of_merit(p) == pytest.approx(10.0)
    assert z.real / z.imag == pytest.approx(figure_of_merit(p), rel=1e-12)


def test_phase_shift_and_kerr_rate():
    m = medium()
    assert phase_shift(six(50), m) == pytest.approx(polarizability_a(six(50), m).real * 1e-3)
    assert kerr_rate_chi(six(50, delta=0.0), m).chi == 0.0
    r1, r2 = kerr_rate_chi(six(50), m), kerr_rate_chi(six(50), medium(density=2e21, area=2 * 7.85e-9))
    assert r2.chi == pytest.approx(r1.chi, rel=1e-12)
    assert kerr_rate_chi(six(50), medium(density=3e21)).chi == pytest.approx(3 * r1.chi, rel=1e-12)
    assert r1.phi == pytest.approx(r1.chi * m.tau)


def test_scale_invariance_of_eigen_ratio():
    p = four(80)
    a = tracked_eigenvalue(build_h_si, p).value / lambda_si(p)
    b = tracked_eigenvalue(build_h_si, p.scale_all(3.0)).value / lambda_si(p.scale_all(3.0))
    assert a == pytest.approx(b, rel=1e-8)


def test_pr_yso_regime():
    for lw in (1e4, 1e5):
        p, m = pr_yso_parameters(gamma=lw)
        phi = abs(kerr_rate_chi(p, m).phi)
        assert math.pi / 10 <= phi <= 10 * math.pi
        assert figure_of_merit(p) >= 10.0 - 1e-12
    p, m = pr_yso_parameters()
    vg = group_velocity(p, m)
    assert vg.ultraslow and vg.v_g == pytest.approx(vg.ratio_to_c * 299792458.0)


def test_parameter_validation():
    with pytest.raises(ValueError):
        SixLevelParams(1, 1, 1, 0, -1)
    with pytest.raises(ValueError):
        medium(length=0.0)
