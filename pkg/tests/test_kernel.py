import json
import math

import numpy as np
import pytest
from scipy import integrate

from kdvtau import kernel as kn
from kdvtau import soliton as so
from kdvtau.errors import InvalidArgumentError, KernelOverflowError

ATOM = kn.SpectralMeasure(((1.0, 2.0),))
UNIFORM = kn.SpectralMeasure((), kn.Density("uniform", {"height": 1.0}, (1.0, 2.0), 16))
EMPTY = kn.SpectralMeasure()


def test_F_examples():
    assert kn.F_eval(ATOM, 0, 0) == 2.0
    assert kn.F_eval(EMPTY, 0.3, 0.1) == 0.0
    assert abs(kn.F_eval(UNIFORM, 0, 0) - 1.0) < 1e-12


def test_F_density_against_quadrature():
    x, t = 0.7, 0.02
    ref, _ = integrate.quad(lambda k: math.exp(8 * k**3 * t - k * x), 1, 2, epsabs=1e-14)
    assert abs(kn.F_eval(UNIFORM, x, t) - ref) < 1e-13


def test_linearized_residual_small_atom():
    mu = kn.SpectralMeasure(((0.5, 1.5),))
    for x, t in ((0.0, 0.0), (1.0, 0.2), (-2.0, 0.5)):
        r = kn.linearized_residual(mu, x, t, 1e-2)
        assert abs(r) < 1e-4 * max(1.0, abs(kn.F_eval(mu, x, t)))


def test_linearized_residual_second_order():
    for mu in (ATOM, UNIFORM):
        r1 = kn.linearized_residual(mu, 0.5, 0.01, 1e-2)
        r2 = kn.linearized_residual(mu, 0.5, 0.01, 5e-3)
        assert 3.5 < r1 / r2 < 4.5


def test_linearized_residual_empty_is_zero():
    assert kn.linearized_residual(EMPTY, 0.1, 0.2) == 0.0


def test_phi_norm_examples():
    assert kn.phi_l2_norm(ATOM, 0, 0) == pytest.approx(1.0, rel=1e-15)
    xs = np.linspace(0, 5, 11)
    norms = [kn.phi_l2_norm(ATOM, x, 0.0) for x in xs]
    assert all(b < a for a, b in zip(norms, norms[1:]))


def test_phi_norm_two_atoms_brute_force():
    mu = kn.SpectralMeasure(((0.7, 1.0), (1.3, 0.5)))
    x, t = 0.4, 0.01
    phi = kn.PoppeKernel(mu, x, t)
    val, _ = integrate.dblquad(lambda b, a: float(phi(a, b)) ** 2, 0, 60, 0, 60, epsabs=1e-13, epsrel=1e-11)
    assert abs(math.sqrt(val) - kn.phi_l2_norm(mu, x, t)) < 1e-8


def test_admissibility_examples():
    rep = kn.admissibility_check(UNIFORM, 0, 0)
    assert rep.near_zero == 0.0
    assert abs(rep.tail - 2 * (math.sqrt(2) - 1)) < 1e-12
    assert not kn.admissibility_check(ATOM, 0, 0).ok
    assert kn.admissibility_check(ATOM, 0.5, 0).ok
    near = kn.SpectralMeasure(((0.5, 1.0),))
    rep = kn.admissibility_check(near, 1.0, 0.0)
    assert rep.tail == 0.0 and rep.near_zero == pytest.approx(2 * math.exp(-1.0))


def test_admissibility_reports_overflow_as_infinite():
    rep = kn.admissibility_check(ATOM, -400.0, 0.0)
    assert not rep.ok and math.isinf(rep.tail)


def test_kernel_symmetry_exact():
    phi = kn.PoppeKernel(UNIFORM, 0.3, 0.01)
    a, b = np.array([0.1, 2.0, 5.5]), np.array([3.0, 0.2, 1.1])
    assert np.array_equal(phi(a, b), phi(b, a))


def test_tau_poppe_one_soliton_closed_form():
    for x in np.linspace(0.5, 3.0, 11):
        for t in (0.0, 0.05, 0.1):
            assert abs(kn.tau_poppe(ATOM, x, t) - (1 + math.exp(8 * t - 2 * x))) < 1e-8


def test_tau_poppe_lambda_zero_and_empty():
    assert kn.tau_poppe(ATOM, 0.3, 0.0, lam=0.0) == 1.0
    assert kn.tau_poppe(EMPTY, 0.3, 0.0) == 1.0


def test_tau_poppe_two_atoms_matches_matrix():
    sd = so.ScatteringData([1.0, 0.7], [0.8, 1.5])
    mu = kn.SpectralMeasure.from_scattering(sd)
    for x in (0.5, 1.0, 2.0):
        for t in (0.0, 0.05):
            assert abs(kn.tau_poppe(mu, x, t) - so.tau_soliton(sd, x, t)) < 1e-7


def test_node_refinement_stable_on_admissible_grid():
    sd = so.ScatteringData([1.0, 0.7], [0.8, 1.5])
    mu = kn.SpectralMeasure.from_scattering(sd)
    for x in np.linspace(0.5, 3, 6):
        for t in (0.0, 0.05):
            if kn.admissibility_check(mu, x, t).ok:
                assert abs(kn.tau_poppe(mu, x, t, n=128) - kn.tau_poppe(mu, x, t, n=64)) < 1e-8


def test_tau_poppe_density_matches_cauchy_determinant(oracles):
    d = oracles["uniform_density"]
    assert abs(kn.tau_poppe(UNIFORM, d["x"], d["t"]) - d["tau_16"]) < 1e-12
    assert abs(kn.tau_poppe(UNIFORM, d["x"], d["t"]) - d["tau_continuum"]) < 1e-12


def test_admissibility_warning():
    with pytest.warns(kn.AdmissibilityWarning):
        kn.tau_poppe(ATOM, 0.0, 0.0, check=True)


def test_overflow_guard():
    with pytest.raises(KernelOverflowError):
        kn.F_eval(ATOM, -800.0, 0.0)
    with pytest.raises(KernelOverflowError):
        kn.F_eval(ATOM, 0.0, 100.0)


def test_measure_validation():
    with pytest.raises(InvalidArgumentError):
        kn.SpectralMeasure(((0.0, 1.0),))
    with pytest.raises(InvalidArgumentError):
        kn.SpectralMeasure(((1.0, -1.0),))
    with pytest.raises(InvalidArgumentError):
        kn.Density("uniform", {}, (0.0, 1.0))
    with pytest.raises(InvalidArgumentError):
        kn.Density("uniform", {"height": -1.0}, (1.0, 2.0))
    with pytest.raises(InvalidArgumentError):
        kn.Density("nope", {}, (1.0, 2.0))


def test_measure_json_round_trip():
    mu = kn.SpectralMeasure(((0.5, 1.0),), kn.Density("cauchy-window", {"gamma": 0.3}, (1.0, 2.5), 12))
    back = kn.SpectralMeasure.from_json(mu.to_json())
    assert back.to_dict() == mu.to_dict()
    assert json.loads(mu.to_json())["density"]["family"] == "cauchy-window"
    k1, w1 = mu.discretize()
    k2, w2 = back.discretize()
    assert np.array_equal(k1, k2) and np.array_equal(w1, w2)
    with pytest.raises(InvalidArgumentError):
        kn.SpectralMeasure((), kn.Density.custom(lambda k: k, (1, 2))).to_dict()


def test_from_scattering_uses_c_squared():
    mu = kn.SpectralMeasure.from_scattering(so.ScatteringData([3.0], [0.5]))
    assert mu.atoms == ((0.5, 9.0),)
