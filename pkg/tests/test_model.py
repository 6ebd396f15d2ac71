import numpy as np
import pytest

from ionraman.model import (
    PhysicalConfig,
    Sideband,
    SidebandMismatch,
    build_effective_h0,
    build_effective_hamiltonian,
    build_full_hamiltonian,
    build_rotation_generator,
    check_sideband,
    effective_params,
    lamb_dicke_parameter,
    transformation_error,
    tune_detuning,
)
from ionraman.operators import SystemSpace, commutator, dagger, is_antihermitian, is_hermitian, is_unitary, matrix_exp


def _cfg(**kw):
    base = dict(nu=1.0, delta_a=100.0, delta_b=101.0, g_a=2.0, g_b=3.0, gamma_a=0.5, gamma_b=0.25, fock_dim=6)
    base.update(kw)
    return PhysicalConfig(**base)


def test_effective_params_formulas():
    cfg = _cfg(g_b=3.0 + 1.0j)
    ep = effective_params(cfg)
    da, db, ga, gb = 100.0, 101.0, 2.0, 3.0 + 1.0j
    assert ep.delta == pytest.approx(da - db + abs(ga) ** 2 / da - abs(gb) ** 2 / db)
    c = 0.5 * (1 / da + 1 / db) * ga * np.conj(gb)
    assert ep.coupling == pytest.approx(c)
    assert ep.omega == pytest.approx(2 * abs(c))
    assert ep.eps_a == pytest.approx(ga / da)
    assert ep.eps_b == pytest.approx(gb / db)
    assert ep.eta == pytest.approx(0.202)


@pytest.mark.parametrize(
    "kw, exc",
    [
        (dict(delta_a=0.0), ZeroDivisionError),
        (dict(nu=0.0), ValueError),
        (dict(gamma_a=-1.0), ValueError),
        (dict(g_a=30.0), ValueError),
    ],
)
def test_config_validation(kw, exc):
    with pytest.raises(exc):
        _cfg(**kw)


@pytest.mark.parametrize("sb", ["red", "blue", "carrier"])
def test_tune_detuning_hits_resonance(sb):
    cfg = tune_detuning(_cfg(), sb)
    ep = check_sideband(cfg, sb, rtol=1e-10)
    assert ep.delta == pytest.approx(Sideband(sb).resonance(cfg.nu), abs=1e-10)


def test_untuned_sideband_raises():
    with pytest.raises(SidebandMismatch):
        build_effective_hamiltonian(_cfg(), SystemSpace(6, 2), "red")


def test_full_hamiltonian_hermitian_and_rotation_unitary():
    cfg = _cfg()
    sp = SystemSpace(6, 3)
    assert is_hermitian(build_full_hamiltonian(cfg, sp))
    j = build_rotation_generator(cfg, sp)
    assert is_antihermitian(j)
    assert is_unitary(matrix_exp(j))


@pytest.mark.parametrize("sb, sign", [("red", 1), ("blue", -1)])
def test_sideband_hamiltonians_conserve_excitations(sb, sign):
    cfg = tune_detuning(_cfg(), sb)
    sp = SystemSpace(6, 2)
    h = build_effective_hamiltonian(cfg, sp, sb)
    assert is_hermitian(h)
    # red trades a phonon for level 1, blue creates both
    k = sp.number() + sign * sp.s(1, 1)
    assert np.allclose(commutator(h, k), 0)


def test_carrier_and_full_exponential_hermitian():
    sp = SystemSpace(6, 2)
    for sb in ("carrier", "full_exponential"):
        cfg = tune_detuning(_cfg(), sb) if sb == "carrier" else _cfg()
        assert is_hermitian(build_effective_hamiltonian(cfg, sp, sb))
    assert is_hermitian(build_effective_h0(_cfg(), sp))


def test_red_coupling_matrix_element():
    cfg = tune_detuning(_cfg(), "red")
    ep = effective_params(cfg)
    sp = SystemSpace(6, 2)
    h = build_effective_hamiltonian(cfg, sp, "red")
    # <1, n-1| H |0, n> = -i eta c sqrt(n)
    n = 3
    assert h[sp.index(1, n - 1), sp.index(0, n)] == pytest.approx(-1j * ep.eta * ep.coupling * np.sqrt(n))


def test_transformation_error_quadratic_without_recoil():
    errs = []
    for eps in (0.04, 0.02):
        cfg = PhysicalConfig(nu=0.01, delta_a=1.0, delta_b=1.01, g_a=eps, g_b=1.01 * eps, eta_a=0.0, eta_b=0.0, fock_dim=4)
        errs.append(transformation_error(cfg, SystemSpace(4, 3)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_lamb_dicke_parameter():
    # 40Ca+ at 729 nm in a 1 MHz trap: eta ~ 0.1
    m = 40 * 1.66053906660e-27
    k = 2 * np.pi / 729e-9
    assert lamb_dicke_parameter(k, m, 2 * np.pi * 1e6) == pytest.approx(0.0973, rel=1e-2)


def test_with_returns_validated_copy():
    cfg = _cfg()
    assert cfg.with_(nu=2.0).nu == 2.0 and cfg.nu == 1.0
    with pytest.raises(ValueError):
        cfg.with_(nu=-1.0)


def test_h0_diagonal():
    cfg = _cfg()
    sp = SystemSpace(4, 2)
    h0 = build_effective_h0(cfg, sp)
    assert np.allclose(h0, np.diag(np.diag(h0)))
    assert h0[sp.index(0, 0), sp.index(0, 0)] == pytest.approx(-(100.0 + 4.0 / 100.0))
    assert np.allclose(dagger(h0), h0)
