import numpy as np
import pytest
from scipy.stats import poisson

from ionraman.observables import (
    coherence_01,
    coherent_state,
    fock_state,
    mean_phonon,
    min_eigenvalue,
    p_down,
    p_up,
    phonon_distribution,
    pure,
    purity,
)
from ionraman.operators import SystemSpace, basis_ket


def test_fock_state():
    sp = SystemSpace(6, 2)
    rho = fock_state(sp, 3, level=1)
    assert np.trace(rho) == pytest.approx(1)
    assert p_up(rho, sp) == pytest.approx(1) and p_down(rho, sp) == pytest.approx(0)
    assert mean_phonon(rho, sp) == pytest.approx(3)
    assert purity(rho) == pytest.approx(1)


def test_coherent_state_statistics():
    sp = SystemSpace(25, 2)
    rho = coherent_state(sp, np.sqrt(3.0))
    dist = phonon_distribution(rho, sp)
    assert np.allclose(dist, poisson.pmf(np.arange(25), 3.0), atol=1e-10)
    assert mean_phonon(rho, sp) == pytest.approx(3.0, abs=1e-8)
    assert min_eigenvalue(rho) > -1e-12


def test_coherent_state_truncation_guard():
    with pytest.raises(ValueError):
        coherent_state(SystemSpace(8, 2), 2.0)


def test_coherence_of_superposition():
    sp = SystemSpace(4, 2)
    ket = (basis_ket(sp, 0, 1) + 1j * basis_ket(sp, 1, 1)) / np.sqrt(2)
    rho = pure(ket)
    c = coherence_01(rho, sp)
    assert abs(c) == pytest.approx(0.5)
    assert p_down(rho, sp) + p_up(rho, sp) == pytest.approx(1)


def test_three_level_population():
    sp = SystemSpace(3, 3)
    rho = fock_state(sp, 0, level=2)
    assert p_down(rho, sp) == 0 and p_up(rho, sp) == 0


def test_level_completeness_and_coherence_conjugate():
    from ionraman.observables import coherence_10

    rng = np.random.default_rng(0)
    sp = SystemSpace(5, 2)
    for _ in range(10):
        m = rng.normal(size=(sp.dim, sp.dim)) + 1j * rng.normal(size=(sp.dim, sp.dim))
        rho = m @ m.conj().T
        assert p_down(rho, sp) + p_up(rho, sp) == pytest.approx(np.trace(rho).real, abs=1e-12)
        assert coherence_01(rho, sp) == pytest.approx(np.conj(coherence_10(rho, sp)), abs=1e-12)


@pytest.mark.parametrize("nbar", [0.5, 3.0, 8.0])
def test_coherent_truncation_error_is_tail_mass(nbar):
    # renormalized truncation: the Kolmogorov distance is set by the discarded Poisson tail
    n = int(np.ceil(nbar + 7 * np.sqrt(nbar))) + 1
    sp = SystemSpace(n, 2)
    dist = phonon_distribution(coherent_state(sp, np.sqrt(nbar)), sp)
    ks = np.max(np.abs(np.cumsum(dist) - poisson.cdf(np.arange(n), nbar)))
    assert ks <= poisson.sf(n - 1, nbar) * (1 + 1e-6) + 1e-15


def test_coherent_kolmogorov_distance_at_collapse_truncation():
    sp = SystemSpace(25, 2)
    dist = phonon_distribution(coherent_state(sp, np.sqrt(3.0)), sp)
    assert np.max(np.abs(np.cumsum(dist) - poisson.cdf(np.arange(25), 3.0))) < 1e-8
