import numpy as np
import pytest

from config import HALF, SEED, TOL
from ngme.errors import ArgumentError, CapacityError, ContractError, LayoutError
from ngme.tensor_core import (
    PAULI_X,
    PAULI_Z,
    Bipartition,
    DensityOp,
    PartyLayout,
    PureState,
    basis_index,
    bipartitions,
    computational_state,
    embed_site_op,
    expect,
    fidelity_pure,
    fidelity_sqrt,
    frac_power,
    frac_power_pair,
    herm_eig,
    kron,
    marginal,
    partial_trace,
    permute_parties,
    purity,
    reconstruct,
    schmidt,
    schmidt_values,
    to_density,
)
from ngme.state_factory import random_density, random_pure_state


def test_row_major_party_order():
    """Party 0 is the most significant digit."""
    psi = computational_state([0, 1])
    assert psi.amps[1] == 1.0
    assert basis_index([1, 0, 1], [2, 3, 2]) == 1 * 6 + 0 * 2 + 1


def test_kron_of_basis_vectors():
    v = kron(np.array([1, 0]), np.array([0, 1]))
    assert np.allclose(v, [0, 1, 0, 0])


@pytest.mark.parametrize("dims", [(2, 2, 2), (3, 2), (2, 3, 4)])
def test_layout_total(dims):
    layout = PartyLayout(dims=dims)
    assert layout.total == int(np.prod(dims))
    assert layout.n == len(dims)


def test_layout_rejects_small_dimension():
    with pytest.raises(ArgumentError):
        PartyLayout(dims=(2, 1))


def test_layout_over_capacity():
    """13 qubits is 8192 > 4096."""
    with pytest.raises(CapacityError):
        PartyLayout.uniform(13, 2)


def test_pure_state_must_be_normalized():
    with pytest.raises(ArgumentError):
        PureState(layout=PartyLayout.uniform(1, 2), amps=[1.0, 1.0])


def test_pure_state_length_mismatch():
    with pytest.raises(LayoutError):
        PureState(layout=PartyLayout.uniform(2, 2), amps=[1.0, 0.0])


def test_density_rejects_negative_eigenvalue():
    with pytest.raises(ArgumentError):
        DensityOp(layout=PartyLayout.uniform(1, 2), mat=np.diag([1.5, -0.5]))


def test_embed_site_op_matches_kron():
    layout = PartyLayout.uniform(3, 2)
    expected = np.kron(np.kron(np.eye(2), PAULI_Z), np.eye(2))
    assert np.allclose(embed_site_op(PAULI_Z, 1, layout), expected)


def test_embed_site_op_shape_mismatch():
    with pytest.raises(LayoutError):
        embed_site_op(np.eye(3), 0, PartyLayout.uniform(2, 2))


def test_partial_trace_of_ghz(ghz3):
    """Any single-party marginal of GHZ is maximally mixed."""
    reduced = partial_trace(to_density(ghz3), [1])
    assert np.allclose(reduced.mat, np.eye(2) / 2)


def test_marginal_matches_partial_trace(w3):
    keep = [0, 2]
    assert np.allclose(marginal(w3, keep), partial_trace(to_density(w3), keep).mat)


def test_herm_eig_descending():
    w, _ = herm_eig(np.diag([0.1, 0.7, 0.2]))
    assert list(w) == sorted(w, reverse=True)


def test_herm_eig_rejects_non_hermitian():
    with pytest.raises(ContractError):
        herm_eig(np.array([[0, 1], [0, 0]]))


def test_frac_power_pair_multiplies_back(w3):
    rho = DensityOp(layout=w3.layout, mat=0.6 * to_density(w3).mat + 0.4 * np.eye(8) / 8)
    a, b = frac_power_pair(rho, 0.3)
    assert np.allclose(a @ b, rho.mat, atol=1e-10)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.2])
def test_frac_power_rejects_endpoints(ghz3, p):
    with pytest.raises(ArgumentError):
        frac_power(to_density(ghz3), p)


def test_schmidt_of_ghz(ghz3):
    result = schmidt(ghz3, Bipartition.of([0], 3))
    assert np.allclose(result.spectrum, [0.5, 0.5])


def test_schmidt_reconstructs(w3):
    cut = Bipartition.of([0, 2], 3)
    result = schmidt(w3, cut)
    assert np.allclose(reconstruct(result, cut, w3.layout), w3.amps)


def test_schmidt_values_of_w(w3):
    spectrum = sorted(schmidt_values(w3, Bipartition.of([0], 3)), reverse=True)
    assert np.allclose(spectrum, [2 / 3, 1 / 3])


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_bipartition_count(n):
    assert len(list(bipartitions(n))) == 2 ** (n - 1) - 1


def test_bipartition_sides_must_cover():
    with pytest.raises(ArgumentError):
        Bipartition(left=(0,), right=(2,))


def test_permute_parties_moves_excitation():
    psi = computational_state([1, 0, 0])
    moved = permute_parties(psi, [1, 2, 0])
    assert np.isclose(abs(moved.amps[basis_index([0, 0, 1], [2, 2, 2])]), 1.0)


def test_fidelities_of_pure_target(ghz3):
    rho = to_density(ghz3)
    assert fidelity_pure(rho, ghz3) == pytest.approx(1.0, abs=TOL)
    assert fidelity_sqrt(rho, ghz3) == pytest.approx(1.0, abs=1e-8)
    assert purity(rho) == pytest.approx(1.0, abs=TOL)


def test_expect_x_on_plus():
    plus = PureState(layout=PartyLayout.uniform(1, 2), amps=[HALF, HALF])
    assert expect(to_density(plus), PAULI_X) == pytest.approx(1.0)


def test_expect_rejects_non_hermitian(ghz3):
    with pytest.raises(ContractError):
        expect(to_density(ghz3), np.triu(np.ones((8, 8))))


def _random_layout(rng, max_parties=6):
    n = int(rng.integers(2, max_parties + 1))
    return PartyLayout(dims=tuple(int(d) for d in rng.integers(2, 4, size=n)))


def _random_cut(rng, n):
    size = int(rng.integers(1, n))
    return Bipartition.of(rng.permutation(n)[:size], n)


@pytest.mark.slow
def test_schmidt_reconstructs_random_states():
    rng = np.random.default_rng(SEED)
    for _ in range(200):
        layout = _random_layout(rng)
        psi = random_pure_state(layout, rng)
        cut = _random_cut(rng, layout.n)
        result = schmidt(psi, cut)
        assert np.allclose(reconstruct(result, cut, layout), psi.amps, atol=1e-10)
        assert np.sum(result.spectrum) == pytest.approx(1.0, abs=TOL)


def test_frac_power_pair_random_densities():
    rng = np.random.default_rng(SEED)
    for i in range(50):
        layout = _random_layout(rng, max_parties=3)
        rank = None if i % 2 else int(rng.integers(1, layout.total + 1))
        rho = random_density(layout, rng, rank=rank)
        p = float(rng.uniform(0.05, 0.95))
        a, b = frac_power_pair(rho, p)
        assert np.allclose(a @ b, rho.mat, atol=1e-9)
        assert np.allclose(frac_power(rho, p), a, atol=1e-12)


@pytest.mark.parametrize("dim", [1, 2, 7, 16, 64, 256])
def test_herm_eig_reconstructs(dim):
    rng = np.random.default_rng(SEED + dim)
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (g + g.conj().T) / 2
    w, v = herm_eig(h)
    assert np.all(np.diff(w) <= 0)
    assert np.allclose(v.conj().T @ v, np.eye(dim), atol=1e-10)
    assert np.allclose((v * w) @ v.conj().T, h, atol=1e-9)


@pytest.mark.parametrize("p", [0.02, 0.5, 0.98])
def test_frac_power_of_pure_state_is_its_projector(w3, p):
    rho = to_density(w3)
    a, b = frac_power_pair(rho, p)
    assert np.allclose(a, rho.mat, atol=1e-10)
    assert np.allclose(b, rho.mat, atol=1e-10)
