import numpy as np
import pytest

from config import HALF, SEED, TOL
from ngme.errors import ArgumentError, LayoutError
from ngme.state_factory import (
    DickeMode,
    NoiseKind,
    NoiseSpec,
    WVariant,
    dicke_range,
    dicke_strings,
    is_invariant_under,
    is_perm_symmetric,
    make_chain_network_state,
    make_cluster5,
    make_cyclic_network_state,
    make_dicke,
    make_dicke_superposition_24,
    make_generalized_w,
    make_ghz,
    make_maximal_slice,
    make_sym_superposition,
    make_three_qubit_canonical,
    make_w_family,
    maximally_mixed,
    mix_dicke_diag,
    mix_general,
    mix_white_noise,
    formula_dicke_count,
    random_density,
    random_pure_state,
)
from ngme.tensor_core import PartyLayout, basis_index, fidelity_pure


def test_ghz_amplitudes():
    psi = make_ghz(3, 3, [1 / np.sqrt(3)] * 3)
    assert np.isclose(psi.amps[basis_index([2, 2, 2], [3, 3, 3])], 1 / np.sqrt(3))
    assert psi.layout.dims == (3, 3, 3)


def test_ghz_rejects_unnormalized():
    with pytest.raises(ArgumentError):
        make_ghz(3, 2, [1.0, 1.0])


@pytest.mark.parametrize("n,d,k,count", [(3, 2, 1, 3), (4, 2, 2, 6), (3, 3, 2, 6), (3, 3, 3, 7)])
def test_dicke_string_counts(n, d, k, count):
    assert len(dicke_strings(n, d, k)) == count


def test_dicke_range_bounds():
    assert dicke_range(3, 3) == (1, 5)
    with pytest.raises(ArgumentError):
        make_dicke(3, 2, 3)


def test_dicke_uniform_amplitudes():
    psi = make_dicke(4, 2, 2)
    nonzero = psi.amps[np.abs(psi.amps) > 0]
    assert len(nonzero) == 6
    assert np.allclose(nonzero, 1 / np.sqrt(6))


def test_formula_normalized_mode_records_mismatch():
    """Qubit D_2 on three parties has 3 strings, the stars-and-bars count is 6."""
    psi = make_dicke(3, 2, 2, mode=DickeMode.FORMULA_NORMALIZED)
    assert formula_dicke_count(3, 2) == 6
    assert any(note.startswith("normalization-mismatch") for note in psi.notes)
    assert np.isclose(np.linalg.norm(psi.amps), 1.0)


def test_formula_normalized_mode_quiet_when_counts_agree():
    psi = make_dicke(3, 3, 2, mode=DickeMode.FORMULA_NORMALIZED)
    assert psi.notes == ()


def test_w_state_is_symmetric(w3):
    assert is_perm_symmetric(w3)


@pytest.mark.parametrize("variant,index,expected", [
    (WVariant.R_LAST, basis_index([0, 0, 1], [2, 2, 2]), 2 / 3),
    (WVariant.R_REST, basis_index([0, 0, 1], [2, 2, 2]), 1 / 9),
])
def test_w_family_weights(variant, index, expected):
    """r=2: (1,1,2)/sqrt(6) and (2,2,1)/3."""
    psi = make_w_family(3, variant, 2.0)
    assert abs(psi.amps[index]) ** 2 == pytest.approx(expected)


def test_sym_superposition_reduces_to_dicke():
    psi = make_sym_superposition(3, 2, [0.0, 1.0, 0.0], 1.0, 0.0)
    assert fidelity_pure(mix_white_noise(psi, 1.0), make_dicke(3, 2, 1)) == pytest.approx(1.0)


def test_sym_superposition_length_checked():
    with pytest.raises(ArgumentError):
        make_sym_superposition(3, 2, [1.0, 0.0], 1.0, 0.0)


def test_three_qubit_phase_on_100():
    psi = make_three_qubit_canonical([0.6, 0.8, 0, 0, 0], phi=np.pi / 2)
    assert np.isclose(psi.amps[4], 0.8j)


def test_three_qubit_rejects_negative():
    with pytest.raises(ArgumentError):
        make_three_qubit_canonical([0.6, -0.8, 0, 0, 0])


def test_maximal_slice_at_right_angle_is_ghz():
    psi = make_maximal_slice(3, np.pi / 2)
    assert np.allclose(psi.amps, make_ghz(3, 2, [HALF, HALF]).amps)


def test_maximal_slice_theta_range():
    with pytest.raises(ArgumentError):
        make_maximal_slice(3, 0.0)


def test_cluster5_normalized():
    psi = make_cluster5(0.6, 0.8)
    assert psi.layout.n == 5
    assert np.isclose(np.linalg.norm(psi.amps), 1.0)


def test_dicke24_even_weights_is_dicke():
    psi = make_dicke_superposition_24([1 / np.sqrt(6)] * 6)
    assert np.allclose(psi.amps, make_dicke(4, 2, 2).amps)


def test_network_states_layouts():
    assert make_chain_network_state().layout.dims == (2, 4, 2)
    assert make_cyclic_network_state().layout.dims == (4, 4, 4)


def test_white_noise_endpoints(ghz3):
    assert np.allclose(mix_white_noise(ghz3, 0.0).mat, np.eye(8) / 8)
    assert fidelity_pure(mix_white_noise(ghz3, 1.0), ghz3) == pytest.approx(1.0)


@pytest.mark.parametrize("v", [-0.1, 1.1])
def test_white_noise_v_range(ghz3, v):
    with pytest.raises(ArgumentError):
        mix_white_noise(ghz3, v)


def test_mix_general_layout_mismatch(ghz3):
    with pytest.raises(LayoutError):
        mix_general(ghz3, maximally_mixed(PartyLayout.uniform(2, 2)), 0.5)


def test_dicke_diagonal_mixture_trace():
    rho = mix_dicke_diag(3, 2, [0.25, 0.5, 0.25])
    assert np.trace(rho.mat).real == pytest.approx(1.0, abs=TOL)
    assert fidelity_pure(rho, make_dicke(3, 2, 1)) == pytest.approx(0.5 + 0.25 / 8)


def test_dicke_diagonal_weight_count():
    with pytest.raises(ArgumentError):
        mix_dicke_diag(3, 2, [0.5, 0.5])


def test_noise_spec_requires_v():
    with pytest.raises(ArgumentError):
        NoiseSpec(kind=NoiseKind.WHITE)


def test_invariance_under_single_permutation():
    psi = make_generalized_w([0.6, 0.8, 0.0])
    assert is_invariant_under(psi, [0, 1, 2])
    assert not is_invariant_under(psi, [1, 0, 2])


def test_perm_symmetry_needs_equal_dims():
    with pytest.raises(LayoutError):
        is_perm_symmetric(make_chain_network_state())


def test_random_states_reproducible():
    layout = PartyLayout.uniform(3, 2)
    a = random_pure_state(layout, np.random.default_rng(SEED))
    b = random_pure_state(layout, np.random.default_rng(SEED))
    assert np.allclose(a.amps, b.amps)
    rho = random_density(layout, np.random.default_rng(SEED), rank=2)
    assert np.linalg.matrix_rank(rho.mat, tol=1e-10) == 2
