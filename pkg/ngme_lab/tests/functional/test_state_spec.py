import json

import numpy as np
import pytest

from config import GHZ3_BOUND, W3_BOUND
from ngme.errors import ArgumentError, LayoutError
from ngme.gme_bounds import BoundMethod
from ngme.state_spec import Family, StateSpec
from ngme.tensor_core import fidelity_pure


def test_load_inline_json():
    spec = StateSpec.load('{"family": "ghz", "n": 3}')
    assert spec.family == Family.GHZ
    assert spec.closed_bound().value == pytest.approx(GHZ3_BOUND)


def test_load_from_file(tmp_path):
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"family": "dicke", "n": 3, "k": 1}))
    spec = StateSpec.load(str(path))
    assert spec.closed_bound().value == pytest.approx(W3_BOUND)


@pytest.mark.parametrize("text", ['{"family": "ghz"', '{"family": "nope"}', '{"family": "ghz", "x": 1}'])
def test_load_rejects_bad_input(text):
    with pytest.raises(ArgumentError):
        StateSpec.load(text)


def test_amplitudes_are_normalized():
    spec = StateSpec(family="ghz", n=3, a=(0.707, 0.707))
    assert spec.closed_bound().value == pytest.approx(0.5)


def test_missing_field_reported():
    with pytest.raises(ArgumentError, match="needs k"):
        StateSpec(family="dicke", n=3).build()


@pytest.mark.parametrize("payload,method", [
    ({"family": "ghz", "n": 4, "d": 3}, BoundMethod.CLOSED_GHZ),
    ({"family": "dicke", "n": 4, "k": 1}, BoundMethod.CLOSED_DICKE),
    ({"family": "sym", "n": 3, "alphas": (1, 1, 0), "beta0": 1, "beta1": 1}, BoundMethod.SYM_UPPER),
    ({"family": "three-qubit", "lambdas": (1, 1, 1, 1, 1), "phi": 0.4}, BoundMethod.GAMMA3),
    ({"family": "cluster5", "a": (1, 1)}, BoundMethod.SCHMIDT_EXACT),
    ({"family": "cyclic-network"}, BoundMethod.COLNORM_UPPER),
    ({"family": "maximal-slice", "n": 3, "theta": 0.4}, BoundMethod.GAMMA3),
    ({"family": "maximal-slice", "n": 4, "theta": 0.4}, BoundMethod.SCHMIDT_EXACT),
])
def test_closed_bound_per_family(payload, method):
    assert StateSpec.model_validate(payload).closed_bound().method == method


def test_amplitude_family():
    spec = StateSpec(family="amplitudes", dims=(2, 2), amps=(1, 0, 0, 1))
    psi = spec.build()
    assert np.allclose(psi.amps, [2 ** -0.5, 0, 0, 2 ** -0.5])


def test_white_noise_density():
    spec = StateSpec.load('{"family": "w", "n": 3, "noise": {"kind": "white", "v": 0.5}}')
    rho = spec.density()
    assert fidelity_pure(rho, spec.build()) == pytest.approx(0.5 + 0.5 / 8)


def test_diagonal_dicke_density():
    spec = StateSpec(family="dicke", n=3, k=1,
                     noise={"kind": "diagonal-dicke", "weights": (0.5, 0.5, 0.0)})
    assert fidelity_pure(spec.density(), spec.build()) == pytest.approx(0.5 + 0.5 / 8)


def test_custom_density_needs_matrix():
    with pytest.raises(ArgumentError, match="density matrix"):
        StateSpec(family="ghz", n=3, noise={"kind": "custom-density", "v": 0.5})


def test_custom_density_from_json():
    """|000><000| as the noise operator: F = v + (1-v)/2 for GHZ3."""
    varrho = np.zeros((8, 8))
    varrho[0, 0] = 1.0
    payload = {"family": "ghz", "n": 3,
               "noise": {"kind": "custom-density", "v": 0.5, "density": varrho.tolist()}}
    spec = StateSpec.load(json.dumps(payload))
    assert fidelity_pure(spec.density(), spec.build()) == pytest.approx(0.75)


def test_custom_density_with_imaginary_part():
    """|+i><+i| on one qubit, split into real and imaginary rows."""
    spec = StateSpec(family="amplitudes", dims=(2,), amps=(1, 0),
                     noise={"kind": "custom-density", "v": 0.0,
                            "density": ((0.5, 0.0), (0.0, 0.5)),
                            "density_imag": ((0.0, -0.5), (0.5, 0.0))})
    rho = spec.density()
    assert rho.mat[0, 1] == pytest.approx(-0.5j)
    assert fidelity_pure(rho, spec.build()) == pytest.approx(0.5)


@pytest.mark.parametrize("density,error", [
    (((1.0, 0.0), (0.0, 0.0)), LayoutError),
    (((0.5, 0.0, 0.0, 0.0),) * 4, ArgumentError),
])
def test_custom_density_is_validated(density, error):
    spec = StateSpec(family="ghz", n=2, noise={"kind": "custom-density", "v": 0.5, "density": density})
    with pytest.raises(error):
        spec.density()
