import numpy as np
import pytest

from config import HALF, SEED
from ngme.bell_functional import (
    SIGMA_X,
    SIGMA_Z,
    BellConfig,
    BellForm,
    SiteObservable,
    WernerSpec,
    bell_kproducible,
    bell_lhs,
    critical_noise,
    depth_boundary,
    entanglement_depth,
    f1,
    f2,
    pauli,
    werner_closed_f,
)
from ngme.errors import ArgumentError, BracketError, ContractError, LayoutError
from ngme.state_factory import (
    make_ghz,
    maximally_mixed,
    mix_white_noise,
    random_density,
    random_pure_state,
)
from ngme.tensor_core import (
    DensityOp,
    PartyLayout,
    computational_state,
    embed_site_op,
    expect,
    to_density,
)


def ghz_theta(n, theta):
    return make_ghz(n, 2, [np.cos(theta), np.sin(theta)])


def test_pure_state_correlators_factorize(w3):
    """For a pure state f1 = <M>^2 and f2 = <M_i><M_j>."""
    rho = to_density(w3)
    assert f1(rho, 0, SIGMA_Z) == pytest.approx((1 / 3) ** 2)
    assert f2(rho, 0, SIGMA_Z, 1, SIGMA_Z) == pytest.approx((1 / 3) ** 2)


def test_maximally_mixed_correlators():
    rho = maximally_mixed(PartyLayout.uniform(3, 2))
    assert f1(rho, 1, SIGMA_X) == pytest.approx(1.0)
    assert f2(rho, 0, SIGMA_X, 2, SIGMA_X) == pytest.approx(0.0)


def test_f2_needs_two_sites(ghz3):
    with pytest.raises(ArgumentError):
        f2(to_density(ghz3), 1, SIGMA_Z, 1, SIGMA_Z)


@pytest.mark.parametrize("matrix", [np.diag([2.0, 0.0]), np.array([[0, 1], [0, 0]])])
def test_observable_contract(matrix):
    with pytest.raises(ContractError):
        SiteObservable(matrix=matrix, name="bad")


def test_unknown_pauli():
    with pytest.raises(ArgumentError):
        pauli("w")


def test_ghz_reaches_quantum_maximum(ghz3):
    report = bell_lhs(to_density(ghz3), BellConfig.uniform(SIGMA_Z, 3))
    assert report.lhs == pytest.approx(6.0)
    assert report.quantum_max == 6.0
    assert report.violated


def test_product_state_saturates_fully_separable_bound():
    rho = to_density(computational_state([0, 0, 0]))
    report = bell_lhs(rho, BellConfig.uniform(SIGMA_Z, 3))
    assert report.lhs == pytest.approx(0.0, abs=1e-12)
    assert not report.violated


def test_biseparable_bound():
    report = bell_lhs(maximally_mixed(PartyLayout.uniform(4, 2)),
                      BellConfig.uniform(SIGMA_Z, 4, form=BellForm.BISEPARABLE))
    assert report.classical_bound == 6.0
    assert report.lhs == pytest.approx(-3.0)


def test_bipartite_form_on_bell_state():
    bell = make_ghz(2, 2, [HALF, HALF])
    report = bell_lhs(to_density(bell), BellConfig.uniform(SIGMA_Z, 2, form=BellForm.BIPARTITE))
    assert report.lhs == pytest.approx(2.0)
    assert report.violated


def test_bipartite_form_needs_two_parties(ghz3):
    with pytest.raises(ArgumentError):
        bell_lhs(to_density(ghz3), BellConfig.uniform(SIGMA_Z, 3, form=BellForm.BIPARTITE))


def test_observable_count_must_match(ghz3):
    with pytest.raises(LayoutError):
        bell_lhs(to_density(ghz3), BellConfig.uniform(SIGMA_Z, 2))


@pytest.mark.parametrize("p", [0.0, 1.0])
def test_config_rejects_p(p):
    with pytest.raises(ArgumentError):
        BellConfig.uniform(SIGMA_Z, 3, p=p)


@pytest.mark.parametrize("theta", [0.2, np.pi / 8, 0.6, np.pi / 4])
def test_ghz_theta_kproducible_lhs(theta):
    """lhs = (n-1) sin^2(2 theta) for GHZ(theta) under sigma_z."""
    report = bell_kproducible(to_density(ghz_theta(3, theta)), BellConfig.uniform(SIGMA_Z, 3), 2)
    assert report.lhs == pytest.approx(2 * np.sin(2 * theta) ** 2)
    assert report.classical_bound == 1.0


def test_kproducible_k_range(ghz3):
    with pytest.raises(ArgumentError):
        bell_kproducible(to_density(ghz3), BellConfig.uniform(SIGMA_Z, 3), 4)


@pytest.mark.parametrize("n,k,expected", [(3, 1, 0.0), (3, 2, np.pi / 8)])
def test_depth_boundary(n, k, expected):
    assert depth_boundary(n, k) == pytest.approx(expected, abs=1e-12)


def test_depth_boundary_matches_violation():
    theta = depth_boundary(4, 2)
    config = BellConfig.uniform(SIGMA_Z, 4)
    below = bell_kproducible(to_density(ghz_theta(4, theta - 1e-3)), config, 2)
    above = bell_kproducible(to_density(ghz_theta(4, theta + 1e-3)), config, 2)
    assert not below.violated
    assert above.violated


def test_entanglement_depth_of_ghz(ghz3):
    config = BellConfig.uniform(SIGMA_Z, 3)
    reports = {k: bell_kproducible(to_density(ghz3), config, k) for k in (1, 2, 3)}
    assert entanglement_depth(reports) == 3


@pytest.mark.parametrize("v", [0.0, 0.35, 0.8, 1.0])
def test_werner_closed_form_matches_numeric(ghz3, v):
    rho = mix_white_noise(ghz3, v)
    assert werner_closed_f(ghz3, v, 0, SIGMA_Z) == pytest.approx(f1(rho, 0, SIGMA_Z), abs=1e-10)
    assert werner_closed_f(ghz3, v, 0, SIGMA_Z, 2, SIGMA_Z) == pytest.approx(
        f2(rho, 0, SIGMA_Z, 2, SIGMA_Z), abs=1e-10)


def test_werner_printed_variant_differs(w3):
    """The printed middle term carries an extra <A> factor."""
    v = 0.9
    corrected = werner_closed_f(w3, v, 0, SIGMA_Z)
    printed = werner_closed_f(w3, v, 0, SIGMA_Z, printed=True)
    assert corrected == pytest.approx(f1(mix_white_noise(w3, v), 0, SIGMA_Z), abs=1e-10)
    assert printed != pytest.approx(corrected)


def test_werner_needs_involutory(ghz3):
    projector = SiteObservable(matrix=np.diag([1.0, 0.0]), name="p0")
    with pytest.raises(ContractError):
        werner_closed_f(ghz3, 0.5, 0, projector)


def test_werner_form_matches_pipeline(w3):
    config = BellConfig.uniform(SIGMA_X, 3, form=BellForm.WERNER_CLOSED, k=2,
                                werner=WernerSpec(target=w3, v=0.9))
    closed = bell_lhs(None, config)
    numeric = bell_kproducible(mix_white_noise(w3, 0.9), BellConfig.uniform(SIGMA_X, 3), 2)
    assert closed.form == BellForm.WERNER_CLOSED
    assert closed.lhs == pytest.approx(numeric.lhs, abs=1e-10)


def test_werner_form_needs_spec():
    with pytest.raises(ArgumentError):
        BellConfig.uniform(SIGMA_X, 3, form=BellForm.WERNER_CLOSED, k=2)


def test_numeric_form_needs_density():
    with pytest.raises(ArgumentError):
        bell_lhs(None, BellConfig.uniform(SIGMA_Z, 3))


def test_critical_noise_is_a_root(ghz3):
    config = BellConfig.uniform(SIGMA_Z, 3)
    result = critical_noise(ghz3, [SIGMA_Z] * 3, k=2)
    report = bell_kproducible(mix_white_noise(ghz3, result.v_star), config, 2)
    assert report.lhs == pytest.approx(1.0, abs=1e-9)
    assert result.monotone


def test_critical_noise_closed_form_agrees(ghz3):
    numeric = critical_noise(ghz3, [SIGMA_Z] * 3, k=2)
    closed = critical_noise(ghz3, [SIGMA_Z] * 3, k=2, closed_form=True)
    assert closed.v_star == pytest.approx(numeric.v_star, abs=1e-9)


def test_critical_noise_without_sign_change(ghz3):
    """Depth 3 is only reached by the pure GHZ state."""
    with pytest.raises(BracketError):
        critical_noise(ghz3, [SIGMA_Z] * 3, k=3, bracket=(0.0, 0.9))


def test_critical_noise_bracket_checked(ghz3):
    with pytest.raises(ArgumentError):
        critical_noise(ghz3, [SIGMA_Z] * 3, k=2, bracket=(0.5, 0.2))


def _random_layout(rng, max_parties=4):
    n = int(rng.integers(2, max_parties + 1))
    return PartyLayout(dims=tuple(int(d) for d in rng.integers(2, 4, size=n)))


def _random_dichotomic(rng, dim):
    """U diag(+-1) U^dagger for a random unitary U."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    u, _ = np.linalg.qr(g)
    signs = rng.choice([-1.0, 1.0], size=dim)
    mat = (u * signs) @ u.conj().T
    return SiteObservable(matrix=(mat + mat.conj().T) / 2, name="random")


def _random_observables(rng, layout):
    return tuple(_random_dichotomic(rng, d) for d in layout.dims)


def test_pure_state_correlators_factorize_random():
    rng = np.random.default_rng(SEED)
    for _ in range(100):
        layout = _random_layout(rng)
        psi = random_pure_state(layout, rng)
        rho = to_density(psi)
        obs = _random_observables(rng, layout)
        means = [expect(rho, embed_site_op(m.matrix, i, layout)) for i, m in enumerate(obs)]
        p = float(rng.uniform(0.05, 0.95))
        i, j = (int(x) for x in rng.choice(layout.n, size=2, replace=False))
        assert f1(rho, i, obs[i], p) == pytest.approx(means[i] ** 2, abs=1e-10)
        assert f2(rho, i, obs[i], j, obs[j], p) == pytest.approx(means[i] * means[j], abs=1e-10)


def test_pure_state_lhs_independent_of_p():
    rng = np.random.default_rng(SEED)
    for _ in range(20):
        layout = _random_layout(rng)
        rho = to_density(random_pure_state(layout, rng))
        obs = _random_observables(rng, layout)
        values = [bell_lhs(rho, BellConfig(observables=obs, p=p)).lhs for p in (0.1, 0.5, 0.9)]
        assert values == pytest.approx([values[1]] * 3, abs=1e-9)


def test_mixed_state_lhs_depends_on_p():
    rho = mix_white_noise(ghz_theta(3, 0.3), 0.6)
    config = BellConfig.uniform(SIGMA_X, 3)
    low = bell_lhs(rho, config.model_copy(update={"p": 0.2})).lhs
    assert low != pytest.approx(bell_lhs(rho, config).lhs, abs=1e-6)


@pytest.mark.slow
@pytest.mark.parametrize("mixed,count", [(False, 300), (True, 100)])
def test_lhs_never_exceeds_quantum_maximum(mixed, count):
    rng = np.random.default_rng(SEED)
    for _ in range(count):
        layout = _random_layout(rng)
        n = layout.n
        if mixed:
            rho = random_density(layout, rng, rank=int(rng.integers(1, 4)))
        else:
            rho = to_density(random_pure_state(layout, rng))
        config = BellConfig(observables=_random_observables(rng, layout),
                            p=float(rng.uniform(0.05, 0.95)), form=BellForm.BISEPARABLE)
        report = bell_lhs(rho, config)
        assert report.lhs <= report.quantum_max + 1e-9
        assert report.quantum_max == n * n - n
        k = int(rng.integers(1, n + 1))
        assert bell_kproducible(rho, config, k).lhs <= n - 1 + 1e-9


def test_f1_concave_along_random_segments():
    """Midpoint check for f1 and for the two-site sum f1 + f1 + 2 f2."""
    rng = np.random.default_rng(SEED)
    for _ in range(50):
        layout = _random_layout(rng, max_parties=3)
        a, b = random_density(layout, rng), random_density(layout, rng)
        mid = DensityOp(layout=layout, mat=(a.mat + b.mat) / 2)
        obs = _random_observables(rng, layout)
        p = float(rng.uniform(0.05, 0.95))

        def pair(rho):
            return f1(rho, 0, obs[0], p) + f1(rho, 1, obs[1], p) + 2 * f2(rho, 0, obs[0], 1, obs[1], p)

        assert f1(mid, 0, obs[0], p) >= (f1(a, 0, obs[0], p) + f1(b, 0, obs[0], p)) / 2 - 1e-9
        assert pair(mid) >= (pair(a) + pair(b)) / 2 - 1e-9
