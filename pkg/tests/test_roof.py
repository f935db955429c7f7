import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entroof.roof import (
    BoundDirection,
    OptimizerConfig,
    ancilla_povm_from_blocks,
    batch_objective,
    caratheodory_reduce,
    evaluate_ensemble,
    hill_climb,
    is_isometry,
    minimize_over_ensembles,
    mixed_ensembles_from_purification,
    optimize_povm,
    polar,
    pure_ensembles_from_purification,
    riemannian_descent,
    tangent,
)
from entroof.states import (
    DensityMatrix,
    Ensemble,
    Povm,
    maximally_mixed,
    measure_subsystem,
    partial_trace,
    random_density,
    random_isometry,
    random_pure,
    spectral_decomposition,
    tensor,
    von_neumann_entropy,
)

SMALL = OptimizerConfig(restarts=4, max_iterations=300)


def c_left_objective(rho):
    """``S(rho_A) - sum p_i S(rho_A^i)`` for a POVM on the second factor."""
    s_a = von_neumann_entropy(partial_trace(rho, (0,)))

    def f(povm):
        return s_a - sum(p * von_neumann_entropy(post) for p, post in measure_subsystem(rho, povm, 1))

    return f


def _entropies(members):
    lam = np.clip(np.linalg.eigvalsh(members), 0, None)
    return -np.sum(np.where(lam > 0, lam * np.log2(np.where(lam > 0, lam, 1)), 0), axis=-1)


def _reduced_entropy(da, db):
    def cost(members):
        m = members.reshape(-1, da, db, da, db)
        return _entropies(np.einsum("nabcb->nac", m))

    return cost


# ---------------------------------------------------------------------------
# configuration and kernels


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(restarts=0)
    with pytest.raises(ValueError):
        OptimizerConfig(tolerance=0)
    with pytest.raises(ValueError):
        OptimizerConfig(ensemble_size=0)
    c = OptimizerConfig()
    assert (c.restarts, c.max_iterations, c.tolerance, c.ensemble_size) == (16, 2000, 1e-8, "auto")


def test_restart_generators_depend_only_on_seed_and_index():
    a = OptimizerConfig(seed=3, restarts=2).restart_rng(1).standard_normal(3)
    b = OptimizerConfig(seed=3, restarts=9).restart_rng(1).standard_normal(3)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, OptimizerConfig(seed=4).restart_rng(1).standard_normal(3))


def test_bound_direction_strings():
    assert str(BoundDirection.UPPER) == "upper"
    assert BoundDirection("lower") is BoundDirection.LOWER


def test_polar_and_tangent():
    rng = np.random.default_rng(0)
    z = rng.standard_normal((3, 5, 2)) + 1j * rng.standard_normal((3, 5, 2))
    w = polar(z)
    assert all(is_isometry(x) for x in w)
    g = tangent(w, z)
    herm = np.swapaxes(w.conj(), -1, -2) @ g
    np.testing.assert_allclose(herm + np.swapaxes(herm.conj(), -1, -2), 0, atol=1e-12)


def test_descent_finds_lowest_eigenspace():
    rng = np.random.default_rng(1)
    h = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    h = h + h.conj().T
    target = np.sort(np.linalg.eigvalsh(h))[:2].sum()

    def cost_grad(w):
        hw = h @ w
        return np.real(np.einsum("bij,bij->b", w.conj(), hw)), hw

    w0 = polar(rng.standard_normal((3, 6, 2)) + 1j * rng.standard_normal((3, 6, 2)))
    w, f, iters, conv = riemannian_descent(cost_grad, w0, 2000, 1e-12)
    np.testing.assert_allclose(f, target, atol=1e-7)
    assert conv.all()


def test_hill_climb_improves_and_keeps_isometries():
    h = np.diag([3.0, 1.0, 2.0, 0.0]).astype(complex)

    def cost(w):
        return np.real(np.einsum("bij,jk,bki->b", np.swapaxes(w.conj(), -1, -2), h, w))

    rngs = [np.random.default_rng([0, k]) for k in range(2)]
    w0 = polar(np.stack([g.standard_normal((4, 1)) + 0j for g in rngs]))
    f0 = cost(w0)
    w, f = hill_climb(cost, w0, rngs, 400)
    assert np.all(f <= f0 + 1e-15)
    assert f.min() < 1e-4
    assert all(is_isometry(x) for x in w)


# ---------------------------------------------------------------------------
# optimize_povm


def test_optimize_povm_constant_objective():
    res = optimize_povm(lambda v: np.zeros(len(v)), 2, 3, SMALL)
    assert res.value == 0.0
    assert res.direction == BoundDirection.LOWER
    assert len(res.witness) == 3


def test_optimize_povm_rejects_too_few_outcomes():
    with pytest.raises(ValueError):
        optimize_povm(lambda v: np.zeros(len(v)), 3, 2, SMALL)


def test_optimize_povm_classical_state():
    cc = DensityMatrix(np.diag([0.5, 0, 0, 0.5]).astype(complex), (2, 2))
    res = optimize_povm(batch_objective(c_left_objective(cc)), 2, 2, SMALL)
    assert res.value >= 1 - 1e-6
    assert res.value <= 1 + 1e-12


def test_optimize_povm_product_state():
    prod = tensor(random_density((2,), seed=1), random_density((2,), seed=2))
    res = optimize_povm(batch_objective(c_left_objective(prod)), 2, None, SMALL.replace(max_iterations=40))
    assert res.value <= 1e-9
    assert res.diagnostics["n_outcomes"] == 4


def test_optimize_povm_witness_reproduces_value_and_is_deterministic():
    rho = random_density((2, 2), 2, seed=5)
    obj = c_left_objective(rho)
    cfg = SMALL.replace(max_iterations=100)
    a = optimize_povm(batch_objective(obj), 2, 3, cfg)
    b = optimize_povm(batch_objective(obj), 2, 3, cfg)
    assert abs(obj(a.witness) - a.value) < 1e-9
    assert a.value == b.value
    np.testing.assert_array_equal(a.witness.effects, b.witness.effects)


def test_optimize_povm_more_outcomes_never_worse():
    rho = random_density((2, 2), 2, seed=6)
    obj = batch_objective(c_left_objective(rho))
    cfg = SMALL.replace(max_iterations=100)
    small = optimize_povm(obj, 2, 2, cfg)
    big = optimize_povm(obj, 2, 4, cfg, init=[small.isometry])
    assert big.value >= small.value - 1e-9


# ---------------------------------------------------------------------------
# decompositions


def test_pure_ensemble_identity_is_eigendecomposition():
    rho = random_density((3,), 2, seed=1)
    lam, vecs = spectral_decomposition(rho)
    ens = pure_ensembles_from_purification(rho, 2, np.eye(2))
    np.testing.assert_allclose(ens.weights, lam, atol=1e-12)
    for k in range(2):
        np.testing.assert_allclose(ens.members[k], np.outer(vecs[:, k], vecs[:, k].conj()), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.integers(0, 3))
def test_pure_ensemble_barycenter(seed, extra):
    rho = random_density((2, 2), 3, seed=seed)
    m = 3 + extra
    ens = pure_ensembles_from_purification(rho, m, random_isometry(m, 3, seed=seed + 1))
    assert ens.kind == "pure"
    assert ens.check_target(rho) < 1e-9


def test_pure_ensemble_hadamard_mixing():
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    ens = pure_ensembles_from_purification(maximally_mixed((2,)), 2, h)
    np.testing.assert_allclose(ens.weights, [0.5, 0.5])
    plus, minus = np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)
    projs = [np.outer(plus, plus), np.outer(minus, minus)]
    for m in ens.members:
        assert min(np.abs(m - p).max() for p in projs) < 1e-12


def test_pure_ensemble_parameter_errors():
    rho = random_density((2,), 2, seed=1)
    with pytest.raises(ValueError):
        pure_ensembles_from_purification(rho, 3, np.ones((3, 2)))
    with pytest.raises(ValueError):
        pure_ensembles_from_purification(rho, 2, np.eye(3)[:, :2])


def test_mixed_ensemble_examples():
    rho = random_density((2, 2), 3, seed=2)
    triv = mixed_ensembles_from_purification(rho, Povm.trivial(3))
    assert len(triv) == 1
    np.testing.assert_allclose(triv.members[0], rho.matrix, atol=1e-12)
    basis = mixed_ensembles_from_purification(rho, Povm.computational(3))
    assert basis.kind == "pure"
    lam, _ = spectral_decomposition(rho)
    np.testing.assert_allclose(basis.weights, lam, atol=1e-12)
    rand = mixed_ensembles_from_purification(rho, ancilla_povm_from_blocks(random_isometry(12, 3, seed=4), 2))
    assert rand.kind == "mixed"
    assert rand.check_target(rho) < 1e-9
    with pytest.raises(ValueError):
        mixed_ensembles_from_purification(rho, Povm.trivial(2))


# ---------------------------------------------------------------------------
# Caratheodory


def _random_decomposition(seed, n, dims=(2, 2)):
    rng = np.random.default_rng(seed)
    members = np.array([random_density(dims, 2, seed=rng).matrix for _ in range(n)])
    w = rng.dirichlet(np.ones(n))
    return Ensemble(w, members, dims), rng.standard_normal(n)


def test_caratheodory_single_member_unchanged():
    ens = Ensemble([1.0], random_density((2,), 2, seed=1).matrix[None], (2,))
    out = caratheodory_reduce(ens, [0.3])
    assert len(out) == 1 and out.values[0] == 0.3


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31))
def test_caratheodory_reduces_to_d2_plus_one(seed):
    ens, vals = _random_decomposition(seed, 30)
    out = caratheodory_reduce(ens, vals)
    assert len(out) <= 17
    assert np.all(out.weights >= 0)
    assert np.max(np.abs(out.barycenter() - ens.barycenter())) < 1e-10
    assert abs(out.average() - ens.weights @ vals) < 1e-10


def test_caratheodory_duplicates():
    m = random_density((2,), 2, seed=3).matrix
    other = random_density((2,), 2, seed=4).matrix
    ens = Ensemble([0.3, 0.3, 0.4], np.array([m, m, other]), (2,))
    out = caratheodory_reduce(ens, [1.0, 1.0, 2.0])
    assert len(out) == 2
    assert abs(out.average() - (0.6 + 0.8)) < 1e-12
    assert np.max(np.abs(out.barycenter() - ens.barycenter())) < 1e-12


def test_caratheodory_length_mismatch():
    ens, vals = _random_decomposition(0, 5)
    with pytest.raises(ValueError):
        caratheodory_reduce(ens, vals[:3])


# ---------------------------------------------------------------------------
# minimize_over_ensembles


def test_roof_of_pure_input_is_exact_value():
    psi = random_pure((2, 2), seed=3).density()
    cost = _reduced_entropy(2, 2)
    res = minimize_over_ensembles(cost, psi, "pure", SMALL)
    assert res.value == pytest.approx(float(cost(psi.matrix[None])[0]), abs=1e-12)
    assert res.diagnostics["best_restart"] == "unique"


@pytest.mark.parametrize("kind", ["pure", "mixed"])
def test_roof_of_constant_and_linear_functions(kind):
    rho = random_density((2, 2), 3, seed=4)
    res = minimize_over_ensembles(lambda m: np.full(len(m), 0.25), rho, kind, SMALL.replace(max_iterations=5))
    assert res.value == pytest.approx(0.25, abs=1e-12)
    rng = np.random.default_rng(0)
    h = rng.standard_normal((4, 4))
    h = h + h.T

    def linear(m):
        return np.real(np.einsum("xy,nyx->n", h, m))

    res = minimize_over_ensembles(linear, rho, kind, SMALL.replace(max_iterations=5))
    assert res.value == pytest.approx(float(np.real(np.trace(h @ rho.matrix))), abs=1e-10)


def test_roof_witness_reproduces_value():
    rho = random_density((2, 2), 2, seed=5)
    cost = _reduced_entropy(2, 2)
    res = minimize_over_ensembles(cost, rho, "pure", SMALL)
    assert res.direction == BoundDirection.UPPER
    assert res.witness.check_target(rho) < 1e-9
    assert abs(res.witness.average(evaluate_ensemble(cost, res.witness)) - res.value) < 1e-9
    assert len(res.witness) <= 17


def test_roof_is_deterministic():
    rho = random_density((2, 2), 2, seed=6)
    cost = _reduced_entropy(2, 2)
    a = minimize_over_ensembles(cost, rho, "pure", SMALL.replace(max_iterations=50))
    b = minimize_over_ensembles(cost, rho, "pure", SMALL.replace(max_iterations=50))
    assert a.value == b.value


def test_larger_ensembles_never_worse_with_warm_start():
    rho = random_density((2, 2), 3, seed=7)
    cost = _reduced_entropy(2, 2)
    cfg = SMALL.replace(max_iterations=30, explore_iterations=0)
    small = minimize_over_ensembles(cost, rho, "pure", cfg.replace(ensemble_size=3))
    big = minimize_over_ensembles(cost, rho, "pure", cfg.replace(ensemble_size=9), initial=[small.witness])
    assert big.value <= small.value + 1e-9


def test_initial_ensemble_must_average_to_target():
    rho = random_density((2, 2), 2, seed=8)
    wrong = Ensemble([1.0], random_density((2, 2), 2, seed=9).matrix[None], (2, 2))
    with pytest.raises(ValueError):
        minimize_over_ensembles(_reduced_entropy(2, 2), rho, "pure", SMALL, initial=[wrong])


def test_mixed_roof_uses_trivial_candidate():
    rho = random_density((2, 2), 2, seed=10)

    def cost(m):
        # convex in rho: the single-member decomposition is optimal
        return -_entropies(m)

    res = minimize_over_ensembles(cost, rho, "mixed", SMALL.replace(max_iterations=20))
    assert res.value <= float(cost(rho.matrix[None])[0]) + 1e-12
