"""
Search machinery for POVM maximization and (mixed) convex-roof minimization.

Both families are parametrized by isometries:

* a rank-one POVM with ``n`` outcomes on a ``d``-dimensional factor is an
  ``(n, d)`` isometry ``V`` with ``E_i = row_i(V)^dagger row_i(V)``;
* a decomposition of ``rho`` is obtained from its canonical purification by
  measuring the ancilla.  A ``(n*k, r)`` isometry ``W`` split into ``n``
  blocks of ``k`` rows defines the ancilla POVM ``E_i = W_i^dagger W_i``;
  ``k = 1`` gives pure ensembles, ``k = r`` reaches every mixed one.

Every search is a batch of independent restarts.  Restart ``k`` draws from
its own generator seeded with ``(seed, k)``, so its trajectory does not
depend on how many other restarts run beside it.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .states import (
    PRUNE_TOL,
    DensityMatrix,
    Ensemble,
    Povm,
    spectral_decomposition,
)


class BoundDirection(str, enum.Enum):
    """Whether a numeric value is exact, or over/under-estimates the true quantity."""

    EXACT = "exact"
    UPPER = "upper"
    LOWER = "lower"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class OptimizerConfig:
    """Budget for the multi-start searches.

    ``max_iterations`` bounds the gradient phase of each restart;
    ``explore_iterations`` bounds the derivative-free hill climb that
    precedes it (and is the whole search when no gradient is available).
    """

    restarts: int = 16
    max_iterations: int = 2000
    tolerance: float = 1e-8
    ensemble_size: int | str = "auto"
    seed: int = 0
    explore_iterations: int = 40

    def __post_init__(self):
        if int(self.restarts) < 1:
            raise ValueError("restarts must be at least 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.ensemble_size != "auto" and int(self.ensemble_size) < 1:
            raise ValueError("ensemble_size must be 'auto' or a positive integer")
        if int(self.max_iterations) < 0 or int(self.explore_iterations) < 0:
            raise ValueError("iteration budgets must be nonnegative")

    def replace(self, **changes) -> "OptimizerConfig":
        return dataclasses.replace(self, **changes)

    def restart_rng(self, k: int) -> np.random.Generator:
        return np.random.default_rng([int(self.seed) & 0xFFFFFFFF, int(k)])

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class SearchResult:
    value: float
    direction: BoundDirection
    witness: Povm | Ensemble | None
    diagnostics: dict = field(default_factory=dict)
    isometry: np.ndarray | None = None


# ---------------------------------------------------------------------------
# Stiefel manifold kernels (batched over leading axes)


def _dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def polar(w: np.ndarray) -> np.ndarray:
    """Closest isometry (polar factor); used as the retraction."""
    u, _, vh = np.linalg.svd(w, full_matrices=False)
    return u @ vh


def tangent(w: np.ndarray, z: np.ndarray) -> np.ndarray:
    s = _dagger(w) @ z
    return z - w @ ((s + _dagger(s)) / 2)


def _haar_isometry(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    z = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def is_isometry(w: np.ndarray, tol: float = 1e-8) -> bool:
    w = np.asarray(w)
    return w.ndim == 2 and w.shape[0] >= w.shape[1] and np.max(np.abs(_dagger(w) @ w - np.eye(w.shape[1]))) <= tol


def _caller(fn, indexed: bool):
    if indexed:
        return fn
    return lambda w, idx: fn(w)


_SHRINK = 1.5 ** -0.25


def hill_climb(cost, w, rngs, iterations: int, step: float = 0.5, min_step: float = 1e-7, indexed: bool = False):
    """Accept-on-improvement random search on the Stiefel manifold.

    ``cost`` maps a ``(B, n, k)`` stack to ``(B,)`` values (minimized); with
    ``indexed`` it is called as ``cost(w_subset, batch_indices)``.  Each
    batch element perturbs with its own generator; the step follows the
    one-fifth success rule (grow on success, shrink slowly on failure).
    """
    call = _caller(cost, indexed)
    w = np.array(w, dtype=complex)
    b, n, k = w.shape
    f = np.asarray(call(w, np.arange(b)), dtype=float)
    steps = np.full(b, step)
    scale = 1.0 / np.sqrt(n)
    for _ in range(iterations):
        active = steps > min_step
        if not active.any():
            break
        noise = np.stack([g.standard_normal((n, k)) + 1j * g.standard_normal((n, k)) for g in rngs])
        idx = np.flatnonzero(active)
        cand = polar(w[idx] + (steps[idx] * scale)[:, None, None] * noise[idx])
        fc = np.asarray(call(cand, idx), dtype=float)
        better = fc < f[idx]
        w[idx[better]] = cand[better]
        f[idx[better]] = fc[better]
        steps[idx] = np.where(better, np.minimum(steps[idx] * 1.5, 1.0), steps[idx] * _SHRINK)
    return w, f


def riemannian_descent(cost_grad, w, max_iter: int, tol: float, patience: int = 4, refresh: bool = False, indexed: bool = False):
    """Batched steepest descent on the Stiefel manifold with Armijo backtracking.

    ``cost_grad(w)`` returns ``(f, z)`` where ``z = dF/d conj(W)``; only
    unfinished elements are evaluated, and with ``indexed`` the call is
    ``cost_grad(w_subset, batch_indices)``.  Trial steps start from the
    Barzilai-Borwein length.  An element stops once its relative decrease
    stays below ``tol`` for ``patience`` iterations or the line search
    cannot make progress.  With ``refresh`` the current point is re-evaluated
    every iteration, for objectives that sharpen between calls
    (warm-started inner searches).  Returns ``(w, f, iterations, converged)``.
    """
    call = _caller(cost_grad, indexed)
    w = np.array(w, dtype=complex)
    b = w.shape[0]
    f, z = call(w, np.arange(b))
    f = np.array(f, dtype=float)
    z = np.array(z)
    t = np.full(b, 1.0)
    active = np.ones(b, dtype=bool)
    converged = np.zeros(b, dtype=bool)
    quiet = np.zeros(b, dtype=int)
    iters = np.zeros(b, dtype=int)
    prev_w = prev_g = None
    for _ in range(max_iter):
        if not active.any():
            break
        if refresh:
            idx = np.flatnonzero(active)
            fr, zr = call(w[idx], idx)
            f[idx], z[idx] = fr, zr
        g = tangent(w, z)
        slope = 2 * np.sum(np.abs(g) ** 2, axis=(-2, -1))
        flat = active & (slope < tol * tol)
        converged |= flat
        active &= ~flat
        if not active.any():
            break
        iters += active
        trial = np.minimum(t * 2.0, 1e3)
        if prev_w is not None:
            sw = w - prev_w
            yg = g - tangent(w, prev_g)
            sy = np.real(np.sum(sw.conj() * yg, axis=(-2, -1)))
            ss = np.real(np.sum(sw.conj() * sw, axis=(-2, -1)))
            bb = np.divide(ss, sy, out=np.zeros(b), where=sy > 1e-30)
            trial = np.where(bb > 0, np.clip(bb, 1e-8, 1e3), trial)
        done = ~active
        new_w, new_f, new_z = w.copy(), f.copy(), z.copy()
        for _ls in range(40):
            idx = np.flatnonzero(~done)
            if idx.size == 0:
                break
            cand = polar(w[idx] - trial[idx, None, None] * g[idx])
            fc, zc = call(cand, idx)
            ok = np.asarray(fc, dtype=float) <= f[idx] - 1e-4 * trial[idx] * slope[idx]
            hit = idx[ok]
            new_w[hit], new_f[hit], new_z[hit] = cand[ok], np.asarray(fc)[ok], np.asarray(zc)[ok]
            done[hit] = True
            miss = idx[~ok]
            trial[miss] *= 0.5
            if miss.size and np.all(trial[miss] < 1e-14):
                break
        stalled = active & ~done
        converged |= stalled
        active &= ~stalled
        moved = active & done
        drop = f - new_f
        small = moved & (drop <= tol * (1.0 + np.abs(f)))
        quiet = np.where(small, quiet + 1, 0)
        prev_w, prev_g = w.copy(), g
        w[moved], f[moved], z[moved] = new_w[moved], new_f[moved], new_z[moved]
        t = np.where(moved, trial, t)
        settled = quiet >= patience
        converged |= settled
        active &= ~settled
    return w, f, iters, converged


def search_isometries(cost, shape, rngs, config: OptimizerConfig, *, cost_grad=None, init: Sequence[np.ndarray] = (), refresh: bool = False, indexed: bool = False):
    """Minimize ``cost`` over ``(n, k)`` isometries, one batch element per generator.

    Element ``j`` starts from ``init[j]`` when given, otherwise from a Haar
    isometry drawn from ``rngs[j]``.  Returns final isometries, values,
    iteration counts and convergence flags, all batched.  ``indexed`` is
    passed on to the kernels (objectives called with batch indices).
    """
    n, k = shape
    starts = []
    for j, g in enumerate(rngs):
        w0 = _haar_isometry(g, n, k)
        if j < len(init) and init[j] is not None:
            w0 = polar(np.asarray(init[j], dtype=complex).reshape(n, k))
        starts.append(w0)
    w = np.stack(starts)
    b = len(rngs)
    if cost_grad is None:
        budget = config.explore_iterations + config.max_iterations
        w, f = hill_climb(cost, w, rngs, budget, indexed=indexed)
        return w, f, np.full(b, budget), np.zeros(b, dtype=bool)
    if config.explore_iterations:
        value_only = (lambda x, i: cost_grad(x, i)[0]) if indexed else (lambda x: cost_grad(x)[0])
        w, f = hill_climb(value_only, w, rngs, config.explore_iterations, indexed=indexed)
    return riemannian_descent(cost_grad, w, config.max_iterations, config.tolerance, refresh=refresh, indexed=indexed)


# ---------------------------------------------------------------------------
# POVM maximization


def batch_objective(objective: Callable[[Povm], float]):
    """Lift a ``Povm -> float`` function to the batched isometry form."""

    def lifted(v):
        return np.array([objective(Povm.from_isometry(x)) for x in v])

    return lifted


def pad_isometry(v: np.ndarray, n_outcomes: int) -> np.ndarray:
    """Append zero rows (null outcomes) so that ``v`` has ``n_outcomes`` rows."""
    v = np.asarray(v, dtype=complex)
    if v.shape[0] > n_outcomes:
        raise ValueError("cannot pad to fewer outcomes")
    return np.vstack([v, np.zeros((n_outcomes - v.shape[0], v.shape[1]), dtype=complex)])


def optimize_povm(objective, local_dim: int, n_outcomes: int | None = None, config: OptimizerConfig | None = None, *, gradient=None, init: Sequence[np.ndarray] = ()) -> SearchResult:
    """Maximize ``objective`` over rank-one POVMs with ``n_outcomes`` outcomes.

    Parameters
    ----------
    objective : callable
        Receives a stack of isometries ``(batch, n_outcomes, local_dim)`` and
        returns one value per element.  Wrap a plain ``Povm -> float``
        function with :func:`batch_objective`.
    local_dim : int
        Dimension of the measured factor.
    n_outcomes : int, optional
        Defaults to ``local_dim**2``.
    gradient : callable, optional
        ``gradient(V) -> (values, dF/d conj(V))`` for the same objective;
        enables the Riemannian polish after the random search.
    init : sequence of arrays
        Warm-start isometries (zero-padded when they have fewer rows).

    Returns
    -------
    SearchResult
        Best value over restarts with ``direction=lower``: any value found
        is attained by the returned POVM, so it never exceeds the supremum.
    """
    config = config or OptimizerConfig()
    n_outcomes = local_dim**2 if n_outcomes is None else int(n_outcomes)
    if n_outcomes < local_dim:
        raise ValueError(f"n_outcomes ({n_outcomes}) must be at least local_dim ({local_dim})")
    init = [pad_isometry(v, n_outcomes) for v in init]

    def cost(v):
        return -np.asarray(objective(v), dtype=float)

    cost_grad = None
    if gradient is not None:

        def cost_grad(v):
            f, z = gradient(v)
            return -np.asarray(f, dtype=float), -z

    rngs = [config.restart_rng(k) for k in range(config.restarts)]
    w, f, iters, conv = search_isometries(cost, (n_outcomes, local_dim), rngs, config, cost_grad=cost_grad, init=init)
    # re-evaluate so the reported value is exactly what the witness attains
    vals = np.asarray(objective(w), dtype=float)
    best = int(np.argmax(vals))
    return SearchResult(
        value=float(vals[best]),
        direction=BoundDirection.LOWER,
        witness=Povm.from_isometry(w[best]),
        isometry=w[best],
        diagnostics={
            "restarts": config.restarts,
            "best_restart": best,
            "converged": bool(conv[best]) if cost_grad is not None else None,
            "iterations": int(iters[best]),
            "n_outcomes": n_outcomes,
        },
    )


# ---------------------------------------------------------------------------
# decompositions from the purification


def _purification_rows(rho: DensityMatrix):
    """Rows ``a_j = sqrt(l_j) e_j`` of the canonical purification."""
    evals, evecs = spectral_decomposition(rho)
    return (np.sqrt(evals)[:, None] * evecs.T).astype(complex)


def pure_ensembles_from_purification(rho: DensityMatrix, m: int, mixing_isometry) -> Ensemble:
    """Pure decomposition ``|chi_i> = sum_j U_ij sqrt(l_j) |e_j>`` for an ``(m, r)`` isometry ``U``."""
    a = _purification_rows(rho)
    u = np.asarray(mixing_isometry, dtype=complex)
    r = a.shape[0]
    if u.shape != (m, r):
        raise ValueError(f"mixing isometry must have shape ({m}, {r}), got {u.shape}")
    if m < r:
        raise ValueError(f"ensemble size {m} is below the rank {r}")
    if not is_isometry(u):
        raise ValueError("mixing matrix columns are not orthonormal within 1e-8")
    chi = u @ a
    return _ensemble_from_vectors(chi, rho.dims)


def _ensemble_from_vectors(chi: np.ndarray, dims) -> Ensemble:
    p = np.sum(np.abs(chi) ** 2, axis=1)
    keep = p >= PRUNE_TOL
    chi, p = chi[keep], p[keep]
    members = np.einsum("ix,iy->ixy", chi, chi.conj()) / p[:, None, None]
    return Ensemble(p / p.sum(), members, dims, kind="pure")


def mixed_ensembles_from_purification(rho: DensityMatrix, ancilla_povm: Povm) -> Ensemble:
    """Decomposition induced by measuring the purifying ancilla with ``ancilla_povm``."""
    a = _purification_rows(rho)
    r = a.shape[0]
    if ancilla_povm.dim != r:
        raise ValueError(f"ancilla POVM acts on dimension {ancilla_povm.dim}, the purifying ancilla has dimension {r}")
    unnorm = np.einsum("jx,ikj,ky->ixy", a, ancilla_povm.effects, a.conj())
    p = np.einsum("ixx->i", unnorm).real
    keep = p >= PRUNE_TOL
    unnorm, p = unnorm[keep], p[keep]
    members = unnorm / p[:, None, None]
    members = (members + _dagger(members)) / 2
    pure = all(np.linalg.matrix_rank(mm, tol=1e-10) == 1 for mm in members)
    return Ensemble(p / p.sum(), members, rho.dims, kind="pure" if pure else "mixed")


def ancilla_povm_from_blocks(w: np.ndarray, block: int) -> Povm:
    """``E_i = W_i^dagger W_i`` for consecutive ``block``-row slices of ``w``."""
    n = w.shape[0] // block
    wb = w.reshape(n, block, w.shape[1])
    return Povm(np.einsum("isx,isy->ixy", wb.conj(), wb))


def _members_from_blocks(w, a, block: int):
    """Unnormalized members for a batch of isometries ``w`` of shape ``(B, n*block, r)``."""
    chi = w @ a
    b, nk, dd = chi.shape
    chi = chi.reshape(b, nk // block, block, dd)
    return chi, np.einsum("bnsx,bnsy->bnxy", chi, chi.conj())


# ---------------------------------------------------------------------------
# Caratheodory reduction


def _hermitian_coords(members: np.ndarray) -> np.ndarray:
    d = members.shape[-1]
    iu = np.triu_indices(d, 1)
    diag = np.real(np.einsum("nii->ni", members))
    up = members[:, iu[0], iu[1]]
    return np.concatenate([diag, up.real, up.imag], axis=1)


def caratheodory_reduce(ensemble: Ensemble, values, tol: float = 1e-12) -> Ensemble:
    """Shrink an ensemble to affinely independent members with the same averages.

    Each member becomes the point (real coordinates of the matrix, value);
    while the points are affinely dependent, the weights move along the
    dependence until one vanishes and that member is dropped.  Both
    ``sum p_i rho_i`` and ``sum p_i f_i`` are preserved; the result has at
    most ``d**2 + 1`` members.
    """
    vals = np.asarray(values, dtype=float)
    if vals.shape != (len(ensemble),):
        raise ValueError(f"got {vals.size} values for {len(ensemble)} members")
    members = np.array(ensemble.members)
    p = np.array(ensemble.weights, dtype=float)
    coords = np.concatenate([_hermitian_coords(members), vals[:, None]], axis=1)
    live = np.flatnonzero(p > 0)
    while live.size > 1:
        m = np.vstack([coords[live].T, np.ones(live.size)])
        _, s, vh = np.linalg.svd(m, full_matrices=True)
        full = np.zeros(live.size)
        full[: s.size] = s
        if live.size <= m.shape[0] and full[-1] > tol * max(1.0, full[0]):
            break
        lam = vh[-1].real
        if lam.max() <= 0:
            lam = -lam
        pos = lam > 0
        ratios = np.full(live.size, np.inf)
        ratios[pos] = p[live][pos] / lam[pos]
        j = int(np.argmin(ratios))
        p[live] = p[live] - ratios[j] * lam
        p[live[j]] = 0.0
        p[live] = np.clip(p[live], 0.0, None)
        live = live[p[live] > 0]
    return Ensemble(p[live] / p[live].sum(), members[live], ensemble.dims, kind=ensemble.kind, values=vals[live])


# ---------------------------------------------------------------------------
# convex roofs


def _resolve_size(kind: str, config: OptimizerConfig, r: int, d: int) -> tuple[int, int]:
    """Number of members and rows per member block."""
    if kind == "pure":
        n = r * r if config.ensemble_size == "auto" else int(config.ensemble_size)
        return max(n, r), 1
    if kind == "mixed":
        n = d * d + 1 if config.ensemble_size == "auto" else int(config.ensemble_size)
        return n, r
    raise ValueError(f"kind must be 'pure' or 'mixed', got {kind!r}")


def _ensemble_from_blocks(w, a, block, dims, kind) -> Ensemble:
    _, x = _members_from_blocks(w[None], a, block)
    x = x[0]
    p = np.einsum("nii->n", x).real
    keep = p >= PRUNE_TOL
    x, p = x[keep], p[keep]
    members = x / p[:, None, None]
    members = (members + _dagger(members)) / 2
    return Ensemble(p / p.sum(), members, dims, kind="pure" if block == 1 else kind)


def evaluate_ensemble(member_cost, ensemble: Ensemble) -> np.ndarray:
    """Per-member values ``f(rho_i)``; ``member_cost`` is vectorized over members."""
    return np.asarray(member_cost(np.asarray(ensemble.members)), dtype=float).reshape(len(ensemble))


def minimize_over_ensembles(
    member_cost: Callable[[np.ndarray], np.ndarray],
    rho: DensityMatrix,
    kind: str = "pure",
    config: OptimizerConfig | None = None,
    *,
    member_grad=None,
    initial: Sequence[Ensemble] = (),
    lower_bound: float | None = None,
) -> SearchResult:
    """Upper bound on ``inf sum_i p_i f(rho_i)`` over decompositions of ``rho``.

    Parameters
    ----------
    member_cost : callable
        ``f`` evaluated on a stack of normalized members ``(N, d, d)``,
        returning ``(N,)`` values.  It must treat members independently;
        the reported value is computed with it, so the witness re-evaluates
        exactly.
    kind : {"pure", "mixed"}
        Family of decompositions.  ``"auto"`` sizes are ``r**2`` pure
        members or ``d**2 + 1`` mixed members.
    member_grad : callable, optional
        ``member_grad(X)`` on unnormalized members ``X`` (shape
        ``(N, d, d)``) returns ``(tr(X_i) f(X_i / tr X_i), G_i)`` with
        ``G_i`` the Hermitian gradient.  Without it the search is
        derivative-free.  If it has a ``reset`` method it is called before
        each restart.
    initial : sequence of Ensemble
        Decompositions evaluated as additional candidates (e.g. a known
        separable decomposition).  For ``kind="mixed"`` the trivial
        one-member decomposition is always a candidate.
    lower_bound : float, optional
        Known lower bound of ``f``; the search stops as soon as a candidate
        attains it.
    """
    config = config or OptimizerConfig()
    d = rho.dim
    evals, _ = spectral_decomposition(rho)
    r = evals.size

    def finish(ens: Ensemble, vals: np.ndarray, diag: dict) -> SearchResult:
        reduced = caratheodory_reduce(ens, vals)
        diag["members_before_reduction"] = len(ens)
        diag["members"] = len(reduced)
        return SearchResult(reduced.average(), BoundDirection.UPPER, reduced, diag)

    if r == 1:
        ens = Ensemble([1.0], rho.matrix[None], rho.dims, kind="pure")
        return finish(ens, evaluate_ensemble(member_cost, ens), {"restarts": 0, "best_restart": "unique", "converged": True, "note": "pure input has a unique decomposition"})

    candidates: list[tuple[str, Ensemble, np.ndarray]] = []
    if kind == "mixed":
        triv = Ensemble([1.0], rho.matrix[None], rho.dims, kind="mixed")
        candidates.append(("trivial", triv, evaluate_ensemble(member_cost, triv)))
    for j, ens in enumerate(initial):
        ens.check_target(rho)
        candidates.append((f"initial:{j}", ens, evaluate_ensemble(member_cost, ens)))

    def best_candidate():
        scores = [float(e.weights @ v) for _, e, v in candidates]
        i = int(np.argmin(scores))
        return i, scores[i]

    if candidates and lower_bound is not None:
        i, score = best_candidate()
        if score <= lower_bound + config.tolerance:
            label, ens, vals = candidates[i]
            return finish(ens, vals, {"restarts": 0, "best_restart": label, "converged": True, "note": "candidate attains the lower bound"})

    n, block = _resolve_size(kind, config, r, d)
    a = _purification_rows(rho)
    shape = (n * block, r)

    def members_of(w):
        chi, x = _members_from_blocks(w, a, block)
        return chi, x

    def cost(w):
        _, x = members_of(w)
        b = x.shape[0]
        tr = np.einsum("bnii->bn", x).real
        safe = np.maximum(tr, PRUNE_TOL)
        vals = np.asarray(member_cost((x / safe[..., None, None]).reshape(b * n, d, d))).reshape(b, n)
        return np.sum(np.where(tr >= PRUNE_TOL, tr * vals, 0.0), axis=1)

    cost_grad = None
    if member_grad is not None:

        def cost_grad(w):
            chi, x = members_of(w)
            b = x.shape[0]
            vals, g = member_grad(x.reshape(b * n, d, d))
            vals = np.asarray(vals, dtype=float).reshape(b, n)
            g = np.asarray(g).reshape(b, n, d, d)
            y = np.einsum("bnxy,bnsy->bnsx", g, chi).reshape(b, n * block, d)
            return vals.sum(axis=1), y @ a.conj().T

    restart_values, restart_iters, restart_conv, results = [], [], [], []

    def record(w, iters, conv):
        ens = _ensemble_from_blocks(w, a, block, rho.dims, kind)
        vals = evaluate_ensemble(member_cost, ens)
        results.append((ens, vals))
        restart_values.append(float(ens.weights @ vals))
        restart_iters.append(int(iters))
        restart_conv.append(bool(conv))

    if member_grad is not None and hasattr(member_grad, "reset"):
        # stateful gradients (warm-started inner searches) run one restart at a time
        for k in range(config.restarts):
            member_grad.reset()
            w, _, iters, conv = search_isometries(cost, shape, [config.restart_rng(k)], config, cost_grad=cost_grad, refresh=True)
            record(w[0], iters[0], conv[0])
            if lower_bound is not None and restart_values[-1] <= lower_bound + config.tolerance:
                break
    else:
        rngs = [config.restart_rng(k) for k in range(config.restarts)]
        w, _, iters, conv = search_isometries(cost, shape, rngs, config, cost_grad=cost_grad)
        for k in range(config.restarts):
            record(w[k], iters[k], conv[k])

    k_best = int(np.argmin(restart_values))
    label, ens, vals = f"restart:{k_best}", *results[k_best]
    if candidates:
        i, score = best_candidate()
        if score < restart_values[k_best]:
            label, ens, vals = candidates[i]
    diag = {
        "restarts": len(restart_values),
        "best_restart": label,
        "converged": restart_conv[k_best] if cost_grad is not None else None,
        "restart_values": restart_values,
        "iterations": restart_iters[k_best],
        "ensemble_size": n,
        "block": block,
    }
    return finish(ens, vals, diag)
