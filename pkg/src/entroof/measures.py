"""
Entanglement and classical-correlation measures.

Directed classical correlations (``C->`` measures the first side of the cut,
``C<-`` the second), entanglement of formation (two-qubit closed form and a
numeric roof), the mixed convex roofs ``G<-``, ``G->``, ``G_HV`` of those
correlations, and the finite-copy chain ``((n-1)/n) G_HV`` bounding the
entanglement cost.

Every value carries a :class:`~entroof.roof.BoundDirection`: maximizations
found by search are ``lower`` bounds, roof minimizations are ``upper``
bounds, closed forms are ``exact``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .roof import (
    BoundDirection,
    OptimizerConfig,
    minimize_over_ensembles,
    riemannian_descent,
    search_isometries,
    _haar_isometry,
)
from .states import (
    PRUNE_TOL,
    DensityMatrix,
    Ensemble,
    Povm,
    PureState,
    _entropy,
    _entropy_of_spectrum,
    _permute,
    _ptrace,
    binary_entropy,
)

EIG_FLOOR = 1e-15

# inner budget for the correlation searches nested in G roofs
NESTED_INIT_ITERATIONS = 60
NESTED_WARM_ITERATIONS = 6


# ---------------------------------------------------------------------------
# cuts


@dataclass(frozen=True)
class Cut:
    """Bipartition of tensor factors into a first side ``a`` and a second side ``b``."""

    a: tuple[int, ...]
    b: tuple[int, ...]

    def __str__(self):
        return ",".join(map(str, self.a)) + "/" + ",".join(map(str, self.b))

    def validate(self, n_factors: int) -> "Cut":
        if not self.a or not self.b:
            raise ValueError(f"cut {self} has an empty side")
        both = self.a + self.b
        if sorted(both) != list(range(n_factors)):
            raise ValueError(f"cut {self} does not partition factors 0..{n_factors - 1}")
        return self

    def sizes(self, dims) -> tuple[int, int]:
        return int(np.prod([dims[i] for i in self.a])), int(np.prod([dims[i] for i in self.b]))


def as_cut(cut, n_factors: int) -> Cut:
    """Accept a :class:`Cut`, a ``"0,1/2,3"`` string, a pair of index lists, or ``None`` for ``0/1``."""
    if cut is None:
        if n_factors != 2:
            raise ValueError("a cut is required for states with more than two factors")
        cut = Cut((0,), (1,))
    elif isinstance(cut, str):
        try:
            left, right = cut.split("/")
            cut = Cut(tuple(int(x) for x in left.split(",") if x.strip()), tuple(int(x) for x in right.split(",") if x.strip()))
        except ValueError:
            raise ValueError(f"cannot parse cut {cut!r}; expected e.g. '0,1/2,3'") from None
    elif not isinstance(cut, Cut):
        left, right = cut
        cut = Cut(tuple(int(x) for x in left), tuple(int(x) for x in right))
    return cut.validate(n_factors)


def bipartite(rho: DensityMatrix, cut) -> tuple[DensityMatrix, Cut]:
    """``rho`` with factors regrouped as ``[d_a, d_b]`` along ``cut``."""
    cut = as_cut(cut, len(rho.dims))
    order = list(cut.a + cut.b)
    da, db = cut.sizes(rho.dims)
    m = _permute(rho.matrix, rho.dims, order)
    return DensityMatrix(m, (da, db)), cut


def _ungroup(ens: Ensemble, rho: DensityMatrix, cut: Cut) -> Ensemble:
    """Map an ensemble on the regrouped ``[d_a, d_b]`` space back to the factors of ``rho``."""
    order = list(cut.a + cut.b)
    grouped = [rho.dims[i] for i in order]
    inv = list(np.argsort(order))
    members = _permute(np.asarray(ens.members), grouped, inv)
    return Ensemble(ens.weights, members, rho.dims, kind=ens.kind, values=ens.values)


# ---------------------------------------------------------------------------
# results


@dataclass
class MeasureResult:
    """Value in bits with its bound direction, witness and optimizer diagnostics."""

    measure: str
    value: float
    direction: BoundDirection
    cut: str = ""
    witness: Povm | Ensemble | None = None
    diagnostics: dict = field(default_factory=dict)

    def __str__(self):
        return f"{self.value:.6f} ({self.direction})"

    def to_dict(self, witness: bool = True) -> dict:
        out = {
            "measure": self.measure,
            "cut": self.cut,
            "value_bits": float(self.value),
            "direction": str(self.direction),
            "diagnostics": self.diagnostics,
        }
        if witness and self.witness is not None:
            out["witness"] = witness_to_json(self.witness)
        return out


def _matrix_json(m) -> dict:
    m = np.asarray(m)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def witness_to_json(w) -> dict:
    if isinstance(w, Povm):
        return {"type": "povm", "effects": [_matrix_json(e) for e in w.effects]}
    if isinstance(w, Ensemble):
        out = {
            "type": "ensemble",
            "kind": w.kind,
            "dims": list(w.dims),
            "weights": w.weights.tolist(),
            "members": [_matrix_json(m) for m in w.members],
        }
        if w.values is not None:
            out["values_bits"] = w.values.tolist()
        return out
    raise TypeError(f"cannot serialize witness of type {type(w).__name__}")


# ---------------------------------------------------------------------------
# entropy kernels


def _h_grad(x: np.ndarray):
    """``h(X) = tr(X) S(X / tr X)`` in bits and its Hermitian gradient, batched."""
    lam, q = np.linalg.eigh(x)
    lam = np.clip(lam, 0.0, None)
    t = lam.sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.log2(np.maximum(lam, EIG_FLOOR))
        lt = np.log2(np.maximum(t, EIG_FLOOR))
    h = -np.sum(np.where(lam > 0, lam * lg, 0.0), axis=-1) + np.where(t > 0, t * lt, 0.0)
    g = (q * (lt[..., None] - lg)[..., None, :]) @ np.conj(np.swapaxes(q, -1, -2))
    return h, g


def entanglement_entropy(phi: PureState, cut=None) -> float:
    """Entropy of either reduction of a pure state across ``cut`` (exact)."""
    cut = as_cut(cut, len(phi.dims))
    m = np.outer(phi.vector, phi.vector.conj())
    sa = float(_entropy(_ptrace(m, phi.dims, list(cut.a))))
    sb = float(_entropy(_ptrace(m, phi.dims, list(cut.b))))
    if abs(sa - sb) > 1e-9:
        raise AssertionError(f"reductions of a pure state disagree: {sa} vs {sb}")
    return min(max(sa, 0.0), np.log2(min(cut.sizes(phi.dims))))


# ---------------------------------------------------------------------------
# directed classical correlation


def _normalize_direction(direction: str) -> str:
    """``"->"`` measures the first side (returns ``"a"``); ``"<-"`` the second (``"b"``)."""
    table = {"->": "a", "right": "a", "a": "a", "<-": "b", "left": "b", "b": "b"}
    try:
        return table[str(direction).lower()]
    except KeyError:
        raise ValueError(f"direction must be '->' or '<-', got {direction!r}") from None


def _half_contract(rho4: np.ndarray, v: np.ndarray, side: str) -> np.ndarray:
    """``T[b, i, u, w, y] = sum_x V[b, i, x] rho[...]`` with the measured ket index contracted.

    ``u, w`` index the unmeasured side (ket, bra) and ``y`` the measured bra.
    """
    b, da, db = rho4.shape[0], rho4.shape[1], rho4.shape[2]
    if side == "a":
        flat = rho4.reshape(b, da, db * da * db)
        t = (v @ flat).reshape(b, v.shape[1], db, da, db)
        return t.transpose(0, 1, 2, 4, 3)
    flat = rho4.transpose(0, 2, 1, 3, 4).reshape(b, db, da * da * db)
    return (v @ flat).reshape(b, v.shape[1], da, da, db)


def _conditional_states(rho4: np.ndarray, v: np.ndarray, side: str) -> np.ndarray:
    """Unnormalized states of the unmeasured side for rank-one POVMs ``v``.

    ``rho4`` has shape ``(B, da, db, da, db)``; ``v`` has shape ``(B, n, d_measured)``.
    """
    t = _half_contract(rho4, v, side)
    return (t @ v.conj()[:, :, None, :, None])[..., 0]


def _conditional_entropy_grad(rho4, v, side):
    """Average conditional entropy ``sum_i p_i S(rho_i)`` and ``d/d conj(V)``."""
    t = _half_contract(rho4, v, side)
    sig = (t @ v.conj()[:, :, None, :, None])[..., 0]
    h, g = _h_grad(sig)
    b, n, du = t.shape[:3]
    dm = t.shape[-1]
    # z[b, i, y] = sum_{u, w} g[b, i, w, u] t[b, i, u, w, y]
    gt = g.transpose(0, 1, 3, 2).reshape(b, n, 1, du * du)
    z = (gt @ t.reshape(b, n, du * du, dm))[:, :, 0, :]
    return h.sum(axis=1), z, g


def _marginal_entropy(rho4, side):
    """Entropy of the side that is *not* measured."""
    if side == "a":
        m = np.einsum("baxay->bxy", rho4)
    else:
        m = np.einsum("bxaya->bxy", rho4)
    return _entropy(m)


def _correlation_search(members: np.ndarray, da: int, db: int, side: str, config: OptimizerConfig, n_outcomes=None):
    """Batched ``C`` over a stack of normalized members.

    Member ``i`` gets ``config.restarts`` restarts seeded ``(seed, k)``
    irrespective of its position, so its value depends only on the member.
    Returns values ``(N,)``, best isometries ``(N, n, d)``, and convergence flags.
    """
    members = np.asarray(members, dtype=complex)
    nm = members.shape[0]
    dm = da if side == "a" else db
    n_out = dm * dm if n_outcomes is None else int(n_outcomes)
    r = config.restarts
    rho4 = members.reshape(nm, da, db, da, db)
    s0 = _marginal_entropy(rho4, side)
    big = np.repeat(rho4, r, axis=0)
    rngs = [config.restart_rng(k) for _ in range(nm) for k in range(r)]

    def cost_grad(v, idx):
        f, z, _ = _conditional_entropy_grad(big[idx], v, side)
        return f, z

    def cost(v, idx):
        return cost_grad(v, idx)[0]

    w, _, _, conv = search_isometries(cost, (n_out, dm), rngs, config, cost_grad=cost_grad, indexed=True)
    f = cost(w, np.arange(w.shape[0])).reshape(nm, r)
    best = np.argmin(f, axis=1)
    idx = np.arange(nm)
    vals = s0 - f[idx, best]
    w = w.reshape(nm, r, n_out, dm)[idx, best]
    return vals, w, conv.reshape(nm, r)[idx, best]


def classical_correlation(rho: DensityMatrix, cut=None, direction: str = "->", config: OptimizerConfig | None = None, *, n_outcomes=None) -> MeasureResult:
    """Henderson-Vedral correlation ``S(unmeasured) - min sum_i p_i S(rho_i)``.

    ``direction="->"`` measures the first side of the cut (``C->``),
    ``"<-"`` the second (``C<-``).  The search is over rank-one POVMs with
    ``d**2`` outcomes by default; the value is a lower bound, clamped at 0
    with the trivial POVM as witness.
    """
    config = config or OptimizerConfig()
    side = _normalize_direction(direction)
    bp, cut = bipartite(rho, cut)
    da, db = bp.dims
    vals, w, conv = _correlation_search(bp.matrix[None], da, db, side, config, n_outcomes)
    value, witness = float(vals[0]), Povm.from_isometry(w[0])
    if value <= 0.0:
        value, witness = 0.0, Povm.trivial(da if side == "a" else db)
    name = "C->" if side == "a" else "C<-"
    return MeasureResult(
        name,
        value,
        BoundDirection.LOWER,
        str(cut),
        witness,
        {"restarts": config.restarts, "converged": bool(conv[0]), "measured_side": side, "n_outcomes": int(w.shape[1])},
    )


def classical_correlation_max(rho: DensityMatrix, cut=None, config: OptimizerConfig | None = None) -> MeasureResult:
    """``C = max(C->, C<-)``; witness and diagnostics from the winning direction."""
    fwd = classical_correlation(rho, cut, "->", config)
    bwd = classical_correlation(rho, cut, "<-", config)
    win = fwd if fwd.value >= bwd.value else bwd
    diag = dict(win.diagnostics, c_right=fwd.value, c_left=bwd.value, winner=win.measure)
    return MeasureResult("C", win.value, BoundDirection.LOWER, win.cut, win.witness, diag)


# ---------------------------------------------------------------------------
# entanglement of formation


_SIGMA_YY = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])


def concurrence(rho: DensityMatrix) -> float:
    """Wootters concurrence of a two-qubit state."""
    if tuple(rho.dims) != (2, 2):
        raise ValueError(f"concurrence needs a two-qubit state, got dims {list(rho.dims)}")
    m = rho.matrix
    flipped = _SIGMA_YY @ m.conj() @ _SIGMA_YY
    lam, q = np.linalg.eigh(m)
    sq = (q * np.sqrt(np.clip(lam, 0, None))) @ q.conj().T
    r = np.sqrt(np.clip(np.linalg.eigvalsh(sq @ flipped @ sq), 0, None))[::-1]
    return float(max(0.0, r[0] - r[1] - r[2] - r[3]))


def eof_two_qubit_exact(rho: DensityMatrix) -> MeasureResult:
    """Entanglement of formation from the concurrence: ``h((1 + sqrt(1 - C^2)) / 2)``."""
    c = concurrence(rho)
    value = binary_entropy((1 + np.sqrt(max(0.0, 1 - c * c))) / 2)
    return MeasureResult("E_f", value, BoundDirection.EXACT, "0/1", None, {"concurrence": c, "method": "wootters"})


def _eof_member_cost(da: int, db: int):
    def cost(members):
        members = np.asarray(members)
        red = np.einsum("nabcb->nac", members.reshape(-1, da, db, da, db))
        return _entropy(red)

    return cost


def _eof_member_grad(da: int, db: int):
    eye = np.eye(db)

    def grad(x):
        red = np.einsum("nabcb->nac", x.reshape(-1, da, db, da, db))
        h, g = _h_grad(red)
        return h, np.einsum("nac,bd->nabcd", g, eye).reshape(x.shape)

    return grad


def eof_numeric(rho: DensityMatrix, cut=None, config: OptimizerConfig | None = None, *, initial: Sequence[Ensemble] = ()) -> MeasureResult:
    """Convex roof of the entanglement entropy over pure decompositions (upper bound)."""
    config = config or OptimizerConfig()
    bp, cut = bipartite(rho, cut)
    da, db = bp.dims
    init = [_regroup_ensemble(e, rho, cut) for e in initial]
    res = minimize_over_ensembles(_eof_member_cost(da, db), bp, "pure", config, member_grad=_eof_member_grad(da, db), initial=init, lower_bound=0.0)
    direction = BoundDirection.EXACT if res.diagnostics.get("best_restart") == "unique" else BoundDirection.UPPER
    return MeasureResult("E_f", max(res.value, 0.0), direction, str(cut), _ungroup(res.witness, rho, cut), res.diagnostics)


def _regroup_ensemble(ens: Ensemble, rho: DensityMatrix, cut: Cut) -> Ensemble:
    order = list(cut.a + cut.b)
    da, db = cut.sizes(rho.dims)
    members = _permute(np.asarray(ens.members), rho.dims, order)
    return Ensemble(ens.weights, members, (da, db), kind=ens.kind)


# ---------------------------------------------------------------------------
# G roofs


def nested_config(config: OptimizerConfig) -> OptimizerConfig:
    """Per-member correlation budget inside a roof: ``max(4, restarts / 4)`` restarts."""
    return config.replace(restarts=max(4, config.restarts // 4), ensemble_size="auto")


def _sides(variant: str) -> tuple[str, ...]:
    v = str(variant).lower()
    if v in ("hv", "max", "g-hv", "g_hv"):
        return ("a", "b")
    return (_normalize_direction(v),)


def _correlation_member_cost(da: int, db: int, sides, config: OptimizerConfig):
    def cost(members):
        members = np.asarray(members)
        best = np.zeros(members.shape[0])
        for side in sides:
            vals, _, _ = _correlation_search(members, da, db, side, config)
            best = np.maximum(best, vals)
        return best

    return cost


class _CorrelationRoofGradient:
    """Danskin gradient of ``sum_i tr(X_i) C(X_i / tr X_i)`` with warm-started inner POVMs.

    At the inner optimum the gradient of ``p C->(rho)`` with respect to the
    unnormalized member is ``I x H_b - sum_k E_k x H_k`` (``H`` the entropy
    gradients of the marginal and of the conditional states); the ``C<-``
    case is mirrored.  The inner POVMs of the previous call seed the next.
    """

    def __init__(self, da: int, db: int, sides, config: OptimizerConfig):
        self.da, self.db, self.sides, self.config = da, db, sides, config
        self.reset()

    def reset(self):
        self.warm = {}
        self.calls = 0

    def _inner(self, rho4, side):
        nm = rho4.shape[0]
        dm = self.da if side == "a" else self.db
        n_out = dm * dm
        prev = self.warm.get(side)
        if prev is None or prev.shape[0] != nm:
            r = 2
            big = np.repeat(rho4, r, axis=0)
            rngs = [self.config.restart_rng(1000 + k) for _ in range(nm) for k in range(r)]
            w0 = np.stack([_haar_isometry(g, n_out, dm) for g in rngs])
            cg = lambda v, i: _conditional_entropy_grad(big[i], v, side)[:2]  # noqa: E731
            w, f, _, _ = riemannian_descent(cg, w0, NESTED_INIT_ITERATIONS, 1e-10, indexed=True)
            best = np.argmin(f.reshape(nm, r), axis=1)
            v = w.reshape(nm, r, n_out, dm)[np.arange(nm), best]
        else:
            cg = lambda v, i: _conditional_entropy_grad(rho4[i], v, side)[:2]  # noqa: E731
            v, _, _, _ = riemannian_descent(cg, prev, NESTED_WARM_ITERATIONS, 1e-12, indexed=True)
        self.warm[side] = v
        f, _, hk = _conditional_entropy_grad(rho4, v, side)
        return f, v, hk

    def __call__(self, x):
        self.calls += 1
        da, db = self.da, self.db
        tr = np.einsum("nii->n", x).real
        rho = x / np.maximum(tr, PRUNE_TOL)[:, None, None]
        rho4 = rho.reshape(-1, da, db, da, db)
        best_val = np.full(x.shape[0], -np.inf)
        best_g = np.zeros_like(x)
        for side in self.sides:
            f, v, hk = self._inner(rho4, side)
            if side == "a":
                marg = np.einsum("naxay->nxy", rho4)
                hm, gm = _h_grad(marg)
                eff = np.einsum("nkx,nky->nkxy", v.conj(), v)
                g = np.einsum("xy,nuv->nxuyv", np.eye(da), gm) - np.einsum("nkxy,nkuv->nxuyv", eff, hk)
            else:
                marg = np.einsum("nxaya->nxy", rho4)
                hm, gm = _h_grad(marg)
                eff = np.einsum("nkx,nky->nkxy", v.conj(), v)
                g = np.einsum("nxy,uv->nxuyv", gm, np.eye(db)) - np.einsum("nkxy,nkuv->nxuyv", hk, eff)
            val = hm - f
            g = g.reshape(x.shape)
            better = val > best_val
            best_val = np.where(better, val, best_val)
            best_g[better] = g[better]
        return np.where(tr >= PRUNE_TOL, tr * best_val, 0.0), best_g


def g_roof(rho: DensityMatrix, cut=None, variant: str = "HV", config: OptimizerConfig | None = None, *, initial: Sequence[Ensemble] = ()) -> MeasureResult:
    """Mixed convex roof of a classical correlation: ``G<-``, ``G->`` or ``G_HV``.

    Members are valued with :func:`classical_correlation` under
    :func:`nested_config`; those values are lower bounds, so the roof value is
    a heuristic estimate from above rather than a certified upper bound.
    The trivial decomposition and any ``initial`` decompositions are always
    among the candidates.  For a pure input the decomposition is unique and
    the result is the correlation itself, reported as a lower bound.
    """
    config = config or OptimizerConfig()
    sides = _sides(variant)
    bp, cut = bipartite(rho, cut)
    da, db = bp.dims
    inner = nested_config(config)
    cost = _correlation_member_cost(da, db, sides, inner)
    grad = _CorrelationRoofGradient(da, db, sides, inner)
    init = [_regroup_ensemble(e, rho, cut) for e in initial]
    res = minimize_over_ensembles(cost, bp, "mixed", config, member_grad=grad, initial=init, lower_bound=0.0)
    name = {("a", "b"): "G_HV", ("a",): "G->", ("b",): "G<-"}[sides]
    unique = res.diagnostics.get("best_restart") == "unique"
    direction = BoundDirection.LOWER if unique else BoundDirection.UPPER
    diag = dict(res.diagnostics, nested_restarts=inner.restarts, nested_note="member correlations are search lower bounds")
    return MeasureResult(name, max(res.value, 0.0), direction, str(cut), _ungroup(res.witness, rho, cut), diag)


def ec_lower_chain(rho: DensityMatrix, cut=None, n: int = 10, config: OptimizerConfig | None = None, *, initial: Sequence[Ensemble] = ()) -> dict:
    """Finite-copy chain ``E_f(rho^{x n}) / n >= ((n - 1) / n) G_HV(rho)``.

    ``g_estimate`` comes from :func:`g_roof` and is not a certified lower
    bound, so ``chain_value`` is an estimate of the bound on the
    entanglement cost, not a certificate.
    """
    if int(n) < 1:
        raise ValueError("n must be at least 1")
    n = int(n)
    g = g_roof(rho, cut, "HV", config, initial=initial)
    factor = (n - 1) / n
    return {
        "measure": "ec-chain",
        "cut": g.cut,
        "n": n,
        "g_estimate": g.value,
        "g_direction": str(g.direction),
        "chain_value": 0.0 if n == 1 else factor * g.value,
        "limit_value": g.value,
        "label": "estimate",
        "note": "G_HV is estimated by a numeric roof (search over decompositions, correlations from below); "
        "chain_value is heuristic evidence for the entanglement-cost bound, not a certificate.",
        "diagnostics": g.diagnostics,
    }
