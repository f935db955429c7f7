"""
Finite-dimensional quantum states.

Containers (:class:`DensityMatrix`, :class:`PureState`, :class:`Povm`,
:class:`Ensemble`) validate their invariants on construction. The free
functions work on those containers; the underscore-prefixed array helpers
at the bottom are the raw kernels the optimizers call in tight loops.

All entropies are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
NORM_TOL = 1e-12
WEIGHT_TOL = 1e-12
BARYCENTER_TOL = 1e-9
PRUNE_TOL = 1e-14
RANK_TOL = 1e-12


class InvalidStateError(ValueError):
    """A matrix or vector violates a state invariant.

    ``invariant`` names the violated property (``"hermitian"``, ``"trace"``,
    ``"psd"``, ``"norm"``, ``"dims"``, ``"completeness"``, ``"weights"``,
    ``"barycenter"``).
    """

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class StateFormatError(ValueError):
    """A serialized state does not follow the JSON schema."""


def _as_dims(dims: Iterable[int]) -> tuple[int, ...]:
    out = tuple(int(d) for d in dims)
    if not out or any(d < 1 for d in out):
        raise InvalidStateError("dims", f"factors must be positive integers, got {list(dims)}")
    return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Trace-one positive semidefinite matrix with tensor-factor dimensions."""

    matrix: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = _as_dims(self.dims)
        m = _frozen(self.matrix)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", m)
        side = int(np.prod(dims))
        if m.shape != (side, side):
            raise InvalidStateError("dims", f"matrix shape {m.shape} does not match dims {list(dims)}")
        dev = np.max(np.abs(m - m.conj().T))
        if dev > HERMITIAN_TOL:
            raise InvalidStateError("hermitian", f"max deviation {dev:.3e}")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidStateError("trace", f"trace is {float(tr):.12g}, expected 1")
        lmin = np.linalg.eigvalsh(m).min()
        if lmin < -PSD_TOL:
            raise InvalidStateError("psd", f"minimum eigenvalue {lmin:.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigh(self):
        """Eigenvalues (ascending) and eigenvectors of the Hermitian part."""
        m = self.matrix
        return np.linalg.eigh((m + m.conj().T) / 2)

    def rank(self, tol: float = RANK_TOL) -> int:
        return int(np.sum(np.linalg.eigvalsh(self.matrix) > tol))

    def is_pure(self, tol: float = RANK_TOL) -> bool:
        return self.rank(tol) == 1


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit vector with tensor-factor dimensions."""

    vector: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = _as_dims(self.dims)
        v = _frozen(np.ravel(self.vector))
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "vector", v)
        if v.shape != (int(np.prod(dims)),):
            raise InvalidStateError("dims", f"vector length {v.size} does not match dims {list(dims)}")
        n2 = np.vdot(v, v).real
        if abs(n2 - 1.0) > NORM_TOL:
            raise InvalidStateError("norm", f"squared norm is {float(n2):.12g}, expected 1")

    def density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.vector, self.vector.conj()), self.dims)


@dataclass(frozen=True, eq=False)
class Povm:
    """Positive effects ``E_i`` on one factor, summing to the identity."""

    effects: np.ndarray

    def __post_init__(self):
        e = _frozen(self.effects)
        if e.ndim != 3 or e.shape[1] != e.shape[2] or e.shape[0] < 1:
            raise InvalidStateError("dims", f"effects must have shape (n, d, d), got {e.shape}")
        object.__setattr__(self, "effects", e)
        if np.max(np.abs(e - e.conj().transpose(0, 2, 1))) > HERMITIAN_TOL:
            raise InvalidStateError("hermitian", "effects are not Hermitian")
        lmin = np.linalg.eigvalsh(e).min()
        if lmin < -PSD_TOL:
            raise InvalidStateError("psd", f"effect has eigenvalue {lmin:.3e}")
        dev = np.max(np.abs(e.sum(axis=0) - np.eye(e.shape[1])))
        if dev > PSD_TOL:
            raise InvalidStateError("completeness", f"effects sum to identity only within {dev:.3e}")

    @property
    def dim(self) -> int:
        return self.effects.shape[1]

    def __len__(self):
        return self.effects.shape[0]

    @classmethod
    def from_isometry(cls, v: np.ndarray) -> "Povm":
        """Rank-one POVM ``E_i = row_i(V)^dagger row_i(V)`` of an ``(n, d)`` isometry."""
        v = np.asarray(v)
        return cls(np.einsum("ix,iy->ixy", v.conj(), v))

    @classmethod
    def computational(cls, d: int) -> "Povm":
        return cls(np.array([np.diag(np.eye(d)[i]) for i in range(d)], dtype=complex))

    @classmethod
    def trivial(cls, d: int) -> "Povm":
        return cls(np.eye(d, dtype=complex)[None])


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Weighted decomposition ``sum_i p_i rho_i``.

    ``kind`` is ``"pure"`` when every member is rank one, ``"mixed"`` otherwise
    (the tag records which family of decompositions produced it).
    """

    weights: np.ndarray
    members: np.ndarray
    dims: tuple[int, ...]
    kind: str = "mixed"
    values: np.ndarray | None = field(default=None)

    def __post_init__(self):
        dims = _as_dims(self.dims)
        w = np.array(self.weights, dtype=float)
        w.setflags(write=False)
        m = _frozen(self.members)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "members", m)
        side = int(np.prod(dims))
        if m.ndim != 3 or m.shape[1:] != (side, side) or m.shape[0] != w.shape[0]:
            raise InvalidStateError("dims", f"members shape {m.shape} inconsistent with {w.shape[0]} weights and dims {list(dims)}")
        if self.kind not in ("pure", "mixed"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if np.any(w < 0) or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise InvalidStateError("weights", f"weights must be a probability vector (sum {float(w.sum()):.12g}, min {float(w.min()):.12g})")
        if self.values is not None:
            vals = np.array(self.values, dtype=float)
            if vals.shape != w.shape:
                raise ValueError("values must align with members")
            vals.setflags(write=False)
            object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.weights.shape[0]

    def barycenter(self) -> np.ndarray:
        return np.einsum("i,ixy->xy", self.weights, self.members)

    def check_target(self, rho: DensityMatrix, tol: float = BARYCENTER_TOL) -> float:
        """Max entrywise deviation of the barycenter from ``rho``; raises beyond ``tol``."""
        dev = float(np.max(np.abs(self.barycenter() - rho.matrix)))
        if dev > tol:
            raise InvalidStateError("barycenter", f"ensemble averages to a state {dev:.3e} away from the target")
        return dev

    def member_states(self) -> list[DensityMatrix]:
        return [DensityMatrix(m, self.dims) for m in self.members]

    def average(self, values: Sequence[float] | None = None) -> float:
        vals = self.values if values is None else np.asarray(values, dtype=float)
        if vals is None:
            raise ValueError("ensemble carries no member values")
        return float(self.weights @ vals)


# ---------------------------------------------------------------------------
# operations


def tensor(a, b):
    """Tensor product of two density matrices (or of two pure states)."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.vector, b.vector), a.dims + b.dims)
    if isinstance(a, PureState):
        a = a.density()
    if isinstance(b, PureState):
        b = b.density()
    return DensityMatrix(np.kron(a.matrix, b.matrix), a.dims + b.dims)


def _check_factors(indices, n: int, what: str = "factor") -> list[int]:
    idx = [int(i) for i in np.atleast_1d(indices)]
    if not idx:
        raise ValueError(f"at least one {what} index is required")
    for i in idx:
        if not 0 <= i < n:
            raise ValueError(f"{what} index {i} out of range for {n} factors")
    if len(set(idx)) != len(idx):
        raise ValueError(f"repeated {what} index in {idx}")
    return idx


def _ptrace(mat: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace of a raw matrix; ``keep`` is kept in ascending order."""
    n = len(dims)
    keep = sorted(keep)
    drop = [i for i in range(n) if i not in keep]
    dk = int(np.prod([dims[i] for i in keep]))
    dd = int(np.prod([dims[i] for i in drop])) if drop else 1
    t = mat.reshape(tuple(dims) * 2)
    perm = keep + drop + [n + i for i in keep] + [n + i for i in drop]
    t = t.transpose(perm).reshape(dk, dd, dk, dd)
    return np.einsum("ijkj->ik", t)


def partial_trace(rho: DensityMatrix | PureState, keep) -> DensityMatrix:
    """Reduce ``rho`` to the factors listed in ``keep`` (kept in original order)."""
    if isinstance(rho, PureState):
        rho = rho.density()
    keep = sorted(_check_factors(keep, len(rho.dims)))
    return DensityMatrix(_ptrace(rho.matrix, rho.dims, keep), [rho.dims[i] for i in keep])


def permute_factors(rho: DensityMatrix, order: Sequence[int]) -> DensityMatrix:
    """Reorder tensor factors: factor ``order[k]`` becomes factor ``k``."""
    n = len(rho.dims)
    order = list(order)
    if sorted(order) != list(range(n)):
        raise ValueError(f"{order} is not a permutation of {n} factors")
    return DensityMatrix(_permute(rho.matrix, rho.dims, order), [rho.dims[i] for i in order])


def _permute(mat: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    n = len(dims)
    d = mat.shape[-1]
    t = mat.reshape(mat.shape[:-2] + tuple(dims) * 2)
    lead = mat.ndim - 2
    perm = list(range(lead)) + [lead + i for i in order] + [lead + n + i for i in order]
    return t.transpose(perm).reshape(mat.shape[:-2] + (d, d))


def _entropy_of_spectrum(evals: np.ndarray) -> np.ndarray:
    """Shannon entropy (bits) along the last axis; tiny negatives are clipped."""
    p = np.clip(np.real(evals), 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return terms.sum(axis=-1)


def _entropy(mat: np.ndarray) -> np.ndarray:
    return _entropy_of_spectrum(np.linalg.eigvalsh(mat))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """``S(rho) = -tr rho log2 rho`` with ``0 log 0 = 0``."""
    evals = np.linalg.eigvalsh(rho.matrix)
    if evals.min() < -PSD_TOL:
        raise InvalidStateError("psd", f"minimum eigenvalue {evals.min():.3e}")
    return float(_entropy_of_spectrum(evals))


def binary_entropy(x: float) -> float:
    return float(_entropy_of_spectrum(np.array([x, 1.0 - x])))


def _fix_phase(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotate a vector so that its first non-negligible entry is real positive."""
    nz = np.flatnonzero(np.abs(v) > tol)
    if nz.size == 0:
        return v
    z = v[nz[0]]
    return v * (abs(z) / z)


def spectral_decomposition(rho: DensityMatrix, tol: float = RANK_TOL):
    """Nonzero eigenvalues in descending order and phase-fixed eigenvectors (as columns)."""
    evals, evecs = rho.eigh()
    order = np.argsort(-evals, kind="stable")
    evals, evecs = evals[order], evecs[:, order]
    r = max(1, int(np.sum(evals > tol)))
    evals = evals[:r]
    evecs = np.stack([_fix_phase(evecs[:, k]) for k in range(r)], axis=1)
    return evals, evecs


def purify(rho: DensityMatrix) -> PureState:
    """Canonical purification ``sum_k sqrt(l_k) |e_k>|k>`` with the ancilla appended last."""
    evals, evecs = spectral_decomposition(rho)
    r = evals.size
    psi = np.einsum("k,xk,ky->xy", np.sqrt(evals), evecs, np.eye(r)).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    return PureState(psi, rho.dims + (r,))


def measure_subsystem(rho: DensityMatrix, povm: Povm, on: int):
    """Measure factor ``on`` and return ``[(p_i, rho_i), ...]`` on the remaining factors.

    ``p_i = tr((E_i x I) rho)`` and ``rho_i = tr_on((E_i x I) rho) / p_i``;
    outcomes with ``p_i < 1e-14`` are dropped.
    """
    n = len(rho.dims)
    (on,) = _check_factors([on], n)
    if n < 2:
        raise ValueError("measuring the only factor leaves nothing to condition")
    if povm.dim != rho.dims[on]:
        raise ValueError(f"POVM acts on dimension {povm.dim}, factor {on} has dimension {rho.dims[on]}")
    order = [on] + [i for i in range(n) if i != on]
    rest = [rho.dims[i] for i in order[1:]]
    da, db = rho.dims[on], int(np.prod(rest))
    t = _permute(rho.matrix, rho.dims, order).reshape(da, db, da, db)
    cond = np.einsum("iyx,xbyc->ibc", povm.effects, t)
    probs = np.einsum("ibb->i", cond).real
    out = []
    for p, c in zip(probs, cond):
        if p < PRUNE_TOL:
            continue
        c = c / p
        out.append((float(p), DensityMatrix((c + c.conj().T) / 2, rest)))
    return out


def partial_transpose(rho: DensityMatrix, on) -> tuple[np.ndarray, float]:
    """Transpose the listed factor(s); returns the matrix and its minimum eigenvalue."""
    n = len(rho.dims)
    idx = _check_factors(on, n)
    t = rho.matrix.reshape(rho.dims * 2)
    perm = list(range(2 * n))
    for i in idx:
        perm[i], perm[n + i] = perm[n + i], perm[i]
    m = t.transpose(perm).reshape(rho.dim, rho.dim)
    return m, float(np.linalg.eigvalsh(m).min())


# ---------------------------------------------------------------------------
# sampling


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_pure(dims, seed=None) -> PureState:
    """Haar-random pure state: normalized vector of i.i.d. standard complex Gaussians."""
    dims = _as_dims(dims)
    rng = _rng(seed)
    d = int(np.prod(dims))
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState(v / np.linalg.norm(v), dims)


def random_density(dims, ancilla_dim: int = 2, seed=None) -> DensityMatrix:
    """Reduction of a Haar-random pure state on ``dims + [ancilla_dim]``."""
    dims = _as_dims(dims)
    if ancilla_dim < 1:
        raise ValueError("ancilla_dim must be at least 1")
    psi = random_pure(dims + (int(ancilla_dim),), seed)
    m = _ptrace(np.outer(psi.vector, psi.vector.conj()), psi.dims, list(range(len(dims))))
    return DensityMatrix((m + m.conj().T) / 2, dims)


def random_unitary(d: int, seed=None) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    rng = _rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_isometry(n: int, k: int, seed=None) -> np.ndarray:
    """Haar-random ``(n, k)`` isometry (``V^dagger V = I``)."""
    rng = _rng(seed)
    z = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def conjugate(rho: DensityMatrix, u: np.ndarray) -> DensityMatrix:
    """``U rho U^dagger``."""
    m = u @ rho.matrix @ u.conj().T
    return DensityMatrix((m + m.conj().T) / 2, rho.dims)


def basis_state(dims, index: Sequence[int]) -> PureState:
    dims = _as_dims(dims)
    v = np.zeros(int(np.prod(dims)), dtype=complex)
    v[np.ravel_multi_index(tuple(index), dims)] = 1.0
    return PureState(v, dims)


def maximally_mixed(dims) -> DensityMatrix:
    dims = _as_dims(dims)
    d = int(np.prod(dims))
    return DensityMatrix(np.eye(d) / d, dims)


# ---------------------------------------------------------------------------
# serialization


def state_to_json(state) -> dict:
    """``{"dims", "re", "im"}`` dict; matrices row-major, vectors flat."""
    if isinstance(state, DensityMatrix):
        a = state.matrix
    elif isinstance(state, PureState):
        a = state.vector
    else:
        raise TypeError(f"cannot serialize {type(state).__name__}")
    return {"dims": list(state.dims), "re": a.real.tolist(), "im": a.imag.tolist()}


def state_from_json(obj) -> DensityMatrix | PureState:
    """Inverse of :func:`state_to_json`.

    Raises :class:`StateFormatError` for schema problems and
    :class:`InvalidStateError` when the numbers do not form a valid state.
    """
    if not isinstance(obj, dict):
        raise StateFormatError("state must be a JSON object")
    missing = [k for k in ("dims", "re", "im") if k not in obj]
    if missing:
        raise StateFormatError(f"missing key(s): {', '.join(missing)}")
    dims = obj["dims"]
    if not isinstance(dims, list) or not dims or not all(isinstance(d, int) and not isinstance(d, bool) and d >= 1 for d in dims):
        raise StateFormatError("'dims' must be a non-empty list of positive integers")
    try:
        re = np.array(obj["re"], dtype=float)
        im = np.array(obj["im"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise StateFormatError(f"'re'/'im' must be numeric arrays: {exc}") from None
    if re.shape != im.shape:
        raise StateFormatError(f"'re' shape {re.shape} differs from 'im' shape {im.shape}")
    side = int(np.prod(dims))
    a = re + 1j * im
    if a.shape == (side, side):
        return DensityMatrix(a, dims)
    if a.shape == (side,):
        return PureState(a, dims)
    raise StateFormatError(f"array shape {a.shape} does not match dims {dims} (side {side})")
