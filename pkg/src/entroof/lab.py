"""Numerical checks of the duality identity and the roof inequalities.

Every check produces a :class:`CheckRecord` whose ``sound`` flag is derived
from the bound directions of its terms: a negative slack is a genuine
counterexample only when the left side was bounded from above and the right
side from below.  Records from a campaign are gathered in an
:class:`InequalityReport`.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .measures import (
    MeasureResult,
    classical_correlation,
    classical_correlation_max,
    entanglement_entropy,
    eof_numeric,
    eof_two_qubit_exact,
    g_roof,
)
from .roof import BoundDirection, OptimizerConfig
from .states import (
    DensityMatrix,
    Ensemble,
    PureState,
    basis_state,
    partial_trace,
    partial_transpose,
    permute_factors,
    random_density,
    random_pure,
    tensor,
    von_neumann_entropy,
)

VIOLATION_TOL = 1e-6

_LHS_OK = (BoundDirection.EXACT, BoundDirection.UPPER)
_RHS_OK = (BoundDirection.EXACT, BoundDirection.LOWER)


@dataclass(frozen=True)
class Term:
    """One side contribution: a value in bits and how it bounds the true quantity."""

    name: str
    value: float
    direction: BoundDirection

    def to_dict(self) -> dict:
        return {"name": self.name, "value_bits": float(self.value), "direction": str(self.direction)}


@dataclass(frozen=True)
class CheckRecord:
    """A single ``lhs >= rhs`` comparison with its soundness flag."""

    check: str
    state: str
    lhs_terms: tuple[Term, ...]
    rhs_terms: tuple[Term, ...]
    sample: int = 0
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def lhs(self) -> float:
        return float(sum(t.value for t in self.lhs_terms))

    @property
    def rhs(self) -> float:
        return float(sum(t.value for t in self.rhs_terms))

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs

    @property
    def sound(self) -> bool:
        return all(t.direction in _LHS_OK for t in self.lhs_terms) and all(t.direction in _RHS_OK for t in self.rhs_terms)

    @property
    def violation(self) -> bool:
        return self.sound and self.slack < -VIOLATION_TOL

    def renumber(self, sample: int, seed: int | None) -> "CheckRecord":
        return CheckRecord(self.check, self.state, self.lhs_terms, self.rhs_terms, sample, seed, self.extra)

    def to_dict(self) -> dict:
        out = {
            "sample": self.sample,
            "seed": self.seed,
            "check": self.check,
            "state": self.state,
            "lhs_bits": self.lhs,
            "rhs_bits": self.rhs,
            "slack_bits": self.slack,
            "sound": self.sound,
            "violation": self.violation,
            "lhs_terms": [t.to_dict() for t in self.lhs_terms],
            "rhs_terms": [t.to_dict() for t in self.rhs_terms],
        }
        if self.extra:
            out["extra"] = self.extra
        return out


CSV_COLUMNS = ("sample", "seed", "lhs_bits", "rhs_bits", "slack_bits", "sound")


@dataclass
class InequalityReport:
    """Per-sample records plus aggregates recomputed from them on demand."""

    check: str
    records: list[CheckRecord]
    dims: tuple[int, ...] = ()
    seed: int | None = None
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        self.records = sorted(self.records, key=lambda r: r.sample)

    @property
    def slacks(self) -> np.ndarray:
        return np.array([r.slack for r in self.records], dtype=float)

    @property
    def min_slack(self) -> float:
        return float(self.slacks.min())

    @property
    def max_slack(self) -> float:
        return float(self.slacks.max())

    @property
    def mean_slack(self) -> float:
        return float(self.slacks.mean())

    @property
    def violations(self) -> int:
        return sum(r.violation for r in self.records)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def histogram(self, bins: int = 10) -> dict:
        counts, edges = np.histogram(self.slacks, bins=bins)
        return {"counts": counts.tolist(), "edges_bits": edges.tolist()}

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "dims": list(self.dims),
            "seed": self.seed,
            "config": self.config,
            "samples": len(self.records),
            "min_slack_bits": self.min_slack,
            "mean_slack_bits": self.mean_slack,
            "max_slack_bits": self.max_slack,
            "sound_records": sum(r.sound for r in self.records),
            "violations": self.violations,
            "violation_tolerance_bits": VIOLATION_TOL,
            "slack_histogram": self.histogram(),
            "records": [r.to_dict() for r in self.records],
        }

    def to_csv(self, fmt: Callable[[float], str] = repr) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.records:
            seed = "" if r.seed is None else r.seed
            writer.writerow([r.sample, seed, fmt(r.lhs), fmt(r.rhs), fmt(r.slack), str(r.sound).lower()])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# individual checks


def _term(name: str, res: MeasureResult) -> Term:
    return Term(name, float(res.value), BoundDirection(res.direction))


def _is_qubit_pair(rho: DensityMatrix) -> bool:
    return tuple(rho.dims) == (2, 2)


def _eof_term(name: str, rho: DensityMatrix, config: OptimizerConfig) -> Term:
    """Exact closed form on two qubits; a numeric roof (upper bound) otherwise."""
    if _is_qubit_pair(rho):
        return _term(name, eof_two_qubit_exact(rho))
    return _term(name, eof_numeric(rho, None, config))


def _require_pure(phi, n_factors: int, what: str) -> PureState:
    if isinstance(phi, DensityMatrix):
        if not phi.is_pure():
            raise ValueError(f"{what} needs a pure state; got rank {phi.rank()}")
        _, v = np.linalg.eigh(phi.matrix)
        phi = PureState(v[:, -1], phi.dims)
    if not isinstance(phi, PureState):
        raise TypeError(f"{what} needs a PureState")
    if len(phi.dims) != n_factors:
        raise ValueError(f"{what} needs {n_factors} factors, got dims {list(phi.dims)}")
    return phi


def check_duality(phi, config: OptimizerConfig | None = None, *, label: str = "") -> CheckRecord:
    """``S(rho_A) = E_f(rho_AC) + C<-(rho_AB)`` on a tripartite pure state.

    The correlation is a search lower bound so the slack is non-negative up
    to rounding and shrinks as the search converges.
    """
    config = config or OptimizerConfig()
    phi = _require_pure(phi, 3, "duality check")
    lhs = Term("S(A)", von_neumann_entropy(partial_trace(phi, (0,))), BoundDirection.EXACT)
    ef = _eof_term("E_f(A:C)", partial_trace(phi, (0, 2)), config)
    c = _term("C<-(A:B)", classical_correlation(partial_trace(phi, (0, 1)), None, "<-", config))
    return CheckRecord("duality", label or "pure " + "x".join(map(str, phi.dims)), (lhs,), (ef, c))


def check_lemma1(phi, config: OptimizerConfig | None = None, *, label: str = "") -> CheckRecord:
    """``E(phi_{AA':BB'}) >= E_f(rho_AB) + C(rho_A'B')`` with factors ordered ``A, A', B, B'``."""
    config = config or OptimizerConfig()
    phi = _require_pure(phi, 4, "lemma1 check")
    lhs = Term("E(AA':BB')", entanglement_entropy(phi, "0,1/2,3"), BoundDirection.EXACT)
    ef = _eof_term("E_f(A:B)", partial_trace(phi, (0, 2)), config)
    c = _term("C(A':B')", classical_correlation_max(partial_trace(phi, (1, 3)), None, config))
    return CheckRecord("lemma1", label or "pure " + "x".join(map(str, phi.dims)), (lhs,), (ef, c))


def check_main_inequality(
    rho: DensityMatrix,
    config: OptimizerConfig | None = None,
    *,
    g_lower_bound: float | None = None,
    label: str = "",
) -> CheckRecord:
    """``E_f(rho_{AA':BB'}) >= E_f(rho_AB) + G_HV(rho_A'B')`` with factors ``A, A', B, B'``.

    A pure input is handed to :func:`check_lemma1`, the stronger statement.
    Otherwise ``G_HV`` comes from a numeric roof (an estimate from above), so
    the record is only sound when ``rho_A'B'`` is pure or a certified
    ``g_lower_bound`` is supplied.
    """
    config = config or OptimizerConfig()
    if isinstance(rho, PureState):
        rho = rho.density()
    if len(rho.dims) != 4:
        raise ValueError(f"main inequality needs 4 factors (A, A', B, B'), got dims {list(rho.dims)}")
    label = label or "mixed " + "x".join(map(str, rho.dims))
    if rho.is_pure():
        rec = check_lemma1(rho, config, label=label)
        return CheckRecord("main", rec.state, rec.lhs_terms, rec.rhs_terms, extra={"reduced_to": "lemma1"})
    lhs = _term("E_f(AA':BB')", eof_numeric(rho, "0,1/2,3", config))
    ef = _eof_term("E_f(A:B)", partial_trace(rho, (0, 2)), config)
    if g_lower_bound is not None:
        g = Term("G_HV(A':B') certified", float(g_lower_bound), BoundDirection.LOWER)
    else:
        g = _term("G_HV(A':B')", g_roof(partial_trace(rho, (1, 3)), None, "HV", config))
    return CheckRecord("main", label, (lhs,), (ef, g))


def cloning_gap(rho_ab: DensityMatrix, config: OptimizerConfig | None = None, *, label: str = "") -> CheckRecord:
    """Compare ``E_f`` of two copies across ``AA':BB'`` with ``E_f`` of one copy.

    A positive gap is evidence that the copy cannot be produced from one
    copy by local operations; a gap at or below zero is inconclusive.
    """
    config = config or OptimizerConfig()
    if len(rho_ab.dims) != 2:
        raise ValueError(f"cloning gap needs a bipartite state, got dims {list(rho_ab.dims)}")
    joint = tensor(rho_ab, rho_ab)
    # A, B, A', B' -> A, A', B, B'
    joint = permute_factors(joint, (0, 2, 1, 3))
    ef_joint = _term("E_f(AA':BB')", eof_numeric(joint, "0,1/2,3", config))
    ef_single = _eof_term("E_f(A:B)", rho_ab, config)
    gap = ef_joint.value - ef_single.value
    evidence = "positive gap" if gap > VIOLATION_TOL else "inconclusive"
    extra = {
        "ef_joint_bits": ef_joint.value,
        "ef_joint_direction": str(ef_joint.direction),
        "ef_single_bits": ef_single.value,
        "ef_single_direction": str(ef_single.direction),
        "gap_bits": gap,
        "gap_evidence": evidence,
    }
    return CheckRecord("cloning", label or "clone " + "x".join(map(str, rho_ab.dims)), (ef_joint,), (ef_single,), extra=extra)


# ---------------------------------------------------------------------------
# canonical states


def _bell(kind: str) -> np.ndarray:
    v = np.zeros(4, dtype=complex)
    if kind == "singlet":
        v[1], v[2] = 1, -1
    else:
        v[0], v[3] = 1, 1
    return v / np.sqrt(2)


def singlet() -> DensityMatrix:
    v = _bell("singlet")
    return DensityMatrix(np.outer(v, v.conj()), (2, 2))


def werner(p: float) -> DensityMatrix:
    """``p |psi-><psi-| + (1 - p) I / 4``."""
    p = _fraction(p)
    return DensityMatrix(p * singlet().matrix + (1 - p) * np.eye(4) / 4, (2, 2))


def isotropic(p: float, d: int = 2) -> DensityMatrix:
    """``p |Phi+><Phi+| + (1 - p) I / d^2`` on ``d x d``."""
    p = _fraction(p)
    d = int(d)
    if d < 2:
        raise ValueError("isotropic state needs d >= 2")
    phi = np.eye(d).reshape(-1) / np.sqrt(d)
    return DensityMatrix(p * np.outer(phi, phi) + (1 - p) * np.eye(d * d) / d**2, (d, d))


def tiles() -> DensityMatrix:
    """Bound entangled state from the five-tile unextendible product basis of ``3 x 3``."""
    e = np.eye(3)
    minus = lambda i, j: (e[i] - e[j]) / np.sqrt(2)  # noqa: E731
    s = e.sum(axis=0) / np.sqrt(3)
    tiles_ = [
        np.kron(e[0], minus(0, 1)),
        np.kron(minus(0, 1), e[2]),
        np.kron(e[2], minus(1, 2)),
        np.kron(minus(1, 2), e[0]),
        np.kron(s, s),
    ]
    proj = sum(np.outer(v, v) for v in tiles_)
    return DensityMatrix((np.eye(9) - proj) / 4, (3, 3))


def random_separable(k: int = 4, seed=None, dims=(2, 2)) -> tuple[DensityMatrix, Ensemble]:
    """Mixture of ``k`` random pure product states with uniform-simplex weights.

    Returns the state and its product decomposition.
    """
    k = int(k)
    if k < 1:
        raise ValueError("random_separable needs k >= 1")
    da, db = (int(x) for x in dims)
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(k))
    members = []
    for _ in range(k):
        v = np.kron(random_pure([da], rng).vector, random_pure([db], rng).vector)
        members.append(np.outer(v, v.conj()))
    members = np.array(members)
    ens = Ensemble(weights, members, (da, db), kind="pure")
    return DensityMatrix(ens.barycenter(), (da, db)), ens


def _fraction(p) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mixing parameter must lie in [0, 1], got {p}")
    return p


CANONICAL_STATES = ("singlet", "product", "classically_correlated", "werner", "isotropic", "tiles", "random_separable")


def canonical_state(name: str, **params) -> DensityMatrix:
    """Named test state.

    ``werner`` takes ``p``; ``isotropic`` takes ``p`` and ``d``;
    ``random_separable`` takes ``k`` and ``seed`` (use :func:`random_separable`
    to also get the decomposition).
    """
    allowed = {
        "singlet": (),
        "product": (),
        "classically_correlated": (),
        "werner": ("p",),
        "isotropic": ("p", "d"),
        "tiles": (),
        "random_separable": ("k", "seed"),
    }
    if name not in allowed:
        raise ValueError(f"unknown state {name!r}; available: {', '.join(CANONICAL_STATES)}")
    extra = set(params) - set(allowed[name])
    if extra:
        raise ValueError(f"state {name!r} takes no parameter(s) {sorted(extra)}")
    if name == "singlet":
        return singlet()
    if name == "product":
        return basis_state((2, 2), (0, 0)).density()
    if name == "classically_correlated":
        return DensityMatrix(np.diag([0.5, 0, 0, 0.5]).astype(complex), (2, 2))
    if name == "werner":
        if "p" not in params:
            raise ValueError("werner needs p")
        return werner(params["p"])
    if name == "isotropic":
        if "p" not in params:
            raise ValueError("isotropic needs p")
        return isotropic(params["p"], params.get("d", 2))
    if name == "tiles":
        return tiles()
    return random_separable(params.get("k", 4), params.get("seed"))[0]


def is_ppt(rho: DensityMatrix, tol: float = 1e-12) -> tuple[bool, float]:
    """Whether the partial transpose on the second factor is PSD within ``tol``."""
    _, lam = partial_transpose(rho, 1)
    return lam >= -tol, lam


# ---------------------------------------------------------------------------
# campaigns


CHECKS = ("duality", "lemma1", "main", "cloning")

_SOUND_DIMS = {
    "duality": (3, (0, 2), "A and C must be qubits so E_f(A:C) has a closed form"),
    "lemma1": (4, (0, 2), "A and B must be qubits so E_f(A:B) has a closed form"),
    "main": (4, (0, 2), "A and B must be qubits so E_f(A:B) has a closed form"),
    "cloning": (2, (0, 1), "the single copy must be two qubits so its E_f has a closed form"),
}


def validate_campaign_dims(check: str, dims) -> tuple[int, ...]:
    """Reject dimensions for which a campaign cannot produce sound records."""
    if check not in CHECKS:
        raise ValueError(f"unknown check {check!r}; available: {', '.join(CHECKS)}")
    dims = tuple(int(d) for d in dims)
    n, qubits, why = _SOUND_DIMS[check]
    if len(dims) != n:
        raise ValueError(f"{check} needs {n} factors, got dims {list(dims)}")
    if any(d < 1 for d in dims):
        raise ValueError("dimensions must be positive")
    if any(dims[i] != 2 for i in qubits):
        raise ValueError(f"unsupported dims {list(dims)} for sound mode: {why}")
    return dims


def sample_seeds(seed: int, samples: int) -> list[int]:
    """Per-sample seeds derived from the campaign seed."""
    return [int(s) for s in np.random.SeedSequence(int(seed)).generate_state(int(samples))]


def _sample(check: str, dims, seed: int):
    if check in ("duality", "lemma1"):
        return random_pure(dims, seed)
    return random_density(dims, 2, seed)


_RUNNERS = {
    "duality": check_duality,
    "lemma1": check_lemma1,
    "main": check_main_inequality,
    "cloning": cloning_gap,
}


def run_check(check: str, state, config: OptimizerConfig | None = None, **kwargs) -> CheckRecord:
    if check not in _RUNNERS:
        raise ValueError(f"unknown check {check!r}; available: {', '.join(CHECKS)}")
    return _RUNNERS[check](state, config, **kwargs)


def fuzz_campaign(check: str, samples: int, dims, seed: int = 0, config: OptimizerConfig | None = None) -> InequalityReport:
    """Run ``check`` on ``samples`` states drawn from seeds derived from ``seed``.

    Pure states are Haar random for ``duality`` and ``lemma1``; ``main`` and
    ``cloning`` use rank-two reductions of Haar-random pure states.
    """
    config = config or OptimizerConfig()
    dims = validate_campaign_dims(check, dims)
    if int(samples) < 1:
        raise ValueError("samples must be at least 1")
    records = []
    for i, s in enumerate(sample_seeds(seed, samples)):
        state = _sample(check, dims, s)
        rec = run_check(check, state, config, label=f"random {'x'.join(map(str, dims))}")
        records.append(rec.renumber(i, s))
    return InequalityReport(check, records, dims, int(seed), config.to_dict())
