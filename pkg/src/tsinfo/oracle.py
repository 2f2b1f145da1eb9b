"""Ground truth for the measures.

* Linear-Gaussian VAR(1) systems: simulation plus exact population values of
  every measure at first order, from the stationary lag-0/lag-1 covariance.
* Exact plug-in (maximum-likelihood pmf) evaluation of every measure on
  finite-alphabet sequences, over the same aligned blocks the continuous
  estimators use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Dataset, DiscreteSeries, TimeSeries, align
from .errors import InvalidRequest, NonStationary, UnsupportedMeasure, UnsupportedOrder
from .estimators import LOG_2PIE
from .measures import H, MeasureRequest, MeasureResult, build_plan, evaluate_plan

GENERATOR = "numpy.random.default_rng (PCG64)"
DEFAULT_BURN_IN = 1000


@dataclass(frozen=True)
class Var1System:
    """``Z_{t+1} = A Z_t + eps_t`` with ``eps_t ~ N(0, Sigma)``."""

    A: np.ndarray
    Sigma: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.array(self.A, dtype=float))
        S = np.atleast_2d(np.array(self.Sigma, dtype=float))
        m = A.shape[0]
        if A.shape != (m, m) or S.shape != (m, m):
            raise InvalidRequest(f"A and Sigma must both be {m} x {m}")
        if not np.allclose(S, S.T):
            raise InvalidRequest("Sigma must be symmetric")
        if np.linalg.eigvalsh(S).min() <= 0:
            raise InvalidRequest("Sigma must be positive definite")
        A.setflags(write=False)
        S.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Sigma", S)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def spectral_radius(self) -> float:
        return float(np.abs(np.linalg.eigvals(self.A)).max())

    def check_stationary(self):
        rho = self.spectral_radius
        if rho >= 1:
            raise NonStationary(f"spectral radius {rho:.6g} >= 1")


def default_names(m: int) -> list[str]:
    return ["X", "Y"] if m == 2 else [f"x{i + 1}" for i in range(m)]


# Unidirectional X -> Y coupling with no contemporaneous covariance.
VAR_A = Var1System(A=[[0.0, 0.0], [0.5, 0.5]], Sigma=[[1.0, 0.0], [0.0, 0.25]])


def gen_var1(system: Var1System, T: int, seed: int = 0, burn_in: int = DEFAULT_BURN_IN,
             names: Sequence[str] | None = None) -> Dataset:
    """Simulate ``T`` stationary samples after discarding ``burn_in`` steps from zero."""
    system.check_stationary()
    if T < 2 or burn_in < 0:
        raise InvalidRequest("need T >= 2 and burn_in >= 0")
    m = system.m
    names = default_names(m) if names is None else list(names)
    rng = np.random.default_rng(seed)
    chol = np.linalg.cholesky(system.Sigma)
    eps = rng.standard_normal((burn_in + T, m)) @ chol.T
    A = system.A
    z = np.zeros(m)
    out = np.empty((T, m))
    for t in range(burn_in + T):
        z = A @ z + eps[t]
        if t >= burn_in:
            out[t - burn_in] = z
    return Dataset(tuple(TimeSeries(out[:, j], names[j]) for j in range(m)))


def stationary_covariance(system: Var1System):
    """Solve ``P = A P A^T + Sigma``; returns ``(P, A P)``.

    Direct solve of the vectorized equation ``(I - A kron A) vec P = vec Sigma``,
    fine for the handful of processes an oracle needs.
    """
    system.check_stationary()
    A, S = system.A, system.Sigma
    m = system.m
    vec_p = np.linalg.solve(np.eye(m * m) - np.kron(A, A), S.reshape(-1))
    P = vec_p.reshape(m, m)
    P = 0.5 * (P + P.T)
    return P, A @ P


def lag_covariance(system: Var1System) -> np.ndarray:
    """Covariance of the stacked vector ``(Z_t, Z_{t+1})``."""
    P, C1 = stationary_covariance(system)
    return np.block([[P, C1.T], [C1, P]])


class _GaussianPopulation:
    """Exact Gaussian entropies over variables of ``(Z_t, Z_{t+1})``."""

    def __init__(self, cov, variables):
        self.cov = cov
        self.vars = variables  # block label -> list of indices into cov

    def _idx(self, labels):
        return sorted({i for lab in labels for i in self.vars[lab]})

    def cond_entropy(self, a, given=()):
        ia = self._idx(a)
        ig = [i for i in self._idx(given) if i not in ia]
        if not ia:
            return 0.0
        S = self.cov[np.ix_(ia, ia)]
        if ig:
            Sab = self.cov[np.ix_(ia, ig)]
            Sbb = self.cov[np.ix_(ig, ig)]
            S = S - Sab @ np.linalg.solve(Sbb, Sab.T)
        sign, logdet = np.linalg.slogdet(S)
        if sign <= 0:
            raise InvalidRequest("degenerate population covariance")
        return 0.5 * (len(ia) * LOG_2PIE + logdet)

    def __call__(self, q):
        if isinstance(q, H):
            return self.cond_entropy(q.a, q.given)
        return self.cond_entropy(q.a, q.given) - self.cond_entropy(q.a, q.b + q.given)


def analytic_gaussian_measure(system: Var1System, request: MeasureRequest,
                              names: Sequence[str] | None = None) -> float:
    """Population value (nats) of a measure on a stationary VAR(1) process.

    Only blocks reaching back one step from the present are supported, which
    covers every measure at ``k = l = 1`` (and DI up to ``K = 2``).
    """
    names = default_names(system.m) if names is None else list(names)
    col = {"source": request.source, "target": request.target}
    mid = request.measure_id
    te_request = request
    if mid == "granger_causality":
        te_request = MeasureRequest("transfer_entropy", request.target, request.source,
                                    k=request.k, l=request.l,
                                    tau_source=request.tau_source, tau_target=request.tau_target)
    plan = build_plan(te_request)
    m = system.m
    variables = {}
    for role, spec, label in plan.blocks:
        j = names.index(col[role])
        idx = []
        for off in spec.offsets():
            if off not in (0, -1):
                raise UnsupportedOrder(
                    f"{mid} with k={request.k}, l={request.l}, K={request.K} needs lag {-off}; "
                    "the oracle covers one-step histories only"
                )
            idx.append(j + (m if off == 0 else 0))
        variables[label] = idx
    terms = evaluate_plan(plan, _GaussianPopulation(lag_covariance(system), variables))
    value = sum(terms.values())
    return 2.0 * value if mid == "granger_causality" else value


# --- discrete plug-in ----------------------------------------------------

class DiscretePmf:
    """Empirical joint pmf over labelled blocks of integer symbols.

    Stored sparsely as the distinct observed outcomes and their probabilities.
    """

    def __init__(self, outcomes, probs, blocks, alphabet_sizes=None):
        self.outcomes = np.asarray(outcomes, dtype=np.int64)
        self.probs = np.asarray(probs, dtype=float)
        self.blocks = tuple(blocks)  # (label, dim)
        self.alphabet_sizes = dict(alphabet_sizes or {})
        if abs(self.probs.sum() - 1.0) > 1e-12 or np.any(self.probs < 0):
            raise InvalidRequest("pmf entries must be >= 0 and sum to 1")
        width = sum(d for _, d in self.blocks)
        if self.outcomes.shape[1] != width:
            raise InvalidRequest("outcome width does not match block dimensions")
        self._cols = {}
        start = 0
        for label, dim in self.blocks:
            self._cols[label] = list(range(start, start + dim))
            start += dim

    @classmethod
    def from_samples(cls, rows, blocks, alphabet_sizes=None):
        rows = np.asarray(rows)
        int_rows = np.rint(rows).astype(np.int64).reshape(rows.shape[0], -1)
        outcomes, counts = np.unique(int_rows, axis=0, return_counts=True)
        return cls(outcomes, counts / counts.sum(), blocks, alphabet_sizes)

    def cols(self, labels):
        return sorted({c for lab in labels for c in self._cols[lab]})

    def marginal_probs(self, labels) -> np.ndarray:
        """p(outcome restricted to ``labels``), aligned with ``self.outcomes``."""
        cols = self.cols(labels)
        if not cols:
            return np.ones_like(self.probs)
        _, inverse = np.unique(self.outcomes[:, cols], axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        sums = np.bincount(inverse, weights=self.probs)
        return sums[inverse]

    def marginal(self, labels) -> "DiscretePmf":
        cols = self.cols(labels)
        keep = [(lab, d) for lab, d in self.blocks if lab in set(labels)]
        proj = self.outcomes[:, cols]
        outcomes, inverse = np.unique(proj, axis=0, return_inverse=True)
        probs = np.bincount(inverse.reshape(-1), weights=self.probs)
        return DiscretePmf(outcomes, probs, keep, self.alphabet_sizes)


class PluginEvaluator:
    """Evaluates each quantity by its defining sum over a joint pmf.

    Entropy: ``-sum p log p``; conditional entropy: ``-sum p(a,b) log p(a|b)``;
    MI: ``sum p(a,b) log p(a,b)/(p(a)p(b))``; conditional MI:
    ``sum p(a,b,c) log p(a,b,c)p(c)/(p(a,c)p(b,c))``.
    """

    def __init__(self, pmf: DiscretePmf):
        self.pmf = pmf

    def __call__(self, q) -> float:
        if isinstance(q, H):
            sub = self.pmf.marginal(q.a + q.given)
            p_ab = sub.probs
            if not q.given or not sub.cols(q.given):
                return float(-np.sum(p_ab * np.log(p_ab)))
            p_b = sub.marginal_probs(q.given)
            return float(-np.sum(p_ab * np.log(p_ab / p_b)))
        sub = self.pmf.marginal(q.a + q.b + q.given)
        p = sub.probs
        p_ac = sub.marginal_probs(q.a + q.given)
        p_bc = sub.marginal_probs(q.b + q.given)
        p_c = sub.marginal_probs(q.given)
        return float(np.sum(p * np.log(p * p_c / (p_ac * p_bc))))


def _discrete_dataset(sequences: Sequence[DiscreteSeries]) -> Dataset:
    return Dataset(tuple(s.as_timeseries() for s in sequences))


def plugin_result(sequences: Sequence[DiscreteSeries], request: MeasureRequest) -> MeasureResult:
    if request.measure_id == "granger_causality":
        raise UnsupportedMeasure("Granger causality is defined for real-valued series only")
    dataset = _discrete_dataset(sequences)
    sizes = {s.name: s.alphabet_size for s in sequences}
    plan = build_plan(request)
    col = {"source": request.source, "target": request.target}
    aligned = align(dataset, [(col[role], spec, label) for role, spec, label in plan.blocks])
    pmf = DiscretePmf.from_samples(
        aligned.rows, aligned.blocks,
        {label: sizes[col[role]] for role, _, label in plan.blocks},
    )
    terms = evaluate_plan(plan, PluginEvaluator(pmf))
    return MeasureResult(sum(terms.values()), aligned.n_eff, request, terms,
                         {"estimator": "plugin"})


def plugin_discrete_measure(sequences: Sequence[DiscreteSeries], request: MeasureRequest) -> float:
    """Exact plug-in value (nats) of ``request`` on discrete sequences."""
    return plugin_result(sequences, request).value
