"""The eleven pairwise and single-process time-series measures.

Each measure is described by a :class:`Plan`: the embedded blocks it needs
(aligned once, on one shared set of present indices) and a sum of terms, each
term a signed combination of conditional entropies ``H(A|B)`` and conditional
mutual informations ``I(A;B|C)`` over block labels. An evaluator turns those
quantities into numbers; :class:`ContinuousEvaluator` does it with the
estimators in :mod:`tsinfo.estimators`, and the discrete plug-in evaluator in
:mod:`tsinfo.oracle` does it exactly on empirical pmfs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import estimators as est_mod
from .core import AlignedSamples, Dataset, EmbeddingSpec, TimeSeries, align, standardize
from .errors import InvalidRequest, PerfectCorrelation, RankDeficient, SingularCovariance
from .estimators import EstimatorKind


@dataclass(frozen=True)
class MeasureInfo:
    id: str
    name: str
    symbol: str
    pairwise: bool
    directed: bool
    order_dependent: bool
    default_estimator: str
    aliases: tuple = ()


MEASURES = {
    m.id: m
    for m in [
        MeasureInfo("entropy", "Entropy", "H(X)", False, False, False, "kozachenko", ("h",)),
        MeasureInfo("joint_entropy", "Joint entropy", "H(X,Y)", True, False, False, "kozachenko", ("je",)),
        MeasureInfo("mutual_information", "Mutual information", "I(X;Y)", True, False, False, "ksg", ("mi",)),
        MeasureInfo("conditional_entropy", "Conditional entropy", "H(Y|X)", True, True, False, "kozachenko", ("ce",)),
        MeasureInfo("active_information_storage", "Active information storage", "A(X)(k)", False, False, True, "ksg", ("ais",)),
        MeasureInfo("stochastic_interaction", "Stochastic interaction", "SI(X,Y)", True, False, True, "kozachenko", ("si",)),
        MeasureInfo("time_lagged_mi", "Time-lagged mutual information", "I(X_t;Y_t+1)", True, True, True, "ksg", ("tlmi",)),
        MeasureInfo("causally_conditioned_entropy", "Causally conditioned entropy", "H(Y||X)(k)", True, True, True, "kozachenko", ("cce",)),
        MeasureInfo("directed_information", "Directed information", "DI(X->Y)", True, True, True, "kozachenko", ("di",)),
        MeasureInfo("transfer_entropy", "Transfer entropy", "TE(X->Y)(k,l)", True, True, True, "ksg", ("te",)),
        MeasureInfo("granger_causality", "Granger causality", "GC(X->Y)(k,l)", True, True, True, "gaussian", ("gc",)),
    ]
}

_ALIASES = {a: m.id for m in MEASURES.values() for a in (m.id, *m.aliases)}

DI_MODES = ("exact", "pooled_approx")


def resolve_measure(name: str) -> str:
    key = name.strip().lower().replace("-", "_")
    try:
        return _ALIASES[key]
    except KeyError:
        raise InvalidRequest(f"unknown measure {name!r}") from None


def _estimator(value) -> EstimatorKind | None:
    if value is None or isinstance(value, EstimatorKind):
        return value
    return EstimatorKind(str(value))


@dataclass(frozen=True)
class MeasureRequest:
    measure_id: str
    target: str
    source: str | None = None
    estimator: EstimatorKind | None = None
    k: int = 1
    l: int = 1
    tau_source: int = 1
    tau_target: int = 1
    K: int = 5
    di_mode: str = "exact"

    def __post_init__(self):
        mid = resolve_measure(self.measure_id)
        object.__setattr__(self, "measure_id", mid)
        object.__setattr__(self, "estimator", _estimator(self.estimator))
        info = MEASURES[mid]
        if not info.pairwise and self.source is not None:
            raise InvalidRequest(f"{mid} is single-process and takes no source column")
        if info.pairwise and self.source is None:
            raise InvalidRequest(f"{mid} is pairwise and needs a source column")
        for name in ("k", "l", "tau_source", "tau_target", "K"):
            v = getattr(self, name)
            if int(v) != v:
                raise InvalidRequest(f"{name} must be an integer, got {v}")
        if mid in ("active_information_storage", "causally_conditioned_entropy",
                   "transfer_entropy", "granger_causality") and self.k < 1:
            raise InvalidRequest(f"{mid} needs k >= 1, got {self.k}")
        if mid in ("transfer_entropy", "granger_causality") and self.l < 1:
            raise InvalidRequest(f"{mid} needs l >= 1, got {self.l}")
        if mid == "directed_information" and self.K < 1:
            raise InvalidRequest(f"directed information needs K >= 1, got {self.K}")
        if self.tau_source < 1 or self.tau_target < 1:
            raise InvalidRequest("lags must be >= 1")
        mode = self.di_mode.replace("-", "_")
        if mode not in DI_MODES:
            raise InvalidRequest(f"di_mode must be one of {DI_MODES}, got {self.di_mode!r}")
        object.__setattr__(self, "di_mode", mode)

    @property
    def info(self) -> MeasureInfo:
        return MEASURES[self.measure_id]

    @property
    def resolved_estimator(self) -> EstimatorKind:
        if self.measure_id == "granger_causality":
            return EstimatorKind.gaussian()
        if self.estimator is None:
            return EstimatorKind(self.info.default_estimator)
        return self.estimator

    def params(self) -> dict:
        """Parameters that affect this measure, for reporting."""
        mid = self.measure_id
        out = {}
        if mid == "active_information_storage":
            out.update(k=self.k, tau=self.tau_target)
        elif mid == "causally_conditioned_entropy":
            out.update(k=self.k, tau_source=self.tau_source, tau_target=self.tau_target)
        elif mid == "directed_information":
            out.update(K=self.K, di_mode=self.di_mode,
                       tau_source=self.tau_source, tau_target=self.tau_target)
        elif mid in ("transfer_entropy", "granger_causality"):
            out.update(k=self.k, l=self.l, tau_source=self.tau_source, tau_target=self.tau_target)
        out.update(self.resolved_estimator.params())
        return out


@dataclass
class MeasureResult:
    value: float
    n_eff: int
    request: MeasureRequest
    terms: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)


# --- plans ---------------------------------------------------------------

@dataclass(frozen=True)
class H:
    """Conditional entropy H(a | given) over block labels."""

    a: tuple
    given: tuple = ()


@dataclass(frozen=True)
class I:
    """Conditional mutual information I(a ; b | given) over block labels."""

    a: tuple
    b: tuple
    given: tuple = ()


@dataclass(frozen=True)
class Plan:
    blocks: tuple  # (role, EmbeddingSpec, label); role is "source" or "target"
    terms: tuple   # (term label, ((coef, H | I), ...))


def _one(q):
    return ((1.0, q),)


def build_plan(req: MeasureRequest) -> Plan:
    mid = req.measure_id
    now = EmbeddingSpec(1, 1, 0)
    prev = EmbeddingSpec(1, 1, -1)
    if mid == "entropy":
        return Plan((("target", now, "X"),), (("H(X)", _one(H(("X",)))),))
    if mid == "joint_entropy":
        blocks = (("source", now, "X"), ("target", now, "Y"))
        return Plan(blocks, (("H(X,Y)", _one(H(("X", "Y")))),))
    if mid == "mutual_information":
        blocks = (("source", now, "X"), ("target", now, "Y"))
        return Plan(blocks, (("I(X;Y)", _one(I(("X",), ("Y",)))),))
    if mid == "conditional_entropy":
        blocks = (("source", now, "X"), ("target", now, "Y"))
        return Plan(blocks, (("H(Y|X)", _one(H(("Y",), ("X",)))),))
    if mid == "active_information_storage":
        blocks = (
            ("target", EmbeddingSpec(req.k, req.tau_target, -1), "X_past"),
            ("target", now, "X"),
        )
        return Plan(blocks, (("I(X_past;X)", _one(I(("X_past",), ("X",)))),))
    if mid == "stochastic_interaction":
        blocks = (
            ("source", prev, "X_prev"), ("source", now, "X"),
            ("target", prev, "Y_prev"), ("target", now, "Y"),
        )
        terms = (
            ("H(X|X_prev)", _one(H(("X",), ("X_prev",)))),
            ("H(Y|Y_prev)", _one(H(("Y",), ("Y_prev",)))),
            ("-H(X,Y|X_prev,Y_prev)", ((-1.0, H(("X", "Y"), ("X_prev", "Y_prev"))),)),
        )
        return Plan(blocks, terms)
    if mid == "time_lagged_mi":
        blocks = (("source", prev, "X_prev"), ("target", now, "Y"))
        return Plan(blocks, (("I(X_prev;Y)", _one(I(("X_prev",), ("Y",)))),))
    if mid == "causally_conditioned_entropy":
        blocks = (
            ("target", now, "Y"),
            ("target", EmbeddingSpec(req.k, req.tau_target, -1), "Y_past"),
            ("source", EmbeddingSpec(req.k + 1, req.tau_source, 0), "X_upto"),
        )
        return Plan(blocks, (("H(Y|Y_past,X_upto)", _one(H(("Y",), ("Y_past", "X_upto")))),))
    if mid == "directed_information":
        blocks = [("target", now, "Y")]
        terms = []
        for k in range(req.K):
            yp, xu, yb = f"Y_past{k}", f"X_upto{k + 1}", f"Y_upto{k + 1}"
            blocks.append(("target", EmbeddingSpec(k, req.tau_target, -1), yp))
            blocks.append(("source", EmbeddingSpec(k + 1, req.tau_source, 0), xu))
            if req.di_mode == "exact":
                terms.append((f"DI(k={k})", _one(I(("Y",), (xu,), (yp,)))))
            else:
                blocks.append(("target", EmbeddingSpec(k + 1, req.tau_target, 0), yb))
                terms.append((f"DI(k={k})", (
                    (1.0 / (k + 1), H((yb,))),
                    (-1.0, H(("Y",), (yp, xu))),
                )))
        return Plan(tuple(blocks), tuple(terms))
    if mid in ("transfer_entropy", "granger_causality"):
        blocks = (
            ("target", now, "Y"),
            ("target", EmbeddingSpec(req.k, req.tau_target, -1), "Y_past"),
            ("source", EmbeddingSpec(req.l, req.tau_source, -1), "X_past"),
        )
        return Plan(blocks, (("I(Y;X_past|Y_past)", _one(I(("Y",), ("X_past",), ("Y_past",)))),))
    raise InvalidRequest(f"no plan for {mid}")


def align_plan(dataset: Dataset, req: MeasureRequest, plan: Plan) -> AlignedSamples:
    columns = {"source": req.source, "target": req.target}
    return align(dataset, [(columns[role], spec, label) for role, spec, label in plan.blocks])


def evaluate_plan(plan: Plan, evaluator) -> dict:
    terms = {}
    for label, parts in plan.terms:
        value = 0.0
        for coef, q in parts:
            value += coef * evaluator(q)
        terms[label] = float(value)
    return terms


# --- continuous evaluation -----------------------------------------------

class ContinuousEvaluator:
    """Evaluates plan quantities on aligned real-valued samples.

    Entropies are cached per block set so that every term of a composite
    measure reuses bit-identical values.
    """

    def __init__(self, aligned: AlignedSamples, estimator: EstimatorKind):
        self.aligned = aligned
        self.est = estimator
        self._cache = {}

    def entropy(self, labels) -> float:
        key = frozenset(labels)
        if key not in self._cache:
            x = self.aligned.select(key)
            if x.shape[1] == 0:
                h = 0.0
            elif self.est.tag == "gaussian":
                h = est_mod.entropy_gaussian(x)
            elif self.est.tag == "kernel":
                h = est_mod.entropy_kernel(x, self.est.kernel_width)
            else:
                # ksg has no entropy of its own; entropy terms use its k_nn with KL
                h = est_mod.entropy_knn(x, self.est.k_nn)
            self._cache[key] = h
        return self._cache[key]

    def _gaussian_mi_1d(self, a, b) -> float:
        x = self.aligned.select(a)[:, 0]
        y = self.aligned.select(b)[:, 0]
        xc = x - x.mean()
        yc = y - y.mean()
        vx = np.mean(xc * xc)
        vy = np.mean(yc * yc)
        if vx <= 0 or vy <= 0:
            raise SingularCovariance("zero variance in a Gaussian MI argument")
        r = np.mean(xc * yc) / np.sqrt(vx * vy)
        if 1.0 - r * r <= est_mod.SINGULAR_CORR_DET:
            raise PerfectCorrelation(f"|r| = {abs(r):.15f}; Gaussian MI is infinite")
        return -0.5 * np.log1p(-r * r)

    def __call__(self, q) -> float:
        if isinstance(q, H):
            joint = self.entropy(q.a + q.given)
            return joint - self.entropy(q.given) if q.given else joint
        a, b, c = q.a, q.b, q.given
        dim = self.aligned.select
        if self.est.tag == "ksg":
            if c and dim(c).shape[1]:
                return est_mod.cmi_ksg(dim(a), dim(b), dim(c), self.est.k_nn)
            return est_mod.mi_ksg(dim(a), dim(b), self.est.k_nn)
        no_condition = not c or dim(c).shape[1] == 0
        if no_condition:
            if self.est.tag == "gaussian" and dim(a).shape[1] == 1 and dim(b).shape[1] == 1:
                return self._gaussian_mi_1d(a, b)
            return self.entropy(a) + self.entropy(b) - self.entropy(a + b)
        return (self.entropy(a + c) - self.entropy(c)
                - self.entropy(a + b + c) + self.entropy(b + c))


def prepare_dataset(dataset: Dataset, names: Sequence[str], estimator: EstimatorKind,
                    noise_seed: int = est_mod.DEFAULT_NOISE_SEED,
                    noise_amplitude: float = est_mod.DEFAULT_NOISE_AMPLITUDE) -> Dataset:
    """Per-column preprocessing required by the estimator.

    kernel: standardize (the width is in standard-deviation units).
    kozachenko/ksg: seeded tie-breaking jitter, applied to the series before
    embedding so that a value carries the same jitter in every block.
    """
    cols = []
    for name in dict.fromkeys(names):
        s = dataset[name]
        if estimator.tag == "kernel":
            s = standardize(s)
        elif estimator.uses_neighbors:
            s = TimeSeries(est_mod.add_tie_noise(s.values, noise_amplitude, noise_seed), s.name)
        cols.append(s)
    return Dataset(tuple(cols))


def _granger(aligned: AlignedSamples):
    y = aligned.block("Y")[:, 0]
    own = aligned.block("Y_past")
    other = aligned.block("X_past")
    n = y.size

    def rss(design):
        design = design - design.mean(axis=0)
        design = np.hstack([np.ones((n, 1)), design])
        if n <= design.shape[1]:
            raise RankDeficient(f"{design.shape[1]} regressors need more than {n} samples")
        beta, _, rank, _ = np.linalg.lstsq(design, y - y.mean(), rcond=None)
        if rank < design.shape[1]:
            raise RankDeficient(f"design matrix has rank {rank} < {design.shape[1]}")
        resid = (y - y.mean()) - design @ beta
        return float(resid @ resid)

    rss_reduced = rss(own)
    rss_full = rss(np.hstack([own, other]))
    if rss_full <= 1e-14 * max(rss_reduced, 1e-300):
        raise RankDeficient("full model fits exactly (zero residual variance)")
    return float(np.log(rss_reduced / rss_full)), rss_reduced, rss_full


def compute(dataset: Dataset, request: MeasureRequest,
            noise_seed: int = est_mod.DEFAULT_NOISE_SEED,
            noise_amplitude: float = est_mod.DEFAULT_NOISE_AMPLITUDE) -> MeasureResult:
    """Evaluate one measure on named columns of ``dataset``."""
    est = request.resolved_estimator
    used = [n for n in (request.source, request.target) if n is not None]
    for n in used:
        if n not in dataset:
            raise InvalidRequest(f"unknown column {n!r}")
    meta = {"estimator": est.tag, **est.params()}
    if request.measure_id == "granger_causality":
        plan = build_plan(request)
        aligned = align_plan(dataset, request, plan)
        value, rss_r, rss_f = _granger(aligned)
        meta.update(rss_reduced=rss_r, rss_full=rss_f)
        return MeasureResult(value, aligned.n_eff, request,
                             {"log(RSS_reduced/RSS_full)": value}, meta)

    prepared = prepare_dataset(dataset, used, est, noise_seed, noise_amplitude)
    if est.tag == "kernel":
        meta["standardized"] = True
    if est.uses_neighbors:
        meta.update(noise_seed=noise_seed, noise_amplitude=noise_amplitude)
    if est.tag == "ksg" and request.measure_id in (
            "entropy", "joint_entropy", "conditional_entropy",
            "stochastic_interaction", "causally_conditioned_entropy"):
        meta["entropy_terms"] = "kozachenko"
    if request.measure_id == "directed_information" and request.di_mode == "pooled_approx":
        meta["di_note"] = ("H(Y_t+1|Y_t^(k)) approximated by H(Y_t+1^(k+1))/(k+1); "
                           "k=0 term is I(Y_t+1;X_t+1)")
    plan = build_plan(request)
    aligned = align_plan(prepared, request, plan)
    terms = evaluate_plan(plan, ContinuousEvaluator(aligned, est))
    value = sum(terms.values())
    return MeasureResult(value, aligned.n_eff, request, terms, meta)


# --- array-level convenience ---------------------------------------------

def _pair(source, target) -> Dataset:
    return Dataset((TimeSeries(source, "X"), TimeSeries(target, "Y")))


def _single(series) -> Dataset:
    return Dataset((TimeSeries(series, "X"),))


def _run(ds, mid, source, estimator, noise_seed, **params):
    req = MeasureRequest(mid, target="X" if source is None else "Y", source=source,
                         estimator=estimator, **params)
    return compute(ds, req, noise_seed=noise_seed)


def entropy(x, estimator=None, noise_seed=0) -> float:
    return _run(_single(x), "entropy", None, estimator, noise_seed).value


def joint_entropy(x, y, estimator=None, noise_seed=0) -> float:
    return _run(_pair(x, y), "joint_entropy", "X", estimator, noise_seed).value


def mutual_information(x, y, estimator=None, noise_seed=0) -> float:
    return _run(_pair(x, y), "mutual_information", "X", estimator, noise_seed).value


def conditional_entropy(x, y, estimator=None, noise_seed=0) -> float:
    """H(Y|X): uncertainty left in ``y`` after observing ``x``."""
    return _run(_pair(x, y), "conditional_entropy", "X", estimator, noise_seed).value


def active_information_storage(x, k=1, tau=1, estimator=None, noise_seed=0) -> float:
    return _run(_single(x), "active_information_storage", None, estimator, noise_seed,
                k=k, tau_target=tau).value


def stochastic_interaction(x, y, estimator=None, noise_seed=0) -> float:
    return _run(_pair(x, y), "stochastic_interaction", "X", estimator, noise_seed).value


def time_lagged_mi(x, y, estimator=None, noise_seed=0) -> float:
    """I(X_t; Y_t+1)."""
    return _run(_pair(x, y), "time_lagged_mi", "X", estimator, noise_seed).value


def causally_conditioned_entropy(x, y, k=1, estimator=None, noise_seed=0) -> float:
    """H(Y||X)(k)."""
    return _run(_pair(x, y), "causally_conditioned_entropy", "X", estimator, noise_seed,
                k=k).value


def directed_information(x, y, K=5, di_mode="exact", estimator=None, noise_seed=0) -> MeasureResult:
    """DI(X->Y) summed over window lengths 0..K-1; the result carries the per-k terms."""
    return _run(_pair(x, y), "directed_information", "X", estimator, noise_seed,
                K=K, di_mode=di_mode)


def transfer_entropy(x, y, k=1, l=1, tau_source=1, tau_target=1, estimator=None,
                     noise_seed=0) -> float:
    """TE(X->Y)(k, l)."""
    return _run(_pair(x, y), "transfer_entropy", "X", estimator, noise_seed,
                k=k, l=l, tau_source=tau_source, tau_target=tau_target).value


def granger_causality(x, y, k=1, l=1) -> float:
    """GC(X->Y)(k, l) from nested least-squares fits."""
    return _run(_pair(x, y), "granger_causality", "X", None, 0, k=k, l=l).value
