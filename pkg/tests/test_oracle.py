import math
from collections import Counter

import numpy as np
import pytest
import scipy.linalg

from tsinfo import measures as M
from tsinfo import oracle
from tsinfo.core import DiscreteSeries
from tsinfo.errors import InvalidRequest, NonStationary, UnsupportedMeasure, UnsupportedOrder
from tsinfo.measures import MeasureRequest as R
from tsinfo.oracle import (
    VAR_A,
    DiscretePmf,
    PluginEvaluator,
    Var1System,
    analytic_gaussian_measure,
    gen_var1,
    plugin_discrete_measure,
    plugin_result,
    stationary_covariance,
)

LN2 = math.log(2)


# --- VAR(1) generation -----------------------------------------------------

def test_white_noise_generator():
    ds = gen_var1(Var1System([[0.0]], [[1.0]]), 10_000, seed=1)
    assert ds["x1"].values.std(ddof=1) == pytest.approx(1.0, abs=0.02)


def test_var_a_stationary_variance(var_a_100k):
    assert var_a_100k["Y"].values.var() == pytest.approx(2 / 3, abs=0.02)


def test_generator_deterministic():
    a = gen_var1(VAR_A, 500, seed=9).to_matrix()
    b = gen_var1(VAR_A, 500, seed=9).to_matrix()
    assert a.tobytes() == b.tobytes()
    assert a.tobytes() != gen_var1(VAR_A, 500, seed=10).to_matrix().tobytes()


def test_sample_covariance_converges(var_a_100k):
    P, _ = stationary_covariance(VAR_A)
    z = var_a_100k.to_matrix()
    assert np.max(np.abs(np.cov(z.T, bias=True) - P)) < 0.05


def test_nonstationary_rejected():
    unstable = Var1System([[1.0]], [[1.0]])
    with pytest.raises(NonStationary):
        gen_var1(unstable, 10)
    with pytest.raises(NonStationary):
        stationary_covariance(Var1System([[0.5, 2.0], [0.0, 1.1]], np.eye(2)))


def test_var1_system_validation():
    with pytest.raises(InvalidRequest):
        Var1System([[0.1]], [[-1.0]])
    with pytest.raises(InvalidRequest):
        Var1System([[0.1, 0], [0, 0.1]], [[1.0]])


# --- Lyapunov ------------------------------------------------------------

def test_lyapunov_zero_dynamics():
    S = np.array([[2.0, 0.3], [0.3, 1.0]])
    P, C1 = stationary_covariance(Var1System(np.zeros((2, 2)), S))
    np.testing.assert_allclose(P, S, atol=1e-14)
    np.testing.assert_allclose(C1, 0, atol=1e-14)


def test_lyapunov_scalar():
    P, _ = stationary_covariance(Var1System([[0.8]], [[1.0]]))
    assert P[0, 0] == pytest.approx(1 / (1 - 0.64), abs=1e-12)
    assert P[0, 0] == pytest.approx(2.7778, abs=1e-4)


def test_lyapunov_var_a():
    P, C1 = stationary_covariance(VAR_A)
    np.testing.assert_allclose(P, [[1, 0], [0, 2 / 3]], atol=1e-12)
    np.testing.assert_allclose(C1, [[0, 0], [0.5, 1 / 3]], atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_lyapunov_against_scipy(seed):
    g = np.random.default_rng(seed)
    m = 3
    A = g.normal(size=(m, m))
    A *= 0.9 / np.abs(np.linalg.eigvals(A)).max()
    B = g.normal(size=(m, m))
    S = B @ B.T + np.eye(m)
    system = Var1System(A, S)
    P, C1 = stationary_covariance(system)
    assert np.max(np.abs(P - A @ P @ A.T - S)) < 1e-10
    np.testing.assert_allclose(P, scipy.linalg.solve_discrete_lyapunov(A, S), atol=1e-9)
    np.testing.assert_allclose(C1, A @ P, atol=1e-12)


# --- analytic Gaussian values ---------------------------------------------

# Hand derivation for VAR-A (X white, Y_{t+1} = 0.5 X_t + 0.5 Y_t + eta, Var eta = 1/4):
#   Var Y = 2/3, Var(Y_{t+1}|Y_t) = 1/2, Var(Y_{t+1}|Y_t, X_t) = 1/4,
#   corr(Y_t, Y_{t+1}) = 1/2, corr(X_t, Y_{t+1}) = 0.5 / sqrt(2/3).
HAND = {
    "transfer_entropy": 0.5 * math.log(0.5 / 0.25),
    "granger_causality": math.log(0.5 / 0.25),
    "stochastic_interaction": 0.5 * math.log(0.5 / 0.25),
    "time_lagged_mi": -0.5 * math.log(1 - 0.25 / (2 / 3)),
    "causally_conditioned_entropy": 0.5 * math.log(2 * math.pi * math.e * 0.25),
    "mutual_information": 0.0,
}


@pytest.mark.parametrize("mid", sorted(HAND))
def test_analytic_var_a(mid):
    req = R(mid, "Y", "X", estimator="gaussian")
    assert analytic_gaussian_measure(VAR_A, req) == pytest.approx(HAND[mid], abs=1e-12)


def test_analytic_reported_values():
    assert analytic_gaussian_measure(VAR_A, R("te", "Y", "X")) == pytest.approx(0.346574, abs=1e-6)
    assert analytic_gaussian_measure(VAR_A, R("si", "Y", "X")) == pytest.approx(0.346574, abs=1e-6)
    ais = analytic_gaussian_measure(VAR_A, R("ais", "Y"))
    assert ais == pytest.approx(-0.5 * math.log(0.75), abs=1e-12)
    assert ais == pytest.approx(0.143841, abs=1e-6)


def test_analytic_directed_information():
    assert analytic_gaussian_measure(VAR_A, R("di", "Y", "X", K=2)) == pytest.approx(0.5 * LN2, abs=1e-12)
    assert analytic_gaussian_measure(VAR_A, R("di", "Y", "X", K=1)) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(UnsupportedOrder):
        analytic_gaussian_measure(VAR_A, R("di", "Y", "X", K=3))


def test_analytic_reverse_direction_is_zero():
    assert analytic_gaussian_measure(VAR_A, R("te", "X", "Y")) == pytest.approx(0, abs=1e-12)
    assert analytic_gaussian_measure(VAR_A, R("tlmi", "X", "Y")) == pytest.approx(0, abs=1e-12)


def test_analytic_gc_is_twice_te():
    system = Var1System([[0.3, 0.2], [0.4, -0.5]], [[1.0, 0.3], [0.3, 0.7]])
    te = analytic_gaussian_measure(system, R("te", "Y", "X"))
    gc = analytic_gaussian_measure(system, R("gc", "Y", "X"))
    assert gc == 2.0 * te


def test_analytic_rejects_higher_order():
    with pytest.raises(UnsupportedOrder):
        analytic_gaussian_measure(VAR_A, R("te", "Y", "X", k=2))
    with pytest.raises(UnsupportedOrder):
        analytic_gaussian_measure(VAR_A, R("gc", "Y", "X", l=2))


ALL_GAUSSIAN = [
    R("entropy", "Y", estimator="gaussian"),
    R("joint_entropy", "Y", "X", estimator="gaussian"),
    R("mutual_information", "Y", "X", estimator="gaussian"),
    R("conditional_entropy", "Y", "X", estimator="gaussian"),
    R("active_information_storage", "Y", estimator="gaussian"),
    R("stochastic_interaction", "Y", "X", estimator="gaussian"),
    R("time_lagged_mi", "Y", "X", estimator="gaussian"),
    R("causally_conditioned_entropy", "Y", "X", estimator="gaussian"),
    R("directed_information", "Y", "X", estimator="gaussian", K=2),
    R("directed_information", "Y", "X", estimator="gaussian", K=2, di_mode="pooled_approx"),
    R("transfer_entropy", "Y", "X", estimator="gaussian"),
    R("granger_causality", "Y", "X"),
]


@pytest.mark.parametrize("T", [10_000, 100_000])
@pytest.mark.parametrize("req", ALL_GAUSSIAN, ids=lambda r: f"{r.measure_id}-{r.di_mode}")
def test_estimates_converge_to_oracle(req, T):
    ds = gen_var1(VAR_A, T, seed=T + 1)
    est = M.compute(ds, req).value
    assert abs(est - analytic_gaussian_measure(VAR_A, req)) < 3 / math.sqrt(T) * 10


# --- discrete plug-in ------------------------------------------------------

def ds(symbols, name):
    return DiscreteSeries(np.asarray(symbols), alphabet_size=2, name=name)


def test_plugin_fair_coin_entropy():
    assert plugin_discrete_measure([ds([0, 1] * 50, "X")], R("entropy", "X")) == pytest.approx(LN2, abs=1e-15)


def test_plugin_constant_entropy():
    assert plugin_discrete_measure([ds([1] * 20, "X")], R("entropy", "X")) == 0.0


def test_plugin_alternating_ais():
    x = ds([0, 1] * 50 + [0], "X")  # T odd: 100 aligned (past, present) pairs, 50 of each
    assert plugin_discrete_measure([x], R("ais", "X", k=1)) == pytest.approx(LN2, abs=1e-15)


def _copy_process(n_cycles):
    # X repeats 0,0,1,1 so every (X_{t-1}, X_t) pair occurs equally often; Y_{t+1} = X_t
    x = np.tile([0, 0, 1, 1], n_cycles + 1)[: 4 * n_cycles + 1]
    y = np.concatenate([[1], x[:-1]])
    return ds(x, "X"), ds(y, "Y")


def test_plugin_copy_process_te():
    x, y = _copy_process(25)
    assert plugin_discrete_measure([x, y], R("te", "Y", "X")) == pytest.approx(LN2, abs=1e-15)
    # H(Y_{t+1}|Y_t) = ln 2 and H(Y_{t+1}|Y_t, X_t) = 0
    pmf_terms = plugin_result([x, y], R("te", "Y", "X"))
    assert pmf_terms.n_eff == 100


def test_plugin_copy_process_te_random_coin():
    g = np.random.default_rng(4)
    xs = g.integers(0, 2, 5000)
    ys = np.concatenate([[0], xs[:-1]])
    te = plugin_discrete_measure([ds(xs, "X"), ds(ys, "Y")], R("te", "Y", "X"))
    assert te == pytest.approx(LN2, abs=2e-3)


def test_plugin_deterministic_copies_have_zero_uncertainty():
    g = np.random.default_rng(5)
    xs = g.integers(0, 2, 200)
    assert plugin_discrete_measure([ds(xs, "X"), ds(xs, "Y")], R("ce", "Y", "X")) == 0.0
    lagged = np.concatenate([[0], xs[:-1]])
    cce = plugin_discrete_measure([ds(xs, "X"), ds(lagged, "Y")], R("cce", "Y", "X", k=1))
    assert cce == 0.0


def test_plugin_rejects_granger():
    with pytest.raises(UnsupportedMeasure):
        plugin_discrete_measure([ds([0, 1, 1, 0], "X"), ds([1, 0, 1, 0], "Y")], R("gc", "Y", "X"))


def test_discrete_pmf_normalization_checked():
    with pytest.raises(InvalidRequest):
        DiscretePmf([[0], [1]], [0.5, 0.6], [("a", 1)])


# Independent route: count tuples with plain Python and assemble entropies.

def _h(samples):
    n = len(samples)
    return -sum(c / n * math.log(c / n) for c in Counter(samples).values())


def _brute_measure(mid, x, y):
    T = len(x)
    if mid == "entropy":
        return _h([(y[t],) for t in range(T)])
    if mid == "joint_entropy":
        return _h([(x[t], y[t]) for t in range(T)])
    if mid == "mutual_information":
        return _h(list(x)) + _h(list(y)) - _h(list(zip(x, y)))
    if mid == "conditional_entropy":
        return _h(list(zip(x, y))) - _h(list(x))
    r = range(1, T)  # t = present index (0-based), one step of history
    if mid == "active_information_storage":
        return _h([y[t] for t in r]) + _h([y[t - 1] for t in r]) - _h([(y[t - 1], y[t]) for t in r])
    if mid == "time_lagged_mi":
        return _h([x[t - 1] for t in r]) + _h([y[t] for t in r]) - _h([(x[t - 1], y[t]) for t in r])
    if mid == "stochastic_interaction":
        hx = _h([(x[t], x[t - 1]) for t in r]) - _h([x[t - 1] for t in r])
        hy = _h([(y[t], y[t - 1]) for t in r]) - _h([y[t - 1] for t in r])
        hxy = _h([(x[t], y[t], x[t - 1], y[t - 1]) for t in r]) - _h([(x[t - 1], y[t - 1]) for t in r])
        return hx + hy - hxy
    if mid == "transfer_entropy":
        return (_h([(y[t], y[t - 1]) for t in r]) - _h([y[t - 1] for t in r])
                - _h([(y[t], y[t - 1], x[t - 1]) for t in r]) + _h([(y[t - 1], x[t - 1]) for t in r]))
    if mid == "causally_conditioned_entropy":
        return (_h([(y[t], y[t - 1], x[t], x[t - 1]) for t in r])
                - _h([(y[t - 1], x[t], x[t - 1]) for t in r]))
    if mid == "directed_information":  # K = 2 on the shared alignment t >= 1
        term0 = _h([y[t] for t in r]) + _h([x[t] for t in r]) - _h([(y[t], x[t]) for t in r])
        term1 = (_h([(y[t], y[t - 1]) for t in r]) - _h([y[t - 1] for t in r])
                 - _h([(y[t], y[t - 1], x[t], x[t - 1]) for t in r])
                 + _h([(y[t - 1], x[t], x[t - 1]) for t in r]))
        return term0 + term1
    raise AssertionError(mid)


BRUTE_MEASURES = ["entropy", "joint_entropy", "mutual_information", "conditional_entropy",
                  "active_information_storage", "time_lagged_mi", "stochastic_interaction",
                  "transfer_entropy", "causally_conditioned_entropy", "directed_information"]


def _request(mid):
    info = M.MEASURES[mid]
    return R(mid, "Y", "X" if info.pairwise else None, K=2)


@pytest.mark.parametrize("seed", range(10))
def test_plugin_matches_brute_force_counting(seed):
    g = np.random.default_rng(100 + seed)
    x = g.integers(0, 2, 50)
    y = np.where(g.random(50) < 0.7, np.concatenate([[0], x[:-1]]), g.integers(0, 2, 50))
    seqs = [ds(x, "X"), ds(y, "Y")]
    for mid in BRUTE_MEASURES:
        got = plugin_discrete_measure(seqs, _request(mid))
        assert got == pytest.approx(_brute_measure(mid, list(x), list(y)), abs=1e-12), mid


@pytest.mark.parametrize("seed", range(5))
def test_plugin_identities(seed):
    g = np.random.default_rng(seed)
    x = g.integers(0, 3, 300)
    y = (x + g.integers(0, 2, 300)) % 3
    seqs = [DiscreteSeries(x, 3, "X"), DiscreteSeries(y, 3, "Y")]
    val = lambda req: plugin_discrete_measure(seqs, req)
    je = val(R("je", "Y", "X"))
    assert je == pytest.approx(val(R("entropy", "X")) + val(R("ce", "Y", "X")), abs=1e-12)
    assert val(R("mi", "Y", "X")) == pytest.approx(val(R("mi", "X", "Y")), abs=1e-12)
    mi = val(R("mi", "Y", "X"))
    assert mi == pytest.approx(val(R("entropy", "X")) + val(R("entropy", "Y")) - je, abs=1e-12)
    # TE as a difference of two conditional entropies on the TE alignment
    res = plugin_result(seqs, R("te", "Y", "X"))
    plan = M.build_plan(res.request)
    from tsinfo.core import align
    aligned = align(oracle._discrete_dataset(seqs),
                    [({"source": "X", "target": "Y"}[role], spec, lab) for role, spec, lab in plan.blocks])
    ev = PluginEvaluator(DiscretePmf.from_samples(aligned.rows, aligned.blocks))
    ce_diff = ev(M.H(("Y",), ("Y_past",))) - ev(M.H(("Y",), ("Y_past", "X_past")))
    assert res.value == pytest.approx(ce_diff, abs=1e-12)
    di = plugin_result(seqs, R("di", "Y", "X", K=3))
    assert di.value == sum(di.terms.values())
