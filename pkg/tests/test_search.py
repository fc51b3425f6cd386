import json

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from gpsearch import gp
from gpsearch.kernels import Kernel
from gpsearch.objective import Landscape, prior_landscape, synth_landscape, top_set
from gpsearch.search import (
    ConfigError,
    Phase,
    SearchConfig,
    SearchError,
    Strategy,
    read_trace,
    run_gp_search,
    run_grid_search,
    run_random_search,
    run_search,
    write_trace,
)
from gpsearch.space import Axis, Encoding, SearchSpace

from oracles import dense_condition


def grid(*sizes):
    return SearchSpace(tuple(Axis(f"a{i}", tuple(float(v) for v in range(n))) for i, n in enumerate(sizes)))


@pytest.fixture(scope="module")
def land60():
    return prior_landscape(grid(3, 4, 5), "sq-exp", seed=0, scale=1.0, offset=0.0)


def configs(budget, seed=0):
    out = [SearchConfig(Strategy.RANDOM, budget=budget, seed=seed), SearchConfig(Strategy.GRID, budget=budget, seed=seed)]
    out += [SearchConfig(Strategy.GP, kernel=k, initial_random=3, budget=budget, seed=seed) for k in Kernel]
    return out


@pytest.mark.parametrize("cfg", configs(60), ids=lambda c: f"{c.strategy}-{c.kernel}")
def test_exhaustive_budget_finds_optimum(land60, cfg):
    tr = run_search(land60, cfg)
    assert sorted(tr.flat_ids) == list(range(60))
    assert tr.terminal_best[0] == top_set(land60, 1).flat_ids[0]


def test_gp_with_r_equal_t_is_random_search(land60):
    gp_tr = run_gp_search(land60, SearchConfig(Strategy.GP, initial_random=12, budget=12, seed=8))
    rnd = run_random_search(land60, SearchConfig(Strategy.RANDOM, budget=12, seed=8))
    np.testing.assert_array_equal(gp_tr.flat_ids, rnd.flat_ids)
    assert all(s.phase is Phase.RANDOM_INIT for s in gp_tr.steps)


def test_gp_third_pick_matches_hand_posterior():
    space = grid(5)
    l = synth_landscape(space, "quadratic", [0.6])
    cfg = SearchConfig(Strategy.GP, kernel="sq-exp", initial_random=2, budget=3, seed=4)
    tr = run_gp_search(l, cfg)
    first = list(tr.flat_ids[:2])
    u = space.encode_all(Encoding.UNIT)
    rest = [i for i in range(5) if i not in first]
    mean, _, _ = dense_condition("sq-exp", u[first], l.scores[first], u[rest], tr.steps[2].jitter)
    assert tr.flat_ids[2] == rest[int(np.argmax(mean))]
    assert tr.steps[2].phase is Phase.MODEL_GUIDED


def test_gp_prefix_is_random_permutation(land60):
    gp_tr = run_gp_search(land60, SearchConfig(Strategy.GP, initial_random=5, budget=20, seed=3))
    rnd = run_random_search(land60, SearchConfig(Strategy.RANDOM, budget=5, seed=3))
    np.testing.assert_array_equal(gp_tr.flat_ids[:5], rnd.flat_ids)
    assert [s.phase for s in gp_tr.steps] == [Phase.RANDOM_INIT] * 5 + [Phase.MODEL_GUIDED] * 15


def test_random_full_budget_is_permutation(land60):
    tr = run_random_search(land60, SearchConfig(Strategy.RANDOM, budget=60, seed=1))
    assert sorted(tr.flat_ids) == list(range(60))


def test_random_seed_determinism(land60):
    a = run_random_search(land60, SearchConfig(Strategy.RANDOM, budget=30, seed=9))
    b = run_random_search(land60, SearchConfig(Strategy.RANDOM, budget=30, seed=9))
    assert a.steps == b.steps


def test_random_first_pick_uniform():
    l = Landscape(grid(10), np.arange(10.0))
    counts = np.zeros(10)
    for seed in range(100_000):
        counts[run_random_search(l, SearchConfig(Strategy.RANDOM, budget=1, seed=seed)).steps[0].flat_id] += 1
    assert np.all(np.abs(counts / 100_000 - 0.1) <= 0.01)


@pytest.mark.parametrize("t", [1, 7, 60])
def test_grid_visits_prefix_in_order(land60, t):
    tr = run_grid_search(land60, SearchConfig(Strategy.GRID, budget=t))
    assert list(tr.flat_ids) == list(range(t))
    assert all(s.phase is Phase.EXHAUSTIVE for s in tr.steps)
    if t == 60:
        assert tr.terminal_best[1] == land60.scores.max()


@pytest.mark.parametrize(
    "cfg,flag",
    [
        (SearchConfig(Strategy.RANDOM, budget=0), "budget"),
        (SearchConfig(Strategy.GRID, budget=61), "budget"),
        (SearchConfig(Strategy.GP, initial_random=0, budget=5), "init-random"),
        (SearchConfig(Strategy.GP, initial_random=6, budget=5), "init-random"),
    ],
)
def test_config_validation(land60, cfg, flag):
    with pytest.raises(ConfigError) as info:
        run_search(land60, cfg)
    assert info.value.flag == flag


def test_runner_strategy_mismatch(land60):
    with pytest.raises(ConfigError):
        run_gp_search(land60, SearchConfig(Strategy.RANDOM, budget=3))


def test_fit_failure_carries_partial_trace():
    # The linear Gram matrix on a 2-D grid has rank 2; zero jitter cannot factor it.
    l = prior_landscape(grid(4, 4), "sq-exp", seed=1)
    cfg = SearchConfig(Strategy.GP, kernel="linear", initial_random=5, budget=8, jitter=0.0, max_jitter=0.0)
    with pytest.raises(SearchError) as info:
        run_gp_search(l, cfg)
    assert len(info.value.trace) == 5


def _check_invariants(tr, l, cfg):
    ids = tr.flat_ids
    assert len(tr) == cfg.budget
    assert len(set(ids.tolist())) == len(ids)
    assert np.all(np.diff(tr.best_so_far) >= 0)
    np.testing.assert_array_equal(tr.best_so_far, np.maximum.accumulate(l.scores[ids]))
    assert tr.terminal_best[1] == tr.scores.max()
    assert [s.iteration for s in tr.steps] == list(range(1, cfg.budget + 1))


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(
    seed=st.integers(0, 10_000),
    kernel=st.sampled_from(list(Kernel)),
    r=st.integers(1, 10),
    extra=st.integers(0, 20),
    strategy=st.sampled_from(list(Strategy)),
)
def test_trace_invariants(land60, seed, kernel, r, extra, strategy):
    cfg = SearchConfig(strategy, kernel=kernel, initial_random=r, budget=r + extra, seed=seed)
    tr = run_search(land60, cfg)
    _check_invariants(tr, land60, cfg)
    again = run_search(land60, cfg)
    assert tr.steps == again.steps


@pytest.mark.parametrize("kernel", list(Kernel))
def test_greedy_consistency_offline(land60, kernel):
    cfg = SearchConfig(Strategy.GP, kernel=kernel, initial_random=4, budget=25, seed=2)
    tr = run_gp_search(land60, cfg)
    X = land60.space.encode_all(cfg.encoding)
    ids = tr.flat_ids
    for i, step in enumerate(tr.steps):
        if step.phase is not Phase.MODEL_GUIDED:
            continue
        prefix = ids[:i]
        model = gp.fit_escalating(kernel, X[prefix], land60.scores[prefix], cfg.jitter, cfg.max_jitter)
        assert model.jitter == step.jitter
        rest = np.setdiff1d(np.arange(60), prefix)
        mu = gp.posterior(model, X[rest]).mean
        chosen = mu[np.searchsorted(rest, step.flat_id)]
        scale = max(1.0, np.abs(mu).max())
        assert np.all(chosen >= mu - 1e-9 * scale)
        # Lowest flat_id among (numerically) maximal candidates.
        assert step.flat_id == rest[mu >= mu.max() - 1e-9 * scale].min()


def test_trace_serialization_round_trip(tmp_path, land60):
    cfg = SearchConfig(Strategy.GP, initial_random=3, budget=10, seed=5)
    tr = run_gp_search(land60, cfg)
    path = tmp_path / "t.jsonl"
    write_trace(path, tr, land60.space)
    lines = [json.loads(x) for x in path.read_text().splitlines()]
    assert lines[0]["type"] == "config" and lines[0]["kernel"] == "abs-exp"
    assert len(lines) == 11
    assert set(lines[1]) >= {"iteration", "flat_id", "values", "score", "best_so_far", "phase"}
    assert lines[1]["values"] == dict(zip(land60.space.names, land60.space.values_of(lines[1]["flat_id"])))
    back = read_trace(path)
    assert back.config == cfg
    assert back.steps == tr.steps
