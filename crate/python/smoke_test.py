"""Smoke test for the Python bindings.

Build and install the module first, e.g.

    cd crates/python && maturin develop --release

then run `python python/smoke_test.py` (or `pytest python/`).
"""

import json
from fractions import Fraction

import treepersist as tp


def test_tree_and_centroids():
    path = tp.GrowingTree([(1, 0), (2, 1), (3, 2), (4, 3)])
    assert len(path) == 5
    assert path.centroids() == ([2], 2)
    path.add_leaf(4)
    assert path.centroids() == ([2, 3], 3)
    ordered, tied = path.top_k(2)
    assert [v for v, _ in ordered] == [2, 3] and not tied
    assert path.psi_all() == [5, 4, 3, 3, 4, 5]
    again = tp.GrowingTree.from_edge_list(path.to_edge_list())
    assert again.edges() == path.edges()


def test_growth_is_seeded():
    a = tp.grow("pa", 2000, seed=7, hub=3)
    b = tp.grow("pa", 2000, seed=7, hub=3)
    assert a.edges() == b.edges()
    assert a.n == 2000
    ball = tp.grow("diff:3", 500, seed=1, ball=2)
    assert max(ball.degree(v) for v in range(ball.n)) <= 3


def test_exact_values():
    assert tp.symmetry_prob_pa(2) == Fraction(1, 4)
    assert tp.symmetry_prob_ua(3) == Fraction(1, 20)
    assert tp.symmetry_prob_diffusion(3, 1) == Fraction(1, 21)
    assert tp.sufficient_hub_size(0.05) == 27
    assert tp.theta_paths(3, 1, 3) == 1
    assert tp.first_hit_exact("ua", 2, 4) == Fraction(1, 35)
    f2 = tp.hit_prob("ua", 2, m_max=10_000)
    assert abs(f2["value"] - 0.5) < 1e-4
    report = tp.necessary_bound_report("pa", 2.0 ** -9)
    assert report["relaxed"] == 4


def test_urns_and_stats():
    fracs = tp.simulate_urn([2, 1], 1, [0.0, 0.0], 1000, seed=3)
    assert abs(sum(fracs) - 1.0) < 1e-12
    assert tp.limit_law_two("ua", 2) == {"kind": "Beta", "a": 2.0, "b": 1.0}
    assert abs(tp.reg_inc_beta(2.0, 1.0, 0.5) - 0.25) < 1e-12
    samples = [tp.simulate_urn([1, 1], 1, [0.0, 0.0], 2000, seed=4, stream=i)[0] for i in range(300)]
    d, p = tp.ks_beta(samples, 1.0, 1.0)
    assert 0.0 <= d <= 1.0 and p > 0.001


def test_experiments():
    config = {"model": {"kind": "pa"}, "n_target": 500, "replicates": 20, "base_seed": 5, "invariant_checks": True}
    summary = tp.run_persistence(json.dumps(config))
    assert summary["replicates"] == 20 and summary["violations"] == 0
    hub = dict(config, sizes=[1, 2], epsilon_grid=[0.1])
    out = tp.run_hub(json.dumps(hub))
    assert [row["size"] for row in out["rows"]] == [1, 2]
    assert out["rows"][1]["symmetry_prob"] == "1/4"


def test_errors():
    for call, exc in [
        (lambda: tp.grow("diff:2", 10, seed=1, ball=1), ValueError),
        (lambda: tp.path_prob("diff:2", 3, 1, 3), NotImplementedError),
        (lambda: tp.GrowingTree().psi(4), IndexError),
        (lambda: tp.run_persistence("{}"), ValueError),
    ]:
        try:
            call()
        except exc:
            continue
        raise AssertionError(f"expected {exc.__name__}")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"ok {name}")
