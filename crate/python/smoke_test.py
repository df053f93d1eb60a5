"""Smoke test for the dagbound extension module.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`,
then run `python python/smoke_test.py`.
"""

from fractions import Fraction

import dagbound


def main():
    dag = dagbound.Dag.example()
    assert len(dag) == 6 and dag.volume() == 10
    assert dag.longest_path() == ([0, 1, 4, 5], 6)

    paths, lengths = dag.decompose()
    assert paths == [[0, 1, 4, 5], [3], [2]]
    assert lengths == [6, 3, 1]
    assert all(dag.is_generalized_path(p) for p in paths)

    model = dag.model()
    assert model.k_bar == 2
    assert dagbound.graham_bound(10, 6, 2) == 8
    assert dagbound.multipath_bound(model, 2) == 7
    assert model.graham_bound(3) == Fraction(22, 3)
    assert model.multipath_bound(3) == 6
    assert model.cores_multipath(7) == 2 and model.cores_graham(7) == 4

    trace = dagbound.simulate(dag, 2, policy=[0, 2, 3, 1])
    assert trace.makespan == 7
    assert trace.critical_path == [0, 1, 4, 5]
    assert trace.work_conserving and trace.busy_between

    for policy in ("fifo", "lexicographic", "random"):
        t = dagbound.simulate(dag, 2, policy=policy, exec_times=[1, 2, 1, 2, 1, 1], seed=3)
        assert t.makespan <= 7

    assert dagbound.exhaustive_max_makespan(dag, 2) == 7

    task = dagbound.Task(model, 7, 7)
    assert task.heavy
    assert dagbound.schedulable([task], 2, "our").accepted
    assert not dagbound.schedulable([task], 2, "fed").accepted

    try:
        dagbound.Dag([1, 1], [(0, 1), (1, 0)])
    except ValueError as e:
        assert "cycle detected" in str(e)
    else:
        raise AssertionError("cyclic graph accepted")

    g = dagbound.gen_dag(seed=7, index=0, nvertex=(20, 30))
    assert g.is_normalized()
    assert dagbound.Dag.from_json(g.to_json()).edges == g.edges
    m = g.model()
    for cores in (1, 2, 4, 8):
        assert m.longest <= m.multipath_bound(cores) <= m.graham_bound(cores)

    print("dagbound smoke test passed")


if __name__ == "__main__":
    main()
