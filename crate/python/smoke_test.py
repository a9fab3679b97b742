"""Smoke test for the kltsurf extension module.

Build and install first, e.g. ``maturin develop`` inside ``crates/python``,
then run ``python python/smoke_test.py``.
"""

import json
import tempfile
from fractions import Fraction
from pathlib import Path

import kltsurf


def check_cyclic():
    assert kltsurf.hj_expand(7, 3) == [3, 2, 2]
    assert kltsurf.hj_evaluate([3, 2, 2]) == (7, 3)
    assert kltsurf.dual_q(7, 3) == 5
    try:
        kltsurf.hj_expand(4, 2)
    except ValueError:
        pass
    else:
        raise AssertionError("non-coprime pair accepted")


def check_classify():
    b = kltsurf.classify(kltsurf.Graph.chain([3]))
    assert b is not None
    assert b.discrepancies == {"E1": Fraction(-1, 3)}
    assert b.delta == Fraction(-4)
    assert b.r == Fraction(3)
    assert b.klt_threshold == Fraction(2, 3)
    assert b.is_epsilon_klt("1/2") and not b.is_epsilon_klt(Fraction(2, 3))

    fork = kltsurf.Graph.from_json(json.dumps({
        "vertices": [{"id": i, "exc": w} for i, w in
                     [("C", 2), ("A", 2), ("B", 3), ("D", 7)]],
        "edges": [["C", "A"], ["C", "B"], ["C", "D"]],
    }))
    assert kltsurf.classify(fork) is None


def check_blow_up():
    g = kltsurf.Graph.chain([3, 2])
    h = g.blow_up(edge=("E1", "E2"))
    assert dict(h.exceptional()) == {"E1": 4, "E2": 3, "N1": 1}
    assert len(h) == 3
    assert kltsurf.Graph.from_json(h.to_json()) == h
    p = kltsurf.Graph.empty().blow_up(point=True)
    assert p.exceptional() == [("N1", 1)]


def check_ledger():
    scenario = json.dumps({
        "x0": {"vertices": []},
        "script": ["point"],
        "m_f": 4,
        "aux_smooth_points": 1,
    })
    d = kltsurf.resolve_scenario(scenario)
    assert d["mu"] == 1
    assert d["delta_f"] == Fraction(-3)
    assert d["m_term"] == Fraction(49, 16)
    assert d["gamma_f"] == 0
    assert d["ch"] == Fraction(17, 16)

    state = json.dumps({"c1_sq": "1", "c2": "2", "points": []})
    before = kltsurf.chern_value(state)
    after = kltsurf.chern_value(kltsurf.apply_contraction(state, scenario))
    assert before - after == d["ch"]


def check_bounds_and_catalog():
    b = kltsurf.compute_bounds(Fraction(1, 3), 10, Fraction(1, 2), l0=4)
    assert b["B"] == 47 and b["L"] == 52 and b["step_bound"] == 20

    baskets = kltsurf.enumerate_baskets(Fraction(1, 2), 2, 2)
    keys = [x.key for x in baskets]
    assert len(set(keys)) == 4
    with tempfile.TemporaryDirectory() as tmp:
        listed = kltsurf.write_catalog(baskets, tmp)
        assert listed == sorted(keys)
        index = json.loads((Path(tmp) / "index.json").read_text())
        assert [e["key"] for e in index["entries"]] == listed


def main():
    for check in (check_cyclic, check_classify, check_blow_up, check_ledger,
                  check_bounds_and_catalog):
        check()
        print(f"ok {check.__name__}")


if __name__ == "__main__":
    main()
