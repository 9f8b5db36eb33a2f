import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jfnk.harness import FailureReason, RunRecord, RunStatus
from jfnk.krylov import KrylovMethod
from jfnk.linops import JvpStrategy
from jfnk.problems import ProblemSpec
from jfnk.profiles import default_taus, perf_ratios, profile, ratios_from_costs, write_csv, write_svg


def test_hand_computed_profile():
    table = ratios_from_costs({"p1": {"A": 1.0, "B": 2.0}, "p2": {"A": 3.0, "B": 12.0}})
    assert table.column("A") == [1.0, 1.0] and table.column("B") == [2.0, 4.0]
    a, b = profile(table, [1.0, 2.0, 4.0])
    assert a.rho_values.tolist() == [1.0, 1.0, 1.0]
    assert b.rho_values.tolist() == [0.0, 0.5, 1.0]


def test_failed_runs_never_at_finite_tau():
    table = ratios_from_costs({"p1": {"A": 1.0, "B": None}, "p2": {"A": None, "B": 5.0}})
    assert table.ratios["p1"]["B"] == math.inf and table.ratios["p2"]["B"] == 1.0
    a, b = profile(table, [1.0, 1e3, 1e300])
    assert a.rho_values.tolist() == [0.5, 0.5, 0.5]
    assert b.rho_values.tolist() == [0.5, 0.5, 0.5]


def test_unsolved_problem_is_flagged():
    table = ratios_from_costs({"p1": {"A": None, "B": None}, "p2": {"A": 2.0, "B": 1.0}})
    assert table.unsolved == ["p1"]
    assert all(r == math.inf for r in table.ratios["p1"].values())


def test_zero_costs_tie():
    table = ratios_from_costs({"p": {"A": 0.0, "B": 0.0, "C": 1.0}})
    assert table.ratios["p"] == {"A": 1.0, "B": 1.0, "C": math.inf}


def test_tau_validation():
    table = ratios_from_costs({"p": {"A": 1.0}})
    for bad in ([], [0.5, 1.0], [2.0, 1.0]):
        with pytest.raises(ValueError):
            profile(table, bad)
    taus = default_taus()
    assert taus.size == 64 and taus[0] == 1.0 and math.isclose(taus[-1], 1e4)


costs_st = st.dictionaries(
    st.sampled_from(["p1", "p2", "p3", "p4"]),
    st.fixed_dictionaries({s: st.one_of(st.none(), st.floats(1e-3, 1e3)) for s in "ABC"}),
    min_size=1,
)


@given(costs_st, st.floats(1e-2, 1e2))
def test_ratios_scale_invariant(costs, k):
    scaled = {p: {s: None if c is None else c * k for s, c in row.items()} for p, row in costs.items()}
    t1, t2 = ratios_from_costs(costs), ratios_from_costs(scaled)
    for p in costs:
        for s in "ABC":
            r1, r2 = t1.ratios[p][s], t2.ratios[p][s]
            assert (r1 == math.inf) == (r2 == math.inf)
            if r1 != math.inf:
                assert math.isclose(r1, r2, rel_tol=1e-12)


@given(costs_st)
def test_profile_is_monotone_bounded_and_has_a_winner(costs):
    table = ratios_from_costs(costs)
    curves = profile(table, default_taus(16))
    for c in curves:
        assert np.all(np.diff(c.rho_values) >= 0)
        assert np.all((c.rho_values >= 0) & (c.rho_values <= 1))
    solved = len(costs) - len(table.unsolved)
    # every solved problem has at least one solver at ratio exactly 1
    assert sum(c.rho_values[0] for c in curves) >= solved / len(costs) - 1e-12
    for p in table.problems:
        if p not in table.unsolved:
            assert min(table.ratios[p].values()) == 1.0


def _rec(problem_ic, strategy, wall, ok=True):
    spec = ProblemSpec("burgers", problem_ic, 0.1, n=8)
    return RunRecord(spec=spec, strategy=JvpStrategy.parse(strategy), method=KrylovMethod.GMRES,
                     wall_time_s=wall, krylov_iters_total=int(wall * 10), steps_total=1,
                     status=RunStatus.CONVERGED if ok else RunStatus.FAILED,
                     failure_reason=None if ok else FailureReason.NON_FINITE)


def test_perf_ratios_from_records():
    recs = [_rec("tgv", "ad", 1.0), _rec("tgv", "fd", 3.0), _rec("dsl", "ad", 2.0), _rec("dsl", "fd", 1.0, ok=False)]
    table = perf_ratios(recs, "time")
    assert table.ratios["burgers/tgv/0.1/8"] == {"ad-fp64-gmres": 1.0, "fd-fp64-gmres": 3.0}
    assert table.ratios["burgers/dsl/0.1/8"]["fd-fp64-gmres"] == math.inf
    assert perf_ratios(recs, "iters").ratios["burgers/tgv/0.1/8"]["fd-fp64-gmres"] == 3.0
    with pytest.raises(ValueError):
        perf_ratios(recs + [_rec("tgv", "ad", 1.0)])
    with pytest.raises(ValueError):
        perf_ratios(recs, "memory")


def test_warning_runs_count_as_success():
    r = _rec("tgv", "ad", 2.0)
    r.status = RunStatus.CONVERGED_WITH_WARNINGS
    assert perf_ratios([r, _rec("tgv", "fd", 4.0)]).ratios["burgers/tgv/0.1/8"]["ad-fp64-gmres"] == 1.0


def test_writers(tmp_path):
    curves = profile(ratios_from_costs({"p": {"A": 1.0, "B": 2.0}}), [1.0, 2.0])
    write_csv(curves, tmp_path / "p.csv")
    rows = list(csv.reader(open(tmp_path / "p.csv")))
    assert rows[0] == ["solver_id", "tau", "rho"]
    assert rows[1:] == [["A", "1.0", "1.0"], ["A", "2.0", "1.0"], ["B", "1.0", "0.0"], ["B", "2.0", "1.0"]]
    pytest.importorskip("matplotlib")
    write_svg(curves, tmp_path / "p.svg")
    assert (tmp_path / "p.svg").read_text().lstrip().startswith("<?xml")
