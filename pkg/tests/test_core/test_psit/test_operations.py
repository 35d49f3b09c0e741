import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.strategies import integers

from src.core.execution.fixtures import (
    random_coupled_sequence,
    random_process,
    random_psit,
    random_stopping_time,
)
from src.core.grid_paths.data import PathEnsemble, TimeGrid
from src.core.psit.data import INF, CoupledSequence, FundamentalSequence, ProcessOnB, Psit, StoppingTime
from src.core.psit.operations import (
    canonical_fs,
    canonical_terms,
    coupled_from_fs,
    freeze_outside,
    glue,
    psit_default_horizon,
    psit_from_debut,
    psit_from_fs,
    restrict,
    stop,
    stop_strict,
    validate_cs,
)
from src.core.utils.errors import InvalidArgument, PreconditionViolation


def _times(*columns):
    return tuple(StoppingTime(np.array(c)) for c in columns)


def test_psit_from_fs_closed():
    grid = TimeGrid(1.0, 10)
    psit = psit_from_fs(FundamentalSequence(_times([2, 3], [5, 3])), grid)
    assert psit.last_index.tolist() == [5, 3]
    assert psit.closed.all()


def test_psit_from_fs_announcing_limit_is_open():
    grid = TimeGrid(1.0, 10)
    fs = FundamentalSequence(_times([2, 7], [4, 7]), StoppingTime(np.array([5, 7])))
    psit = psit_from_fs(fs, grid)
    assert psit.closed.tolist() == [False, True]
    assert psit.last_index.tolist() == [4, 7]


def test_psit_from_fs_rejects_decreasing():
    grid = TimeGrid(1.0, 10)
    with pytest.raises(InvalidArgument, match="path 1"):
        psit_from_fs(FundamentalSequence(_times([1, 5], [2, 4])), grid)


def test_psit_from_debut():
    grid = TimeGrid(1.0, 10)
    psit = psit_from_debut(StoppingTime(np.array([4, 4, INF])), [True, False, True], grid)
    assert psit.last_index.tolist() == [3, 4, 10]
    with pytest.raises(InvalidArgument, match="empty section"):
        psit_from_debut(StoppingTime(np.array([0])), [True], grid)


def test_canonical_fs_open_debut():
    grid = TimeGrid(1.0, 8)
    psit = Psit(grid, np.array([8]), np.array([False]))
    fs = canonical_fs(psit)
    assert [int(t.index[0]) for t in fs.times] == [4, 6, 7, 7]
    assert canonical_terms(8) == 4
    assert psit_from_fs(fs, grid).last_index.tolist() == [7]


def test_canonical_fs_closed_and_unbounded():
    grid = TimeGrid(1.0, 8)
    psit = Psit(grid, np.array([3, INF]), np.array([True, True]))
    fs = canonical_fs(psit)
    assert all(t.clipped(8).tolist() == [3, 8] for t in fs.times)


def test_stop_and_stop_strict():
    grid = TimeGrid(1.0, 4)
    psit = Psit(grid, np.array([4]), np.array([True]))
    jumps = np.array([[False, False, True, False, False]])
    X = ProcessOnB(psit, PathEnsemble(grid, np.array([[0.0, 1.0, 5.0, 6.0, 7.0]]), jumps))
    tau = StoppingTime(np.array([2]))

    stopped = stop(X, tau)
    assert stopped.values.tolist() == [[0.0, 1.0, 5.0, 5.0, 5.0]]
    assert stopped.jumps.tolist() == [[False, False, True, False, False]]

    strict = stop_strict(X, tau)
    assert strict.values.tolist() == [[0.0, 1.0, 1.0, 1.0, 1.0]]
    assert not strict.jumps.any()


def test_stop_outside_b_names_path():
    grid = TimeGrid(1.0, 4)
    psit = Psit(grid, np.array([4, 2]), np.array([True, False]))
    X = restrict(PathEnsemble(grid, np.zeros((2, 5))), psit)
    with pytest.raises(PreconditionViolation, match="path 1"):
        stop(X, StoppingTime(np.array([1, 2])))


def test_freeze_outside():
    grid = TimeGrid(1.0, 4)
    psit = Psit(grid, np.array([2]), np.array([False]))
    X = freeze_outside(PathEnsemble(grid, np.array([[0.0, 1.0, 2.0, 3.0, 4.0]])), psit)
    assert X.values.tolist() == [[0.0, 1.0, 1.0, 1.0, 1.0]]


def _cs_fixture():
    grid = TimeGrid(1.0, 4)
    psit = Psit(grid, np.array([4]), np.array([True]))
    first = PathEnsemble(grid, np.array([[0.0, 1.0, 2.0, 9.0, 9.0]]))
    second = PathEnsemble(grid, np.array([[0.0, 1.0, 2.0, 3.0, 4.0]]))
    times = _times([2], [4])
    return psit, times, first, second


def test_glue_uses_each_member_on_its_segment():
    psit, times, first, second = _cs_fixture()
    glued = glue(CoupledSequence(((times[0], first), (times[1], second))), psit)
    assert glued.values.tolist() == [[0.0, 1.0, 2.0, 3.0, 4.0]]


def test_validate_cs_reports_consistency_witness():
    psit, times, first, second = _cs_fixture()
    broken = PathEnsemble(psit.grid, np.array([[0.0, 1.5, 2.0, 3.0, 4.0]]))
    report = validate_cs(CoupledSequence(((times[0], first), (times[1], broken))), psit)
    assert not report.ok
    violation = report.violations[0]
    assert (violation.kind, violation.path, violation.index) == ("consistency", 0, 1)
    with pytest.raises(InvalidArgument, match="consistency"):
        glue(CoupledSequence(((times[0], first), (times[1], broken))), psit)


def test_validate_cs_reports_coverage_and_order():
    psit, times, first, second = _cs_fixture()
    short = CoupledSequence(((times[0], first),))
    assert validate_cs(short, psit).violations[0].kind == "coverage"
    backwards = CoupledSequence(((times[1], second), (times[0], second)))
    assert validate_cs(backwards, psit).violations[0].kind == "order"


def test_coupled_from_fs_glues_back():
    grid = TimeGrid(1.0, 8)
    psit = Psit(grid, np.array([8, 5]), np.array([False, True]))
    values = np.cumsum(np.arange(18.0).reshape(2, 9), axis=1)
    X = restrict(PathEnsemble(grid, values), psit)
    glued = glue(coupled_from_fs(X, canonical_fs(psit)), psit)
    assert glued.equals_on_b(X)


def test_psit_default_horizon():
    grid = TimeGrid(1.0, 10)
    tau = StoppingTime(np.array([4, INF, 10]))
    psit, fs = psit_default_horizon(1.0, tau, grid)
    assert psit.last_index.tolist() == [3, 10, 9]
    assert psit.closed.tolist() == [False, True, False]
    assert psit_from_fs(fs, grid).last_index.tolist() == [3, 10, 9]


def test_psit_default_horizon_rejects():
    grid = TimeGrid(1.0, 10)
    with pytest.raises(InvalidArgument, match="grid node"):
        psit_default_horizon(0.55, StoppingTime(np.array([INF])), grid)
    with pytest.raises(InvalidArgument, match="default at 0"):
        psit_default_horizon(1.0, StoppingTime(np.array([0])), grid)


def test_psit_rejects_empty_section():
    with pytest.raises(InvalidArgument, match="empty section"):
        Psit(TimeGrid(1.0, 4), np.array([0]), np.array([False]))


def _random_fixture(seed, n_paths=4):
    gen = np.random.default_rng(seed)
    psit = random_psit(TimeGrid(1.0, 24), n_paths, gen)
    return gen, psit, random_process(psit, gen)


@settings(max_examples=25, deadline=None)
@given(integers(0, 2**32 - 1))
def test_stopping_twice_stops_at_the_earlier_time(seed):
    gen, psit, X = _random_fixture(seed)
    T, S = random_stopping_time(psit, gen), random_stopping_time(psit, gen)
    twice = stop(restrict(stop(X, T), psit), S)
    once = stop(X, T.minimum(S))
    assert np.array_equal(twice.values, once.values)
    assert np.array_equal(twice.jumps, once.jumps)


@settings(max_examples=25, deadline=None)
@given(integers(0, 2**32 - 1))
def test_different_coupled_sequences_glue_to_one_process(seed):
    gen, psit, X = _random_fixture(seed)
    random_cs, _ = random_coupled_sequence(X, gen)
    canonical_cs = coupled_from_fs(X, canonical_fs(psit))
    from_random = glue(random_cs, psit)
    from_canonical = glue(canonical_cs, psit)
    assert from_random.equals_on_b(from_canonical)
    assert from_random.equals_on_b(X)


@settings(max_examples=25, deadline=None)
@given(integers(0, 2**32 - 1))
def test_restricting_twice_is_restricting_to_the_smaller_section(seed):
    gen, psit, X = _random_fixture(seed)
    end = random_stopping_time(psit, gen).index
    closed = gen.random(psit.n_paths) < 0.5
    smaller = Psit(psit.grid, np.where(closed, end, end + 1), closed)
    assert np.array_equal(smaller.last_index, end)

    twice = restrict(restrict(X.ensemble, psit).ensemble, smaller)
    once = restrict(X.ensemble, smaller)
    assert twice.equals_on_b(once)

    frozen_twice = freeze_outside(freeze_outside(X.ensemble, psit).ensemble, smaller)
    frozen_once = freeze_outside(X.ensemble, smaller)
    assert np.array_equal(frozen_twice.values, frozen_once.values)
    assert np.array_equal(frozen_twice.ensemble.jumps, frozen_once.ensemble.jumps)
