
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uplink_se.asymptotic import (
    build_asymptotic_inputs,
    optimal_zetas,
    rate_ian_asym,
    rate_sd_asym,
)
from uplink_se.errors import CapacityError, ConfigError
from uplink_se.network import WEAK, Geometric, ScenarioSpec, Synthetic
from uplink_se.optimizer import (
    bell,
    check_capacity,
    configuration_count,
    enumerate_configurations,
    optimize_os,
    restricted_growth_strings,
    set_partitions,
)

from conftest import small_config


def _partitions_by_insertion(items):
    """Independent generator: put the last item in each existing block or alone."""
    if not items:
        yield []
        return
    *rest, last = items
    for p in _partitions_by_insertion(rest):
        for i in range(len(p)):
            yield p[:i] + [p[i] + [last]] + p[i + 1:]
        yield p + [[last]]


def _oracle_count(n):
    return sum(
        int(np.prod([len(list(_partitions_by_insertion(list(b)))) for b in p]))
        for p in _partitions_by_insertion(list(range(n)))
    )


@pytest.mark.parametrize("n", range(0, 7))
def test_counts_match_oracle(n):
    assert configuration_count(n) == _oracle_count(n)
    assert bell(n) == len(list(_partitions_by_insertion(list(range(n)))))


def test_known_counts():
    assert [configuration_count(n) for n in range(1, 8)] == [1, 3, 12, 60, 358, 2471, 19302]


@pytest.mark.parametrize("n", range(1, 6))
def test_enumeration_is_exhaustive_and_unique(n):
    cfgs = list(enumerate_configurations(n))
    assert len(cfgs) == configuration_count(n)
    keys = {(c.intervals, c.clusters) for c in cfgs}
    assert len(keys) == len(cfgs)
    assert all(c.canonical() == c for c in cfgs)


def test_two_cell_list_and_order():
    got = [(c.interval_string(), c.cluster_string()) for c in enumerate_configurations(2)]
    assert got == [("[1,2]", "[1,2]"), ("[1,2]", "[1][2]"), ("[1][2]", "[1]|[2]")]


def test_rgs_order_three():
    assert list(restricted_growth_strings(3)) == [
        (0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1), (0, 1, 2)]
    assert list(set_partitions("ab")) == [(("a", "b"),), (("a",), ("b",))]


def test_capacity():
    check_capacity(12)
    with pytest.raises(CapacityError) as info:
        check_capacity(13)
    assert info.value.exit_code == 4
    assert info.value.count == configuration_count(13)
    with pytest.raises(CapacityError):
        next(enumerate_configurations(13))
    with pytest.raises(ConfigError):
        check_capacity(0)


def _inputs(scen, cells, seed=0):
    cfg = small_config(cells=cells, users_per_cell=4, antennas=20)
    return build_asymptotic_inputs(cfg, scen, 10_000, seed)


def test_single_cell():
    inp = _inputs(WEAK, 1)
    res = optimize_os(inp)
    assert len(res.table) == 1
    assert res.best.zetas == (1.0,)
    assert res.se_bits == pytest.approx(rate_ian_asym(inp).se_bits, rel=1e-12)


@settings(max_examples=6, deadline=None)
@given(st.floats(-1.0, 3.0), st.integers(0, 2 ** 32), st.integers(2, 3))
def test_optimum_dominates_specialisations(alpha, seed, cells):
    inp = _inputs(ScenarioSpec(Synthetic(alpha)), cells, seed)
    res = optimize_os(inp)
    tol = 1e-9 * max(1.0, res.se_bits)
    assert res.se_bits >= rate_ian_asym(inp).se_bits - tol
    assert res.se_bits >= rate_sd_asym(inp).se_bits - tol
    assert res.se_bits >= optimal_zetas(inp)[1].se_bits - tol
    ses = [r.se_bits for r in res.table]
    assert ses == sorted(ses, reverse=True)


def test_permutation_equivariance():
    inp = _inputs(ScenarioSpec(Geometric(0.5)), 4, seed=3)
    base = optimize_os(inp)
    for perm in [(1, 0, 2, 3), (3, 2, 1, 0), (2, 3, 0, 1)]:
        res = optimize_os(inp.relabel(perm))
        assert res.se_bits == pytest.approx(base.se_bits, rel=1e-8)
        mapped = res.best.relabel([perm.index(i) for i in range(4)]).canonical()
        assert mapped.intervals == base.best.intervals
        assert mapped.clusters == base.best.clusters


def test_ties_keep_canonical_order(monkeypatch):
    import uplink_se.optimizer as opt
    from uplink_se.finite import SchemeRateReport

    def flat(inputs, cfg):
        z = (1.0 / cfg.n_intervals,) * cfg.n_intervals
        return z, SchemeRateReport("OS", 1.0 if cfg.n_intervals > 1 else 0.5, 0.0, 1, {})

    monkeypatch.setattr(opt, "optimal_os_zetas", flat)
    res = optimize_os(_inputs(WEAK, 3))
    multi = [r.index for r in res.table if r.se_bits == 1.0]
    assert multi == sorted(multi) and len(multi) == configuration_count(3) - bell(3)
    assert res.best == res.table[0].configuration
    assert res.table[0].index == multi[0]
    assert [r.index for r in res.table[len(multi):]] == sorted(r.index for r in res.table[len(multi):])
