import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import cycle
from topobench.graph import Network, ParseError
from topobench.topologies import gen_fattree, gen_hypercube, gen_jellyfish
from topobench.traffic import (
    HoseViolation,
    NoServers,
    SelfDemand,
    ServerId,
    SingleServer,
    TrafficError,
    TrafficMatrix,
    build_tm,
    read_tm,
    tm_all_to_all,
    tm_longest_matching,
    tm_random_matching,
    validate_hose,
    write_tm,
)


def max_matching_weight(dist):
    n = len(dist)
    perms = np.array(list(itertools.permutations(range(n))))
    return dist[np.arange(n), perms].sum(axis=1).max()


def test_a2a_four_servers(c4):
    tm = tm_all_to_all(c4)
    assert len(tm) == 12 and np.all(tm.demand == 0.25)
    assert tm.kind == "A2A"
    validate_hose(tm)


def test_a2a_two_servers():
    tm = tm_all_to_all(Network.from_links(2, [(0, 1)]))
    assert tm.egress().tolist() == [0.5, 0.5]


def test_a2a_needs_two_servers():
    with pytest.raises(NoServers):
        tm_all_to_all(Network.from_links(2, [(0, 1)], servers=[1, 0]))


def test_a2a_hose_sums():
    net = cycle(5).with_servers(2)
    tm = tm_all_to_all(net)
    assert np.allclose(tm.egress(), 9 / 10) and np.allclose(tm.ingress(), 9 / 10)


def test_rm_two_servers_swap():
    tm = tm_random_matching(Network.from_links(2, [(0, 1)]), seed=9)
    assert tm.demands == {(ServerId(0, 0), ServerId(1, 0)): 1.0, (ServerId(1, 0), ServerId(0, 0)): 1.0}


def test_rm_single_server():
    with pytest.raises(SingleServer):
        tm_random_matching(Network.from_links(2, [(0, 1)], servers=[1, 0]))


@given(st.integers(2, 40), st.integers(0, 2**32 - 1))
def test_rm_is_derangement(n, seed):
    net = cycle(max(n, 3)).with_servers(1) if n >= 3 else Network.from_links(2, [(0, 1)])
    tm = tm_random_matching(net, seed)
    assert len(tm) == net.server_count
    assert np.all(tm.demand == 1.0)
    assert sorted(tm.dst.tolist()) == list(range(net.server_count))
    assert not np.any(tm.src == tm.dst)
    validate_hose(tm)


def test_rm_deterministic():
    net = gen_jellyfish(12, 3, 2, seed=1)
    assert tm_random_matching(net, 4) == tm_random_matching(net, 4)
    assert tm_random_matching(net, 4) != tm_random_matching(net, 5)


def test_lm_hypercube_antipodal():
    net = gen_hypercube(3)
    tm, m = tm_longest_matching(net)
    assert m.total_weight == 24
    assert m.total_weight == max_matching_weight(net.distances)
    assert all(v ^ w == 7 for v, w in enumerate(m.pairs))
    assert tm.kind == "LM"


def test_lm_cycle(c4):
    _, m = tm_longest_matching(c4)
    assert m.total_weight == 8 == max_matching_weight(c4.distances)
    assert m.pairs == (2, 3, 0, 1)


def test_lm_two_servers():
    net = Network.from_links(3, [(0, 1), (1, 2)], servers=[1, 0, 1])
    _, m = tm_longest_matching(net)
    assert m.pairs == (1, 0) and m.total_weight == 4


def test_lm_fattree_all_interpod():
    net = gen_fattree(4)
    tm, m = tm_longest_matching(net)
    assert m.total_weight == 4 * net.server_count
    sw = np.repeat(np.arange(net.switch_count), net.servers)
    pods = sw // 4
    assert np.all(pods[tm.src] != pods[tm.dst])


def test_lm_no_fixed_points_with_colocated_servers():
    # every server on one switch: all weights zero, so the optimum is all fixed points
    net = Network(1, (), (3,))
    tm, m = tm_longest_matching(net)
    assert not any(v == w for v, w in enumerate(m.pairs))
    assert m.total_weight == 0
    validate_hose(tm)


@given(st.integers(0, 10_000))
def test_lm_beats_random_matchings(seed):
    net = gen_jellyfish(10, 3, 1, seed=seed % 50)
    _, m = tm_longest_matching(net)
    rng = np.random.default_rng(seed)
    for _ in range(100):
        perm = rng.permutation(10)
        assert m.total_weight >= net.distances[np.arange(10), perm].sum()


def test_hose_violation():
    tm = TrafficMatrix((1, 1), [0], [1], [1.5])
    with pytest.raises(HoseViolation) as err:
        validate_hose(tm)
    assert err.value.server == ServerId(0, 0)


def test_self_demand():
    with pytest.raises(SelfDemand):
        validate_hose(TrafficMatrix((1, 1), [0], [0], [0.1]))


def test_zero_entries_dropped_and_sorted():
    tm = TrafficMatrix((2, 1), [2, 0, 1], [0, 1, 2], [0.5, 0.0, 0.25])
    assert tm.src.tolist() == [1, 2] and tm.demand.tolist() == [0.25, 0.5]


def test_negative_demand_rejected():
    with pytest.raises(TrafficError):
        TrafficMatrix((1, 1), [0], [1], [-1.0])


def test_switch_matrix_keeps_local_traffic():
    net = Network.from_links(2, [(0, 1)], servers=[2, 1])
    sm = tm_all_to_all(net).switch_matrix()
    assert sm.tolist() == [[2 / 3, 2 / 3], [2 / 3, 0.0]]


def test_tm_file_round_trip():
    net = gen_jellyfish(8, 3, 2, seed=2)
    tm = tm_random_matching(net, 3)
    back = read_tm(write_tm(tm), net.servers)
    assert np.array_equal(back.src, tm.src) and np.array_equal(back.dst, tm.dst)
    assert np.array_equal(back.demand, tm.demand)


def test_tm_file_errors():
    with pytest.raises(ParseError) as err:
        read_tm("0 0 1 0\n", (1, 1))
    assert err.value.lineno == 1
    with pytest.raises(TrafficError):
        read_tm("0 0 1 3 1.0\n", (1, 1))


def test_build_tm_specs(c4):
    assert build_tm(c4, "a2a") == tm_all_to_all(c4)
    assert build_tm(c4, "lm") == tm_longest_matching(c4)[0]
    assert build_tm(c4, "rm:seed=7") == tm_random_matching(c4, 7)
    assert build_tm(c4, "rm", seed=7) == tm_random_matching(c4, 7)
    with pytest.raises(TrafficError):
        build_tm(c4, "uniform")
