import numpy as np
import pytest

from oracles import all_partitions, best_partition
from qaplon.community import (
    AnnealSchedule,
    Partition,
    WeightedGraph,
    dense_relabel,
    greedy_modularity,
    load_graph_csv,
    modularity,
    save_partition,
    spinglass_communities,
    spinglass_hamiltonian,
)
from qaplon.errors import ContractError, ModularityUndefinedError, ParseError


def random_graph(rng, n, p=0.6, lo=0.05):
    edges = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges[(i, j)] = float(rng.random()) + lo
    return WeightedGraph(n, edges) if edges else random_graph(rng, n, p, lo)


def test_modularity_hand_values(two_triangles, triangle, k4):
    assert abs(modularity(two_triangles, [0, 0, 0, 1, 1, 1]) - 0.5) <= 1e-15
    assert abs(modularity(two_triangles, [0] * 6)) <= 1e-15
    assert abs(modularity(triangle, [0, 1, 2]) + 1.0 / 3.0) <= 1e-15
    assert abs(modularity(k4, [0] * 4)) <= 1e-15


def test_modularity_invariances():
    rng = np.random.default_rng(5)
    for _ in range(10):
        g = random_graph(rng, int(rng.integers(4, 9)))
        memb = list(dense_relabel(rng.integers(0, 3, g.n_nodes)))
        q = modularity(g, memb)
        scaled = WeightedGraph(g.n_nodes, {k: 7.5 * w for k, w in g.edges.items()})
        assert abs(modularity(scaled, memb) - q) <= 1e-12
        rot = list(dense_relabel([(c + 1) % (max(memb) + 1) for c in memb]))
        assert abs(modularity(g, rot) - q) <= 1e-14


def test_modularity_errors(two_triangles):
    with pytest.raises(ModularityUndefinedError):
        modularity(WeightedGraph(4, {}), [0, 1, 2, 3])
    with pytest.raises(ContractError):
        modularity(two_triangles, [0, 0, 0])  # wrong length
    with pytest.raises(ContractError):
        modularity(two_triangles, [0, 0, 0, 1, 1, -1])


def test_weighted_graph_validation():
    with pytest.raises(ContractError):
        WeightedGraph(3, {(0, 3): 1.0})
    with pytest.raises(ContractError):
        WeightedGraph(3, {(1, 1): 1.0})
    with pytest.raises(ContractError):
        WeightedGraph(3, {(0, 1): -2.0})
    with pytest.raises(ContractError):
        WeightedGraph(0, {})


def test_partition_validation():
    with pytest.raises(ContractError):
        Partition(assignment=(0, 2), q=0.0, algorithm_tag="greedy")  # gap in ids
    with pytest.raises(ContractError):
        Partition(assignment=(0, 1), q=0.0, algorithm_tag="bogus")
    with pytest.raises(ContractError):
        Partition(assignment=(0, 1), q=1.5, algorithm_tag="greedy")


def test_greedy_two_triangles(two_triangles):
    p = greedy_modularity(two_triangles)
    assert abs(p.q - 0.5) <= 1e-12
    assert p.n_communities == 2
    assert len({p.assignment[0], p.assignment[1], p.assignment[2]}) == 1
    assert len({p.assignment[3], p.assignment[4], p.assignment[5]}) == 1
    assert p.assignment[0] != p.assignment[3]


def test_greedy_k4_single_community(k4):
    p = greedy_modularity(k4)
    assert p.n_communities == 1
    assert abs(p.q) <= 1e-12
    # exhaustive search over all 15 partitions confirms 0 is the optimum
    _, best_q = best_partition(k4)
    assert abs(best_q) <= 1e-12


def test_greedy_against_exhaustive_search():
    rng = np.random.default_rng(11)
    for _ in range(8):
        g = random_graph(rng, int(rng.integers(4, 7)))
        p = greedy_modularity(g)
        _, best_q = best_partition(g)
        singletons = modularity(g, list(range(g.n_nodes)))
        all_in_one = modularity(g, [0] * g.n_nodes)
        assert p.q <= best_q + 1e-12
        assert p.q >= singletons - 1e-12
        assert p.q >= all_in_one - 1e-12
        assert abs(modularity(g, p.assignment) - p.q) <= 1e-15


def test_greedy_edgeless_error():
    with pytest.raises(ModularityUndefinedError):
        greedy_modularity(WeightedGraph(3, {}))


def test_greedy_deterministic(two_triangles):
    assert greedy_modularity(two_triangles) == greedy_modularity(two_triangles)


def test_spinglass_identity_gamma_one():
    rng = np.random.default_rng(23)
    for _ in range(6):
        g = random_graph(rng, 5, p=0.7)
        k = np.zeros(5)
        m = 0.0
        for (i, j), w in g.edges.items():
            k[i] += w
            k[j] += w
            m += w
        const = float(np.sum(k * k)) / (4.0 * m * m)
        for memb in all_partitions(5):
            q = modularity(g, memb)
            h = spinglass_hamiltonian(g, memb)
            assert abs(q - (-h / m - const)) <= 1e-12


def test_spinglass_two_triangles_seeds(two_triangles):
    hits = 0
    for seed in range(20):
        p = spinglass_communities(two_triangles, seed=seed)
        assert abs(modularity(two_triangles, p.assignment) - p.q) <= 1e-15
        if abs(p.q - 0.5) <= 1e-12:
            hits += 1
    assert hits >= 19


def test_spinglass_deterministic(two_triangles):
    a = spinglass_communities(two_triangles, seed=42)
    b = spinglass_communities(two_triangles, seed=42)
    assert a == b
    assert a.seed == 42
    assert a.algorithm_tag == "spinglass"


def test_spinglass_gamma_and_schedule_knobs(two_triangles):
    p = spinglass_communities(
        two_triangles,
        seed=1,
        gamma=0.8,
        q_max=4,
        schedule=AnnealSchedule(t_start=2.0, cooling_factor=0.95, flips_per_t=100),
    )
    assert p.n_communities <= 4
    with pytest.raises(ContractError):
        spinglass_communities(two_triangles, seed=1, q_max=1)
    with pytest.raises(ContractError):
        spinglass_communities(two_triangles, seed=1, gamma=0.0)


def test_schedule_validation():
    for bad in (
        dict(t_start=-1.0),
        dict(t_start=0.0),
        dict(cooling_factor=0.0),
        dict(cooling_factor=1.0),
        dict(flips_per_t=0),
        dict(t_stop=0.0),
    ):
        with pytest.raises(ContractError):
            AnnealSchedule(**bad)


def test_isolated_nodes_become_singletons(two_triangles):
    g = WeightedGraph(8, dict(two_triangles.edges))
    for algo_part in (greedy_modularity(g), spinglass_communities(g, seed=5)):
        cs = algo_part.assignment
        assert cs[6] != cs[7]
        assert cs[6] not in cs[:6] and cs[7] not in cs[:6]
        # isolated nodes carry no strength, so Q is unchanged
        assert abs(algo_part.q - 0.5) <= 1e-12 or algo_part.algorithm_tag == "spinglass"


def test_save_partition_format(tmp_path):
    part = Partition(assignment=(0, 0, 1), q=0.25, algorithm_tag="spinglass", seed=9)
    path = tmp_path / "part.csv"
    save_partition(part, path, gamma=1.0)
    lines = path.read_text().splitlines()
    assert lines[0] == "# algorithm=spinglass seed=9 gamma=1 q=0.25"
    assert lines[1] == "node_id,community_id"
    assert lines[2:] == ["0,0", "1,0", "2,1"]


def test_load_graph_csv_errors(tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("src,dst,weight\n0,0,1.0\n")
    with pytest.raises(ParseError):
        load_graph_csv(p)
    p.write_text("src,dst,weight\n0,1,1.0\n1,0,2.0\n")
    with pytest.raises(ParseError):
        load_graph_csv(p)  # duplicate undirected edge
    p.write_text("wrong,header\n")
    with pytest.raises(ParseError):
        load_graph_csv(p)
    p.write_text("src,dst,weight\n0,x,1.0\n")
    with pytest.raises(ParseError):
        load_graph_csv(p)


def test_load_graph_csv_picks_up_nodes_file(tmp_path):
    (tmp_path / "g.edges.csv").write_text("src,dst,weight\n0,1,0.5\n")
    (tmp_path / "g.nodes.csv").write_text("id,cost,basin_size\n0,5,1\n1,6,1\n2,7,1\n")
    g = load_graph_csv(tmp_path / "g.edges.csv")
    assert g.n_nodes == 3  # isolated node 2 survives
