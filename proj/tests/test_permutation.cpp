#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "srp/exact.hpp"
#include "srp/graph.hpp"
#include "srp/permutation.hpp"
#include "srp/rng.hpp"

using namespace srp;

namespace {
GraphPermutation transposition(const Graph& g, int a, int b) {
    std::vector<int> img(g.vertex_count());
    for (int v = 0; v < g.vertex_count(); ++v) img[v] = v;
    img[a] = b;
    img[b] = a;
    return GraphPermutation(g, img);
}
}  // namespace

TEST_CASE("energy counts displaced points") {
    Graph k2 = complete_graph(2);
    CHECK(energy(GraphPermutation(k2)) == 0);
    CHECK(energy(transposition(k2, 0, 1)) == 2);

    Graph sq = grid_graph(2, 2);
    GraphPermutation four_cycle(sq, {1, 3, 0, 2});
    CHECK(energy(four_cycle) == 4);
}

TEST_CASE("cycle_of follows the orbit") {
    Graph sq = grid_graph(2, 2);
    GraphPermutation id(sq);
    auto singleton = cycle_of(id, 2);
    CHECK(singleton.vertices == std::vector<int>{2});
    CHECK(singleton.length() == 0);

    auto swap = cycle_of(transposition(sq, 0, 1), 0);
    CHECK(swap.vertices == std::vector<int>{0, 1});
    CHECK(swap.length() == 2);

    GraphPermutation four_cycle(sq, {1, 3, 0, 2});
    auto c = cycle_of(four_cycle, 0);
    CHECK(c.vertices == std::vector<int>{0, 1, 3, 2});
    CHECK(c.length() == 4);
    CHECK(c.valid_on(sq));
}

TEST_CASE("orbit of a set") {
    Graph sq = grid_graph(2, 2);
    GraphPermutation id(sq);
    CHECK(orbit(id, VertexSet(4)).empty());
    CHECK(orbit(id, VertexSet::of(4, {1, 2})) == VertexSet::of(4, {1, 2}));

    GraphPermutation two_swaps(sq, {1, 0, 3, 2});
    CHECK(orbit(two_swaps, VertexSet::of(4, {0})) == VertexSet::of(4, {0, 1}));
}

TEST_CASE("orbit is idempotent and monotone") {
    Graph g = grid_graph(2, 3);
    RngStream rng(7, 0);
    auto dist = exact_closed_distribution(g, 0.3);
    for (int trial = 0; trial < 40; ++trial) {
        GraphPermutation p(g, dist.configs[dist.sample(rng)]);
        std::uint64_t mask_a = rng.next_u64() & 63;
        std::uint64_t mask_b = rng.next_u64() & 63;
        VertexSet a = VertexSet::from_mask(6, mask_a);
        VertexSet b = VertexSet::from_mask(6, mask_a | mask_b);
        CHECK(orbit(p, orbit(p, a)) == orbit(p, a));
        CHECK(orbit(p, a).subset_of(orbit(p, b)));
        CHECK(a.subset_of(orbit(p, a)));
    }
}

TEST_CASE("cycle decomposition partitions the domain and carries the energy") {
    Graph g = grid_graph(2, 3);
    enumerate_closed(g, kDefaultEnumerationCap, [&](const std::vector<int>& image, int h) {
        GraphPermutation p(g, image);
        auto cycles = cycle_decomposition(p);
        VertexSet seen(6);
        int h_from_cycles = 0;
        for (const auto& c : cycles) {
            for (int v : c.vertices) {
                CHECK(!seen.contains(v));
                seen.add(v);
            }
            h_from_cycles += c.length();
        }
        CHECK(seen == VertexSet::full(6));
        CHECK(h_from_cycles == h);
    });
}

TEST_CASE("validity checker is total") {
    Graph g = grid_graph(2, 2);
    RngStream rng(11, 0);
    int accepted = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<int> img(4);
        for (auto& x : img) x = static_cast<int>(rng.uniform_below(4));
        bool valid = is_valid_permutation(g, img);
        // reference: bijective + fixed-or-neighbour, spelled independently
        std::vector<int> sorted = img;
        std::sort(sorted.begin(), sorted.end());
        bool bij = sorted == std::vector<int>{0, 1, 2, 3};
        bool local = true;
        for (int v = 0; v < 4; ++v)
            if (img[v] != v && !g.has_edge(v, img[v])) local = false;
        CHECK(valid == (bij && local));
        if (valid) {
            ++accepted;
            CHECK_NOTHROW(GraphPermutation(g, img));
        }
    }
    CHECK(accepted > 0);
}

TEST_CASE("open config: forced walk on K2") {
    Graph k2 = complete_graph(2);
    OpenCycleConfig c;
    c.graph = &k2;
    c.domain = VertexSet::full(2);
    c.source = 0;
    c.sink = 1;
    c.image = {1, 1};
    REQUIRE(is_valid_open_config(c));
    auto w = walk_of(c);
    CHECK(w.vertices == std::vector<int>{0, 1});
    CHECK(w.length() == 1);
    CHECK(energy(c) == 1);
    auto flat = flatten_walk(c);
    CHECK(flat == std::vector<int>{0, 1});
}

TEST_CASE("open config invariants on an enumerated ensemble") {
    auto lat = build_cylinder(2, 2);
    const Graph& g = lat.graph();
    VertexSet domain = VertexSet::full(g.vertex_count());
    int a = lat.vertex_at({0, 0});
    int checked = 0;
    enumerate_open_to_set(g, domain, a, lat.last_hyperplane(), kDefaultEnumerationCap,
                          [&](const std::vector<int>& image, int h, int z) {
                              OpenCycleConfig c{&g, domain, a, z, image};
                              REQUIRE(is_valid_open_config(c));
                              auto w = walk_of(c);
                              CHECK(w.vertices.front() == a);
                              CHECK(w.vertices.back() == z);
                              CHECK(w.valid_on(g));
                              CHECK(energy(c) == h);
                              // flattening removes exactly the walk energy and
                              // leaves a valid closed permutation
                              auto flat = flatten_walk(c);
                              GraphPermutation background(g, flat);
                              CHECK(energy(background) == h - w.length());
                              for (int v : w.vertices) CHECK(background(v) == v);
                              ++checked;
                          });
    CHECK(checked > 0);
}

TEST_CASE("walk_of rejects malformed configs") {
    Graph p3 = path_graph(3);
    OpenCycleConfig c;
    c.graph = &p3;
    c.domain = VertexSet::full(3);
    c.source = 0;
    c.sink = 2;
    c.image = {0, 1, 2};  // source never reaches the sink
    CHECK(!is_valid_open_config(c));
    CHECK_THROWS_AS(walk_of(c), InvariantViolation);
}

TEST_CASE("permutation json round-trip checks the graph hash") {
    Graph g = grid_graph(2, 2);
    GraphPermutation p(g, {1, 0, 3, 2});
    auto j = p.to_json();
    auto back = GraphPermutation::from_json(g, j);
    CHECK(back == p);
    Graph other = path_graph(4);
    CHECK_THROWS_AS(GraphPermutation::from_json(other, j), std::invalid_argument);
}
