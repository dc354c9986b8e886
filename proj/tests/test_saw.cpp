#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "srp/graph.hpp"
#include "srp/saw.hpp"

using namespace srp;

TEST_CASE("square-lattice interior counts") {
    // 9x9 patch, origin at the centre: boundary is out of reach for n <= 4.
    Graph patch = grid_graph(9, 9);
    int origin = 4 * 9 + 4;
    auto census = saw_census(patch, origin, 4);
    CHECK(census.saw[0] == 1);
    CHECK(census.saw[1] == 4);
    CHECK(census.saw[2] == 12);
    CHECK(census.saw[3] == 36);
    CHECK(census.saw[4] == 100);
    CHECK(census.sap[0] == 1);
    CHECK(census.sap[1] == 0);
    CHECK(census.sap[2] == 4);  // one back-and-forth pair per neighbour
    CHECK(census.sap[3] == 0);  // bipartite: no odd cycles
    CHECK(census.sap[4] == 8);  // four unit squares, two orientations each
}

TEST_CASE("SAP count never exceeds SAW count") {
    Graph patch = grid_graph(7, 7);
    auto census = saw_census(patch, 3 * 7 + 3, 6);
    for (int n = 0; n <= census.n_max(); ++n) CHECK(census.sap[n] <= census.saw[n]);
}

TEST_CASE("backtrack pairs can be excluded") {
    Graph patch = grid_graph(5, 5);
    auto with = saw_census(patch, 12, 4, kDefaultEnumerationCap, true);
    auto without = saw_census(patch, 12, 4, kDefaultEnumerationCap, false);
    CHECK(with.sap[2] == 4);
    CHECK(without.sap[2] == 0);
    CHECK(with.sap[4] == without.sap[4]);
    CHECK(with.saw == without.saw);
}

TEST_CASE("connective estimates") {
    Graph patch = grid_graph(11, 11);
    auto census = saw_census(patch, 5 * 11 + 5, 8);
    auto est = connective_estimate(census);
    // SAW roots drift down toward the connective constant from above.
    CHECK(est.saw_roots[0] == doctest::Approx(4.0));
    CHECK(est.saw_roots[7] < est.saw_roots[1]);
    CHECK(est.saw_roots[7] > 2.0);
    // SAP roots stay below SAW roots wherever both are positive.
    for (std::size_t i = 0; i < est.sap_roots.size(); ++i)
        if (est.sap_roots[i] > 0) CHECK(est.sap_roots[i] <= est.saw_roots[i] + 1e-12);

    SawCensus flat;
    flat.saw.assign(5, 1);
    flat.sap.assign(5, 1);
    auto ones = connective_estimate(flat);
    for (double r : ones.saw_roots) CHECK(r == doctest::Approx(1.0));
}

TEST_CASE("rooted cycle counts in a restricted domain") {
    Graph g = grid_graph(2, 3);
    // full domain: vertex 0 sits on one unit square (two orientations) and the
    // 6-cycle around the whole grid (two orientations)
    auto counts = rooted_cycle_counts(g, VertexSet::full(6), 0, 6);
    CHECK(counts[2] == 2);  // two neighbours
    CHECK(counts[4] == 2);
    CHECK(counts[6] == 2);
    // domain excluding the middle column kills every proper cycle
    auto cut = rooted_cycle_counts(g, VertexSet::of(6, {0, 2, 3, 5}), 0, 6);
    CHECK(cut[2] == 1);
    CHECK(cut[4] == 0);
    CHECK(cut[6] == 0);
}

TEST_CASE("budget exhaustion raises capacity error") {
    Graph patch = grid_graph(9, 9);
    CHECK_THROWS_AS(saw_census(patch, 40, 12, 50), CapacityError);
}
