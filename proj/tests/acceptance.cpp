// Acceptance suite: one test case per criterion, each printing a single
// ACCEPTANCE line.  Seeded regressions compare against committed fixtures;
// set SRP_UPDATE_FIXTURES=1 to regenerate them.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "oracles.hpp"
#include "srp/analysis.hpp"
#include "srp/branching.hpp"
#include "srp/exact.hpp"
#include "srp/regen.hpp"
#include "srp/sampler.hpp"
#include "srp/saw.hpp"
#include "srp/strategy.hpp"
#include "srp/suites.hpp"

using namespace srp;

namespace {

struct Stopwatch {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void report(int criterion, bool pass, const std::string& what, double seconds) {
    std::printf("ACCEPTANCE %2d: %s  %s  (%.1fs)\n", criterion, pass ? "PASS" : "FAIL",
                what.c_str(), seconds);
    std::fflush(stdout);
    CHECK(pass);
}

std::string fixture_path(const std::string& name) {
    return std::string(SRP_FIXTURE_DIR) + "/" + name;
}
bool update_fixtures() { return std::getenv("SRP_UPDATE_FIXTURES") != nullptr; }

// Per-instance polygon census: sap[n] = max over roots of the rooted directed
// cycle counts inside the graph itself, so the derived constants certify the
// instance with no lattice assumptions.
SawCensus instance_census(const Graph& g) {
    SawCensus census;
    int n = g.vertex_count();
    census.saw.assign(n + 1, 0);
    census.sap.assign(n + 1, 0);
    census.sap[0] = census.saw[0] = 1;
    for (int root = 0; root < n; ++root) {
        auto counts = rooted_cycle_counts(g, VertexSet::full(n), root, n);
        for (int k = 0; k <= n; ++k)
            census.sap[k] = std::max(census.sap[k], counts[k]);
    }
    return census;
}

}  // namespace

TEST_CASE("criterion 1: enumeration oracle self-consistency") {
    Stopwatch clock;
    bool pass = true;
    int graphs = 0;
    for (const auto& [name, g] : test_matrix()) {
        auto lib = closed_energy_histogram(g, VertexSet::full(g.vertex_count()));
        auto ind = oracle::closed_census_by_cycle_cover(g);
        pass = pass && lib == ind;  // exact integer equality, level by level
        ++graphs;
    }
    pass = pass && graphs >= 10 && clock.seconds() < 10.0;
    report(1, pass, "two independent counting algorithms agree on " +
                        std::to_string(graphs) + " graphs", clock.seconds());
}

TEST_CASE("criterion 2: assembled sampling law equals the target law") {
    Stopwatch clock;
    auto suite = suite_sampling_lemma(0.9, 1e-9);
    bool pass = suite.pass && clock.seconds() < 60.0;
    report(2, pass,
           "termwise equality within 1e-9 for " + std::to_string(suite.reports.size()) +
               " (graph, strategy) pairs",
           clock.seconds());
}

TEST_CASE("criterion 3: spatial Markov identity suite over every subset") {
    Stopwatch clock;
    auto low = suite_markov(0.7, 8, 1e-9);
    auto high = suite_markov(1.5, 8, 1e-9);
    bool pass = low.pass && high.pass && clock.seconds() < 300.0;
    report(3, pass,
           "four identities on " + std::to_string(low.reports.size() + high.reports.size()) +
               " subset checks",
           clock.seconds());
}

TEST_CASE("criterion 4: inequality suite with exact arithmetic") {
    Stopwatch clock;
    std::vector<double> alphas{0.5, 1.0, 2.0};
    auto p31 = suite_prop31(alphas);
    auto p33 = suite_prop33(alphas);
    auto dom = suite_orbit_domination(alphas);
    bool pass = p31.pass && p33.pass && dom.pass;

    // two-sided volume-stability bounds, per-instance certified constants
    std::vector<std::pair<double, double>> alpha_logmu = {
        {0.5, 0.4}, {1.0, 0.75}, {2.0, 0.97}};
    for (auto [alpha, log_mu] : alpha_logmu) {
        for (const auto& [name, g] : test_matrix()) {
            int n = g.vertex_count();
            if (n > 6) continue;
            auto bound = fit_cycle_bound(g, all_subsets_family(g), alpha);
            if (!bound.mean_below_two) {
                pass = false;
                continue;
            }
            GWProcess gw{bound.offspring_minus_one(), 1};
            auto law = total_population_tail(gw, 60);
            auto fit = fit_gw_tail(law, {0.1, 0.25, 0.5, 0.75, 1.0, 1.5}, 20.0);
            auto bundle = constants_bundle(alpha, log_mu, std::nullopt, instance_census(g),
                                           GwFit{fit.c, fit.kappa});
            VertexSet full = VertexSet::full(n);
            VertexSet inner = full;
            inner.remove(n - 1);
            VertexSet a = VertexSet::of(n, {0});
            for (const auto& r :
                 verify_partition_ratio_bounds(g, full, inner, a, alpha, bundle))
                pass = pass && r.pass;
            for (const auto& r : verify_c1_bound(g, full, a, alpha, bundle))
                pass = pass && r.pass;
            VertexSet pair = VertexSet::of(n, {0, 1});
            for (const auto& r : verify_c1_bound(g, full, pair, alpha, bundle))
                pass = pass && r.pass;
        }
    }
    report(4, pass, "path/cycle ratio bound, one-point expansion, orbit domination, "
                    "volume stability: zero violations at alpha in {0.5, 1, 2}",
           clock.seconds());
}

TEST_CASE("criterion 5: deterministic pre-regeneration count, exhaustive") {
    Stopwatch clock;
    auto suite = suite_numbregpoint(10, 6, 6, {0.1, 0.2});
    bool pass = suite.pass && clock.seconds() < 300.0;
    std::uint64_t qualifying =
        suite.reports.at(0).params.at("qualifying").get<std::uint64_t>();
    report(5, pass,
           "zero violations over " + std::to_string(qualifying) +
               " qualifying walks (span 6, 10x6 cylinder)",
           clock.seconds());
}

TEST_CASE("criterion 6: threshold solver residuals and monotonicity") {
    Stopwatch clock;
    bool pass = true;
    double prev = 0.0;
    for (int i = 0; i < 20; ++i) {
        double log_mu = 0.4 + 0.5 * i;
        double a0 = solve_alpha0(log_mu);
        pass = pass && std::abs(alpha0_lhs(a0) - log_mu) < 1e-12;
        pass = pass && a0 < log_mu;
        pass = pass && (i == 0 || a0 > prev);
        prev = a0;
    }
    report(6, pass, "residual < 1e-12 on a 20-point grid, monotone, below log mu",
           clock.seconds());
}

TEST_CASE("criterion 7: Markov chain correctness") {
    Stopwatch clock;
    bool pass = true;

    // exhaustive detailed balance on the 2x2 grid
    {
        Graph g = grid_graph(2, 2);
        double alpha = 1.0;
        std::map<std::vector<int>, int> index;
        std::vector<std::vector<int>> states;
        std::vector<double> weight;
        double z = 0.0;
        enumerate_closed(g, kDefaultEnumerationCap, [&](const std::vector<int>& im, int h) {
            index.emplace(im, static_cast<int>(states.size()));
            states.push_back(im);
            weight.push_back(std::exp(-alpha * h));
            z += weight.back();
        });
        auto moves = build_moves(g, VertexSet::full(4));
        std::map<std::pair<int, int>, double> flow;
        auto record = [&](std::size_t s, const std::vector<int>& next) {
            if (!is_valid_permutation(g, next)) return;
            int t = index.at(next);
            int h_from = 0, h_to = 0;
            for (int v = 0; v < 4; ++v) {
                h_from += states[s][v] != v;
                h_to += next[v] != v;
            }
            flow[{static_cast<int>(s), t}] +=
                (weight[s] / z) * std::min(1.0, std::exp(-alpha * (h_to - h_from)));
        };
        for (std::size_t s = 0; s < states.size(); ++s) {
            for (auto [x, y] : moves.pairs) {
                auto next = states[s];
                std::swap(next[x], next[y]);
                record(s, next);
            }
            for (const auto& r : moves.rotations) {
                auto next = states[s];
                next[r[0]] = states[s][r[1]];
                next[r[1]] = states[s][r[2]];
                next[r[2]] = states[s][r[0]];
                record(s, next);
            }
        }
        pass = pass && verify_ergodicity(g).connected;
        for (const auto& [edge, f] : flow) {
            auto rev = flow.find({edge.second, edge.first});
            pass = pass && rev != flow.end() && std::abs(f - rev->second) < 1e-12;
        }
    }

    // closed-model total variation at one million seeded samples
    auto closed_tv = [&](const Graph& g, double alpha, std::uint64_t seed) {
        auto dist = exact_closed_distribution(g, alpha);
        std::map<std::vector<int>, int> index;
        for (std::size_t i = 0; i < dist.configs.size(); ++i)
            index[dist.configs[i]] = static_cast<int>(i);
        ClosedSampler chain(g, alpha);
        RngStream rng(seed, 0);
        McmcConfig cfg;
        cfg.sweeps = 1000000;
        std::vector<std::uint64_t> counts(dist.configs.size(), 0);
        chain.sample(cfg, rng, [&](const GraphPermutation& p) {
            ++counts[index.at(p.image())];
        });
        return oracle::total_variation(counts, dist.probabilities);
    };
    double tv_2x2 = closed_tv(grid_graph(2, 2), 1.0, 424242);
    double tv_3x2 = closed_tv(grid_graph(3, 2), 1.0, 424243);
    pass = pass && tv_2x2 < 0.01 && tv_3x2 < 0.02;

    // open-model total variation on the 3x2 cylinder
    {
        auto lat = build_cylinder(2, 2);
        double alpha = 1.0;
        auto dist = exact_open_distribution(lat.graph(), VertexSet::full(6), 0,
                                            lat.last_hyperplane(), alpha);
        std::map<std::vector<int>, int> index;
        for (std::size_t i = 0; i < dist.configs.size(); ++i)
            index[dist.configs[i].image] = static_cast<int>(i);
        OpenSampler chain(lat, VertexSet::full(6), 0, alpha);
        RngStream rng(424244, 0);
        McmcConfig cfg;
        cfg.sweeps = 1000000;
        std::vector<std::uint64_t> counts(dist.configs.size(), 0);
        chain.sample(cfg, rng, [&](const OpenCycleConfig& c) {
            ++counts[index.at(c.image)];
        });
        double tv_open = oracle::total_variation(counts, dist.probabilities);
        pass = pass && tv_open < 0.02;
    }
    report(7, pass, "detailed balance exhaustive; TV(2x2) < 0.01, TV(3x2) < 0.02, "
                    "TV(open 3x2) < 0.02 at one million seeded sweeps",
           clock.seconds());
}

TEST_CASE("criterion 8: branching module against tree enumeration") {
    Stopwatch clock;
    bool pass = true;
    std::vector<std::pair<std::vector<double>, int>> cases = {
        {{0.5, 0.0, 0.5}, 1}, {{0.3, 0.4, 0.3}, 1}, {{0.6, 0.0, 0.0, 0.4}, 1},
        {{0.5, 0.0, 0.5}, 2}, {{0.7, 0.2, 0.1}, 3}, {{0.4, 0.6}, 1},
    };
    for (const auto& [pmf, z0] : cases) {
        OffspringLaw law;
        law.pmf = pmf;
        GWProcess gw{law, z0};
        auto lib = total_population_tail(gw, 9);
        auto ind = oracle::gw_law_by_tree_enumeration(pmf, z0, 9);
        for (int w = 0; w <= 9; ++w) {
            double expect = ind.pmf.count(w) ? ind.pmf.at(w) : 0.0;
            pass = pass && std::abs(lib.pmf[w] - expect) < 1e-12;
        }
        pass = pass && std::abs(lib.remainder - ind.remainder) < 1e-12;
    }
    // subcritical mean identity at a fixed seed
    {
        OffspringLaw law;
        law.pmf = {0.5, 0.5};
        GWProcess gw{law, 1};
        RngStream rng(13, 0);
        const int n = 100000;
        double sum = 0.0, sumsq = 0.0;
        for (int i = 0; i < n; ++i) {
            auto sim = simulate_gw(gw, 10000, 1000000, rng);
            sum += static_cast<double>(sim.total);
            sumsq += static_cast<double>(sim.total) * static_cast<double>(sim.total);
        }
        double mean = sum / n;
        double half_ci = 1.96 * std::sqrt((sumsq / n - mean * mean) / n);
        pass = pass && std::abs(mean - gw.expected_total()) < half_ci;
    }
    report(8, pass, "exact population law matches tree enumeration; mean identity in CI",
           clock.seconds());
}

TEST_CASE("criterion 9: seeded tail regression under the decay envelope") {
    Stopwatch clock;
    Graph g = grid_graph(12, 12);
    int z = 5 * 12 + 5;
    double alpha = 1.5;
    const int lmax = 20;
    const std::uint64_t samples = 100000;

    auto census = saw_census(g, z, 12);
    double log_mu = 0.0;
    for (int n = census.n_max(); n >= 1; --n)
        if (census.saw[n] > 0) {
            log_mu = std::log(static_cast<double>(census.saw[n])) / n;
            break;
        }
    auto bundle = constants_bundle(alpha, log_mu, std::nullopt, census);

    ClosedSampler chain(g, alpha);
    RngStream rng(20260808, 0);
    McmcConfig cfg;
    cfg.sweeps = samples;
    std::vector<std::uint64_t> exceed(lmax + 1, 0);
    chain.sample(cfg, rng, [&](const GraphPermutation& p) {
        int len = cycle_of(p, z).length();
        for (int l = 0; l <= lmax; ++l)
            if (len > l) ++exceed[l];
    });

    bool pass = true;
    std::vector<double> tail(lmax + 1);
    for (int l = 0; l <= lmax; ++l) {
        tail[l] = static_cast<double>(exceed[l]) / static_cast<double>(samples);
        double lo, hi;
        detail::wilson_interval(static_cast<double>(exceed[l]), static_cast<double>(samples),
                                lo, hi);
        double overlay = bundle.big_c0 * std::exp(-bundle.c0 * l);
        pass = pass && hi < overlay;  // 95% upper band below the envelope
    }

    std::string path = fixture_path("tail_12x12_alpha1.5_seed20260808.csv");
    if (update_fixtures()) {
        std::ofstream f(path);
        f << "ell,probability\n";
        for (int l = 0; l <= lmax; ++l) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%d,%.17g\n", l, tail[l]);
            f << buf;
        }
        std::printf("  (fixture updated: %s)\n", path.c_str());
    } else {
        std::ifstream f(path);
        pass = pass && f.good();
        std::string line;
        std::getline(f, line);
        for (int l = 0; l <= lmax && pass; ++l) {
            REQUIRE(std::getline(f, line));
            double expect = std::stod(line.substr(line.find(',') + 1));
            pass = pass && std::abs(tail[l] - expect) < 1e-12;
        }
    }
    pass = pass && bundle.alpha0 < alpha;
    report(9, pass, "12x12 grid, alpha 1.5: CI band below C0 exp(-c0 l) for l <= 20; "
                    "tail matches the committed fixture",
           clock.seconds());
}

TEST_CASE("criterion 10: seeded fluctuation regression on the 32-cylinder") {
    Stopwatch clock;
    auto lat = build_cylinder(32, 2, 1 << 21);
    int width = regen_width(lat);
    double alpha = 2.0;
    OpenSampler chain(lat, VertexSet::full(lat.vertex_count()), 0, alpha);
    RngStream rng(32320808, 0);
    McmcConfig cfg;
    cfg.sweeps = 10000;
    cfg.burn_in = 2000 * static_cast<std::uint64_t>(lat.vertex_count());
    cfg.thinning = 10 * static_cast<std::uint64_t>(lat.vertex_count());
    FluctuationAccumulator acc(lat, width);
    chain.sample(cfg, rng, [&](const OpenCycleConfig& c) { acc.add(c); });
    auto stats = acc.finish();

    bool pass = std::abs(stats.mean_increment) <= stats.ci_half_width;

    std::vector<double> qs{0.5, 0.75, 0.9, 0.95, 0.99};
    std::string path = fixture_path("fluct_n32_alpha2_seed32320808.csv");
    if (update_fixtures()) {
        std::ofstream f(path);
        f << "quantile,scaled_max_transverse\n";
        for (double q : qs) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.2f,%.3f\n", q, stats.quantile(q));
            f << buf;
        }
        std::printf("  (fixture updated: %s)\n", path.c_str());
    } else {
        std::ifstream f(path);
        pass = pass && f.good();
        std::string line;
        std::getline(f, line);
        for (double q : qs) {
            if (!std::getline(f, line)) {
                pass = false;
                break;
            }
            double expect = std::stod(line.substr(line.find(',') + 1));
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.3f", stats.quantile(q));
            pass = pass && std::abs(std::stod(buf) - expect) < 5e-4;  // 3 decimals
        }
    }
    double monotone_prev = 1.0;
    for (double m : {0.25, 0.5, 1.0, 2.0}) {
        double p = stats.prob_exceeds(m, lat.n());
        pass = pass && p <= monotone_prev + 1e-12;
        monotone_prev = p;
    }
    pass = pass && clock.seconds() < 600.0;
    report(10, pass, "n=32 cylinder, 10^4 seeded samples: increment mean CI contains 0; "
                     "scaled-max quantiles match the committed fixture",
           clock.seconds());
}
