// Experiment runner: exact verification suites, tail and census tables,
// regeneration statistics and seeded sampling, all bound to CSV/JSON outputs
// that embed their resolved configuration.
//
// Exit codes: 0 success / all checks pass, 1 check failure, 2 usage or
// domain error, 3 capacity exceeded.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>

#include "srp/analysis.hpp"
#include "srp/branching.hpp"
#include "srp/exact.hpp"
#include "srp/graph.hpp"
#include "srp/io.hpp"
#include "srp/regen.hpp"
#include "srp/sampler.hpp"
#include "srp/saw.hpp"
#include "srp/strategy.hpp"
#include "srp/suites.hpp"

using namespace srp;

namespace {

struct GeometryOptions {
    std::vector<int> grid;      // rows cols
    std::vector<int> cylinder;  // n d
    std::vector<int> rect;      // levels period
    std::string graph_file;

    void attach(CLI::App* cmd) {
        cmd->add_option("--grid", grid, "grid patch: rows cols")->expected(2);
        cmd->add_option("--cylinder", cylinder, "cylinder lattice: n d")->expected(2);
        cmd->add_option("--rect", rect, "rectangular cylinder: levels period")->expected(2);
        cmd->add_option("--graph", graph_file, "graph JSON file");
    }
    bool cylindrical() const { return !cylinder.empty() || !rect.empty(); }
    CylinderLattice lattice() const {
        if (!cylinder.empty()) return build_cylinder(cylinder[0], cylinder[1]);
        if (!rect.empty()) return CylinderLattice::build_rect(rect[0], rect[1]);
        throw std::invalid_argument("open-model commands need a cylinder geometry");
    }
    Graph resolve() const {
        if (!grid.empty()) return grid_graph(grid[0], grid[1]);
        if (cylindrical()) return lattice().graph();
        if (!graph_file.empty()) {
            std::ifstream in(graph_file);
            if (!in) throw std::invalid_argument("cannot read graph file " + graph_file);
            json j;
            in >> j;
            return Graph::from_json(j);
        }
        throw std::invalid_argument("need a geometry: one of --grid/--cylinder/--rect/--graph");
    }
    json to_json() const {
        json j;
        if (!grid.empty()) j = {{"type", "grid"}, {"rows", grid[0]}, {"cols", grid[1]}};
        else if (!cylinder.empty()) j = {{"type", "cylinder"}, {"n", cylinder[0]}, {"d", cylinder[1]}};
        else if (!rect.empty()) j = {{"type", "rect"}, {"levels", rect[0]}, {"period", rect[1]}};
        else j = {{"type", "file"}, {"path", graph_file}};
        return j;
    }
};

// Merge a JSON experiment config into CLI defaults: an option given on the
// command line wins; otherwise the config value is adopted.
void merge_config_value(const CLI::App& app, const std::string& flag, const json& cfg,
                        const char* key, double& target) {
    if (app.count(flag) == 0 && cfg.contains(key)) target = cfg[key].get<double>();
}
void merge_config_value(const CLI::App& app, const std::string& flag, const json& cfg,
                        const char* key, std::uint64_t& target) {
    if (app.count(flag) == 0 && cfg.contains(key)) target = cfg[key].get<std::uint64_t>();
}

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file " + path);
    json cfg;
    in >> cfg;
    static const std::vector<std::string> known = {
        "model", "geometry", "alpha",    "alpha_grid", "log_mu", "delta",
        "sampler", "analysis", "seed",   "out"};
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw std::invalid_argument("unknown config key: " + it.key());
    return cfg;
}

double census_log_mu(const Graph& g, int origin, int n_max) {
    auto census = saw_census(g, origin, n_max);
    for (int n = census.n_max(); n >= 1; --n)
        if (census.saw[n] > 0)
            return std::log(static_cast<double>(census.saw[n])) / n;
    throw std::domain_error("census produced no walks");
}

struct TailRow {
    double alpha;
    int ell;
    double p, lo, hi, overlay;
    bool overlay_valid;
};

// Monte Carlo cycle-length tail for one alpha, deterministic per stream.
std::vector<TailRow> mc_tail(const Graph& g, int z, double alpha, std::uint64_t samples,
                             int lmax, RngStream rng, std::optional<ConstantsBundle> bundle) {
    ClosedSampler chain(g, alpha);
    McmcConfig cfg;
    cfg.sweeps = samples;
    std::vector<std::uint64_t> exceed(lmax + 1, 0);
    chain.sample(cfg, rng, [&](const GraphPermutation& p) {
        int len = cycle_of(p, z).length();
        for (int l = 0; l <= lmax; ++l)
            if (len > l) ++exceed[l];
    });
    std::vector<TailRow> rows;
    for (int l = 0; l <= lmax; ++l) {
        TailRow row{alpha, l, 0, 0, 1, 0, false};
        row.p = static_cast<double>(exceed[l]) / static_cast<double>(samples);
        detail::wilson_interval(static_cast<double>(exceed[l]), static_cast<double>(samples),
                                row.lo, row.hi);
        if (bundle) {
            row.overlay = bundle->big_c0 * std::exp(-bundle->c0 * l);
            row.overlay_valid = true;
        }
        rows.push_back(row);
    }
    return rows;
}

int cmd_verify(const std::string& suite_name, const std::string& junit_path, bool quiet) {
    std::vector<std::string> to_run;
    if (suite_name == "all")
        to_run = suite_names();
    else
        to_run.push_back(suite_name);
    bool all_pass = true;
    std::vector<CheckReport> everything;
    for (const auto& name : to_run) {
        auto result = run_suite(name);
        int failures = 0;
        double worst = 1e300;
        for (const auto& r : result.reports) {
            failures += r.pass ? 0 : 1;
            worst = std::min(worst, r.margin);
            if (!r.pass && !quiet)
                std::cout << "FAIL " << r.check << " " << r.params.dump()
                          << " lhs=" << r.lhs << " rhs=" << r.rhs << "\n";
            everything.push_back(r);
        }
        std::cout << (failures == 0 ? "PASS " : "FAIL ") << result.suite << ": "
                  << result.reports.size() << " checks, " << failures
                  << " failures, worst margin " << worst << "\n";
        all_pass = all_pass && result.pass;
    }
    if (!junit_path.empty()) write_junit(junit_path, "srp-verify", everything);
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spatial random permutation toolkit"};
    app.require_subcommand(1);

    // ---- verify ------------------------------------------------------------
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    std::string suite = "all";
    std::string junit_path;
    bool quiet = false;
    verify->add_option("--suite", suite, "suite name or 'all'")
        ->check(CLI::IsMember([] {
            auto names = suite_names();
            names.push_back("all");
            return names;
        }()));
    verify->add_option("--junit", junit_path, "write a JUnit XML summary");
    verify->add_flag("--quiet", quiet, "suppress per-check failure lines");

    // ---- alpha0 ------------------------------------------------------------
    auto* alpha0_cmd = app.add_subcommand("alpha0", "threshold for a given log mu");
    double a0_log_mu = 1.0;
    alpha0_cmd->add_option("--log-mu", a0_log_mu, "log of the connective constant")
        ->required();

    // ---- constants ---------------------------------------------------------
    auto* constants_cmd = app.add_subcommand("constants", "derived constants bundle");
    double c_alpha = 2.0, c_log_mu = std::log(2.64);
    std::optional<double> c_delta;
    int c_patch = 9, c_nmax = 10;
    constants_cmd->add_option("--alpha", c_alpha)->required();
    constants_cmd->add_option("--log-mu", c_log_mu, "log mu (default: square-lattice value)");
    double c_delta_raw = -1;
    constants_cmd->add_option("--delta", c_delta_raw, "explicit delta (default: split slack)");
    constants_cmd->add_option("--census-patch", c_patch, "square patch side for the census");
    constants_cmd->add_option("--census-nmax", c_nmax, "census depth");

    // ---- census ------------------------------------------------------------
    auto* census_cmd = app.add_subcommand("census", "walk and polygon counts");
    GeometryOptions census_geo;
    census_geo.attach(census_cmd);
    int census_origin = -1, census_nmax = 8;
    bool census_no_pairs = false;
    std::string census_out = "census.csv";
    census_cmd->add_option("--origin", census_origin, "root vertex (default: centre-ish)");
    census_cmd->add_option("--nmax", census_nmax);
    census_cmd->add_flag("--no-backtrack-pairs", census_no_pairs,
                         "exclude length-2 polygons (loop-model variant)");
    census_cmd->add_option("--out", census_out);

    // ---- tails -------------------------------------------------------------
    auto* tails_cmd = app.add_subcommand("tails", "cycle-length tail table");
    GeometryOptions tails_geo;
    tails_geo.attach(tails_cmd);
    std::string tails_config;
    double t_alpha = 1.0;
    std::vector<double> t_alpha_grid;
    int t_z = -1, t_lmax = 20;
    bool t_exact = false, t_no_overlay = false;
    std::uint64_t t_samples = 100000, t_seed = 1;
    double t_log_mu = 0.0;
    int t_census_nmax = 12;
    std::string tails_out = "tails.csv";
    std::string tails_hist;
    tails_cmd->add_option("--config", tails_config, "JSON experiment config");
    tails_cmd->add_option("--histogram", tails_hist,
                          "also write the exact energy histogram JSON (exact mode)");
    tails_cmd->add_option("--alpha", t_alpha);
    tails_cmd->add_option("--alpha-grid", t_alpha_grid, "several alphas, fanned out");
    tails_cmd->add_option("--z", t_z, "marked vertex (default: centre-ish)");
    tails_cmd->add_option("--lmax", t_lmax);
    tails_cmd->add_flag("--exact", t_exact, "exact enumeration instead of Monte Carlo");
    tails_cmd->add_option("--samples", t_samples);
    tails_cmd->add_option("--seed", t_seed);
    tails_cmd->add_option("--log-mu", t_log_mu, "overlay log mu (default: census-derived)");
    tails_cmd->add_option("--census-nmax", t_census_nmax);
    tails_cmd->add_flag("--no-overlay", t_no_overlay);
    tails_cmd->add_option("--out", tails_out);

    // ---- sample ------------------------------------------------------------
    auto* sample_cmd = app.add_subcommand("sample", "draw one seeded configuration");
    GeometryOptions sample_geo;
    sample_geo.attach(sample_cmd);
    std::string sample_model = "closed", sample_out = "sample.json";
    double s_alpha = 1.0;
    std::uint64_t s_seed = 1, s_sweeps = 1000;
    sample_cmd->add_option("--model", sample_model)->check(CLI::IsMember({"closed", "open"}));
    sample_cmd->add_option("--alpha", s_alpha);
    sample_cmd->add_option("--seed", s_seed);
    sample_cmd->add_option("--sweeps", s_sweeps);
    sample_cmd->add_option("--out", sample_out);

    // ---- regen -------------------------------------------------------------
    auto* regen_cmd = app.add_subcommand("regen", "regeneration statistics");
    std::string regen_config;
    int r_n = 16, r_d = 2;
    double r_alpha = 2.0, r_m = 1.0;
    std::uint64_t r_samples = 1000, r_seed = 1, r_burn = 0, r_thin = 0;
    int r_chain_dump = 5;
    bool r_unsafe = false;
    std::string regen_out = "regen";
    regen_cmd->add_option("--config", regen_config, "JSON experiment config");
    regen_cmd->add_option("--n", r_n);
    regen_cmd->add_option("--d", r_d);
    regen_cmd->add_option("--alpha", r_alpha);
    regen_cmd->add_option("--samples", r_samples);
    regen_cmd->add_option("--seed", r_seed);
    regen_cmd->add_option("--m", r_m, "threshold multiplier for the exceedance estimate");
    regen_cmd->add_option("--burn-in", r_burn);
    regen_cmd->add_option("--thinning", r_thin);
    regen_cmd->add_option("--chain-dump", r_chain_dump, "samples dumped to the chain table");
    regen_cmd->add_flag("--unsafe", r_unsafe, "skip the move-set certification");
    regen_cmd->add_option("--out", regen_out, "output prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // usage error
    }

    try {
        if (*verify) return cmd_verify(suite, junit_path, quiet);

        if (*alpha0_cmd) {
            double a0 = solve_alpha0(a0_log_mu);
            json out{{"log_mu", a0_log_mu},
                     {"alpha0", a0},
                     {"residual", std::abs(alpha0_lhs(a0) - a0_log_mu)}};
            std::cout << out.dump(2) << "\n";
            return 0;
        }

        if (*constants_cmd) {
            if (constants_cmd->count("--delta")) c_delta = c_delta_raw;
            Graph patch = grid_graph(c_patch, c_patch);
            auto census = saw_census(patch, (c_patch / 2) * c_patch + c_patch / 2, c_nmax);
            auto bundle = constants_bundle(c_alpha, c_log_mu, c_delta, census);
            std::cout << bundle.to_json().dump(2) << "\n";
            return 0;
        }

        if (*census_cmd) {
            Graph g = census_geo.resolve();
            int origin = census_origin >= 0 ? census_origin : g.vertex_count() / 2;
            auto census = saw_census(g, origin, census_nmax, kDefaultEnumerationCap,
                                     !census_no_pairs);
            json cfg{{"geometry", census_geo.to_json()},
                     {"origin", origin},
                     {"nmax", census_nmax},
                     {"backtrack_pairs", !census_no_pairs}};
            CsvWriter csv(census_out, cfg, {"n", "saw_count", "sap_count"});
            for (int n = 0; n <= census.n_max(); ++n)
                csv.row({static_cast<double>(n), static_cast<double>(census.saw[n]),
                         static_cast<double>(census.sap[n])});
            auto est = connective_estimate(census);
            json summary{{"saw_roots", est.saw_roots}, {"sap_roots", est.sap_roots}};
            std::cout << summary.dump(2) << "\n";
            return 0;
        }

        if (*tails_cmd) {
            if (!tails_config.empty()) {
                json cfg = load_config_file(tails_config);
                merge_config_value(*tails_cmd, "--alpha", cfg, "alpha", t_alpha);
                merge_config_value(*tails_cmd, "--seed", cfg, "seed", t_seed);
                if (tails_cmd->count("--alpha-grid") == 0 && cfg.contains("alpha_grid"))
                    t_alpha_grid = cfg["alpha_grid"].get<std::vector<double>>();
                if (tails_cmd->count("--out") == 0 && cfg.contains("out"))
                    tails_out = cfg["out"].get<std::string>();
            }
            Graph g = tails_geo.resolve();
            int z = t_z >= 0 ? t_z : g.vertex_count() / 2;
            std::vector<double> alphas =
                t_alpha_grid.empty() ? std::vector<double>{t_alpha} : t_alpha_grid;

            json cfg{{"geometry", tails_geo.to_json()}, {"alphas", alphas},
                     {"z", z},          {"lmax", t_lmax},
                     {"exact", t_exact}, {"samples", t_samples},
                     {"seed", t_seed}};
            if (!tails_hist.empty()) {
                if (!t_exact)
                    throw std::invalid_argument("--histogram requires --exact");
                auto hist =
                    closed_energy_histogram(g, VertexSet::full(g.vertex_count()));
                std::ofstream hf(tails_hist);
                hf << histogram_to_json(hist).dump(2) << "\n";
            }
            CsvWriter csv(tails_out, cfg,
                          {"alpha", "ell", "probability", "ci_low", "ci_high", "overlay"});

            bool below_everywhere = true;
            std::vector<std::future<std::vector<TailRow>>> futures;
            for (std::size_t i = 0; i < alphas.size(); ++i) {
                double alpha = alphas[i];
                std::optional<ConstantsBundle> bundle;
                if (!t_no_overlay) {
                    double log_mu = tails_cmd->count("--log-mu")
                                        ? t_log_mu
                                        : census_log_mu(g, z, t_census_nmax);
                    try {
                        bundle = constants_bundle(
                            alpha, log_mu, std::nullopt,
                            saw_census(g, z, t_census_nmax));
                    } catch (const InfeasibleParameters&) {
                        std::cerr << "warning: alpha " << alpha
                                  << " is at or below alpha0(log_mu); overlay omitted\n";
                    }
                }
                if (t_exact) {
                    futures.push_back(std::async(std::launch::deferred, [=, &g] {
                        auto tail = cycle_tail(g, z, alpha);
                        std::vector<TailRow> rows;
                        for (int l = 0; l <= t_lmax; ++l) {
                            double p =
                                l < static_cast<int>(tail.size()) ? tail[l] : 0.0;
                            TailRow row{alpha, l, p, p, p, 0, false};
                            if (bundle) {
                                row.overlay = bundle->big_c0 * std::exp(-bundle->c0 * l);
                                row.overlay_valid = true;
                            }
                            rows.push_back(row);
                        }
                        return rows;
                    }));
                } else {
                    std::uint64_t stream = std::stoull(
                        config_hash(json{{"cfg", config_hash(cfg)}, {"alpha_index", i}}),
                        nullptr, 16);
                    RngStream rng(t_seed, stream);
                    futures.push_back(std::async(alphas.size() > 1 ? std::launch::async
                                                                   : std::launch::deferred,
                                                 mc_tail, std::cref(g), z, alpha, t_samples,
                                                 t_lmax, rng, bundle));
                }
            }
            for (auto& fut : futures)
                for (const auto& row : fut.get()) {
                    csv.row({row.alpha, static_cast<double>(row.ell), row.p, row.lo, row.hi,
                             row.overlay_valid ? row.overlay : -1.0});
                    if (row.overlay_valid && row.hi > row.overlay) below_everywhere = false;
                }
            std::cout << json{{"below_overlay_everywhere", below_everywhere},
                              {"out", tails_out}}
                             .dump(2)
                      << "\n";
            return 0;
        }

        if (*sample_cmd) {
            json cfg{{"model", sample_model}, {"alpha", s_alpha},
                     {"seed", s_seed},        {"sweeps", s_sweeps},
                     {"geometry", sample_geo.to_json()}};
            RngStream rng(s_seed, 0);
            json out{{"config", cfg}, {"version", version_string()}};
            if (sample_model == "closed") {
                Graph g = sample_geo.resolve();
                ClosedSampler chain(g, s_alpha);
                McmcConfig mcfg;
                mcfg.sweeps = 1;
                mcfg.burn_in = s_sweeps * std::max(1, g.vertex_count());
                chain.sample(mcfg, rng, [](const GraphPermutation&) {});
                out["permutation"] = chain.state().to_json();
                out["energy"] = energy(chain.state());
            } else {
                auto lat = sample_geo.lattice();
                OpenSampler chain(lat, VertexSet::full(lat.vertex_count()), 0, s_alpha);
                McmcConfig mcfg;
                mcfg.sweeps = 1;
                mcfg.burn_in = s_sweeps * std::max(1, lat.vertex_count());
                chain.sample(mcfg, rng, [](const OpenCycleConfig&) {});
                const auto& c = chain.state();
                out["open_config"] = json{{"graph_hash", lat.graph().hash()},
                                          {"source", c.source},
                                          {"sink", c.sink},
                                          {"image", c.image},
                                          {"energy", energy(c)},
                                          {"walk", walk_of(c).vertices}};
            }
            std::ofstream f(sample_out);
            f << out.dump(2) << "\n";
            std::cout << "wrote " << sample_out << "\n";
            return 0;
        }

        if (*regen_cmd) {
            if (!regen_config.empty()) {
                json cfg = load_config_file(regen_config);
                merge_config_value(*regen_cmd, "--alpha", cfg, "alpha", r_alpha);
                merge_config_value(*regen_cmd, "--seed", cfg, "seed", r_seed);
                merge_config_value(*regen_cmd, "--samples", cfg, "samples", r_samples);
            }
            if (!r_unsafe) {
                auto cert = certify_open_moves();
                if (!cert.certified) {
                    std::cerr << "move-set certification failed; refusing to run "
                                 "(use --unsafe to override)\n";
                    return 1;
                }
            }
            auto lat = build_cylinder(r_n, r_d);
            int width = regen_width(lat);
            json cfg{{"n", r_n},        {"d", r_d},       {"alpha", r_alpha},
                     {"samples", r_samples}, {"seed", r_seed}, {"width", width},
                     {"burn_in", r_burn},    {"thinning", r_thin}};

            OpenSampler chain(lat, VertexSet::full(lat.vertex_count()), 0, r_alpha);
            McmcConfig mcfg;
            mcfg.sweeps = r_samples;
            mcfg.burn_in = r_burn;
            mcfg.thinning = r_thin;
            RngStream rng(r_seed, 0);
            FluctuationAccumulator acc(lat, width);

            CsvWriter chain_csv(regen_out + "_chain.csv", cfg,
                                {"sample", "i", "x1", "hat1", "set_size"});
            CsvWriter max_csv(regen_out + "_maxhat.csv", cfg, {"sample", "max_hat", "scaled"});
            std::uint64_t sample_index = 0;
            chain.sample(mcfg, rng, [&](const OpenCycleConfig& c) {
                acc.add(c);
                if (sample_index < static_cast<std::uint64_t>(r_chain_dump)) {
                    auto rec = extract_regen_chain(lat, c, width);
                    for (std::size_t i = 0; i < rec.points.size(); ++i) {
                        auto coords = lat.coords(rec.points[i]);
                        chain_csv.row({static_cast<double>(sample_index),
                                       static_cast<double>(i),
                                       static_cast<double>(coords[0]),
                                       static_cast<double>(coords[1]),
                                       static_cast<double>(rec.sets[i].count())});
                    }
                }
                ++sample_index;
            });
            auto stats = acc.finish();
            for (std::size_t i = 0; i < stats.max_abs_transverse.size(); ++i)
                max_csv.row({static_cast<double>(i), stats.max_abs_transverse[i],
                             stats.scaled[i]});

            std::map<int, std::uint64_t> hist;
            for (double inc : stats.increments) ++hist[static_cast<int>(inc)];
            CsvWriter inc_csv(regen_out + "_increments.csv", cfg, {"value", "count"});
            for (const auto& [value, count] : hist)
                inc_csv.row({static_cast<double>(value), static_cast<double>(count)});

            json summary{{"config", cfg},
                         {"mean_increment", stats.mean_increment},
                         {"ci_half_width", stats.ci_half_width},
                         {"mean_ci_contains_zero",
                          std::abs(stats.mean_increment) <= stats.ci_half_width},
                         {"chain_steps", stats.chain_steps},
                         {"quantiles",
                          json{{"q50", stats.quantile(0.5)},
                               {"q90", stats.quantile(0.9)},
                               {"q95", stats.quantile(0.95)},
                               {"q99", stats.quantile(0.99)}}},
                         {"exceedance_at_m", stats.prob_exceeds(r_m, lat.n())}};
            std::ofstream f(regen_out + "_summary.json");
            f << summary.dump(2) << "\n";
            std::cout << summary.dump(2) << "\n";
            return 0;
        }
    } catch (const CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return 3;
    } catch (const std::domain_error& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
