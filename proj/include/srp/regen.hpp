// Regeneration structures for the open-cycle model on cylinders: forward
// cones, admissible sets, pre-regeneration and regeneration points, the
// regeneration chain (X_i, R_i), prefix decompositions at a level, and the
// transverse-fluctuation statistics of the embedded walk.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "srp/analysis.hpp"
#include "srp/exact.hpp"
#include "srp/graph.hpp"
#include "srp/permutation.hpp"
#include "srp/sampler.hpp"

namespace srp {

// Threshold width used by cones and the chain spacing.  The broadening length
// is logarithmic in the nominal scale; natural log rounded up by default,
// base-2 available for sensitivity checks.
inline int regen_width(const CylinderLattice& lat, bool log2_variant = false) {
    double w = log2_variant ? std::log2(static_cast<double>(lat.n()))
                            : std::log(static_cast<double>(lat.n()));
    return std::max(1, static_cast<int>(std::ceil(w)));
}

// Forward cone from `apex`: opening at slope one in the toroidal l-infinity
// transverse distance, broadened to the full cylinder width from
// `apex + width` on.
inline bool cone_contains(const CylinderLattice& lat, int apex, int z, int width) {
    int dx = lat.axis_coord(z) - lat.axis_coord(apex);
    if (dx >= width) return true;
    return dx >= lat.transverse_distance(apex, z);
}

inline VertexSet cone_set(const CylinderLattice& lat, int apex, int width) {
    VertexSet s(lat.vertex_count());
    for (int v = 0; v < lat.vertex_count(); ++v)
        if (cone_contains(lat, apex, v, width)) s.add(v);
    return s;
}

// ---------------------------------------------------------------------------
// Admissibility levels of a set with respect to a base vertex.

inline bool is_weakly_admissible(const CylinderLattice& lat, const VertexSet& s, int y,
                                 int width) {
    int level = lat.axis_coord(y) + width;
    for (int v = 0; v < lat.vertex_count(); ++v)
        if (lat.axis_coord(v) >= level && !s.contains(v)) return false;
    return true;
}

inline bool is_admissible(const CylinderLattice& lat, const VertexSet& s, int y, int width) {
    if (!is_weakly_admissible(lat, s, y, width)) return false;
    for (int v = 0; v < lat.vertex_count(); ++v)
        if (lat.axis_coord(v) >= lat.axis_coord(y) && lat.transverse_distance(v, y) == 0 &&
            !s.contains(v))
            return false;
    return true;
}

inline bool is_strictly_admissible(const CylinderLattice& lat, const VertexSet& s, int y,
                                   int width) {
    for (int v = 0; v < lat.vertex_count(); ++v)
        if (cone_contains(lat, y, v, width) && !s.contains(v)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Pre-regeneration points of a walk: every later vertex lies in the forward
// cone, every earlier vertex lies strictly to the left.

inline std::vector<int> pre_regeneration_points(const CylinderLattice& lat,
                                                const CyclePath& walk, int width) {
    std::vector<int> out;
    const auto& vs = walk.vertices;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        bool ok = true;
        for (std::size_t j = 0; j < i && ok; ++j)
            if (lat.axis_coord(vs[j]) >= lat.axis_coord(vs[i])) ok = false;
        for (std::size_t j = i + 1; j < vs.size() && ok; ++j)
            if (!cone_contains(lat, vs[i], vs[j], width)) ok = false;
        if (ok) out.push_back(vs[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Regeneration set through a pre-regeneration point x.
//
// The flattened background pi_0 fixes the walk; Q is the least subset of the
// domain containing the strict left half that is closed under pi_0 in both
// directions and co-closed under the reflections about the axis through x
// (z joins Q whenever some reflection maps it into Q or out of the domain).
// The complement R = A \ Q is then the unique largest set satisfying the
// four regeneration-set properties, provided it is strictly x-admissible.

struct RegenSetResult {
    std::optional<VertexSet> set;   // R, when x regenerates
    VertexSet closure;              // Q, always
};

inline RegenSetResult regeneration_set_detail(const CylinderLattice& lat,
                                              const OpenCycleConfig& config, int x,
                                              int width) {
    const int n = lat.vertex_count();
    std::vector<int> flat = flatten_walk(config);
    std::vector<int> flat_inv(n);
    for (int v = 0; v < n; ++v) flat_inv[flat[v]] = v;
    auto reflections = lat.reflection_group(x);

    VertexSet q(n);
    const VertexSet& domain = config.domain;
    domain.for_each([&](int v) {
        if (lat.axis_coord(v) < lat.axis_coord(x)) q.add(v);
    });
    bool grew = true;
    while (grew) {
        grew = false;
        VertexSet add(n);
        q.for_each([&](int v) {
            if (domain.contains(flat[v]) && !q.contains(flat[v])) add.add(flat[v]);
            if (domain.contains(flat_inv[v]) && !q.contains(flat_inv[v])) add.add(flat_inv[v]);
        });
        domain.for_each([&](int v) {
            if (q.contains(v)) return;
            for (const auto& phi : reflections.elements()) {
                int w = phi[v];
                if (!domain.contains(w) || q.contains(w)) {
                    add.add(v);
                    return;
                }
            }
        });
        if (!add.empty()) {
            q |= add;
            grew = true;
        }
    }
    RegenSetResult res;
    res.closure = q;
    VertexSet r = domain - q;
    if (is_strictly_admissible(lat, r, x, width)) res.set = r;
    return res;
}

inline std::optional<VertexSet> regeneration_set(const CylinderLattice& lat,
                                                 const OpenCycleConfig& config, int x,
                                                 int width) {
    auto pre = pre_regeneration_points(lat, walk_of(config), width);
    if (std::find(pre.begin(), pre.end(), x) == pre.end())
        throw std::invalid_argument("regeneration_set: x is not a pre-regeneration point");
    return regeneration_set_detail(lat, config, x, width).set;
}

// The four defining properties, as independent predicates (for assertions).
inline bool regen_r1(const CylinderLattice& lat, const VertexSet& r, int x) {
    bool ok = true;
    r.for_each([&](int v) {
        if (lat.axis_coord(v) < lat.axis_coord(x)) ok = false;
    });
    return ok;
}
inline bool regen_r2(const CylinderLattice& lat, const VertexSet& r, int x, int width) {
    return is_strictly_admissible(lat, r, x, width);
}
inline bool regen_r3(const CylinderLattice& lat, const VertexSet& r, int x) {
    return lat.reflection_group(x).stabilizes(r);
}
inline bool regen_r4(const OpenCycleConfig& config, const VertexSet& r) {
    std::vector<int> flat = flatten_walk(config);
    bool ok = true;
    r.for_each([&](int v) {
        if (!r.contains(flat[v])) ok = false;
    });
    return ok;
}

// ---------------------------------------------------------------------------
// The regeneration chain.

struct RegenRecord {
    std::vector<int> points;        // X_0 = source, ..., terminal sink
    std::vector<VertexSet> sets;    // R_i (full domain for X_0, empty for the sink)
    CyclePath walk;
};

inline RegenRecord extract_regen_chain(const CylinderLattice& lat,
                                       const OpenCycleConfig& config, int width) {
    RegenRecord rec;
    rec.walk = walk_of(config);
    rec.points.push_back(config.source);
    rec.sets.push_back(config.domain);

    // pre-regeneration candidates in walk order, with their regeneration sets
    auto pre = pre_regeneration_points(lat, rec.walk, width);
    const int last_level = lat.levels() - 1;
    int current = config.source;
    while (rec.points.back() != config.sink) {
        int threshold = lat.axis_coord(current) + width;
        int next = -1;
        VertexSet next_set(lat.vertex_count());
        if (threshold <= last_level) {
            for (int y : pre) {
                if (lat.axis_coord(y) < threshold || y == config.source ||
                    y == config.sink)
                    continue;
                auto res = regeneration_set_detail(lat, config, y, width);
                if (res.set) {
                    next = y;
                    next_set = *res.set;
                    break;
                }
            }
        }
        if (next < 0) {
            // terminal jump: the endpoint regenerates by convention, with an
            // empty regeneration set (it has no future to decouple)
            next = config.sink;
            next_set = VertexSet(lat.vertex_count());
        }
        rec.points.push_back(next);
        rec.sets.push_back(next_set);
        current = next;
    }
    return rec;
}

// ---------------------------------------------------------------------------
// Prefix decomposition at a level: x_L is the last walk vertex on the
// hyperplane source_level + L; rho is the strict prefix before it, the tail
// is the orbit of x_L (x_L included).

struct RhoDecomposition {
    int crossing = -1;         // x_L
    std::vector<int> prefix;   // rho_L, in walk order
    std::vector<int> suffix;   // Orb(x_L), in walk order
};

inline RhoDecomposition rho_decomposition(const CylinderLattice& lat,
                                          const OpenCycleConfig& config, int level_offset) {
    auto walk = walk_of(config);
    int target = lat.axis_coord(config.source) + level_offset;
    int split = -1;
    for (std::size_t i = 0; i < walk.vertices.size(); ++i)
        if (lat.axis_coord(walk.vertices[i]) == target) split = static_cast<int>(i);
    if (split < 0)
        throw std::invalid_argument("rho_decomposition: the walk never reaches the level");
    RhoDecomposition out;
    out.crossing = walk.vertices[split];
    out.prefix.assign(walk.vertices.begin(), walk.vertices.begin() + split);
    out.suffix.assign(walk.vertices.begin() + split, walk.vertices.end());
    return out;
}

// ---------------------------------------------------------------------------
// Deterministic pre-regeneration count: a walk spanning L levels with fewer
// than (1+delta) L steps has at least (1-3 delta) L pre-regeneration points.
// The precondition is evaluated on the step count; walks outside it are
// skipped, never failed.

inline std::optional<CheckReport> check_numbregpoint(const CylinderLattice& lat,
                                                     const CyclePath& walk, int span,
                                                     double delta, int width) {
    if (walk.vertices.empty()) return std::nullopt;
    int rise = lat.axis_coord(walk.vertices.back()) - lat.axis_coord(walk.vertices.front());
    if (rise != span) return std::nullopt;
    if (!(walk.length() < (1.0 + delta) * span)) return std::nullopt;
    int count = static_cast<int>(pre_regeneration_points(lat, walk, width).size());
    double required = (1.0 - 3.0 * delta) * span;
    CheckReport r{"numbregpoint",
                  json{{"span", span}, {"delta", delta}, {"steps", walk.length()}},
                  static_cast<double>(count),
                  required,
                  count - required,
                  count >= required};
    return r;
}

// ---------------------------------------------------------------------------
// Conditional prefix-length tail:  P( |rho_L| >= (1+delta) L  |  rho_L in B ).

struct RhoTailEstimate {
    double value = 0.0;
    double ci_low = 0.0, ci_high = 1.0;
    bool exact = false;
    bool defined = false;  // false when the conditioning event has no mass
    std::uint64_t conditioning_count = 0;
};

namespace detail {
inline void wilson_interval(double k, double n, double& lo, double& hi) {
    if (n == 0) {
        lo = 0;
        hi = 1;
        return;
    }
    double z = 1.96, p = k / n;
    double denom = 1 + z * z / n;
    double centre = p + z * z / (2 * n);
    double spread = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n));
    lo = (centre - spread) / denom;
    hi = (centre + spread) / denom;
}
}  // namespace detail

inline RhoTailEstimate estimate_rho_tail_exact(const CylinderLattice& lat,
                                               const VertexSet& domain, int y,
                                               const VertexSet& b, int span, double delta,
                                               double alpha,
                                               std::uint64_t cap = kDefaultEnumerationCap) {
    double conditioned = 0.0, exceeding = 0.0;
    VertexSet sinks = lat.last_hyperplane() & domain;
    enumerate_open_to_set(lat.graph(), domain, y, sinks, cap,
                          [&](const std::vector<int>& image, int h, int z) {
                              OpenCycleConfig c{&lat.graph(), domain, y, z, image};
                              c.domain.add(z);
                              auto rho = rho_decomposition(lat, c, span);
                              bool inside = true;
                              for (int v : rho.prefix)
                                  if (!b.contains(v)) inside = false;
                              if (!inside) return;
                              double w = std::exp(-alpha * h);
                              conditioned += w;
                              if (rho.prefix.size() >= (1.0 + delta) * span) exceeding += w;
                          });
    RhoTailEstimate est;
    est.exact = true;
    est.defined = conditioned > 0;
    if (est.defined) {
        est.value = exceeding / conditioned;
        est.ci_low = est.ci_high = est.value;
    }
    return est;
}

inline RhoTailEstimate estimate_rho_tail_mc(const CylinderLattice& lat, const VertexSet& domain,
                                            int y, const VertexSet& b, int span, double delta,
                                            double alpha, const McmcConfig& cfg,
                                            RngStream& rng) {
    OpenSampler chain(lat.graph(), domain, y, lat.last_hyperplane() & domain, std::nullopt,
                      alpha);
    std::uint64_t conditioned = 0, exceeding = 0;
    chain.sample(cfg, rng, [&](const OpenCycleConfig& c) {
        RhoDecomposition rho;
        try {
            rho = rho_decomposition(lat, c, span);
        } catch (const std::invalid_argument&) {
            return;
        }
        for (int v : rho.prefix)
            if (!b.contains(v)) return;
        ++conditioned;
        if (rho.prefix.size() >= (1.0 + delta) * span) ++exceeding;
    });
    RhoTailEstimate est;
    est.defined = conditioned > 0;
    est.conditioning_count = conditioned;
    if (est.defined) {
        est.value = static_cast<double>(exceeding) / static_cast<double>(conditioned);
        detail::wilson_interval(static_cast<double>(exceeding),
                                static_cast<double>(conditioned), est.ci_low, est.ci_high);
    }
    return est;
}

// ---------------------------------------------------------------------------
// Transverse fluctuation statistics of sampled configurations.

struct FluctuationStats {
    std::vector<double> max_abs_transverse;  // per sample, max over the walk
    std::vector<double> scaled;              // divided by sqrt(n log n)
    std::vector<double> increments;          // per regeneration step, per dim
    double mean_increment = 0.0;
    double ci_half_width = 0.0;  // on the per-sample cluster means
    std::uint64_t chain_steps = 0;

    double quantile(double q) const {
        if (scaled.empty()) return 0.0;
        std::vector<double> sorted = scaled;
        std::sort(sorted.begin(), sorted.end());
        double idx = q * (sorted.size() - 1);
        std::size_t lo = static_cast<std::size_t>(idx);
        std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        return sorted[lo] + (idx - lo) * (sorted[hi] - sorted[lo]);
    }
    double prob_exceeds(double m, int n) const {
        double threshold = m * std::sqrt(static_cast<double>(n) * std::log(n));
        double count = 0;
        for (double v : max_abs_transverse) count += v > threshold ? 1.0 : 0.0;
        return max_abs_transverse.empty() ? 0.0 : count / max_abs_transverse.size();
    }
};

// Accumulates one configuration (optionally paired with its reflection about
// the zero axis, which symmetrizes the increment sample exactly).  On even
// transverse periods the antipodal class (|increment| = period/2) reflects to
// itself, so the paired mean vanishes exactly only on odd periods; the class
// is exponentially rare at the alphas where the chain is used.
class FluctuationAccumulator {
  public:
    FluctuationAccumulator(const CylinderLattice& lat, int width, bool symmetrize = false)
        : lat_(&lat), width_(width), symmetrize_(symmetrize) {}

    void add(const OpenCycleConfig& config) {
        add_one(config);
        if (symmetrize_) add_one(reflect(config));
    }

    // The interval uses batch means over the per-sample cluster means, so the
    // autocorrelation of consecutive chain samples is absorbed into the batch
    // variance instead of shrinking the interval dishonestly.
    FluctuationStats finish() const {
        FluctuationStats s = stats_;
        std::size_t n = cluster_means_.size();
        if (n == 0) return s;
        double mean = 0.0;
        for (double m : cluster_means_) mean += m;
        mean /= static_cast<double>(n);
        s.mean_increment = mean;
        std::size_t batches = std::min<std::size_t>(20, std::max<std::size_t>(2, n / 2));
        std::size_t per = n / batches;
        std::vector<double> batch_means;
        for (std::size_t b = 0; b + 1 <= batches; ++b) {
            double sum = 0.0;
            std::size_t lo = b * per, hi = (b + 1 == batches) ? n : lo + per;
            for (std::size_t i = lo; i < hi; ++i) sum += cluster_means_[i];
            batch_means.push_back(sum / static_cast<double>(hi - lo));
        }
        double var = 0.0;
        for (double m : batch_means) var += (m - mean) * (m - mean);
        var /= static_cast<double>(batch_means.size() - 1);
        s.ci_half_width = 1.96 * std::sqrt(var / static_cast<double>(batch_means.size()));
        return s;
    }

  private:
    void add_one(const OpenCycleConfig& config) {
        auto rec = extract_regen_chain(*lat_, config, width_);
        double max_abs = 0.0;
        for (int v : rec.walk.vertices) {
            auto c = lat_->coords(v);
            for (int k = 1; k < lat_->dimension(); ++k)
                max_abs = std::max(max_abs, static_cast<double>(std::abs(c[k])));
        }
        stats_.max_abs_transverse.push_back(max_abs);
        stats_.scaled.push_back(max_abs /
                                std::sqrt(static_cast<double>(lat_->n()) * std::log(lat_->n())));
        double cluster_sum = 0.0;
        int cluster_n = 0;
        for (std::size_t i = 0; i + 1 < rec.points.size(); ++i) {
            auto from = lat_->coords(rec.points[i]);
            auto to = lat_->coords(rec.points[i + 1]);
            for (int k = 1; k < lat_->dimension(); ++k) {
                double inc = static_cast<double>(lat_->hat_diff(to[k], from[k]));
                stats_.increments.push_back(inc);
                cluster_sum += inc;
                ++cluster_n;
            }
        }
        stats_.chain_steps += rec.points.size() - 1;
        if (cluster_n > 0) cluster_means_.push_back(cluster_sum / cluster_n);
    }

    OpenCycleConfig reflect(const OpenCycleConfig& config) const {
        auto phi = lat_->reflect_about_zero();
        OpenCycleConfig out;
        out.graph = config.graph;
        out.source = phi[config.source];
        out.sink = phi[config.sink];
        out.domain = VertexSet(config.domain.universe_size());
        config.domain.for_each([&](int v) { out.domain.add(phi[v]); });
        out.image.assign(config.image.size(), -1);
        config.domain.for_each([&](int v) { out.image[phi[v]] = phi[config.image[v]]; });
        return out;
    }

    const CylinderLattice* lat_;
    int width_;
    bool symmetrize_;
    FluctuationStats stats_;
    std::vector<double> cluster_means_;
};

// ---------------------------------------------------------------------------
// Open-cycle conditional factorization: for an almost-invariant right part A
// entered at x, the ensemble conditioned on {pi(A) subset A, x = first walk
// vertex in A} factorizes into the two open sub-ensembles.  Checked exactly.

inline std::vector<CheckReport> check_open_markov(const CylinderLattice& lat,
                                                  const VertexSet& a, int source, double alpha,
                                                  double tol = 1e-9,
                                                  std::uint64_t cap = kDefaultEnumerationCap) {
    const Graph& g = lat.graph();
    const int n = g.vertex_count();
    VertexSet full = VertexSet::full(n);
    VertexSet sinks = lat.last_hyperplane();
    if (!sinks.subset_of(a))
        throw std::invalid_argument("check_open_markov: A must contain the sink hyperplane");
    if (a.contains(source))
        throw std::invalid_argument("check_open_markov: the source must lie outside A");

    // collect the full ensemble once
    struct Row {
        std::vector<int> image;
        double weight;
        int entry;  // first walk vertex in A, -1 if pi(A) not subset of A
    };
    std::vector<Row> rows;
    double z_total = 0.0;
    enumerate_open_to_set(g, full, source, sinks, cap,
                          [&](const std::vector<int>& image, int h, int z) {
                              Row row{image, std::exp(-alpha * h), -1};
                              z_total += row.weight;
                              bool inv = true;
                              a.for_each([&](int v) {
                                  if (!a.contains(image[v])) inv = false;
                              });
                              if (inv) {
                                  OpenCycleConfig c{&g, full, source, z, image};
                                  for (int v : walk_of(c).vertices)
                                      if (a.contains(v)) {
                                          row.entry = v;
                                          break;
                                      }
                              }
                              rows.push_back(std::move(row));
                          });

    std::vector<CheckReport> reports;
    a.for_each([&](int x) {
        // entry at a sink vertex would make the inner walk degenerate
        // (source = sink), which the open ensemble rejects
        if (sinks.contains(x)) return;
        double event_mass = 0.0;
        for (const auto& row : rows)
            if (row.entry == x) event_mass += row.weight;
        if (event_mass == 0.0) return;

        // factorized normalizations
        VertexSet outer = a.complement();
        outer.add(x);
        double z_outer = partition_open(g, outer, source, x, alpha, cap).value();
        double z_inner = open_partition_to_set(g, a, x, sinks & a, alpha, cap);

        json params{{"x", x}, {"alpha", alpha}, {"A", a.count()}};
        {
            CheckReport r{"open-markov-i", params, event_mass / z_total,
                          z_outer * z_inner / z_total, 0, false};
            r.margin = tol - std::abs(r.lhs - r.rhs);
            r.pass = r.margin >= 0;
            reports.push_back(r);
        }

        // product identity for forward-evaluation functionals
        auto forward_events = [&](const VertexSet& support) {
            std::vector<Functional> lib;
            int picked = 0;
            support.for_each([&](int v) {
                if (picked++ < 4)
                    lib.push_back({"fwd-fix(" + std::to_string(v) + ")", support, 1.0,
                                   [v](const std::vector<int>& im) {
                                       return im[v] == v ? 1.0 : 0.0;
                                   }});
            });
            return lib;
        };
        auto lib_outer = forward_events(a.complement());
        auto lib_inner = forward_events(a - sinks);

        double z_outer_check = 0.0, z_inner_check = 0.0;
        std::vector<double> e_outer(lib_outer.size(), 0.0), e_inner(lib_inner.size(), 0.0);
        enumerate_open(g, outer, source, x, cap, [&](const std::vector<int>& image, int h) {
            double w = std::exp(-alpha * h);
            z_outer_check += w;
            for (std::size_t i = 0; i < lib_outer.size(); ++i)
                e_outer[i] += w * lib_outer[i].eval(image);
        });
        enumerate_open_to_set(g, a, x, sinks & a, cap,
                              [&](const std::vector<int>& image, int h, int) {
                                  double w = std::exp(-alpha * h);
                                  z_inner_check += w;
                                  for (std::size_t i = 0; i < lib_inner.size(); ++i)
                                      e_inner[i] += w * lib_inner[i].eval(image);
                              });
        double worst = 0.0;
        for (std::size_t i = 0; i < lib_outer.size(); ++i)
            for (std::size_t j = 0; j < lib_inner.size(); ++j) {
                double joint = 0.0;
                for (const auto& row : rows)
                    if (row.entry == x)
                        joint += row.weight * lib_outer[i].eval(row.image) *
                                 lib_inner[j].eval(row.image);
                double lhs = joint / event_mass;
                double rhs = (e_outer[i] / z_outer_check) * (e_inner[j] / z_inner_check);
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        CheckReport r{"open-markov-iii", params, worst, 0.0, tol - worst, worst <= tol};
        reports.push_back(r);
    });
    return reports;
}

}  // namespace srp
