#include "gwrkit/cluster.hpp"

#include "gwrkit/csv.hpp"
#include "gwrkit/distance.hpp"
#include "gwrkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <tuple>

namespace gwrkit {

const char* to_string(ClusterMethod m) { return m == ClusterMethod::kmeans ? "kmeans" : "agglomerative"; }

const char* to_string(Linkage l) {
    switch (l) {
    case Linkage::ward: return "ward";
    case Linkage::complete: return "complete";
    case Linkage::average: return "average";
    }
    return "?";
}

ClusterMethod parse_cluster_method(const std::string& text) {
    if (text == "kmeans") return ClusterMethod::kmeans;
    if (text == "agglomerative") return ClusterMethod::agglomerative;
    throw ConfigError("unknown cluster method '" + text + "' (expected kmeans or agglomerative)");
}

Linkage parse_linkage(const std::string& text) {
    for (auto l : {Linkage::ward, Linkage::complete, Linkage::average})
        if (text == to_string(l)) return l;
    throw ConfigError("unknown linkage '" + text + "' (expected ward, complete or average)");
}

// --------------------------------------------------------------- standardize

Standardized standardize(const Eigen::MatrixXd& X) {
    Standardized out;
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        if (X.rows() < 2 || is_effectively_constant(X.col(c))) out.dropped.push_back(static_cast<std::size_t>(c));
        else out.kept.push_back(static_cast<std::size_t>(c));
    }
    if (out.kept.empty()) throw DataError("standardize: every column has zero variance");
    const auto k = static_cast<Eigen::Index>(out.kept.size());
    out.values.resize(X.rows(), k);
    out.means.resize(k);
    out.stds.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto col = X.col(static_cast<Eigen::Index>(out.kept[static_cast<std::size_t>(j)]));
        const double mean = col.mean();
        const Eigen::VectorXd centered = col.array() - mean;
        const double sd = std::sqrt(centered.squaredNorm() / static_cast<double>(X.rows()));
        out.means[j] = mean;
        out.stds[j] = sd;
        out.values.col(j) = centered / sd;
    }
    return out;
}

// -------------------------------------------------------------------- kmeans

namespace {

struct KMeansRun {
    std::vector<int> assignments;
    Eigen::MatrixXd centroids;
    double inertia = 0.0;
    int iterations = 0;
    std::vector<double> trace;
};

Eigen::MatrixXd kmeans_pp(const Eigen::MatrixXd& X, int k, std::mt19937_64& rng) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd centroids(k, X.cols());
    std::vector<char> chosen(static_cast<std::size_t>(n), 0);
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    Eigen::Index first = pick(rng);
    centroids.row(0) = X.row(first);
    chosen[static_cast<std::size_t>(first)] = 1;
    std::vector<double> d2(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = squared_distance(X.row(i), X.row(first));

    for (int c = 1; c < k; ++c) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        Eigen::Index next = -1;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            const double target = u(rng);
            double running = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                running += d2[static_cast<std::size_t>(i)];
                if (d2[static_cast<std::size_t>(i)] > 0.0 && running >= target) {
                    next = i;
                    break;
                }
            }
            if (next < 0) // round-off at the tail: last point with positive mass
                for (Eigen::Index i = n - 1; i >= 0 && next < 0; --i)
                    if (d2[static_cast<std::size_t>(i)] > 0.0) next = i;
        } else {
            std::vector<Eigen::Index> free;
            for (Eigen::Index i = 0; i < n; ++i)
                if (!chosen[static_cast<std::size_t>(i)]) free.push_back(i);
            std::uniform_int_distribution<std::size_t> pf(0, free.size() - 1);
            next = free[pf(rng)];
        }
        chosen[static_cast<std::size_t>(next)] = 1;
        centroids.row(c) = X.row(next);
        for (Eigen::Index i = 0; i < n; ++i)
            d2[static_cast<std::size_t>(i)] =
                std::min(d2[static_cast<std::size_t>(i)], squared_distance(X.row(i), X.row(next)));
    }
    return centroids;
}

// Nearest centroid per point (ties: lowest index). Returns inertia.
double assign(const Eigen::MatrixXd& X, const Eigen::MatrixXd& centroids, std::vector<int>& labels) {
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        int best = 0;
        double best_d = squared_distance(X.row(i), centroids.row(0));
        for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
            const double d = squared_distance(X.row(i), centroids.row(c));
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        labels[static_cast<std::size_t>(i)] = best;
        inertia += best_d;
    }
    return inertia;
}

std::vector<std::size_t> sizes_of(const std::vector<int>& labels, int k) {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    return sizes;
}

// Moves the point farthest from its centroid (in a cluster of size > 1)
// into each empty cluster, placing that cluster's centroid on it.
void repair_empty(const Eigen::MatrixXd& X, Eigen::MatrixXd& centroids, std::vector<int>& labels, int k) {
    auto sizes = sizes_of(labels, k);
    for (int c = 0; c < k; ++c) {
        if (sizes[static_cast<std::size_t>(c)] > 0) continue;
        Eigen::Index far = -1;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const int own = labels[static_cast<std::size_t>(i)];
            if (sizes[static_cast<std::size_t>(own)] < 2) continue;
            const double d = squared_distance(X.row(i), centroids.row(own));
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        if (far < 0) return; // k > n cannot happen after validation
        --sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
        labels[static_cast<std::size_t>(far)] = c;
        sizes[static_cast<std::size_t>(c)] = 1;
        centroids.row(c) = X.row(far);
    }
}

void update_means(const Eigen::MatrixXd& X, Eigen::MatrixXd& centroids, const std::vector<int>& labels, int k) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, X.cols());
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const int l = labels[static_cast<std::size_t>(i)];
        sums.row(l) += X.row(i);
        ++counts[static_cast<std::size_t>(l)];
    }
    for (int c = 0; c < k; ++c)
        if (counts[static_cast<std::size_t>(c)] > 0)
            centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
}

double inertia_of(const Eigen::MatrixXd& X, const Eigen::MatrixXd& centroids, const std::vector<int>& labels) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        total += squared_distance(X.row(i), centroids.row(labels[static_cast<std::size_t>(i)]));
    return total;
}

KMeansRun lloyd(const Eigen::MatrixXd& X, int k, int max_iters, std::mt19937_64& rng) {
    KMeansRun run;
    run.centroids = kmeans_pp(X, k, rng);
    run.assignments.assign(static_cast<std::size_t>(X.rows()), 0);
    run.trace.push_back(assign(X, run.centroids, run.assignments));
    for (int it = 0; it < max_iters; ++it) {
        update_means(X, run.centroids, run.assignments, k);
        repair_empty(X, run.centroids, run.assignments, k);
        const auto previous = run.assignments;
        run.trace.push_back(assign(X, run.centroids, run.assignments));
        run.iterations = it + 1;
        if (run.assignments == previous) break;
    }
    // Only reachable with coincident points: nearest-centroid ties can
    // leave a cluster empty, so hand it a point directly.
    repair_empty(X, run.centroids, run.assignments, k);
    run.inertia = inertia_of(X, run.centroids, run.assignments);
    return run;
}

} // namespace

ClusterModel kmeans(const Eigen::MatrixXd& X, int k, const KMeansOptions& options) {
    const Eigen::Index n = X.rows();
    if (k < 1) throw ConfigError("kmeans: k must be at least 1");
    if (static_cast<Eigen::Index>(k) > n)
        throw DataError("kmeans: k = " + std::to_string(k) + " exceeds the number of points (" + std::to_string(n) + ")");
    if (options.restarts < 1 || options.max_iters < 1) throw ConfigError("kmeans: restarts and max_iters must be >= 1");
    if (!X.allFinite()) throw DataError("kmeans: non-finite input");

    std::vector<KMeansRun> runs(static_cast<std::size_t>(options.restarts));
#pragma omp parallel for schedule(dynamic, 1)
    for (int r = 0; r < options.restarts; ++r) {
        std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                          static_cast<std::uint32_t>(r)};
        std::mt19937_64 rng(seq);
        runs[static_cast<std::size_t>(r)] = lloyd(X, k, options.max_iters, rng);
    }

    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r)
        if (runs[r].inertia < runs[best].inertia) best = r;

    ClusterModel model;
    model.method = ClusterMethod::kmeans;
    model.k = k;
    model.seed = options.seed;
    model.best_restart = static_cast<int>(best);
    model.assignments = runs[best].assignments;
    model.centroids = runs[best].centroids;
    model.inertia = runs[best].inertia;
    model.iterations = runs[best].iterations;
    for (auto& r : runs) model.inertia_trace.push_back(std::move(r.trace));
    return model;
}

// ------------------------------------------------------------- agglomerative

namespace {

struct PairKey {
    double height;
    std::size_t lo;
    std::size_t hi;
    bool operator<(const PairKey& o) const { return std::tie(height, lo, hi) < std::tie(o.height, o.lo, o.hi); }
};

} // namespace

AgglomerativeResult agglomerative(const Eigen::MatrixXd& X, int k, Linkage linkage) {
    const auto n = static_cast<std::size_t>(X.rows());
    if (n == 0) throw DataError("agglomerative: no points");
    if (k < 1 || static_cast<std::size_t>(k) > n)
        throw DataError("agglomerative: k = " + std::to_string(k) + " must lie in [1, " + std::to_string(n) + "]");

    Eigen::MatrixXd D = pairwise_euclidean(X);
    std::vector<std::size_t> id(n), size(n, 1);
    std::iota(id.begin(), id.end(), 0);
    std::vector<char> active(n, 1);
    std::vector<PairKey> row_best(n);
    const PairKey none{std::numeric_limits<double>::infinity(), n * 2, n * 2};

    AgglomerativeResult result;
    result.dendrogram.leaves = n;
    for (std::size_t step = 0; step + 1 < n; ++step) {
#pragma omp parallel for schedule(dynamic, 16)
        for (std::size_t i = 0; i < n; ++i) {
            PairKey best = none;
            if (active[i]) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    if (!active[j]) continue;
                    const PairKey key{D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                                      std::min(id[i], id[j]), std::max(id[i], id[j])};
                    if (key < best) best = key;
                }
            }
            row_best[i] = best;
        }
        std::size_t slot_i = n;
        PairKey best = none;
        for (std::size_t i = 0; i < n; ++i)
            if (row_best[i] < best) {
                best = row_best[i];
                slot_i = i;
            }
        std::size_t slot_j = n;
        for (std::size_t j = slot_i + 1; j < n; ++j)
            if (active[j] && std::max(id[slot_i], id[j]) == best.hi && std::min(id[slot_i], id[j]) == best.lo) {
                slot_j = j;
                break;
            }

        const double ni = static_cast<double>(size[slot_i]);
        const double nj = static_cast<double>(size[slot_j]);
        const double dij = D(static_cast<Eigen::Index>(slot_i), static_cast<Eigen::Index>(slot_j));
        for (std::size_t m = 0; m < n; ++m) {
            if (!active[m] || m == slot_i || m == slot_j) continue;
            const double dmi = D(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(slot_i));
            const double dmj = D(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(slot_j));
            double d = 0.0;
            switch (linkage) {
            case Linkage::complete: d = std::max(dmi, dmj); break;
            case Linkage::average: d = (ni * dmi + nj * dmj) / (ni + nj); break;
            case Linkage::ward: {
                const double nm = static_cast<double>(size[m]);
                const double v = ((ni + nm) * dmi * dmi + (nj + nm) * dmj * dmj - nm * dij * dij) / (ni + nj + nm);
                d = std::sqrt(std::max(v, 0.0));
                break;
            }
            }
            D(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(slot_i)) = d;
            D(static_cast<Eigen::Index>(slot_i), static_cast<Eigen::Index>(m)) = d;
        }
        result.dendrogram.merges.push_back({best.lo, best.hi, best.height, size[slot_i] + size[slot_j]});
        size[slot_i] += size[slot_j];
        id[slot_i] = n + step;
        active[slot_j] = 0;
    }
    result.assignments = cut_dendrogram(result.dendrogram, k);
    return result;
}

std::vector<int> cut_dendrogram(const Dendrogram& dendrogram, int k) {
    const std::size_t n = dendrogram.leaves;
    if (k < 1 || static_cast<std::size_t>(k) > n) throw DataError("cut_dendrogram: k out of range");
    std::vector<std::size_t> parent(2 * n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    const std::size_t steps = n - static_cast<std::size_t>(k);
    for (std::size_t s = 0; s < steps; ++s) {
        const auto& m = dendrogram.merges.at(s);
        parent[find(m.a)] = n + s;
        parent[find(m.b)] = n + s;
    }
    std::map<std::size_t, int> label_of_root;
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto root = find(i);
        const auto [it, inserted] = label_of_root.emplace(root, static_cast<int>(label_of_root.size()));
        labels[i] = it->second;
    }
    return labels;
}

// ---------------------------------------------------------------- silhouette

SilhouetteReport silhouette(const Eigen::MatrixXd& X, std::span<const int> assignments) {
    const auto n = static_cast<std::size_t>(X.rows());
    if (assignments.size() != n) throw DataError("silhouette: assignment count differs from rows");
    if (n < 3) throw DataError("silhouette needs at least three points");
    int k = 0;
    for (int l : assignments) {
        if (l < 0) throw DataError("silhouette: negative cluster label");
        k = std::max(k, l + 1);
    }
    const auto sizes = cluster_sizes(assignments, k);
    const auto used = std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; });
    if (used < 2) throw DataError("silhouette needs at least two clusters");

    SilhouetteReport report;
    report.values.assign(n, 0.0);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t i = 0; i < n; ++i) {
        const int own = assignments[i];
        if (sizes[static_cast<std::size_t>(own)] < 2) continue;
        std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            sum[static_cast<std::size_t>(assignments[j])] +=
                std::sqrt(squared_distance(X.row(static_cast<Eigen::Index>(i)), X.row(static_cast<Eigen::Index>(j))));
        }
        const double a = sum[static_cast<std::size_t>(own)] / static_cast<double>(sizes[static_cast<std::size_t>(own)] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == own || sizes[static_cast<std::size_t>(c)] == 0) continue;
            b = std::min(b, sum[static_cast<std::size_t>(c)] / static_cast<double>(sizes[static_cast<std::size_t>(c)]));
        }
        const double denom = std::max(a, b);
        report.values[i] = denom > 0.0 ? (b - a) / denom : 0.0;
    }

    report.mean = std::accumulate(report.values.begin(), report.values.end(), 0.0) / static_cast<double>(n);
    report.cluster_means.assign(static_cast<std::size_t>(k), std::numeric_limits<double>::quiet_NaN());
    std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < n; ++i) sums[static_cast<std::size_t>(assignments[i])] += report.values[i];
    for (int c = 0; c < k; ++c)
        if (sizes[static_cast<std::size_t>(c)] > 0)
            report.cluster_means[static_cast<std::size_t>(c)] =
                sums[static_cast<std::size_t>(c)] / static_cast<double>(sizes[static_cast<std::size_t>(c)]);
    return report;
}

std::vector<std::size_t> cluster_sizes(std::span<const int> assignments, int k) {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(std::max(k, 0)), 0);
    for (int l : assignments) {
        if (l < 0 || l >= k) throw DataError("cluster label out of range");
        ++sizes[static_cast<std::size_t>(l)];
    }
    return sizes;
}

SweepResult sweep_k(const Eigen::MatrixXd& X, int k_min, int k_max, ClusterMethod method, const SweepOptions& options) {
    if (k_min < 1 || k_max < k_min) throw ConfigError("cluster sweep: empty or invalid k range");
    if (static_cast<Eigen::Index>(k_max) > X.rows())
        throw DataError("cluster sweep: k_max exceeds the number of points");
    SweepResult out;
    out.method = method;
    std::optional<Dendrogram> dendrogram;
    if (method == ClusterMethod::agglomerative) dendrogram = agglomerative(X, 1, options.linkage).dendrogram;

    std::optional<std::size_t> best;
    for (int k = k_min; k <= k_max; ++k) {
        SweepRow row;
        row.k = k;
        const auto labels = method == ClusterMethod::kmeans ? kmeans(X, k, options.kmeans).assignments
                                                            : cut_dendrogram(*dendrogram, k);
        row.sizes = cluster_sizes(labels, k);
        if (k == 1) {
            row.status = "not scoreable (k = 1)";
        } else {
            try {
                row.mean_silhouette = silhouette(X, labels).mean;
                row.status = "ok";
            } catch (const Error& e) {
                row.status = e.what();
            }
        }
        out.rows.push_back(row);
        if (row.mean_silhouette && (!best || *row.mean_silhouette > *out.rows[*best].mean_silhouette))
            best = out.rows.size() - 1;
    }
    if (best) out.recommended = out.rows[*best].k;
    return out;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw DataError("adjusted_rand_index: label vectors differ in length");
    const auto n = static_cast<double>(a.size());
    std::map<std::pair<int, int>, double> table;
    std::map<int, double> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        table[{a[i], b[i]}] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
    double index = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [key, count] : table) index += comb2(count);
    for (const auto& [key, count] : rows) sum_a += comb2(count);
    for (const auto& [key, count] : cols) sum_b += comb2(count);
    const double expected = sum_a * sum_b / comb2(n);
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

std::vector<ClusterRegression> per_cluster_regression(const Dataset& ds, std::span<const int> assignments,
                                                      const std::string& predictor) {
    if (assignments.size() != ds.size()) throw DataError("per-cluster regression: assignment count differs");
    int k = 0;
    for (int l : assignments) k = std::max(k, l + 1);
    const auto col = static_cast<Eigen::Index>(ds.feature_index(predictor));
    std::vector<ClusterRegression> out;
    bool any = false;
    for (int c = 0; c < k; ++c) {
        std::vector<Eigen::Index> members;
        for (std::size_t i = 0; i < assignments.size(); ++i)
            if (assignments[i] == c) members.push_back(static_cast<Eigen::Index>(i));
        ClusterRegression reg;
        reg.cluster = c;
        reg.members = members.size();
        if (members.size() < 3) {
            reg.status = "skipped: fewer than 3 members";
            out.push_back(std::move(reg));
            continue;
        }
        Eigen::MatrixXd X(static_cast<Eigen::Index>(members.size()), 1);
        Eigen::VectorXd y(static_cast<Eigen::Index>(members.size()));
        for (std::size_t m = 0; m < members.size(); ++m) {
            X(static_cast<Eigen::Index>(m), 0) = ds.features(members[m], col);
            y[static_cast<Eigen::Index>(m)] = ds.target[members[m]];
        }
        try {
            auto fit = ols_fit(X, y, true);
            fit.target_name = ds.target_name;
            fit.predictor_names = {predictor};
            reg.fit = std::move(fit);
            reg.status = "ok";
            any = true;
        } catch (const Error& e) {
            reg.status = std::string("skipped: ") + e.what();
        }
        out.push_back(std::move(reg));
    }
    if (!any) throw NumericalError("per-cluster regression: no cluster could be fitted");
    return out;
}

// ----------------------------------------------------------------------- io

void write_assignments_csv(std::ostream& out, std::span<const std::string> areas, std::span<const int> assignments) {
    csv::Writer w(out);
    w.row({"area", "cluster"});
    for (std::size_t i = 0; i < areas.size(); ++i) {
        w.field(areas[i]).field(assignments[i]);
        w.end_row();
    }
}

void write_silhouette_csv(std::ostream& out, std::span<const std::string> areas, std::span<const int> assignments,
                          const SilhouetteReport& report) {
    csv::Writer w(out);
    w.row({"area", "cluster", "score"});
    for (std::size_t i = 0; i < areas.size(); ++i) {
        w.field(areas[i]).field(assignments[i]).field(report.values[i]);
        w.end_row();
    }
}

void write_dendrogram_csv(std::ostream& out, const Dendrogram& dendrogram) {
    csv::Writer w(out);
    w.row({"step", "a", "b", "height", "size"});
    for (std::size_t s = 0; s < dendrogram.merges.size(); ++s) {
        const auto& m = dendrogram.merges[s];
        w.field(s).field(m.a).field(m.b).field(m.height).field(m.size);
        w.end_row();
    }
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
    csv::Writer w(out);
    w.row({"k", "method", "mean_silhouette", "cluster_sizes", "status"});
    for (const auto& r : sweep.rows) {
        w.field(r.k).field(to_string(sweep.method));
        if (r.mean_silhouette) w.field(*r.mean_silhouette);
        else w.empty();
        std::string sizes;
        for (std::size_t c = 0; c < r.sizes.size(); ++c) sizes += (c ? ";" : "") + std::to_string(r.sizes[c]);
        w.field(sizes).field(r.status);
        w.end_row();
    }
}

void write_cluster_regression_csv(std::ostream& out,
                                  std::span<const std::pair<std::string, std::vector<ClusterRegression>>> by_predictor) {
    csv::Writer w(out);
    w.row({"predictor", "cluster", "slope", "intercept", "r_squared", "n", "status"});
    for (const auto& [predictor, regs] : by_predictor) {
        for (const auto& r : regs) {
            w.field(predictor).field(r.cluster);
            if (r.fit) w.field(r.fit->coefficients[1]).field(r.fit->coefficients[0]).field(r.fit->r_squared);
            else w.empty().empty().empty();
            w.field(r.members).field(r.status);
            w.end_row();
        }
    }
}

} // namespace gwrkit
