#include "reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gwrkit::reference {

Eigen::VectorXd pinv_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    Eigen::MatrixXd sigma_pinv = Eigen::MatrixXd::Zero(A.cols(), A.rows());
    for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s[k] > 1e-12 * s[0]) sigma_pinv(k, k) = 1.0 / s[k];
    return svd.matrixV() * sigma_pinv * svd.matrixU().transpose() * y;
}

Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& points) {
    const Eigen::Index n = points.rows();
    Eigen::MatrixXd D(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            double s = 0.0;
            for (Eigen::Index c = 0; c < points.cols(); ++c) s += (points(i, c) - points(j, c)) * (points(i, c) - points(j, c));
            D(i, j) = std::sqrt(s);
        }
    return D;
}

namespace {

double reference_kernel(KernelKind kind, double d, double b) {
    switch (kind) {
    case KernelKind::gaussian: return std::exp(-0.5 * (d / b) * (d / b));
    case KernelKind::bisquare: return d < b ? std::pow(1.0 - (d / b) * (d / b), 2) : 0.0;
    case KernelKind::exponential: return std::exp(-d / b);
    }
    return 0.0;
}

double bandwidth_at(const Eigen::MatrixXd& D, Eigen::Index i, const KernelSpec& spec) {
    if (spec.mode == BandwidthMode::fixed) return spec.bandwidth;
    std::vector<double> others;
    for (Eigen::Index j = 0; j < D.cols(); ++j)
        if (j != i) others.push_back(D(i, j));
    std::sort(others.begin(), others.end());
    return others[static_cast<std::size_t>(spec.bandwidth) - 1];
}

} // namespace

GWRReference gwr_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::MatrixXd& distances,
                     const KernelSpec& spec) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd A(n, X.cols() + 1);
    A.col(0).setOnes();
    A.rightCols(X.cols()) = X;
    GWRReference out;
    out.coefficients.resize(n, A.cols());
    out.fitted.resize(n);
    out.hat.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double b = bandwidth_at(distances, i, spec);
        Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index j = 0; j < n; ++j) W(j, j) = reference_kernel(spec.kind, distances(i, j), b);
        const Eigen::MatrixXd normal = A.transpose() * W * A;
        const Eigen::MatrixXd inverse = normal.fullPivLu().inverse();
        const Eigen::VectorXd beta = inverse * A.transpose() * W * y;
        out.coefficients.row(i) = beta.transpose();
        out.fitted[i] = A.row(i).dot(beta);
        out.hat.row(i) = A.row(i) * inverse * A.transpose() * W;
    }
    out.trace = out.hat.trace();
    const Eigen::VectorXd e = y - out.fitted;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double loo = e[i] / (1.0 - out.hat(i, i));
        out.cv += loo * loo;
    }
    return out;
}

double ols_loo_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    Eigen::MatrixXd A(X.rows(), X.cols() + 1);
    A.col(0).setOnes();
    A.rightCols(X.cols()) = X;
    const Eigen::MatrixXd H = A * (A.transpose() * A).inverse() * A.transpose();
    const Eigen::VectorXd e = y - H * y;
    double cv = 0.0;
    for (Eigen::Index i = 0; i < A.rows(); ++i) cv += std::pow(e[i] / (1.0 - H(i, i)), 2);
    return cv;
}

std::vector<double> silhouette(const Eigen::MatrixXd& X, std::span<const int> labels) {
    const std::size_t n = labels.size();
    const int k = *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<double> s(n, 0.0);
    auto dist = [&](std::size_t i, std::size_t j) {
        return (X.row(static_cast<Eigen::Index>(i)) - X.row(static_cast<Eigen::Index>(j))).norm();
    };
    for (std::size_t i = 0; i < n; ++i) {
        double a_sum = 0.0;
        int a_count = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && labels[j] == labels[i]) {
                a_sum += dist(i, j);
                ++a_count;
            }
        if (a_count == 0) continue;
        const double a = a_sum / a_count;
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == labels[i]) continue;
            double sum = 0.0;
            int count = 0;
            for (std::size_t j = 0; j < n; ++j)
                if (labels[j] == c) {
                    sum += dist(i, j);
                    ++count;
                }
            if (count > 0) b = std::min(b, sum / count);
        }
        const double m = std::max(a, b);
        s[i] = m > 0.0 ? (b - a) / m : 0.0;
    }
    return s;
}

std::vector<Merge> agglomerative(const Eigen::MatrixXd& X, Linkage linkage) {
    const std::size_t n = static_cast<std::size_t>(X.rows());
    struct Cluster {
        std::size_t id;
        std::vector<std::size_t> members;
    };
    std::vector<Cluster> clusters;
    for (std::size_t i = 0; i < n; ++i) clusters.push_back({i, {i}});

    auto point_dist = [&](std::size_t i, std::size_t j) {
        return (X.row(static_cast<Eigen::Index>(i)) - X.row(static_cast<Eigen::Index>(j))).norm();
    };
    auto link = [&](const Cluster& a, const Cluster& b) {
        if (linkage == Linkage::ward) {
            Eigen::RowVectorXd ca = Eigen::RowVectorXd::Zero(X.cols()), cb = Eigen::RowVectorXd::Zero(X.cols());
            for (auto m : a.members) ca += X.row(static_cast<Eigen::Index>(m));
            for (auto m : b.members) cb += X.row(static_cast<Eigen::Index>(m));
            const double na = static_cast<double>(a.members.size()), nb = static_cast<double>(b.members.size());
            ca /= na;
            cb /= nb;
            return std::sqrt(2.0 * na * nb / (na + nb)) * (ca - cb).norm();
        }
        double agg = 0.0;
        for (auto i : a.members)
            for (auto j : b.members) {
                const double d = point_dist(i, j);
                if (linkage == Linkage::complete) agg = std::max(agg, d);
                else agg += d;
            }
        if (linkage == Linkage::average) agg /= static_cast<double>(a.members.size() * b.members.size());
        return agg;
    };

    std::vector<Merge> merges;
    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t bi = 0, bj = 1;
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_lo = 0, best_hi = 0;
        for (std::size_t i = 0; i < clusters.size(); ++i)
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                const double h = link(clusters[i], clusters[j]);
                const auto lo = std::min(clusters[i].id, clusters[j].id);
                const auto hi = std::max(clusters[i].id, clusters[j].id);
                if (h < best || (h == best && std::pair(lo, hi) < std::pair(best_lo, best_hi))) {
                    best = h;
                    bi = i;
                    bj = j;
                    best_lo = lo;
                    best_hi = hi;
                }
            }
        Cluster merged{n + step, clusters[bi].members};
        merged.members.insert(merged.members.end(), clusters[bj].members.begin(), clusters[bj].members.end());
        merges.push_back({best_lo, best_hi, best, merged.members.size()});
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
        clusters[bi] = std::move(merged);
    }
    return merges;
}

double kmeans_exhaustive_inertia(const Eigen::MatrixXd& X, int k, std::vector<int>* best_labels) {
    const auto n = static_cast<std::size_t>(X.rows());
    std::vector<int> labels(n, 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (int l : labels) ++counts[static_cast<std::size_t>(l)];
        if (std::all_of(counts.begin(), counts.end(), [](int c) { return c > 0; })) {
            Eigen::MatrixXd means = Eigen::MatrixXd::Zero(k, X.cols());
            for (std::size_t i = 0; i < n; ++i) means.row(labels[i]) += X.row(static_cast<Eigen::Index>(i));
            for (int c = 0; c < k; ++c) means.row(c) /= counts[static_cast<std::size_t>(c)];
            double inertia = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                inertia += (X.row(static_cast<Eigen::Index>(i)) - means.row(labels[i])).squaredNorm();
            if (inertia < best) {
                best = inertia;
                if (best_labels) *best_labels = labels;
            }
        }
        std::size_t pos = 0;
        while (pos < n && ++labels[pos] == k) labels[pos++] = 0;
        if (pos == n) break;
    }
    return best;
}

PowerEigen power_iteration(const Eigen::MatrixXd& S, int count, int iterations) {
    Eigen::MatrixXd M = S;
    PowerEigen out;
    out.values.resize(count);
    out.vectors.resize(S.rows(), count);
    for (int c = 0; c < count; ++c) {
        // Shift so the largest algebraic eigenvalue dominates in magnitude.
        const double shift = M.cwiseAbs().rowwise().sum().maxCoeff();
        const Eigen::MatrixXd shifted = M + shift * Eigen::MatrixXd::Identity(M.rows(), M.cols());
        Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(M.rows(), 1.0, 2.0);
        v.normalize();
        for (int it = 0; it < iterations; ++it) {
            Eigen::VectorXd next = shifted * v;
            const double norm = next.norm();
            if (norm == 0.0) break;
            next /= norm;
            if ((next - v).norm() < 1e-15) {
                v = next;
                break;
            }
            v = next;
        }
        const double lambda = v.dot(M * v);
        out.values[c] = lambda;
        out.vectors.col(c) = v;
        M -= lambda * v * v.transpose();
    }
    return out;
}

double mds_stress(const Eigen::MatrixXd& distances, int dims) {
    const Eigen::Index n = distances.rows();
    const Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    const Eigen::MatrixXd B = -0.5 * J * distances.array().square().matrix() * J;
    const auto eig = power_iteration(B, dims);
    Eigen::MatrixXd coords(n, dims);
    for (int d = 0; d < dims; ++d) coords.col(d) = eig.vectors.col(d) * std::sqrt(std::max(eig.values[d], 0.0));
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double e = (coords.row(i) - coords.row(j)).norm();
            num += (distances(i, j) - e) * (distances(i, j) - e);
            den += distances(i, j) * distances(i, j);
        }
    return std::sqrt(num / den);
}

} // namespace gwrkit::reference
