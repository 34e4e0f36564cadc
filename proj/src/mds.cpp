#include "gwrkit/mds.hpp"

#include "gwrkit/csv.hpp"
#include "gwrkit/distance.hpp"
#include "gwrkit/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <ostream>

namespace gwrkit {

MDSEmbedding classical_mds(const Eigen::MatrixXd& distances, int dims) {
    const Eigen::Index n = distances.rows();
    if (distances.cols() != n) throw DataError("mds: distance matrix must be square");
    if (n < 3) throw DataError("mds: need at least three points");
    if (dims < 1 || dims > n) throw ConfigError("mds: dims out of range");
    if (!distances.allFinite()) throw DataError("mds: non-finite distance");
    const double scale = distances.cwiseAbs().maxCoeff();
    const double tol = 1e-12 * std::max(scale, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(distances(i, i)) > tol) throw DataError("mds: distance matrix diagonal must be zero");
        for (Eigen::Index j = 0; j < n; ++j) {
            if (distances(i, j) < 0.0) throw DataError("mds: negative distance");
            if (std::abs(distances(i, j) - distances(j, i)) > tol) throw DataError("mds: distance matrix is not symmetric");
        }
    }

    // Double centering of squared distances.
    const Eigen::MatrixXd sq = distances.array().square();
    const Eigen::VectorXd row_mean = sq.rowwise().mean();
    const double grand = row_mean.mean();
    Eigen::MatrixXd B(n, n);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) B(i, j) = -0.5 * (sq(i, j) - row_mean[i] - row_mean[j] + grand);
    B = 0.5 * (B + B.transpose());

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B);
    if (eig.info() != Eigen::Success) throw NumericalError("mds: eigendecomposition failed");

    MDSEmbedding out;
    out.coordinates.resize(n, dims);
    out.eigenvalues.resize(dims);
    const double lead = std::max(std::abs(eig.eigenvalues()[n - 1]), std::abs(eig.eigenvalues()[0]));
    for (int d = 0; d < dims; ++d) {
        const Eigen::Index idx = n - 1 - d; // eigenvalues ascend
        double lambda = eig.eigenvalues()[idx];
        // round-off level; its square root would otherwise leak into the coordinates
        if (std::abs(lambda) <= 64.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon() * lead)
            lambda = 0.0;
        if (lambda < 0.0) {
            if (lambda < -1e-10 * lead)
                out.warnings.push_back("eigenvalue " + std::to_string(d + 1) + " is negative (" +
                                       csv::format_number(lambda) + "); clamped to 0");
            lambda = 0.0;
        }
        Eigen::VectorXd v = eig.eigenvectors().col(idx);
        const double vmax = v.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(v[i]) > 1e-10 * vmax) {
                if (v[i] < 0.0) v = -v;
                break;
            }
        }
        out.eigenvalues[d] = lambda;
        out.coordinates.col(d) = v * std::sqrt(lambda);
    }
    if (eig.eigenvalues()[0] < -1e-10 * lead)
        out.warnings.emplace_back("distance matrix is not Euclidean (negative eigenvalues present)");

    const Eigen::MatrixXd embedded = pairwise_euclidean(out.coordinates);
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double diff = distances(i, j) - embedded(i, j);
            num += diff * diff;
            den += distances(i, j) * distances(i, j);
        }
    out.stress = den > 0.0 ? std::sqrt(num / den) : 0.0;
    return out;
}

void write_mds_csv(std::ostream& out, std::span<const std::string> areas, const MDSEmbedding& embedding,
                   const Eigen::VectorXd& target, const Eigen::VectorXd& size, const std::string& target_name,
                   const std::string& size_name) {
    csv::Writer w(out);
    w.row({"area", "mds_x", "mds_y", target_name, size_name});
    for (std::size_t i = 0; i < areas.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        w.field(areas[i]).field(embedding.coordinates(r, 0));
        if (embedding.coordinates.cols() > 1) w.field(embedding.coordinates(r, 1));
        else w.field(0.0);
        w.field(target[r]);
        if (size.size() == target.size()) w.field(size[r]);
        else w.empty();
        w.end_row();
    }
}

} // namespace gwrkit
