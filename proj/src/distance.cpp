#include "gwrkit/distance.hpp"

#include <cmath>

namespace gwrkit {

double squared_distance(const Eigen::Ref<const Eigen::RowVectorXd, 0, Eigen::InnerStride<>>& a,
                        const Eigen::Ref<const Eigen::RowVectorXd, 0, Eigen::InnerStride<>>& b) {
    double sum = 0.0;
    for (Eigen::Index c = 0; c < a.size(); ++c) {
        const double diff = a[c] - b[c];
        sum += diff * diff;
    }
    return sum;
}

Eigen::MatrixXd pairwise_euclidean(const Eigen::MatrixXd& points) {
    const Eigen::Index n = points.rows();
    Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
#pragma omp parallel for schedule(dynamic, 16)
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j)
            dist(i, j) = std::sqrt(squared_distance(points.row(i), points.row(j)));
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) dist(j, i) = dist(i, j);
    return dist;
}

} // namespace gwrkit
