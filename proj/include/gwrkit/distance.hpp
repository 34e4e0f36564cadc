#pragma once

#include <Eigen/Dense>

namespace gwrkit {

/// Euclidean distances between the rows of `points` (n x d). The result is
/// exactly symmetric with an exactly zero diagonal; rows are computed in
/// parallel and each entry is written by exactly one thread.
Eigen::MatrixXd pairwise_euclidean(const Eigen::MatrixXd& points);

/// Squared Euclidean distance between two rows, summed in column order.
double squared_distance(const Eigen::Ref<const Eigen::RowVectorXd, 0, Eigen::InnerStride<>>& a,
                        const Eigen::Ref<const Eigen::RowVectorXd, 0, Eigen::InnerStride<>>& b);

} // namespace gwrkit
