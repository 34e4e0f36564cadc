#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace gwrkit {

struct MDSEmbedding {
    Eigen::MatrixXd coordinates;  ///< n x dims, column means zero
    Eigen::VectorXd eigenvalues;  ///< the largest `dims`, clamped at zero
    double stress = 0.0;          ///< sqrt(sum (d - dhat)^2 / sum d^2) over pairs
    std::vector<std::string> warnings;
};

/// Classical (Torgerson) scaling: B = -1/2 J D^2 J, coordinates are the top
/// eigenvectors of B scaled by the square roots of their eigenvalues. Each
/// eigenvector's first clearly nonzero entry is made positive.
MDSEmbedding classical_mds(const Eigen::MatrixXd& distances, int dims = 2);

/// Per-area MDS output row; `size` is the value the points are sized by.
void write_mds_csv(std::ostream& out, std::span<const std::string> areas, const MDSEmbedding& embedding,
                   const Eigen::VectorXd& target, const Eigen::VectorXd& size, const std::string& target_name,
                   const std::string& size_name);

} // namespace gwrkit
