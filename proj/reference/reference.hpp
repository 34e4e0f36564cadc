#pragma once

// Serial reference implementations. Each one follows the textbook
// definition as directly as possible and shares no solver code with the
// optimized library paths, so the two can be checked against each other.

#include "gwrkit/cluster.hpp"
#include "gwrkit/gwr.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace gwrkit::reference {

/// beta = pinv(A) y with the pseudo-inverse built from a full SVD.
Eigen::VectorXd pinv_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& y);

/// Double loops over coordinates; no symmetry shortcut.
Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& points);

struct GWRReference {
    Eigen::MatrixXd coefficients;
    Eigen::VectorXd fitted;
    Eigen::MatrixXd hat; ///< full n x n smoother matrix
    double trace = 0.0;
    double cv = 0.0;
};

/// Explicit normal equations with dense diagonal weight matrices and the
/// full hat matrix. The LOO score uses e_i / (1 - S_ii).
GWRReference gwr_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::MatrixXd& distances,
                     const KernelSpec& spec);

/// Leave-one-out residuals of a global OLS fit via the hat-matrix identity
/// e_i / (1 - h_ii).
double ols_loo_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

std::vector<double> silhouette(const Eigen::MatrixXd& X, std::span<const int> labels);

/// Recomputes every inter-cluster linkage from member lists at every step.
std::vector<Merge> agglomerative(const Eigen::MatrixXd& X, Linkage linkage);

/// Minimum inertia over all label vectors in [0, k)^n with no empty cluster.
double kmeans_exhaustive_inertia(const Eigen::MatrixXd& X, int k, std::vector<int>* best_labels = nullptr);

struct PowerEigen {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

/// Top `count` eigenpairs of a symmetric matrix by power iteration with
/// deflation.
PowerEigen power_iteration(const Eigen::MatrixXd& S, int count, int iterations = 20000);

/// Classical MDS stress computed through power_iteration.
double mds_stress(const Eigen::MatrixXd& distances, int dims);

} // namespace gwrkit::reference
