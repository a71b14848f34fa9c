#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "vvb/dataset.hpp"
#include "vvb/stokes.hpp"

namespace vvb {

/// Principal-component basis fit to flattened Stokes images.
struct PCAModel {
    Eigen::VectorXd mean;               ///< length D = 3 * resolution^2
    Eigen::MatrixXd components;         ///< n_components x D, orthonormal rows
    Eigen::VectorXd explained_variance; ///< per-component, non-increasing
    double total_variance = 0.0;        ///< trace of the sample covariance
    int resolution = 0;

    int n_components() const { return static_cast<int>(components.rows()); }
    Eigen::Index dim() const { return components.cols(); }
    /// Fraction of total variance captured by the leading k components.
    double explained_share(int k) const;
};

/// Feature vector: the s1, s2, s3 planes concatenated (intensity excluded —
/// it is invariant across states of one beam family and would only add a
/// constant-direction component).
Eigen::VectorXd flatten_stokes(const StokesImage& img);

/// Fit by eigendecomposition of the sample covariance (divisor N - 1). Uses
/// the Gram-matrix route when N < D so the cost is min(N, D)^3. Throws
/// DomainError when n_components > min(N, D).
PCAModel pca_fit(const std::vector<StokesImage>& images, int n_components);
PCAModel pca_fit(const Dataset& ds, int n_components);
/// Core fit on an N x D matrix with rows as samples (resolution untracked).
PCAModel pca_fit_matrix(const Eigen::MatrixXd& x, int n_components);

/// Project one flattened image (or a batch) into component space.
Eigen::VectorXd pca_transform(const PCAModel& m, const StokesImage& img);
Eigen::VectorXd pca_transform_vec(const PCAModel& m, const Eigen::VectorXd& x);
Eigen::MatrixXd pca_transform_all(const PCAModel& m, const std::vector<StokesImage>& images);

/// Map component-space coordinates back to a flattened image.
Eigen::VectorXd pca_reconstruct(const PCAModel& m, const Eigen::VectorXd& coords);

/// Radius statistics of a 3-d point cloud about a center (defaults to the
/// centroid): used to check that embedded states hug a sphere.
struct RadiiStats {
    double mean = 0.0;
    double stddev = 0.0;
    std::vector<int> histogram;
    double bin_lo = 0.0;
    double bin_width = 0.0;
};
RadiiStats radii_stats(const std::vector<Eigen::Vector3d>& points,
                       std::optional<Eigen::Vector3d> center = std::nullopt,
                       int bins = 30);

} // namespace vvb
