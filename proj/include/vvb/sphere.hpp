#pragma once

#include <Eigen/Core>
#include <array>
#include <utility>
#include <vector>

#include "vvb/rng.hpp"

namespace vvb {

/// Unit vector on the higher-order Poincare sphere. North pole (+z) is the
/// pure left-circular LG_{m1} component (theta = 0).
using BlochVector = Eigen::Vector3d;

inline constexpr int kSectorCount = 26;

/// n = (sin t cos p, sin t sin p, cos t); theta must lie in [0, pi].
BlochVector bloch_from_angles(double theta, double phi);

/// Inverse of bloch_from_angles; phi is returned in [0, 2*pi).
std::pair<double, double> angles_from_bloch(const BlochVector& n);

/// 26-cell partition of the sphere: index 0 is the north cap theta in
/// [0, pi/8); 1..24 are band cells at index 1 + 8*band + t for the three
/// theta bands [pi/8,3pi/8), [3pi/8,5pi/8), [5pi/8,7pi/8) and the eight phi
/// octants [t*pi/4, (t+1)*pi/4); 25 is the south cap theta >= 7pi/8 (closed
/// at pi). All intervals are half-open except the south cap; phi is reduced
/// modulo 2*pi.
int sector_index(double theta, double phi);

/// Draw (theta, phi) uniformly w.r.t. solid angle inside one sector.
std::pair<double, double> sector_sample(int sector, Rng& rng);

/// Circular distance between the phi octants of two sectors (0..4); polar
/// caps have no phi coordinate and count as distance 0 to everything.
int sector_phi_distance(int a, int b);

/// Pure-state fidelity sqrt((1 + a.b)/2); both inputs must be unit vectors
/// within 1e-6.
double fidelity(const BlochVector& a, const BlochVector& b);

/// Similarity transform mapping a 3-d point cloud onto reference Bloch
/// vectors: x -> scale * rotation * (x - offset). The rotation may be a
/// reflection (det = -1) since principal axes carry no orientation.
struct Alignment {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    double scale = 1.0;
    Eigen::Vector3d offset = Eigen::Vector3d::Zero();
};

/// Least-squares fit of the transform above (Procrustes with uniform scale,
/// translation, reflections allowed). Requires >= 4 pairs spanning three
/// dimensions; throws RankError on a degenerate (coplanar) calibration set.
Alignment align_to_sphere(const std::vector<Eigen::Vector3d>& points,
                          const std::vector<BlochVector>& references);

/// Map a point through the alignment and renormalize to the sphere surface.
BlochVector apply_alignment(const Alignment& a, const Eigen::Vector3d& p);

} // namespace vvb
