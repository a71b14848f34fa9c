#include "vvb/sphere.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>

#include "vvb/errors.hpp"

namespace vvb {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kOctant = kPi / 4.0;

double reduce_phi(double phi) {
    if (!std::isfinite(phi)) throw DomainError("phi must be finite");
    double r = std::fmod(phi, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0; // fmod can land exactly on 2*pi after the add
    return r;
}

// Band edges in theta: caps are pi/8 tall, bands pi/4 tall.
constexpr double kCapEdge = kPi / 8.0;
constexpr double kBandEdge1 = 3.0 * kPi / 8.0;
constexpr double kBandEdge2 = 5.0 * kPi / 8.0;
constexpr double kBandEdge3 = 7.0 * kPi / 8.0;

} // namespace

BlochVector bloch_from_angles(double theta, double phi) {
    if (!(theta >= 0.0 && theta <= kPi)) throw DomainError("theta must lie in [0, pi]");
    if (!std::isfinite(phi)) throw DomainError("phi must be finite");
    const double st = std::sin(theta);
    return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

std::pair<double, double> angles_from_bloch(const BlochVector& n) {
    const double theta = std::acos(std::clamp(n.z(), -1.0, 1.0));
    double phi = std::atan2(n.y(), n.x());
    if (phi < 0.0) phi += kTwoPi;
    if (phi >= kTwoPi) phi = 0.0;
    return {theta, phi};
}

int sector_index(double theta, double phi) {
    if (!(theta >= 0.0 && theta <= kPi)) throw DomainError("theta must lie in [0, pi]");
    if (theta < kCapEdge) return 0;
    if (theta >= kBandEdge3) return 25;
    int band;
    if (theta < kBandEdge1) band = 0;
    else if (theta < kBandEdge2) band = 1;
    else band = 2;
    const double p = reduce_phi(phi);
    int t = static_cast<int>(p / kOctant);
    if (t > 7) t = 7; // guards p/kOctant rounding up to 8 just below 2*pi
    return 1 + 8 * band + t;
}

std::pair<double, double> sector_sample(int sector, Rng& rng) {
    if (sector < 0 || sector >= kSectorCount) throw DomainError("sector index out of range");
    double theta_lo, theta_hi, phi_lo, phi_hi;
    if (sector == 0) {
        theta_lo = 0.0; theta_hi = kCapEdge; phi_lo = 0.0; phi_hi = kTwoPi;
    } else if (sector == 25) {
        theta_lo = kBandEdge3; theta_hi = kPi; phi_lo = 0.0; phi_hi = kTwoPi;
    } else {
        const int band = (sector - 1) / 8;
        const int t = (sector - 1) % 8;
        theta_lo = kCapEdge + band * kPi / 4.0;
        theta_hi = theta_lo + kPi / 4.0;
        phi_lo = t * kOctant;
        phi_hi = phi_lo + kOctant;
    }
    const double c_hi = std::cos(theta_lo); // cos is decreasing on [0, pi]
    const double c_lo = std::cos(theta_hi);
    for (int attempt = 0; attempt < 100; ++attempt) {
        // Uniform in cos(theta) makes the draw uniform w.r.t. solid angle.
        const double c = c_hi - rng.u01() * (c_hi - c_lo);
        const double theta = std::acos(std::clamp(c, -1.0, 1.0));
        const double phi = phi_lo + rng.u01() * (phi_hi - phi_lo);
        if (sector_index(theta, phi) == sector) return {theta, phi};
        // Rounding in acos can spill across the edge; redraw.
    }
    throw DomainError("sector_sample failed to land inside the sector");
}

int sector_phi_distance(int a, int b) {
    if (a < 0 || a >= kSectorCount || b < 0 || b >= kSectorCount)
        throw DomainError("sector index out of range");
    if (a == 0 || a == 25 || b == 0 || b == 25) return 0;
    const int ta = (a - 1) % 8;
    const int tb = (b - 1) % 8;
    const int d = std::abs(ta - tb);
    return std::min(d, 8 - d);
}

double fidelity(const BlochVector& a, const BlochVector& b) {
    if (std::abs(a.norm() - 1.0) > 1e-6 || std::abs(b.norm() - 1.0) > 1e-6)
        throw DomainError("fidelity requires unit Bloch vectors");
    const double q = 0.5 * (1.0 + a.dot(b));
    return std::sqrt(std::clamp(q, 0.0, 1.0));
}

Alignment align_to_sphere(const std::vector<Eigen::Vector3d>& points,
                          const std::vector<BlochVector>& references) {
    if (points.size() != references.size())
        throw ShapeError("alignment needs one reference per point");
    const std::size_t n = points.size();
    if (n < 4) throw ShapeError("alignment needs at least 4 point pairs");

    Eigen::Vector3d pbar = Eigen::Vector3d::Zero();
    Eigen::Vector3d nbar = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        pbar += points[i];
        nbar += references[i];
    }
    pbar /= static_cast<double>(n);
    nbar /= static_cast<double>(n);

    Eigen::Matrix3d m = Eigen::Matrix3d::Zero(); // cross-covariance refs x points
    double c_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector3d c = points[i] - pbar;
        const Eigen::Vector3d d = references[i] - nbar;
        m += d * c.transpose();
        c_sq += c.squaredNorm();
    }
    if (c_sq <= 0.0) throw RankError("alignment points are all identical");

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d sv = svd.singularValues();
    if (sv(2) <= 1e-12 * sv(0))
        throw RankError("alignment point cloud is rank deficient (coplanar or collinear)");

    Alignment a;
    a.rotation = svd.matrixU() * svd.matrixV().transpose();
    a.scale = sv.sum() / c_sq;
    a.offset = pbar - a.rotation.transpose() * nbar / a.scale;
    return a;
}

BlochVector apply_alignment(const Alignment& a, const Eigen::Vector3d& p) {
    const Eigen::Vector3d v = a.scale * (a.rotation * (p - a.offset));
    const double norm = v.norm();
    if (!(norm > 1e-300)) throw DomainError("aligned point sits at the sphere centre");
    return v / norm;
}

} // namespace vvb
