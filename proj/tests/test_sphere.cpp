#include <doctest.h>

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>
#include <vector>

#include "vvb/errors.hpp"
#include "vvb/rng.hpp"
#include "vvb/sphere.hpp"

using namespace vvb;
using std::numbers::pi;

namespace {

/// Literal interval-membership oracle for the 26-sector partition, written
/// directly from the band/octant definitions rather than index arithmetic.
int sector_oracle(double theta, double phi) {
    phi = std::fmod(phi, 2.0 * pi);
    if (phi < 0.0) phi += 2.0 * pi;
    if (phi >= 2.0 * pi) phi = 0.0;

    int hits = 0, found = -1;
    if (theta >= 0.0 && theta < pi / 8.0) {
        ++hits;
        found = 0;
    }
    if (theta >= 7.0 * pi / 8.0 && theta <= pi) {
        ++hits;
        found = 25;
    }
    const double lo[3] = {pi / 8.0, 3.0 * pi / 8.0, 5.0 * pi / 8.0};
    const double hi[3] = {3.0 * pi / 8.0, 5.0 * pi / 8.0, 7.0 * pi / 8.0};
    for (int band = 0; band < 3; ++band) {
        if (!(theta >= lo[band] && theta < hi[band])) continue;
        for (int t = 0; t < 8; ++t) {
            const double plo = t * pi / 4.0;
            const double phi_hi = (t + 1) * pi / 4.0;
            const bool inside = t < 7 ? (phi >= plo && phi < phi_hi)
                                      : (phi >= plo && phi < 2.0 * pi);
            if (inside) {
                ++hits;
                found = 1 + 8 * band + t;
            }
        }
    }
    REQUIRE(hits == 1); // partition totality: exactly one cell claims the point
    return found;
}

} // namespace

TEST_CASE("bloch vector round trips") {
    CHECK((bloch_from_angles(0.0, 2.2) - BlochVector(0, 0, 1)).norm() < 1e-15);
    CHECK((bloch_from_angles(pi / 2, 0.0) - BlochVector(1, 0, 0)).norm() < 1e-15);
    CHECK((bloch_from_angles(pi / 2, pi / 2) - BlochVector(0, 1, 0)).norm() < 1e-15);

    Rng rng(7);
    for (int k = 0; k < 200; ++k) {
        const double theta = std::acos(1.0 - 2.0 * rng.u01());
        const double phi = rng.uniform(0.0, 2.0 * pi);
        const auto [t2, p2] = angles_from_bloch(bloch_from_angles(theta, phi));
        CHECK(t2 == doctest::Approx(theta).epsilon(1e-12));
        CHECK(p2 == doctest::Approx(phi).epsilon(1e-12));
    }
}

TEST_CASE("sector index boundary and interior values") {
    CHECK(sector_index(0.0, 0.0) == 0);
    CHECK(sector_index(0.0, 4.4) == 0);
    CHECK(sector_index(pi, 0.0) == 25);
    CHECK(sector_index(pi / 2, pi / 8) == 9);
    CHECK(sector_index(pi / 8, 0.0) == 1);            // band edge belongs to the band
    CHECK(sector_index(7.0 * pi / 8.0, 0.0) == 25);   // south-cap edge belongs to the cap
    CHECK(sector_index(pi / 2, 2.0 * pi) == 9);       // phi reduced to zero
    CHECK(sector_index(pi / 2, -pi / 8) == 16);       // negative phi wraps to the top octant
    CHECK_THROWS_AS(sector_index(-0.01, 0.0), DomainError);
    CHECK_THROWS_AS(sector_index(pi + 0.01, 0.0), DomainError);
}

TEST_CASE("sector index agrees with the membership oracle on 1e6 points") {
    Rng rng(99);
    for (int k = 0; k < 1000000; ++k) {
        const double theta = std::acos(1.0 - 2.0 * rng.u01());
        const double phi = rng.uniform(0.0, 2.0 * pi);
        CHECK(sector_index(theta, phi) == sector_oracle(theta, phi));
    }
}

TEST_CASE("sector sampling lands in its own sector") {
    for (int s = 0; s < kSectorCount; ++s) {
        Rng rng(1000 + static_cast<std::uint64_t>(s));
        for (int k = 0; k < 200; ++k) {
            const auto [theta, phi] = sector_sample(s, rng);
            CHECK(sector_index(theta, phi) == s);
        }
    }
    Rng rng(5);
    CHECK_THROWS_AS(sector_sample(-1, rng), DomainError);
    CHECK_THROWS_AS(sector_sample(26, rng), DomainError);
}

TEST_CASE("phi distance is circular and ignores the caps") {
    CHECK(sector_phi_distance(0, 13) == 0);
    CHECK(sector_phi_distance(17, 25) == 0);
    CHECK(sector_phi_distance(9, 9) == 0);
    CHECK(sector_phi_distance(9, 10) == 1);
    CHECK(sector_phi_distance(1, 8) == 1);   // octants 0 and 7 are neighbors
    CHECK(sector_phi_distance(1, 5) == 4);   // opposite octants
    CHECK(sector_phi_distance(1, 9) == 0);   // same octant, different band
    CHECK(sector_phi_distance(2, 12) == 2);
}

TEST_CASE("fidelity values and properties") {
    const BlochVector n(0, 0, 1), s(0, 0, -1), x(1, 0, 0);
    CHECK(fidelity(n, n) == doctest::Approx(1.0));
    CHECK(fidelity(n, s) == doctest::Approx(0.0));
    CHECK(fidelity(n, x) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(fidelity(n, x) == fidelity(x, n));

    double prev = 1.1;
    for (int k = 0; k <= 20; ++k) {
        const double alpha = pi * k / 20.0;
        const double f = fidelity(n, BlochVector(std::sin(alpha), 0, std::cos(alpha)));
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
        CHECK(f < prev);
        prev = f;
    }
    CHECK_THROWS_AS(fidelity(BlochVector(0.5, 0, 0), n), DomainError);
}

TEST_CASE("alignment recovers identity and known similarity transforms") {
    Rng rng(12);
    std::vector<BlochVector> refs;
    for (int k = 0; k < 10; ++k)
        refs.push_back(bloch_from_angles(std::acos(1.0 - 2.0 * rng.u01()),
                                         rng.uniform(0.0, 2.0 * pi)));

    const Alignment id = align_to_sphere({refs.begin(), refs.end()}, refs);
    CHECK((id.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-9);
    CHECK(id.scale == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(id.offset.norm() < 1e-9);

    const Eigen::Matrix3d r0 =
        Eigen::AngleAxisd(0.8, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
    std::vector<Eigen::Vector3d> pts;
    for (const auto& n : refs) pts.push_back(2.0 * r0 * n);
    const Alignment a = align_to_sphere(pts, refs);
    CHECK((a.rotation - r0.transpose()).norm() < 1e-9);
    CHECK(a.scale == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(a.offset.norm() < 1e-9);
    for (std::size_t i = 0; i < refs.size(); ++i)
        CHECK((apply_alignment(a, pts[i]) - refs[i]).norm() < 1e-9);
}

TEST_CASE("alignment under reference noise stays within 3 sigma") {
    const double sigma = 0.01;
    const Eigen::Matrix3d r0 =
        Eigen::AngleAxisd(-1.1, Eigen::Vector3d(0, 1, 1).normalized()).toRotationMatrix();
    double sq_sum = 0.0;
    std::size_t count = 0;
    Rng rng(55);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<BlochVector> truth, noisy_refs;
        std::vector<Eigen::Vector3d> pts;
        for (int k = 0; k < 12; ++k) {
            const BlochVector n = bloch_from_angles(std::acos(1.0 - 2.0 * rng.u01()),
                                                    rng.uniform(0.0, 2.0 * pi));
            truth.push_back(n);
            noisy_refs.push_back(n + sigma * BlochVector(rng.normal(), rng.normal(), rng.normal()));
            pts.push_back(1.7 * r0 * n);
        }
        const Alignment a = align_to_sphere(pts, noisy_refs);
        for (std::size_t i = 0; i < truth.size(); ++i) {
            sq_sum += (apply_alignment(a, pts[i]) - truth[i]).squaredNorm();
            ++count;
        }
    }
    CHECK(std::sqrt(sq_sum / static_cast<double>(count)) <= 3.0 * sigma);
}

TEST_CASE("alignment handles reflections from sign-flipped axes") {
    // PCA component signs are arbitrary; a mirrored cloud must still align.
    Rng rng(31);
    std::vector<BlochVector> refs;
    std::vector<Eigen::Vector3d> pts;
    Eigen::Matrix3d mirror = Eigen::Matrix3d::Identity();
    mirror(2, 2) = -1.0;
    for (int k = 0; k < 16; ++k) {
        const BlochVector n = bloch_from_angles(std::acos(1.0 - 2.0 * rng.u01()),
                                                rng.uniform(0.0, 2.0 * pi));
        refs.push_back(n);
        pts.push_back(0.6 * mirror * n);
    }
    const Alignment a = align_to_sphere(pts, refs);
    for (std::size_t i = 0; i < refs.size(); ++i)
        CHECK(fidelity(apply_alignment(a, pts[i]), refs[i]) > 0.999999);
}

TEST_CASE("fidelity after alignment is invariant under global cloud rotations") {
    Rng rng(77);
    std::vector<BlochVector> refs;
    std::vector<Eigen::Vector3d> pts;
    for (int k = 0; k < 20; ++k) {
        const BlochVector n = bloch_from_angles(std::acos(1.0 - 2.0 * rng.u01()),
                                                rng.uniform(0.0, 2.0 * pi));
        refs.push_back(n);
        pts.push_back(1.3 * n + 0.01 * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()));
    }
    const Eigen::Matrix3d q =
        Eigen::AngleAxisd(2.4, Eigen::Vector3d(3, -1, 2).normalized()).toRotationMatrix();
    std::vector<Eigen::Vector3d> rotated;
    for (const auto& p : pts) rotated.push_back(q * p);

    const Alignment a1 = align_to_sphere(pts, refs);
    const Alignment a2 = align_to_sphere(rotated, refs);
    for (std::size_t i = 0; i < refs.size(); ++i) {
        const double f1 = fidelity(apply_alignment(a1, pts[i]), refs[i]);
        const double f2 = fidelity(apply_alignment(a2, rotated[i]), refs[i]);
        CHECK(f1 == doctest::Approx(f2).epsilon(1e-9));
    }
}

TEST_CASE("degenerate calibration sets are rejected") {
    std::vector<BlochVector> refs;
    std::vector<Eigen::Vector3d> pts;
    for (int k = 0; k < 8; ++k) {
        const double phi = 2.0 * pi * k / 8.0;
        refs.push_back(bloch_from_angles(pi / 2, phi)); // equatorial ring: coplanar
        pts.push_back(refs.back());
    }
    CHECK_THROWS_AS(align_to_sphere(pts, refs), RankError);

    CHECK_THROWS_AS(align_to_sphere({pts[0], pts[1]}, {refs[0], refs[1]}), ShapeError);
    CHECK_THROWS_AS(align_to_sphere(pts, {refs[0]}), ShapeError);

    const Alignment a{Eigen::Matrix3d::Identity(), 1.0, Eigen::Vector3d::Zero()};
    CHECK_THROWS_AS(apply_alignment(a, Eigen::Vector3d::Zero()), DomainError);
}
