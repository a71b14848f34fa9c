#include "vvb/pca.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "vvb/errors.hpp"

namespace vvb {

namespace {

/// Modified Gram-Schmidt over the rows, run twice per row for numerical
/// orthogonality. Rows whose residual collapses (the data had lower rank
/// than the requested component count) are replaced by the first canonical
/// basis direction with a usable residual, so the output rows are always a
/// valid orthonormal set.
void orthonormalize_rows(Eigen::MatrixXd& m) {
    const Eigen::Index d = m.cols();
    for (Eigen::Index k = 0; k < m.rows(); ++k) {
        auto row = m.row(k);
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index i = 0; i < k; ++i) row -= row.dot(m.row(i)) * m.row(i);
        double norm = row.norm();
        if (norm < 1e-10) {
            for (Eigen::Index e = 0; e < d && norm < 1e-10; ++e) {
                row.setZero();
                row(e) = 1.0;
                for (int pass = 0; pass < 2; ++pass)
                    for (Eigen::Index i = 0; i < k; ++i) row -= row.dot(m.row(i)) * m.row(i);
                norm = row.norm();
            }
        }
        row /= norm;
    }
}

} // namespace

double PCAModel::explained_share(int k) const {
    if (k < 0 || k > n_components()) throw DomainError("component count out of range");
    if (total_variance <= 0.0) return 1.0; // constant data: nothing left to capture
    return explained_variance.head(k).sum() / total_variance;
}

Eigen::VectorXd flatten_stokes(const StokesImage& img) {
    const auto n = static_cast<Eigen::Index>(img.pixel_count());
    Eigen::VectorXd x(3 * n);
    for (Eigen::Index k = 0; k < n; ++k) {
        x(k) = img.s1[static_cast<std::size_t>(k)];
        x(n + k) = img.s2[static_cast<std::size_t>(k)];
        x(2 * n + k) = img.s3[static_cast<std::size_t>(k)];
    }
    return x;
}

PCAModel pca_fit_matrix(const Eigen::MatrixXd& x, int n_components) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    if (n < 2) throw DomainError("PCA needs at least 2 samples");
    if (n_components < 1 || n_components > std::min(n, d))
        throw DomainError("n_components must lie in [1, min(samples, dim)]");

    PCAModel model;
    model.mean = x.colwise().mean();
    Eigen::MatrixXd xc = x.rowwise() - model.mean.transpose();
    model.total_variance = xc.squaredNorm() / static_cast<double>(n - 1);
    model.components.resize(n_components, d);
    model.explained_variance.resize(n_components);

    if (n < d) {
        // Gram route: eigenvectors u of Xc Xc^T give components Xc^T u / s.
        const Eigen::MatrixXd gram = xc * xc.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
        if (eig.info() != Eigen::Success) throw DomainError("PCA eigendecomposition failed");
        for (int k = 0; k < n_components; ++k) {
            const Eigen::Index src = n - 1 - k; // eigenvalues come back ascending
            const double lambda = std::max(eig.eigenvalues()(src), 0.0);
            model.explained_variance(k) = lambda / static_cast<double>(n - 1);
            Eigen::VectorXd v = xc.transpose() * eig.eigenvectors().col(src);
            if (lambda > 0.0) v /= std::sqrt(lambda);
            model.components.row(k) = v.transpose();
        }
    } else {
        const Eigen::MatrixXd cov = xc.transpose() * xc / static_cast<double>(n - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
        if (eig.info() != Eigen::Success) throw DomainError("PCA eigendecomposition failed");
        for (int k = 0; k < n_components; ++k) {
            const Eigen::Index src = d - 1 - k;
            model.explained_variance(k) = std::max(eig.eigenvalues()(src), 0.0);
            model.components.row(k) = eig.eigenvectors().col(src).transpose();
        }
    }
    orthonormalize_rows(model.components);
    return model;
}

PCAModel pca_fit(const std::vector<StokesImage>& images, int n_components) {
    if (images.empty()) throw DomainError("PCA needs at least 2 samples");
    const int res = images.front().resolution;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(images.size()), 3 * res * res);
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (images[i].resolution != res)
            throw ShapeError("PCA input images must share one resolution");
        x.row(static_cast<Eigen::Index>(i)) = flatten_stokes(images[i]).transpose();
    }
    PCAModel model = pca_fit_matrix(x, n_components);
    model.resolution = res;
    return model;
}

PCAModel pca_fit(const Dataset& ds, int n_components) { return pca_fit(ds.images, n_components); }

Eigen::VectorXd pca_transform_vec(const PCAModel& m, const Eigen::VectorXd& x) {
    if (x.size() != m.dim())
        throw ShapeError("feature length does not match the PCA basis");
    return m.components * (x - m.mean);
}

Eigen::VectorXd pca_transform(const PCAModel& m, const StokesImage& img) {
    if (m.resolution != 0 && img.resolution != m.resolution)
        throw ShapeError("image resolution does not match the PCA basis");
    return pca_transform_vec(m, flatten_stokes(img));
}

Eigen::MatrixXd pca_transform_all(const PCAModel& m, const std::vector<StokesImage>& images) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(images.size()), m.n_components());
    for (std::size_t i = 0; i < images.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = pca_transform(m, images[i]).transpose();
    return out;
}

Eigen::VectorXd pca_reconstruct(const PCAModel& m, const Eigen::VectorXd& coords) {
    if (coords.size() != m.n_components())
        throw ShapeError("coordinate length does not match the component count");
    return m.mean + m.components.transpose() * coords;
}

RadiiStats radii_stats(const std::vector<Eigen::Vector3d>& points,
                       std::optional<Eigen::Vector3d> center, int bins) {
    if (points.empty()) throw DomainError("radii_stats needs at least one point");
    if (bins < 1) throw DomainError("bins must be >= 1");
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    if (center) {
        c = *center;
    } else {
        for (const auto& p : points) c += p;
        c /= static_cast<double>(points.size());
    }
    std::vector<double> radii(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) radii[i] = (points[i] - c).norm();

    RadiiStats st;
    double sum = 0.0, sum_sq = 0.0;
    for (double r : radii) {
        sum += r;
        sum_sq += r * r;
    }
    const double n = static_cast<double>(radii.size());
    st.mean = sum / n;
    st.stddev = std::sqrt(std::max(sum_sq / n - st.mean * st.mean, 0.0));

    const auto [lo_it, hi_it] = std::minmax_element(radii.begin(), radii.end());
    st.bin_lo = *lo_it;
    st.histogram.assign(static_cast<std::size_t>(bins), 0);
    const double span = *hi_it - *lo_it;
    st.bin_width = span / bins;
    for (double r : radii) {
        int b = span > 0.0 ? static_cast<int>((r - st.bin_lo) / st.bin_width) : 0;
        b = std::clamp(b, 0, bins - 1);
        ++st.histogram[static_cast<std::size_t>(b)];
    }
    return st;
}

} // namespace vvb
