#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "vvb/dataset.hpp"
#include "vvb/errors.hpp"
#include "vvb/pca.hpp"
#include "vvb/rng.hpp"
#include "vvb/svm.hpp"

using namespace vvb;

namespace {

LabelSpec spec_with(int classes) {
    LabelSpec s;
    s.task = Task::sector26; // any non-class15 task: no pair list required
    s.class_count = static_cast<std::uint16_t>(classes);
    return s;
}

/// Three well-separated 2-D clusters.
void clusters(Eigen::MatrixXd& x, std::vector<std::uint16_t>& y, int per_class,
              std::uint64_t seed) {
    const double cx[3] = {0.0, 10.0, 0.0};
    const double cy[3] = {0.0, 0.0, 10.0};
    x.resize(3 * per_class, 2);
    y.clear();
    Rng rng(seed);
    for (int c = 0; c < 3; ++c) {
        for (int k = 0; k < per_class; ++k) {
            const Eigen::Index i = c * per_class + k;
            x(i, 0) = cx[c] + 0.3 * rng.normal();
            x(i, 1) = cy[c] + 0.3 * rng.normal();
            y.push_back(static_cast<std::uint16_t>(c));
        }
    }
}

} // namespace

TEST_CASE("separable clusters are classified perfectly") {
    Eigen::MatrixXd x;
    std::vector<std::uint16_t> y;
    clusters(x, y, 30, 1);
    const SVMModel m = svm_train(x, y, spec_with(3), {});
    const auto pred = svm_predict_all(m, x);
    const Confusion cm = confusion_matrix(y, pred, 3);
    CHECK(cm.overall_accuracy == 1.0);
    CHECK(cm.average_accuracy == 1.0);
    for (int c = 0; c < 3; ++c) CHECK(cm.counts(c, c) == 30);
}

TEST_CASE("random labels score at chance level") {
    const int classes = 15, per_class = 40;
    Rng rng(2);
    Eigen::MatrixXd x(classes * per_class, 10);
    std::vector<std::uint16_t> y;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
        y.push_back(static_cast<std::uint16_t>(i % classes)); // labels independent of x
    }
    const Eigen::Index half = x.rows() / 2;
    const Eigen::MatrixXd xtr = x.topRows(half), xte = x.bottomRows(half);
    const std::vector<std::uint16_t> ytr(y.begin(), y.begin() + half);
    const std::vector<std::uint16_t> yte(y.begin() + half, y.end());

    const SVMModel m = svm_train(xtr, ytr, spec_with(classes), {});
    const Confusion cm = confusion_matrix(yte, svm_predict_all(m, xte), classes);
    CHECK(cm.overall_accuracy > 1.0 / 15.0 - 0.03);
    CHECK(cm.overall_accuracy < 1.0 / 15.0 + 0.03);
}

TEST_CASE("score ties resolve to the lowest class index") {
    SVMModel m;
    m.label_spec = spec_with(3);
    m.weights = Eigen::MatrixXd::Zero(3, 2);
    m.biases = Eigen::VectorXd::Zero(3);
    CHECK(svm_predict(m, Eigen::Vector2d(1.0, -1.0)) == 0);

    m.biases << 1.0, 1.0, 0.0; // classes 0 and 1 tie above class 2
    CHECK(svm_predict(m, Eigen::Vector2d(0.0, 0.0)) == 0);

    m.biases << 0.0, 2.0, 2.0;
    CHECK(svm_predict(m, Eigen::Vector2d(0.0, 0.0)) == 1);
}

TEST_CASE("batch prediction equals per-sample prediction") {
    Eigen::MatrixXd x;
    std::vector<std::uint16_t> y;
    clusters(x, y, 10, 3);
    const SVMModel m = svm_train(x, y, spec_with(3), {});
    const auto batch = svm_predict_all(m, x);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        CHECK(batch[static_cast<std::size_t>(i)] == svm_predict(m, x.row(i).transpose()));
}

TEST_CASE("invalid training inputs are rejected") {
    Eigen::MatrixXd x(4, 2);
    x.setRandom();
    std::vector<std::uint16_t> one_class{0, 0, 0, 0};
    CHECK_THROWS_AS(svm_train(x, one_class, spec_with(3), {}), DomainError);

    std::vector<std::uint16_t> y{0, 1, 0, 1};
    SVMTrainOptions bad;
    bad.lambda = 0.0;
    CHECK_THROWS_AS(svm_train(x, y, spec_with(2), bad), DomainError);
    bad = {};
    bad.epochs = 0;
    CHECK_THROWS_AS(svm_train(x, y, spec_with(2), bad), DomainError);

    std::vector<std::uint16_t> mismatched{0, 1};
    CHECK_THROWS_AS(svm_train(x, mismatched, spec_with(2), {}), ShapeError);
    std::vector<std::uint16_t> out_of_range{0, 1, 2, 1};
    CHECK_THROWS_AS(svm_train(x, out_of_range, spec_with(2), {}), ShapeError);
}

TEST_CASE("objective on epoch-averaged iterates settles monotonically") {
    Eigen::MatrixXd x;
    std::vector<std::uint16_t> y;
    clusters(x, y, 25, 4);
    std::vector<double> trace;
    SVMTrainOptions opts;
    opts.epochs = 15;
    opts.objective_trace = &trace;
    svm_train(x, y, spec_with(3), opts);
    REQUIRE(trace.size() == 15);
    for (std::size_t e = 5; e + 1 < trace.size(); ++e)
        CHECK(trace[e + 1] <= trace[e] * (1.0 + 1e-6)); // 10-epoch window
}

TEST_CASE("confusion matrix bookkeeping") {
    const std::vector<std::uint16_t> truth{0, 0, 1, 1, 2, 2};
    const std::vector<std::uint16_t> pred{0, 1, 1, 1, 0, 0};
    const Confusion cm = confusion_matrix(truth, pred, 4);
    CHECK(cm.counts(0, 0) == 1);
    CHECK(cm.counts(0, 1) == 1);
    CHECK(cm.counts(2, 0) == 2);
    CHECK(cm.counts.sum() == 6);
    CHECK(cm.per_class_accuracy[0] == doctest::Approx(0.5));
    CHECK(cm.per_class_accuracy[1] == doctest::Approx(1.0));
    CHECK(cm.per_class_accuracy[2] == doctest::Approx(0.0));
    CHECK(std::isnan(cm.per_class_accuracy[3])); // class absent from the truth
    CHECK(cm.average_accuracy == doctest::Approx(0.5));
    CHECK(cm.overall_accuracy == doctest::Approx(3.0 / 6.0));
}

// The 15 pair classes draw the relative phase uniformly, so each class traces
// a circle in image space (the petal pattern rotates with the phase).  Six
// class pairs — e.g. (-3,-1) vs (-3,1) — share identical intensity, s3, and
// petal envelope and differ only in petal count, leaving two concentric
// circles in orthogonal planes.  No linear argmax rule separates those, so a
// linear SVM is capped well below 1 even on clean data, while a nearest
// neighbour in the same reduced space is essentially perfect.  Both facts are
// pinned here so a regression in either direction is caught.
TEST_CASE("phi-randomized pair classes cap the linear classifier, not the features") {
    const GridSpec grid(32, 4.0, 1.0);
    const auto [train, val] = generate_class15(20, 20, NoiseConfig{}, grid, 15);
    const PCAModel pca = pca_fit(train, 40);
    const Eigen::MatrixXd xtr = pca_transform_all(pca, train.images);
    const Eigen::MatrixXd xva = pca_transform_all(pca, val.images);

    SVMTrainOptions opts;
    opts.seed = 15;
    opts.lambda = 1e-2; // tuned: the default 1e-4 needs far more epochs at this feature scale
    opts.epochs = 400;
    const SVMModel m = svm_train(xtr, train.labels, train.label_spec, opts);
    const Confusion cm = confusion_matrix(val.labels, svm_predict_all(m, xva), 15);
    CHECK(cm.average_accuracy >= 0.40);
    CHECK(cm.average_accuracy <= 0.85); // the structural ceiling holds

    int hits = 0;
    for (Eigen::Index i = 0; i < xva.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < xtr.rows(); ++j)
            if ((xva.row(i) - xtr.row(j)).squaredNorm() <
                (xva.row(i) - xtr.row(best)).squaredNorm())
                best = j;
        hits += train.labels[static_cast<std::size_t>(best)] ==
                val.labels[static_cast<std::size_t>(i)];
    }
    // the reduced features still identify the class almost perfectly
    CHECK(static_cast<double>(hits) >= 0.98 * static_cast<double>(xva.rows()));
}
