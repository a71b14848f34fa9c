#include "vvb/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vvb/errors.hpp"
#include "vvb/rng.hpp"

namespace vvb {

namespace {

void check_labels(const std::vector<std::uint16_t>& y, int classes) {
    for (std::uint16_t l : y)
        if (l >= classes) throw ShapeError("label out of range for the label spec");
}

} // namespace

SVMModel svm_train(const Eigen::MatrixXd& x, const std::vector<std::uint16_t>& y,
                   const LabelSpec& spec, const SVMTrainOptions& opts) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    if (static_cast<std::size_t>(n) != y.size())
        throw ShapeError("feature row count does not match label count");
    if (n == 0) throw DomainError("training set is empty");
    if (spec.class_count < 2) throw DomainError("label spec must name at least two classes");
    check_labels(y, spec.class_count);
    if (!(opts.lambda > 0.0)) throw DomainError("lambda must be > 0");
    if (opts.epochs < 1) throw DomainError("epochs must be >= 1");
    {
        std::vector<std::uint16_t> distinct(y);
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        if (distinct.size() < 2)
            throw DomainError("training data must contain at least two distinct classes");
    }

    const int classes = spec.class_count;
    const std::uint64_t steps = static_cast<std::uint64_t>(opts.epochs) * n;
    const std::uint64_t avg_from = steps / 2; // average the iterates with t > steps/2

    // Live iterate and running sum per class; the bias rides along as the
    // last coordinate so the Pegasos shrink step regularizes it too.
    Eigen::MatrixXd wt = Eigen::MatrixXd::Zero(classes, d + 1);
    Eigen::MatrixXd wsum = Eigen::MatrixXd::Zero(classes, d + 1);
    Eigen::MatrixXd wepoch; // per-epoch average, only kept for the trace
    if (opts.objective_trace) wepoch = Eigen::MatrixXd::Zero(classes, d + 1);
    std::vector<Rng> pick;
    pick.reserve(static_cast<std::size_t>(classes));
    for (int c = 0; c < classes; ++c)
        pick.emplace_back(opts.seed, static_cast<std::uint64_t>(c), Rng::Stage::shuffle);

    SVMModel model;
    model.label_spec = spec;
    model.lambda = opts.lambda;
    model.epochs = opts.epochs;
    model.seed = opts.seed;

    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        for (int c = 0; c < classes; ++c) {
            auto w = wt.row(c);
            for (Eigen::Index k = 0; k < n; ++k) {
                const std::uint64_t t = static_cast<std::uint64_t>(epoch) * n + k + 1;
                const auto i = static_cast<Eigen::Index>(pick[static_cast<std::size_t>(c)].below(
                    static_cast<std::uint64_t>(n)));
                const double yi = y[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;
                const double eta = 1.0 / (opts.lambda * static_cast<double>(t));
                const double margin = yi * (w.head(d).dot(x.row(i)) + w(d));
                w *= 1.0 - eta * opts.lambda;
                if (margin < 1.0) {
                    w.head(d) += eta * yi * x.row(i);
                    w(d) += eta * yi;
                }
                if (t > avg_from) wsum.row(c) += w;
                if (opts.objective_trace) wepoch.row(c) += w;
            }
        }
        if (opts.objective_trace) {
            SVMModel probe = model;
            probe.weights = wepoch.leftCols(d) / static_cast<double>(n);
            probe.biases = wepoch.col(d) / static_cast<double>(n);
            opts.objective_trace->push_back(svm_objective(probe, x, y));
            wepoch.setZero();
        }
    }

    const double denom = static_cast<double>(steps - avg_from);
    wsum /= denom;
    model.weights = wsum.leftCols(d);
    model.biases = wsum.col(d);
    return model;
}

int svm_predict(const SVMModel& m, const Eigen::VectorXd& x) {
    if (x.size() != m.feature_dim())
        throw ShapeError("feature length does not match the model");
    const Eigen::VectorXd scores = m.weights * x + m.biases;
    int best = 0;
    for (int c = 1; c < m.classes(); ++c)
        if (scores(c) > scores(best)) best = c; // ties keep the lowest index
    return best;
}

std::vector<std::uint16_t> svm_predict_all(const SVMModel& m, const Eigen::MatrixXd& x) {
    std::vector<std::uint16_t> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        out[static_cast<std::size_t>(i)] =
            static_cast<std::uint16_t>(svm_predict(m, x.row(i).transpose()));
    return out;
}

double svm_objective(const SVMModel& m, const Eigen::MatrixXd& x,
                     const std::vector<std::uint16_t>& y) {
    if (static_cast<std::size_t>(x.rows()) != y.size())
        throw ShapeError("feature row count does not match label count");
    if (x.rows() == 0) throw DomainError("objective needs at least one sample");
    if (x.cols() != m.feature_dim())
        throw ShapeError("feature length does not match the model");
    double obj = 0.0;
    for (int c = 0; c < m.classes(); ++c) {
        obj += 0.5 * m.lambda * (m.weights.row(c).squaredNorm() + m.biases(c) * m.biases(c));
        double hinge = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const double yi = y[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;
            const double margin = yi * (m.weights.row(c).dot(x.row(i)) + m.biases(c));
            hinge += std::max(0.0, 1.0 - margin);
        }
        obj += hinge / static_cast<double>(x.rows());
    }
    return obj;
}

Confusion confusion_matrix(const std::vector<std::uint16_t>& truth,
                           const std::vector<std::uint16_t>& predicted, int classes) {
    if (truth.size() != predicted.size())
        throw ShapeError("truth and prediction lists differ in length");
    if (truth.empty()) throw DomainError("confusion matrix needs at least one sample");
    if (classes < 1) throw DomainError("classes must be >= 1");
    check_labels(truth, classes);
    check_labels(predicted, classes);

    Confusion cm;
    cm.counts = Eigen::MatrixXi::Zero(classes, classes);
    for (std::size_t i = 0; i < truth.size(); ++i) cm.counts(truth[i], predicted[i]) += 1;

    cm.per_class_accuracy.resize(static_cast<std::size_t>(classes));
    long correct = 0;
    double acc_sum = 0.0;
    int present = 0;
    for (int c = 0; c < classes; ++c) {
        const long row = cm.counts.row(c).sum();
        correct += cm.counts(c, c);
        if (row > 0) {
            const double acc = static_cast<double>(cm.counts(c, c)) / static_cast<double>(row);
            cm.per_class_accuracy[static_cast<std::size_t>(c)] = acc;
            acc_sum += acc;
            ++present;
        } else {
            cm.per_class_accuracy[static_cast<std::size_t>(c)] =
                std::numeric_limits<double>::quiet_NaN();
        }
    }
    cm.average_accuracy = acc_sum / static_cast<double>(present);
    cm.overall_accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
    return cm;
}

} // namespace vvb
