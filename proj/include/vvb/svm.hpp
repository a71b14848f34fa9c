#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "vvb/dataset.hpp"

namespace vvb {

/// One-vs-rest linear classifier trained with Pegasos. The bias is folded
/// into the weights as an always-on feature, so it is regularized like any
/// other coordinate.
struct SVMModel {
    Eigen::MatrixXd weights; ///< class_count x feature_dim
    Eigen::VectorXd biases;  ///< class_count
    LabelSpec label_spec;
    double lambda = 1e-4;
    int epochs = 50;
    std::uint64_t seed = 0;

    int classes() const { return static_cast<int>(weights.rows()); }
    Eigen::Index feature_dim() const { return weights.cols(); }
};

struct SVMTrainOptions {
    double lambda = 1e-4;
    int epochs = 50;
    std::uint64_t seed = 0;
    /// When set, receives the training-set objective of each epoch's
    /// averaged iterate: sum over classes of lambda/2 * |w|^2 plus the mean
    /// binary hinge loss.
    std::vector<double>* objective_trace = nullptr;
};

/// Train on rows of `x` with labels `y` in [0, spec.class_count). The label
/// spec must name at least two classes and every class index present in `y`
/// must be valid; training data containing a single distinct label throws
/// DomainError. Deterministic for fixed (data, options).
SVMModel svm_train(const Eigen::MatrixXd& x, const std::vector<std::uint16_t>& y,
                   const LabelSpec& spec, const SVMTrainOptions& opts = {});

/// Highest-margin class; exact ties resolve to the lowest class index.
int svm_predict(const SVMModel& m, const Eigen::VectorXd& x);
std::vector<std::uint16_t> svm_predict_all(const SVMModel& m, const Eigen::MatrixXd& x);

/// Regularized empirical objective of a model on a labelled set (used to
/// monitor optimization progress).
double svm_objective(const SVMModel& m, const Eigen::MatrixXd& x,
                     const std::vector<std::uint16_t>& y);

/// Row = true class, column = predicted class.
struct Confusion {
    Eigen::MatrixXi counts;
    std::vector<double> per_class_accuracy; ///< NaN for classes with no samples
    double average_accuracy = 0.0; ///< mean of per-class accuracies (absent classes skipped)
    double overall_accuracy = 0.0; ///< correct / total
};
Confusion confusion_matrix(const std::vector<std::uint16_t>& truth,
                           const std::vector<std::uint16_t>& predicted, int classes);

} // namespace vvb
