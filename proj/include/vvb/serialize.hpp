#pragma once

#include <filesystem>

#include "vvb/cnn.hpp"
#include "vvb/pca.hpp"
#include "vvb/svm.hpp"

namespace vvb {

/// Model kinds stored in the "VVBM" container (version 1). All tensors are
/// written as little-endian f64, so save/load round-trips are bit-exact.
enum class ModelKind : std::uint8_t { pca = 0, svm = 1, cnn = 2 };

/// Reads just enough of a model file to report what it holds.
ModelKind peek_model_kind(const std::filesystem::path& path);

void save_pca_model(const PCAModel& m, const std::filesystem::path& path);
PCAModel load_pca_model(const std::filesystem::path& path);

/// The PCA basis and the classifier trained on top of it travel together,
/// so evaluation needs only (model file, dataset file).
struct SVMPipeline {
    PCAModel pca;
    SVMModel svm;
};

void save_svm_pipeline(const SVMPipeline& m, const std::filesystem::path& path);
SVMPipeline load_svm_pipeline(const std::filesystem::path& path);

/// CNN weights plus the label spec they were trained against.
struct CNNBundle {
    CNNModel model;
    LabelSpec label_spec;
};

void save_cnn_bundle(const CNNBundle& m, const std::filesystem::path& path);
CNNBundle load_cnn_bundle(const std::filesystem::path& path);

} // namespace vvb
