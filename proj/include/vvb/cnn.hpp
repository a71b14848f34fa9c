#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "vvb/dataset.hpp"
#include "vvb/stokes.hpp"

namespace vvb {

/// 3x3 convolution, padding 1, stride 1. Weight layout
/// w[((oc * in_c + ic) * 3 + ky) * 3 + kx]; one bias per output channel.
struct Conv2D {
    int in_channels = 0;
    int out_channels = 0;
    std::vector<double> w, b;
};

/// Fully connected layer; w[o * in_dim + i].
struct Dense {
    int in_dim = 0;
    int out_dim = 0;
    std::vector<double> w, b;
};

/// Fixed small classifier over the three Stokes planes, all in double
/// precision: conv(3->8) + ReLU + maxpool2, conv(8->16) + ReLU + maxpool2,
/// dense(16*(R/4)^2 -> 64) + ReLU, dense(64 -> classes) + softmax.
struct CNNModel {
    int resolution = 0;
    int classes = 0;
    std::uint64_t seed = 0;
    Conv2D conv1, conv2;
    Dense fc1, fc2;

    /// Weights drawn uniformly from +-sqrt(6 / fan_in), biases zero; the
    /// draw order (conv1.w, conv2.w, fc1.w, fc2.w) is part of the contract.
    static CNNModel create(int resolution, int classes, std::uint64_t seed);

    std::size_t param_count() const;
    /// Parameter tensors in serialization order.
    std::vector<std::vector<double>*> param_tensors();
    std::vector<const std::vector<double>*> param_tensors() const;
    static std::vector<const char*> param_names();
};

/// Gradients (or momentum velocities) with the same shapes as the model.
struct CNNGrad {
    std::vector<double> conv1_w, conv1_b, conv2_w, conv2_b, fc1_w, fc1_b, fc2_w, fc2_b;

    static CNNGrad zeros_like(const CNNModel& m);
    void set_zero();
    void add(const CNNGrad& other);
    void scale(double s);
    std::vector<std::vector<double>*> tensors();
};

/// Scratch activations for one sample; reusable across calls.
struct CNNWorkspace {
    std::vector<double> in, c1, p1, c2, p2, h1, logits, probs;
    std::vector<int> p1_arg, p2_arg;
    std::vector<double> d_c1, d_p1, d_c2, d_p2, d_h1, d_logits;
};

/// 2x2 max pooling with stride 2 over channel-major planes; `arg` receives
/// the absolute input index of each window's max. Ties go to the first
/// candidate in row-major scan order — this fixes where the gradient flows.
void maxpool2_forward(const double* in, double* out, int* arg, int channels, int h, int w);
void maxpool2_backward(const double* d_out, const int* arg, double* d_in,
                       std::size_t n_out, std::size_t n_in);

/// Class probabilities for one image (softmax output).
std::vector<double> cnn_forward(const CNNModel& m, const StokesImage& img,
                                CNNWorkspace& ws);
std::vector<double> cnn_forward(const CNNModel& m, const StokesImage& img);
int cnn_predict(const CNNModel& m, const StokesImage& img);

/// Cross-entropy loss of one sample; when `grad` is non-null the parameter
/// gradients are accumulated into it (caller zeroes between batches).
double cnn_loss_grad(const CNNModel& m, const StokesImage& img, int label,
                     CNNGrad* grad, CNNWorkspace& ws);

struct CNNTrainOptions {
    int epochs = 30;
    int batch_size = 32;
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::uint64_t seed = 0;
    int jobs = 1; ///< samples of one batch processed in parallel when > 1
    /// Stop after any epoch whose validation accuracy reaches this value
    /// (disabled when <= 0 or no validation set is given).
    double early_stop_val_acc = -1.0;
    std::function<void(const struct EpochMetrics&)> on_epoch;
};

struct EpochMetrics {
    int epoch = 0;          ///< 1-based
    double train_loss = 0.0; ///< mean pre-update batch loss over the epoch
    double train_accuracy = 0.0;
    double val_accuracy = -1.0; ///< -1 when no validation set was given
};

/// Minibatch SGD with classic momentum (v = mu * v + g, w -= lr * v).
/// Sample order is reshuffled each epoch from (seed, epoch); with jobs == 1
/// the whole run is bit-deterministic. A non-finite loss aborts with a
/// DomainError naming the epoch and batch.
std::vector<EpochMetrics> cnn_train(CNNModel& m, const Dataset& train, const Dataset* val,
                                    const CNNTrainOptions& opts);

double dataset_accuracy(const CNNModel& m, const Dataset& ds, int jobs = 1);
std::vector<std::uint16_t> cnn_predict_all(const CNNModel& m, const Dataset& ds, int jobs = 1);

/// Max relative error between analytic and central finite-difference
/// gradients (step 1e-5, relative to max(|a|, |n|, 1e-6)) over every
/// parameter of the model. Keep the model small: cost is two forward passes
/// per parameter.
double cnn_gradient_check(const CNNModel& m, const StokesImage& img, int label);

} // namespace vvb
