#include "vvb/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vvb/errors.hpp"
#include "vvb/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vvb {

namespace {

// ---- layer kernels -------------------------------------------------------

/// out[oc] = b[oc] + sum_ic w[oc][ic] (*) in[ic], 3x3 kernel, zero padding 1.
/// Written as shifted row accumulations so the inner loop vectorizes.
void conv_forward(const Conv2D& c, const double* in, double* out, int h, int w) {
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (int oc = 0; oc < c.out_channels; ++oc) {
        double* op = out + oc * plane;
        std::fill(op, op + plane, c.b[static_cast<std::size_t>(oc)]);
        for (int ic = 0; ic < c.in_channels; ++ic) {
            const double* ip = in + ic * plane;
            for (int ky = 0; ky < 3; ++ky) {
                const int y_lo = std::max(0, 1 - ky), y_hi = std::min(h, h + 1 - ky);
                for (int kx = 0; kx < 3; ++kx) {
                    const double wv = c.w[static_cast<std::size_t>(((oc * c.in_channels + ic) * 3 + ky) * 3 + kx)];
                    const int x_lo = std::max(0, 1 - kx), x_hi = std::min(w, w + 1 - kx);
                    const int n = x_hi - x_lo;
                    for (int y = y_lo; y < y_hi; ++y) {
                        const double* src = ip + (y + ky - 1) * w + (x_lo + kx - 1);
                        double* dst = op + y * w + x_lo;
                        for (int x = 0; x < n; ++x) dst[x] += wv * src[x];
                    }
                }
            }
        }
    }
}

/// Accumulates weight/bias gradients; optionally back-propagates into d_in
/// (skipped for the first layer, which needs no input gradient).
void conv_backward(const Conv2D& c, const double* in, const double* d_out, double* d_w,
                   double* d_b, double* d_in, int h, int w) {
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    if (d_in) std::fill(d_in, d_in + static_cast<std::size_t>(c.in_channels) * plane, 0.0);
    for (int oc = 0; oc < c.out_channels; ++oc) {
        const double* dop = d_out + oc * plane;
        double acc_b = 0.0;
        for (std::size_t k = 0; k < plane; ++k) acc_b += dop[k];
        d_b[static_cast<std::size_t>(oc)] += acc_b;
        for (int ic = 0; ic < c.in_channels; ++ic) {
            const double* ip = in + ic * plane;
            double* dip = d_in ? d_in + ic * plane : nullptr;
            for (int ky = 0; ky < 3; ++ky) {
                const int y_lo = std::max(0, 1 - ky), y_hi = std::min(h, h + 1 - ky);
                for (int kx = 0; kx < 3; ++kx) {
                    const std::size_t wi = static_cast<std::size_t>(((oc * c.in_channels + ic) * 3 + ky) * 3 + kx);
                    const int x_lo = std::max(0, 1 - kx), x_hi = std::min(w, w + 1 - kx);
                    const int n = x_hi - x_lo;
                    double acc_w = 0.0;
                    for (int y = y_lo; y < y_hi; ++y) {
                        const double* src = ip + (y + ky - 1) * w + (x_lo + kx - 1);
                        const double* dop_row = dop + y * w + x_lo;
                        for (int x = 0; x < n; ++x) acc_w += src[x] * dop_row[x];
                    }
                    d_w[wi] += acc_w;
                    if (dip) {
                        const double wv = c.w[wi];
                        for (int y = y_lo; y < y_hi; ++y) {
                            double* dst = dip + (y + ky - 1) * w + (x_lo + kx - 1);
                            const double* dop_row = dop + y * w + x_lo;
                            for (int x = 0; x < n; ++x) dst[x] += wv * dop_row[x];
                        }
                    }
                }
            }
        }
    }
}

void relu_inplace(double* v, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) v[k] = v[k] > 0.0 ? v[k] : 0.0;
}

/// d_pre = d_post where post > 0 (the subgradient at exactly 0 is taken as 0).
void relu_backward(const double* post, double* d, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k)
        if (!(post[k] > 0.0)) d[k] = 0.0;
}

} // namespace

void maxpool2_forward(const double* in, double* out, int* arg, int channels, int h, int w) {
    const int oh = h / 2, ow = w / 2;
    for (int c = 0; c < channels; ++c) {
        const double* ip = in + static_cast<std::size_t>(c) * h * w;
        const std::size_t obase = static_cast<std::size_t>(c) * oh * ow;
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                int best = (2 * oy) * w + 2 * ox;
                double best_v = ip[best];
                const int cand[3] = {(2 * oy) * w + 2 * ox + 1, (2 * oy + 1) * w + 2 * ox,
                                     (2 * oy + 1) * w + 2 * ox + 1};
                for (int idx : cand) {
                    if (ip[idx] > best_v) {
                        best_v = ip[idx];
                        best = idx;
                    }
                }
                out[obase + oy * ow + ox] = best_v;
                arg[obase + oy * ow + ox] = c * h * w + best;
            }
        }
    }
}

void maxpool2_backward(const double* d_out, const int* arg, double* d_in, std::size_t n_out,
                       std::size_t n_in) {
    std::fill(d_in, d_in + n_in, 0.0);
    for (std::size_t k = 0; k < n_out; ++k) d_in[static_cast<std::size_t>(arg[k])] += d_out[k];
}

namespace {

void dense_forward(const Dense& d, const double* in, double* out) {
    for (int o = 0; o < d.out_dim; ++o) {
        const double* wr = d.w.data() + static_cast<std::size_t>(o) * d.in_dim;
        double acc = d.b[static_cast<std::size_t>(o)];
        for (int i = 0; i < d.in_dim; ++i) acc += wr[i] * in[i];
        out[o] = acc;
    }
}

void dense_backward(const Dense& d, const double* in, const double* d_out, double* d_w,
                    double* d_b, double* d_in) {
    if (d_in) std::fill(d_in, d_in + d.in_dim, 0.0);
    for (int o = 0; o < d.out_dim; ++o) {
        const double g = d_out[o];
        d_b[static_cast<std::size_t>(o)] += g;
        const double* wr = d.w.data() + static_cast<std::size_t>(o) * d.in_dim;
        double* gr = d_w + static_cast<std::size_t>(o) * d.in_dim;
        for (int i = 0; i < d.in_dim; ++i) gr[i] += g * in[i];
        if (d_in)
            for (int i = 0; i < d.in_dim; ++i) d_in[i] += wr[i] * g;
    }
}

// ---- shapes and plumbing ---------------------------------------------------

struct Shape {
    int r, half, quarter;
    std::size_t n_in, n_c1, n_p1, n_c2, n_p2;
    explicit Shape(const CNNModel& m)
        : r(m.resolution), half(m.resolution / 2), quarter(m.resolution / 4),
          n_in(3ull * r * r), n_c1(static_cast<std::size_t>(m.conv1.out_channels) * r * r),
          n_p1(static_cast<std::size_t>(m.conv1.out_channels) * half * half),
          n_c2(static_cast<std::size_t>(m.conv2.out_channels) * half * half),
          n_p2(static_cast<std::size_t>(m.conv2.out_channels) * quarter * quarter) {}
};

void ensure_workspace(const CNNModel& m, CNNWorkspace& ws) {
    const Shape s(m);
    ws.in.resize(s.n_in);
    ws.c1.resize(s.n_c1);
    ws.p1.resize(s.n_p1);
    ws.c2.resize(s.n_c2);
    ws.p2.resize(s.n_p2);
    ws.h1.resize(static_cast<std::size_t>(m.fc1.out_dim));
    ws.logits.resize(static_cast<std::size_t>(m.classes));
    ws.probs.resize(static_cast<std::size_t>(m.classes));
    ws.p1_arg.resize(s.n_p1);
    ws.p2_arg.resize(s.n_p2);
    ws.d_c1.resize(s.n_c1);
    ws.d_p1.resize(s.n_p1);
    ws.d_c2.resize(s.n_c2);
    ws.d_p2.resize(s.n_p2);
    ws.d_h1.resize(static_cast<std::size_t>(m.fc1.out_dim));
    ws.d_logits.resize(static_cast<std::size_t>(m.classes));
}

void load_input(const StokesImage& img, std::vector<double>& in) {
    const std::size_t n = img.pixel_count();
    for (std::size_t k = 0; k < n; ++k) {
        in[k] = img.s1[k];
        in[n + k] = img.s2[k];
        in[2 * n + k] = img.s3[k];
    }
}

/// Runs the network up to softmax; returns the cross-entropy loss for
/// `label` (or 0 if label < 0, when only the probabilities are wanted).
double forward_pass(const CNNModel& m, const StokesImage& img, int label, CNNWorkspace& ws) {
    if (img.resolution != m.resolution)
        throw ShapeError("image resolution does not match the model");
    ensure_workspace(m, ws);
    const Shape s(m);
    load_input(img, ws.in);

    conv_forward(m.conv1, ws.in.data(), ws.c1.data(), s.r, s.r);
    relu_inplace(ws.c1.data(), s.n_c1);
    maxpool2_forward(ws.c1.data(), ws.p1.data(), ws.p1_arg.data(), m.conv1.out_channels, s.r, s.r);

    conv_forward(m.conv2, ws.p1.data(), ws.c2.data(), s.half, s.half);
    relu_inplace(ws.c2.data(), s.n_c2);
    maxpool2_forward(ws.c2.data(), ws.p2.data(), ws.p2_arg.data(), m.conv2.out_channels, s.half,
                    s.half);

    dense_forward(m.fc1, ws.p2.data(), ws.h1.data());
    relu_inplace(ws.h1.data(), ws.h1.size());
    dense_forward(m.fc2, ws.h1.data(), ws.logits.data());

    // Softmax with max subtraction; loss = logsumexp(z) - z[label].
    const double zmax = *std::max_element(ws.logits.begin(), ws.logits.end());
    double denom = 0.0;
    for (std::size_t c = 0; c < ws.logits.size(); ++c) {
        ws.probs[c] = std::exp(ws.logits[c] - zmax);
        denom += ws.probs[c];
    }
    for (double& p : ws.probs) p /= denom;
    if (label < 0) return 0.0;
    if (label >= m.classes) throw ShapeError("label out of range for the model");
    return std::log(denom) + zmax - ws.logits[static_cast<std::size_t>(label)];
}

int argmax(const std::vector<double>& v) {
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

} // namespace

// ---- model -----------------------------------------------------------------

CNNModel CNNModel::create(int resolution, int classes, std::uint64_t seed) {
    if (resolution < 8 || resolution % 4 != 0)
        throw DomainError("CNN resolution must be >= 8 and divisible by 4");
    if (classes < 2) throw DomainError("CNN needs at least two classes");
    CNNModel m;
    m.resolution = resolution;
    m.classes = classes;
    m.seed = seed;
    m.conv1 = Conv2D{3, 8, std::vector<double>(3ull * 8 * 9), std::vector<double>(8, 0.0)};
    m.conv2 = Conv2D{8, 16, std::vector<double>(8ull * 16 * 9), std::vector<double>(16, 0.0)};
    const int flat = 16 * (resolution / 4) * (resolution / 4);
    m.fc1 = Dense{flat, 64, std::vector<double>(static_cast<std::size_t>(flat) * 64),
                  std::vector<double>(64, 0.0)};
    m.fc2 = Dense{64, classes, std::vector<double>(64ull * classes),
                  std::vector<double>(static_cast<std::size_t>(classes), 0.0)};

    Rng rng(seed, 0, Rng::Stage::model_init);
    const auto fill = [&rng](std::vector<double>& w, int fan_in) {
        const double lim = std::sqrt(6.0 / fan_in);
        for (double& v : w) v = rng.uniform(-lim, lim);
    };
    fill(m.conv1.w, 3 * 9);
    fill(m.conv2.w, 8 * 9);
    fill(m.fc1.w, m.fc1.in_dim);
    fill(m.fc2.w, m.fc2.in_dim);
    return m;
}

std::size_t CNNModel::param_count() const {
    std::size_t n = 0;
    for (const auto* t : param_tensors()) n += t->size();
    return n;
}

std::vector<std::vector<double>*> CNNModel::param_tensors() {
    return {&conv1.w, &conv1.b, &conv2.w, &conv2.b, &fc1.w, &fc1.b, &fc2.w, &fc2.b};
}

std::vector<const std::vector<double>*> CNNModel::param_tensors() const {
    return {&conv1.w, &conv1.b, &conv2.w, &conv2.b, &fc1.w, &fc1.b, &fc2.w, &fc2.b};
}

std::vector<const char*> CNNModel::param_names() {
    return {"conv1_w", "conv1_b", "conv2_w", "conv2_b", "fc1_w", "fc1_b", "fc2_w", "fc2_b"};
}

CNNGrad CNNGrad::zeros_like(const CNNModel& m) {
    CNNGrad g;
    auto tensors = g.tensors();
    auto params = m.param_tensors();
    for (std::size_t i = 0; i < tensors.size(); ++i) tensors[i]->assign(params[i]->size(), 0.0);
    return g;
}

void CNNGrad::set_zero() {
    for (auto* t : tensors()) std::fill(t->begin(), t->end(), 0.0);
}

void CNNGrad::add(const CNNGrad& other) {
    auto mine = tensors();
    auto theirs = const_cast<CNNGrad&>(other).tensors();
    for (std::size_t i = 0; i < mine.size(); ++i)
        for (std::size_t k = 0; k < mine[i]->size(); ++k) (*mine[i])[k] += (*theirs[i])[k];
}

void CNNGrad::scale(double s) {
    for (auto* t : tensors())
        for (double& v : *t) v *= s;
}

std::vector<std::vector<double>*> CNNGrad::tensors() {
    return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &fc1_w, &fc1_b, &fc2_w, &fc2_b};
}

// ---- inference and loss ------------------------------------------------------

std::vector<double> cnn_forward(const CNNModel& m, const StokesImage& img, CNNWorkspace& ws) {
    forward_pass(m, img, -1, ws);
    return ws.probs;
}

std::vector<double> cnn_forward(const CNNModel& m, const StokesImage& img) {
    CNNWorkspace ws;
    return cnn_forward(m, img, ws);
}

int cnn_predict(const CNNModel& m, const StokesImage& img) {
    CNNWorkspace ws;
    forward_pass(m, img, -1, ws);
    return argmax(ws.probs);
}

double cnn_loss_grad(const CNNModel& m, const StokesImage& img, int label, CNNGrad* grad,
                     CNNWorkspace& ws) {
    if (label < 0) throw ShapeError("label out of range for the model");
    const double loss = forward_pass(m, img, label, ws);
    if (!grad) return loss;
    const Shape s(m);

    for (int c = 0; c < m.classes; ++c)
        ws.d_logits[static_cast<std::size_t>(c)] =
            ws.probs[static_cast<std::size_t>(c)] - (c == label ? 1.0 : 0.0);

    dense_backward(m.fc2, ws.h1.data(), ws.d_logits.data(), grad->fc2_w.data(),
                   grad->fc2_b.data(), ws.d_h1.data());
    relu_backward(ws.h1.data(), ws.d_h1.data(), ws.h1.size());
    dense_backward(m.fc1, ws.p2.data(), ws.d_h1.data(), grad->fc1_w.data(), grad->fc1_b.data(),
                   ws.d_p2.data());

    maxpool2_backward(ws.d_p2.data(), ws.p2_arg.data(), ws.d_c2.data(), s.n_p2, s.n_c2);
    relu_backward(ws.c2.data(), ws.d_c2.data(), s.n_c2);
    conv_backward(m.conv2, ws.p1.data(), ws.d_c2.data(), grad->conv2_w.data(),
                  grad->conv2_b.data(), ws.d_p1.data(), s.half, s.half);

    maxpool2_backward(ws.d_p1.data(), ws.p1_arg.data(), ws.d_c1.data(), s.n_p1, s.n_c1);
    relu_backward(ws.c1.data(), ws.d_c1.data(), s.n_c1);
    conv_backward(m.conv1, ws.in.data(), ws.d_c1.data(), grad->conv1_w.data(),
                  grad->conv1_b.data(), nullptr, s.r, s.r);
    return loss;
}

// ---- training -----------------------------------------------------------------

std::vector<EpochMetrics> cnn_train(CNNModel& m, const Dataset& train, const Dataset* val,
                                    const CNNTrainOptions& opts) {
    train.validate();
    if (train.size() == 0) throw DomainError("training set is empty");
    if (train.resolution() != m.resolution)
        throw ShapeError("training set resolution does not match the model");
    for (std::uint16_t l : train.labels)
        if (l >= m.classes) throw ShapeError("training label out of range for the model");
    if (opts.epochs < 1 || opts.batch_size < 1) throw DomainError("epochs and batch size must be >= 1");
    if (!(opts.learning_rate > 0.0)) throw DomainError("learning rate must be > 0");
    if (!(opts.momentum >= 0.0 && opts.momentum < 1.0))
        throw DomainError("momentum must lie in [0, 1)");

    const std::size_t n = train.size();
    const int jobs = std::max(1, opts.jobs);
    CNNGrad velocity = CNNGrad::zeros_like(m);
    CNNGrad grad = CNNGrad::zeros_like(m);
    std::vector<CNNGrad> thread_grads;
    std::vector<CNNWorkspace> thread_ws(static_cast<std::size_t>(jobs));
    if (jobs > 1)
        thread_grads.assign(static_cast<std::size_t>(jobs), CNNGrad::zeros_like(m));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<EpochMetrics> history;

    for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
        Rng shuf(opts.seed, static_cast<std::uint64_t>(epoch), Rng::Stage::shuffle);
        shuf.shuffle(order);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(opts.batch_size)) {
            const std::size_t stop = std::min(n, start + static_cast<std::size_t>(opts.batch_size));
            const auto batch = static_cast<double>(stop - start);
            grad.set_zero();
            double batch_loss = 0.0;

            if (jobs == 1) {
                for (std::size_t k = start; k < stop; ++k) {
                    const std::size_t i = order[k];
                    batch_loss += cnn_loss_grad(m, train.images[i], train.labels[i], &grad,
                                                thread_ws[0]);
                    if (argmax(thread_ws[0].probs) == train.labels[i]) ++correct;
                }
            } else {
#ifdef _OPENMP
                for (auto& g : thread_grads) g.set_zero();
                std::size_t batch_correct = 0;
#pragma omp parallel num_threads(jobs) reduction(+ : batch_loss, batch_correct)
                {
                    const auto tid = static_cast<std::size_t>(omp_get_thread_num());
#pragma omp for schedule(static)
                    for (std::size_t k = start; k < stop; ++k) {
                        const std::size_t i = order[k];
                        batch_loss += cnn_loss_grad(m, train.images[i], train.labels[i],
                                                    &thread_grads[tid], thread_ws[tid]);
                        if (argmax(thread_ws[tid].probs) == train.labels[i]) ++batch_correct;
                    }
                }
                correct += batch_correct;
                // Reduce in thread-id order so a fixed job count reproduces.
                for (const auto& g : thread_grads) grad.add(g);
#else
                throw ConfigError("built without OpenMP; use jobs = 1");
#endif
            }

            if (!std::isfinite(batch_loss))
                throw DomainError("training diverged: non-finite loss at epoch " +
                                  std::to_string(epoch) + ", batch " +
                                  std::to_string(start / static_cast<std::size_t>(opts.batch_size)));
            loss_sum += batch_loss;
            grad.scale(1.0 / batch);

            auto vel = velocity.tensors();
            auto g = grad.tensors();
            auto params = m.param_tensors();
            for (std::size_t t = 0; t < params.size(); ++t) {
                auto& v = *vel[t];
                const auto& gt = *g[t];
                auto& p = *params[t];
                for (std::size_t k = 0; k < p.size(); ++k) {
                    v[k] = opts.momentum * v[k] + gt[k];
                    p[k] -= opts.learning_rate * v[k];
                }
            }
        }

        EpochMetrics em;
        em.epoch = epoch;
        em.train_loss = loss_sum / static_cast<double>(n);
        em.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
        if (val) em.val_accuracy = dataset_accuracy(m, *val, jobs);
        history.push_back(em);
        if (opts.on_epoch) opts.on_epoch(em);
        if (val && opts.early_stop_val_acc > 0.0 && em.val_accuracy >= opts.early_stop_val_acc)
            break;
    }
    return history;
}

std::vector<std::uint16_t> cnn_predict_all(const CNNModel& m, const Dataset& ds, int jobs) {
    std::vector<std::uint16_t> pred(ds.size());
    jobs = std::max(1, jobs);
#ifdef _OPENMP
#pragma omp parallel num_threads(jobs) if (jobs > 1)
    {
        CNNWorkspace ws;
#pragma omp for schedule(static)
        for (std::size_t i = 0; i < ds.size(); ++i) {
            forward_pass(m, ds.images[i], -1, ws);
            pred[i] = static_cast<std::uint16_t>(argmax(ws.probs));
        }
    }
#else
    CNNWorkspace ws;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        forward_pass(m, ds.images[i], -1, ws);
        pred[i] = static_cast<std::uint16_t>(argmax(ws.probs));
    }
#endif
    return pred;
}

double dataset_accuracy(const CNNModel& m, const Dataset& ds, int jobs) {
    if (ds.size() == 0) throw DomainError("accuracy needs at least one sample");
    const auto pred = cnn_predict_all(m, ds, jobs);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (pred[i] == ds.labels[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(ds.size());
}

double cnn_gradient_check(const CNNModel& model, const StokesImage& img, int label) {
    CNNModel m = model; // mutated locally
    CNNWorkspace ws;
    CNNGrad grad = CNNGrad::zeros_like(m);
    cnn_loss_grad(m, img, label, &grad, ws);

    constexpr double h = 1e-5;
    double worst = 0.0;
    auto params = m.param_tensors();
    auto grads = grad.tensors();
    for (std::size_t t = 0; t < params.size(); ++t) {
        auto& p = *params[t];
        const auto& g = *grads[t];
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double saved = p[k];
            p[k] = saved + h;
            const double lp = forward_pass(m, img, label, ws);
            p[k] = saved - h;
            const double lm = forward_pass(m, img, label, ws);
            p[k] = saved;
            const double numeric = (lp - lm) / (2.0 * h);
            const double rel = std::abs(g[k] - numeric) /
                               std::max({std::abs(g[k]), std::abs(numeric), 1e-6});
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

} // namespace vvb
