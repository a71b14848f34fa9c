// Command-line front end: dataset generation, model training/evaluation,
// Bloch reconstruction, image export, and PCA reports. Every run writes the
// fully resolved configuration next to its outputs; re-running with
// `vvb --config <that file>` reproduces the outputs (bit-for-bit in
// deterministic mode).

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "vvb/bytes.hpp"
#include "vvb/cnn.hpp"
#include "vvb/dataset.hpp"
#include "vvb/errors.hpp"
#include "vvb/json_codec.hpp"
#include "vvb/pca.hpp"
#include "vvb/ppm.hpp"
#include "vvb/serialize.hpp"
#include "vvb/sphere.hpp"
#include "vvb/svm.hpp"

namespace fs = std::filesystem;

namespace {

// ---- small utilities -------------------------------------------------------

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_fixed(double v, int digits = 4) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::uint64_t fnv1a64(const std::vector<std::uint8_t>& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (std::uint8_t b : data) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Minimal INI emitter whose keys mirror the subcommand's option names, so
/// the emitted file feeds straight back into --config.
class ConfigEmitter {
  public:
    explicit ConfigEmitter(const std::string& section) : text_("[" + section + "]\n") {}
    void kv(const std::string& k, const std::string& v) { text_ += k + "=\"" + v + "\"\n"; }
    void kv(const std::string& k, const char* v) { kv(k, std::string(v)); }
    void kv(const std::string& k, double v) { text_ += k + "=" + fmt_double(v) + "\n"; }
    void kv(const std::string& k, int v) { text_ += k + "=" + std::to_string(v) + "\n"; }
    void kv(const std::string& k, std::uint64_t v) { text_ += k + "=" + std::to_string(v) + "\n"; }
    void kv(const std::string& k, bool v) { text_ += k + std::string(v ? "=true" : "=false") + "\n"; }
    void write(const fs::path& path) const { vvb::write_file_atomic(path, text_); }

  private:
    std::string text_;
};

fs::path prepare_out_dir(const std::string& out) {
    fs::path dir(out.empty() ? "." : out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw vvb::IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

void write_csv(const fs::path& path, const std::string& content) {
    vvb::write_file_atomic(path, content);
}

std::string accuracy_report(const vvb::Confusion& cm) {
    return "average accuracy " + fmt_fixed(cm.average_accuracy) + " (overall " +
           fmt_fixed(cm.overall_accuracy) + ")";
}

std::string confusion_table(const vvb::Confusion& cm, const vvb::LabelSpec& spec) {
    const int c = static_cast<int>(cm.counts.rows());
    std::size_t w = 5;
    std::vector<std::string> names;
    for (int i = 0; i < c; ++i) {
        names.push_back(vvb::label_name(spec, i));
        w = std::max(w, names.back().size() + 1);
    }
    const auto pad = [w](const std::string& s) {
        return std::string(w > s.size() ? w - s.size() : 1, ' ') + s;
    };
    std::string out = pad("t\\p");
    for (int j = 0; j < c; ++j) out += pad(names[static_cast<std::size_t>(j)]);
    out += "\n";
    for (int i = 0; i < c; ++i) {
        out += pad(names[static_cast<std::size_t>(i)]);
        for (int j = 0; j < c; ++j) out += pad(std::to_string(cm.counts(i, j)));
        out += "\n";
    }
    return out;
}

std::string confusion_csv(const vvb::Confusion& cm, const vvb::LabelSpec& spec) {
    const int c = static_cast<int>(cm.counts.rows());
    std::string out = "true\\pred";
    for (int j = 0; j < c; ++j) out += "," + vvb::label_name(spec, j);
    out += "\n";
    for (int i = 0; i < c; ++i) {
        out += vvb::label_name(spec, i);
        for (int j = 0; j < c; ++j) out += "," + std::to_string(cm.counts(i, j));
        out += "\n";
    }
    out += "average_accuracy," + fmt_double(cm.average_accuracy) + "\n";
    out += "overall_accuracy," + fmt_double(cm.overall_accuracy) + "\n";
    return out;
}

std::string histogram_csv(const std::vector<int>& hist, double lo, double width) {
    std::string out = "bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b < hist.size(); ++b) {
        out += fmt_double(lo + static_cast<double>(b) * width) + "," +
               fmt_double(lo + static_cast<double>(b + 1) * width) + "," +
               std::to_string(hist[b]) + "\n";
    }
    return out;
}

// ---- argument bundles ------------------------------------------------------

struct GenerateArgs {
    std::string task = "class15";
    int per_class = 400;
    int val_per_class = 0;
    std::uint64_t seed = 0;
    int resolution = 64;
    double half_extent = 4.0;
    double waist = 1.0;
    std::string noise = "none";
    std::optional<double> center_jitter, waist_jitter, impurity, crosstalk, intensity_noise,
        background;
    std::string out = "out";
    int jobs = 1;
};

struct TrainArgs {
    std::string model;
    std::string data;
    std::string val;
    std::string out = "out";
    std::uint64_t seed = 0;
    int ncomp = 40;
    double lambda = 1e-4;
    int epochs = -1; // -1: model default (50 for svm, 30 for cnn)
    int batch = 32;
    double lr = 0.01;
    double momentum = 0.9;
    double early_stop = -1.0;
    int jobs = 1;
    bool deterministic = false;
};

struct EvalArgs {
    std::string model;
    std::string data;
    std::string out = "out";
    int jobs = 1;
};

struct ReconstructArgs {
    std::string model;
    std::string calib;
    std::string data;
    std::string out = "out";
};

struct RenderArgs {
    int m1 = -1;
    int m2 = 1;
    double theta = 1.5707963267948966;
    double phi = 0.0;
    int resolution = 64;
    double half_extent = 4.0;
    double waist = 1.0;
    std::string out = "vvb.ppm";
};

struct PcaReportArgs {
    std::string data;
    int ncomp = 8;
    std::string out = "out";
};

vvb::NoiseConfig resolve_noise(const GenerateArgs& a) {
    vvb::NoiseConfig cfg;
    if (a.noise == "labproxy")
        cfg = vvb::NoiseConfig::labproxy(a.seed);
    else if (a.noise == "none")
        cfg.seed = a.seed;
    else
        throw vvb::ConfigError("unknown noise preset '" + a.noise + "' (use none or labproxy)");
    if (a.center_jitter) cfg.center_jitter_sigma = *a.center_jitter;
    if (a.waist_jitter) cfg.waist_jitter_rel = *a.waist_jitter;
    if (a.impurity) cfg.impurity_eps = *a.impurity;
    if (a.crosstalk) cfg.pol_crosstalk_rad = *a.crosstalk;
    if (a.intensity_noise) cfg.intensity_noise_rel = *a.intensity_noise;
    if (a.background) cfg.background_rel = *a.background;
    cfg.validate();
    return cfg;
}

// ---- commands ----------------------------------------------------------------

int run_generate(const GenerateArgs& a) {
    if (a.per_class < 1) throw vvb::ConfigError("--per-class must be >= 1");
    if (a.val_per_class < 0) throw vvb::ConfigError("--val-per-class must be >= 0");
    if (a.jobs < 1) throw vvb::ConfigError("--jobs must be >= 1");
    const vvb::GridSpec grid(a.resolution, a.half_extent, a.waist);
    const vvb::NoiseConfig noise = resolve_noise(a);
    const fs::path dir = prepare_out_dir(a.out);

    std::pair<vvb::Dataset, vvb::Dataset> splits;
    if (a.task == "class15")
        splits = vvb::generate_class15(a.per_class, a.val_per_class, noise, grid, a.seed, a.jobs);
    else if (a.task == "sector26")
        splits = vvb::generate_sector26(a.per_class, a.val_per_class, noise, grid, a.seed, a.jobs);
    else
        throw vvb::ConfigError("unknown task '" + a.task + "' (use class15 or sector26)");

    nlohmann::json manifest;
    manifest["command"] = "generate";
    manifest["task"] = a.task;
    manifest["seed"] = a.seed;
    manifest["files"] = nlohmann::json::array();
    const auto emit = [&](const vvb::Dataset& ds, const std::string& name) {
        const fs::path path = dir / name;
        vvb::save_dataset(ds, path);
        const auto bytes = vvb::read_file(path);
        manifest["files"].push_back({{"path", name},
                                     {"images", ds.size()},
                                     {"fnv1a64", hex64(fnv1a64(bytes))}});
        std::cout << "wrote " << path.string() << " (" << ds.size() << " images)\n";
    };
    emit(splits.first, a.task + "_train.vvbd");
    if (a.val_per_class > 0) emit(splits.second, a.task + "_val.vvbd");
    vvb::write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");

    ConfigEmitter cfg("generate");
    cfg.kv("task", a.task);
    cfg.kv("per-class", a.per_class);
    cfg.kv("val-per-class", a.val_per_class);
    cfg.kv("seed", a.seed);
    cfg.kv("resolution", a.resolution);
    cfg.kv("half-extent", a.half_extent);
    cfg.kv("waist", a.waist);
    cfg.kv("noise", a.noise);
    cfg.kv("center-jitter", noise.center_jitter_sigma);
    cfg.kv("waist-jitter", noise.waist_jitter_rel);
    cfg.kv("impurity", noise.impurity_eps);
    cfg.kv("crosstalk", noise.pol_crosstalk_rad);
    cfg.kv("intensity-noise", noise.intensity_noise_rel);
    cfg.kv("background", noise.background_rel);
    cfg.kv("out", a.out);
    cfg.kv("jobs", a.jobs);
    cfg.write(dir / "generate.resolved.cfg");
    return 0;
}

int run_train(const TrainArgs& a) {
    if (a.model != "svm" && a.model != "cnn")
        throw vvb::ConfigError("--model must be svm or cnn");
    if (a.model == "svm" && a.ncomp < 1)
        throw vvb::ConfigError("--ncomp must be >= 1");
    if (a.epochs == 0 || a.epochs < -1) throw vvb::ConfigError("--epochs must be >= 1");
    if (a.jobs < 1) throw vvb::ConfigError("--jobs must be >= 1");
    const int jobs = a.deterministic ? 1 : a.jobs;

    const fs::path dir = prepare_out_dir(a.out);
    const vvb::Dataset train = vvb::load_dataset(a.data);
    std::optional<vvb::Dataset> val;
    if (!a.val.empty()) val = vvb::load_dataset(a.val);

    const fs::path model_path = dir / "model.vvbm";
    const fs::path metrics_path = dir / "metrics.csv";

    if (a.model == "svm") {
        const int epochs = a.epochs > 0 ? a.epochs : 50;
        vvb::PCAModel pca = vvb::pca_fit(train, a.ncomp);
        const Eigen::MatrixXd feats = vvb::pca_transform_all(pca, train.images);

        std::vector<double> trace;
        vvb::SVMTrainOptions opts;
        opts.lambda = a.lambda;
        opts.epochs = epochs;
        opts.seed = a.seed;
        opts.objective_trace = &trace;
        vvb::SVMModel svm = vvb::svm_train(feats, train.labels, train.label_spec, opts);

        vvb::save_svm_pipeline({pca, svm}, model_path);
        std::string csv = "epoch,objective\n";
        for (std::size_t e = 0; e < trace.size(); ++e)
            csv += std::to_string(e + 1) + "," + fmt_double(trace[e]) + "\n";
        write_csv(metrics_path, csv);

        const vvb::Dataset& report_ds = val ? *val : train;
        const auto pred = vvb::svm_predict_all(svm, vvb::pca_transform_all(pca, report_ds.images));
        const auto cm = vvb::confusion_matrix(report_ds.labels, pred,
                                              train.label_spec.class_count);
        std::cout << (val ? "validation " : "training ") << accuracy_report(cm) << "\n";
    } else {
        const int epochs = a.epochs > 0 ? a.epochs : 30;
        vvb::CNNModel model = vvb::CNNModel::create(train.resolution(),
                                                    train.label_spec.class_count, a.seed);
        vvb::CNNTrainOptions opts;
        opts.epochs = epochs;
        opts.batch_size = a.batch;
        opts.learning_rate = a.lr;
        opts.momentum = a.momentum;
        opts.seed = a.seed;
        opts.jobs = jobs;
        opts.early_stop_val_acc = a.early_stop;
        opts.on_epoch = [epochs](const vvb::EpochMetrics& em) {
            std::cout << "epoch " << em.epoch << "/" << epochs << " train_loss "
                      << fmt_fixed(em.train_loss) << " train_acc " << fmt_fixed(em.train_accuracy);
            if (em.val_accuracy >= 0.0) std::cout << " val_acc " << fmt_fixed(em.val_accuracy);
            std::cout << "\n";
        };
        const auto history = vvb::cnn_train(model, train, val ? &*val : nullptr, opts);

        vvb::save_cnn_bundle({model, train.label_spec}, model_path);
        std::string csv = "epoch,train_loss,train_acc,val_acc\n";
        for (const auto& em : history)
            csv += std::to_string(em.epoch) + "," + fmt_double(em.train_loss) + "," +
                   fmt_double(em.train_accuracy) + "," + fmt_double(em.val_accuracy) + "\n";
        write_csv(metrics_path, csv);
        if (!history.empty() && history.back().val_accuracy >= 0.0)
            std::cout << "final validation accuracy " << fmt_fixed(history.back().val_accuracy)
                      << "\n";
    }
    std::cout << "model saved to " << model_path.string() << "\n";

    ConfigEmitter cfg("train");
    cfg.kv("model", a.model);
    cfg.kv("data", a.data);
    cfg.kv("val", a.val);
    cfg.kv("out", a.out);
    cfg.kv("seed", a.seed);
    cfg.kv("ncomp", a.ncomp);
    cfg.kv("lambda", a.lambda);
    cfg.kv("epochs", a.epochs > 0 ? a.epochs : (a.model == "svm" ? 50 : 30));
    cfg.kv("batch", a.batch);
    cfg.kv("lr", a.lr);
    cfg.kv("momentum", a.momentum);
    cfg.kv("early-stop", a.early_stop);
    cfg.kv("jobs", a.jobs);
    cfg.kv("deterministic", a.deterministic);
    cfg.write(dir / "train.resolved.cfg");
    return 0;
}

int run_eval(const EvalArgs& a) {
    if (a.jobs < 1) throw vvb::ConfigError("--jobs must be >= 1");
    const fs::path dir = prepare_out_dir(a.out);
    const vvb::Dataset ds = vvb::load_dataset(a.data);

    std::vector<std::uint16_t> pred;
    vvb::LabelSpec model_spec;
    const vvb::ModelKind kind = vvb::peek_model_kind(a.model);
    if (kind == vvb::ModelKind::svm) {
        const vvb::SVMPipeline pipe = vvb::load_svm_pipeline(a.model);
        model_spec = pipe.svm.label_spec;
        pred = vvb::svm_predict_all(pipe.svm, vvb::pca_transform_all(pipe.pca, ds.images));
    } else if (kind == vvb::ModelKind::cnn) {
        const vvb::CNNBundle bundle = vvb::load_cnn_bundle(a.model);
        model_spec = bundle.label_spec;
        pred = vvb::cnn_predict_all(bundle.model, ds, a.jobs);
    } else {
        throw vvb::ConfigError("a PCA model has no classifier; use pca-report or reconstruct");
    }
    if (model_spec.task != ds.label_spec.task ||
        model_spec.class_count != ds.label_spec.class_count)
        throw vvb::ShapeError("model and dataset label specs disagree");

    const auto cm = vvb::confusion_matrix(ds.labels, pred, model_spec.class_count);
    std::cout << confusion_table(cm, model_spec) << accuracy_report(cm) << "\n";
    write_csv(dir / "confusion.csv", confusion_csv(cm, model_spec));

    ConfigEmitter cfg("eval");
    cfg.kv("model", a.model);
    cfg.kv("data", a.data);
    cfg.kv("out", a.out);
    cfg.kv("jobs", a.jobs);
    cfg.write(dir / "eval.resolved.cfg");
    return 0;
}

int run_reconstruct(const ReconstructArgs& a) {
    const fs::path dir = prepare_out_dir(a.out);
    const vvb::PCAModel pca = vvb::load_pca_model(a.model);
    if (pca.n_components() < 3)
        throw vvb::ConfigError("reconstruction needs a PCA model with at least 3 components");
    const vvb::Dataset calib = vvb::load_dataset(a.calib);
    const vvb::Dataset data = vvb::load_dataset(a.data);

    const auto project3 = [&pca](const vvb::Dataset& ds) {
        std::vector<Eigen::Vector3d> pts;
        pts.reserve(ds.size());
        for (const auto& img : ds.images)
            pts.push_back(vvb::pca_transform(pca, img).head<3>());
        return pts;
    };
    std::vector<vvb::BlochVector> refs;
    refs.reserve(calib.size());
    for (const auto& ang : calib.angles) refs.push_back(vvb::bloch_from_angles(ang[0], ang[1]));
    const vvb::Alignment align = vvb::align_to_sphere(project3(calib), refs);

    const auto pts = project3(data);
    std::string csv = "index,label,theta_true,phi_true,theta_est,phi_est,fidelity\n";
    std::vector<double> fids(pts.size());
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const vvb::BlochVector est = vvb::apply_alignment(align, pts[i]);
        const auto [theta_est, phi_est] = vvb::angles_from_bloch(est);
        const vvb::BlochVector truth =
            vvb::bloch_from_angles(data.angles[i][0], data.angles[i][1]);
        const double f = vvb::fidelity(est, truth);
        fids[i] = f;
        sum += f;
        sum_sq += f * f;
        csv += std::to_string(i) + "," + std::to_string(data.labels[i]) + "," +
               fmt_double(data.angles[i][0]) + "," + fmt_double(data.angles[i][1]) + "," +
               fmt_double(theta_est) + "," + fmt_double(phi_est) + "," + fmt_double(f) + "\n";
    }
    const double n = static_cast<double>(fids.size());
    const double mean = sum / n;
    const double stddev = std::sqrt(std::max(sum_sq / n - mean * mean, 0.0));

    constexpr int kBins = 50;
    std::vector<int> hist(kBins, 0);
    for (double f : fids) {
        int b = static_cast<int>(f * kBins);
        ++hist[static_cast<std::size_t>(std::clamp(b, 0, kBins - 1))];
    }
    write_csv(dir / "reconstruction.csv", csv);
    write_csv(dir / "fidelity_hist.csv", histogram_csv(hist, 0.0, 1.0 / kBins));
    std::cout << "mean fidelity " << fmt_fixed(mean) << ", std " << fmt_fixed(stddev) << " over "
              << fids.size() << " images\n";

    ConfigEmitter cfg("reconstruct");
    cfg.kv("model", a.model);
    cfg.kv("calib", a.calib);
    cfg.kv("data", a.data);
    cfg.kv("out", a.out);
    cfg.write(dir / "reconstruct.resolved.cfg");
    return 0;
}

int run_render(const RenderArgs& a) {
    const vvb::GridSpec grid(a.resolution, a.half_extent, a.waist);
    const vvb::VVBState state(a.m1, a.m2, a.theta, a.phi);
    const vvb::RGBImage rgb = vvb::to_rgb(vvb::stokes(vvb::render(state, grid)));
    const fs::path out(a.out);
    if (out.has_parent_path()) prepare_out_dir(out.parent_path().string());
    vvb::write_ppm(rgb, out);
    std::cout << "wrote " << out.string() << "\n";

    ConfigEmitter cfg("render");
    cfg.kv("m1", a.m1);
    cfg.kv("m2", a.m2);
    cfg.kv("theta", a.theta);
    cfg.kv("phi", a.phi);
    cfg.kv("resolution", a.resolution);
    cfg.kv("half-extent", a.half_extent);
    cfg.kv("waist", a.waist);
    cfg.kv("out", a.out);
    cfg.write((out.has_parent_path() ? out.parent_path() : fs::path(".")) /
              "render.resolved.cfg");
    return 0;
}

int run_pca_report(const PcaReportArgs& a) {
    if (a.ncomp < 1) throw vvb::ConfigError("--ncomp must be >= 1");
    const fs::path dir = prepare_out_dir(a.out);
    const vvb::Dataset ds = vvb::load_dataset(a.data);
    const vvb::PCAModel pca = vvb::pca_fit(ds, a.ncomp);
    vvb::save_pca_model(pca, dir / "pca.vvbm");

    std::string csv = "component,explained_variance,cumulative_share\n";
    for (int k = 0; k < pca.n_components(); ++k)
        csv += std::to_string(k + 1) + "," + fmt_double(pca.explained_variance(k)) + "," +
               fmt_double(pca.explained_share(k + 1)) + "\n";
    write_csv(dir / "pca_variance.csv", csv);

    std::vector<Eigen::Vector3d> pts;
    if (pca.n_components() >= 3) {
        pts.reserve(ds.size());
        for (const auto& img : ds.images)
            pts.push_back(vvb::pca_transform(pca, img).head<3>());
        const vvb::RadiiStats st = vvb::radii_stats(pts);
        write_csv(dir / "pca_radii.csv", histogram_csv(st.histogram, st.bin_lo, st.bin_width));
        std::cout << "radii mean " << fmt_fixed(st.mean) << ", std " << fmt_fixed(st.stddev)
                  << " (std/mean " << fmt_fixed(st.stddev / st.mean) << ")\n";
    }
    const int top = std::min(3, pca.n_components());
    std::cout << "top-" << top << " explained-variance share "
              << fmt_fixed(pca.explained_share(top)) << "\n";
    std::cout << "PCA model saved to " << (dir / "pca.vvbm").string() << "\n";

    ConfigEmitter cfg("pca-report");
    cfg.kv("data", a.data);
    cfg.kv("ncomp", a.ncomp);
    cfg.kv("out", a.out);
    cfg.write(dir / "pca-report.resolved.cfg");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vector vortex beam simulation and learning toolkit"};
    app.set_config("--config", "", "read options from an INI file (one section per subcommand)");
    app.require_subcommand(0, 1);

    GenerateArgs ga;
    auto* gen = app.add_subcommand("generate", "generate a labelled Stokes-image dataset");
    gen->add_option("--task", ga.task, "class15 or sector26")->capture_default_str();
    gen->add_option("--per-class", ga.per_class, "training images per class")->capture_default_str();
    gen->add_option("--val-per-class", ga.val_per_class, "validation images per class")
        ->capture_default_str();
    gen->add_option("--seed", ga.seed, "master seed for state draws and noise")->capture_default_str();
    gen->add_option("--resolution", ga.resolution, "grid resolution (pixels per side)")
        ->capture_default_str();
    gen->add_option("--half-extent", ga.half_extent, "grid half width in waist units")
        ->capture_default_str();
    gen->add_option("--waist", ga.waist, "beam waist")->capture_default_str();
    gen->add_option("--noise", ga.noise, "noise preset: none or labproxy")->capture_default_str();
    gen->add_option("--center-jitter", ga.center_jitter, "beam-center jitter std, waist units");
    gen->add_option("--waist-jitter", ga.waist_jitter, "relative waist jitter std");
    gen->add_option("--impurity", ga.impurity, "p=1 mode admixture amplitude in [0,1)");
    gen->add_option("--crosstalk", ga.crosstalk, "polarization rotation std, radians");
    gen->add_option("--intensity-noise", ga.intensity_noise, "relative intensity noise std");
    gen->add_option("--background", ga.background, "uniform background relative to peak");
    gen->add_option("--out", ga.out, "output directory")->capture_default_str();
    gen->add_option("--jobs", ga.jobs, "parallel workers")->capture_default_str();

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "train an SVM-on-PCA or CNN classifier");
    train->add_option("--model", ta.model, "svm or cnn")->required();
    train->add_option("--data", ta.data, "training dataset (.vvbd)")->required();
    train->add_option("--val", ta.val, "validation dataset (.vvbd)")->capture_default_str();
    train->add_option("--out", ta.out, "output directory")->capture_default_str();
    train->add_option("--seed", ta.seed, "training seed")->capture_default_str();
    train->add_option("--ncomp", ta.ncomp, "PCA components (svm)")->capture_default_str();
    train->add_option("--lambda", ta.lambda, "SVM regularization")->capture_default_str();
    train->add_option("--epochs", ta.epochs, "training epochs (default 50 svm / 30 cnn)")
        ->capture_default_str();
    train->add_option("--batch", ta.batch, "CNN minibatch size")->capture_default_str();
    train->add_option("--lr", ta.lr, "CNN learning rate")->capture_default_str();
    train->add_option("--momentum", ta.momentum, "CNN SGD momentum")->capture_default_str();
    train->add_option("--early-stop", ta.early_stop,
                      "stop when validation accuracy reaches this value (cnn)")
        ->capture_default_str();
    train->add_option("--jobs", ta.jobs, "parallel workers")->capture_default_str();
    train->add_flag("--deterministic", ta.deterministic,
                    "force sequential execution for bit-reproducible training");

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "evaluate a model on a dataset");
    eval->add_option("--model", ea.model, "model file (.vvbm)")->required();
    eval->add_option("--data", ea.data, "dataset file (.vvbd)")->required();
    eval->add_option("--out", ea.out, "output directory")->capture_default_str();
    eval->add_option("--jobs", ea.jobs, "parallel workers")->capture_default_str();

    ReconstructArgs ra;
    auto* rec = app.add_subcommand("reconstruct",
                                   "estimate (theta, phi) from images via an aligned PCA basis");
    rec->add_option("--model", ra.model, "PCA model file (.vvbm)")->required();
    rec->add_option("--calib", ra.calib, "calibration dataset with known angles")->required();
    rec->add_option("--data", ra.data, "dataset to reconstruct")->required();
    rec->add_option("--out", ra.out, "output directory")->capture_default_str();

    RenderArgs na;
    auto* ren = app.add_subcommand("render", "render one state to a PPM image");
    ren->add_option("--m1", na.m1, "left-circular azimuthal index")->capture_default_str();
    ren->add_option("--m2", na.m2, "right-circular azimuthal index")->capture_default_str();
    ren->add_option("--theta", na.theta, "polar angle in [0, pi]")->capture_default_str();
    ren->add_option("--phi", na.phi, "relative phase in [0, 2*pi)")->capture_default_str();
    ren->add_option("--resolution", na.resolution, "grid resolution")->capture_default_str();
    ren->add_option("--half-extent", na.half_extent, "grid half width")->capture_default_str();
    ren->add_option("--waist", na.waist, "beam waist")->capture_default_str();
    ren->add_option("--out", na.out, "output PPM path")->capture_default_str();

    PcaReportArgs pa;
    auto* pr = app.add_subcommand("pca-report", "explained variance and radii statistics");
    pr->add_option("--data", pa.data, "dataset file (.vvbd)")->required();
    pr->add_option("--ncomp", pa.ncomp, "components to fit")->capture_default_str();
    pr->add_option("--out", pa.out, "output directory")->capture_default_str();

    for (auto* sub : {gen, train, eval, rec, ren, pr}) {
        sub->configurable(true);
        sub->fallthrough(true);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen) return run_generate(ga);
        if (*train) return run_train(ta);
        if (*eval) return run_eval(ea);
        if (*rec) return run_reconstruct(ra);
        if (*ren) return run_render(na);
        if (*pr) return run_pca_report(pa);
        std::cerr << app.help();
        return 2;
    } catch (const vvb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const vvb::RankError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const vvb::DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const vvb::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const vvb::ShapeError& e) {
        std::cerr << "shape error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
