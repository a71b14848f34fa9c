#include "vvb/dataset.hpp"

#include <numbers>

#include "vvb/bytes.hpp"
#include "vvb/errors.hpp"
#include "vvb/json_codec.hpp"
#include "vvb/optics.hpp"
#include "vvb/rng.hpp"
#include "vvb/sphere.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vvb {

namespace {

constexpr char kMagic[4] = {'V', 'V', 'B', 'D'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kChannels = 4; // s1, s2, s3, intensity

StokesImage make_image(const VVBState& state, const GridSpec& grid,
                       const NoiseConfig& noise, std::uint64_t sample_index) {
    const JonesField field = perturb_field(state, grid, noise, sample_index);
    return perturb_stokes(stokes(field), noise, sample_index);
}

struct SampleOrder {
    std::uint16_t label;
    std::uint64_t sample_index;
    bool in_train;
    std::size_t slot; // position within its split
};

/// Lay out per-class samples: index k < n_train goes to train, the rest to
/// val, with the global sample_index c * (n_train + n_val) + k keeping the
/// two splits on disjoint random streams.
std::vector<SampleOrder> layout(int classes, int n_train, int n_val) {
    if (n_train < 0 || n_val < 0 || n_train + n_val == 0)
        throw DomainError("per-class sample counts must be >= 0 and not both zero");
    std::vector<SampleOrder> order;
    order.reserve(static_cast<std::size_t>(classes) * (n_train + n_val));
    std::size_t train_slot = 0, val_slot = 0;
    for (int c = 0; c < classes; ++c) {
        for (int k = 0; k < n_train + n_val; ++k) {
            SampleOrder s;
            s.label = static_cast<std::uint16_t>(c);
            s.sample_index = static_cast<std::uint64_t>(c) * (n_train + n_val) + k;
            s.in_train = k < n_train;
            s.slot = s.in_train ? train_slot++ : val_slot++;
            order.push_back(s);
        }
    }
    return order;
}

Dataset make_split(const LabelSpec& spec, const GridSpec& grid, const NoiseConfig& noise,
                   std::uint64_t seed, int per_class, const char* split, std::size_t count) {
    Dataset ds;
    ds.label_spec = spec;
    ds.provenance = Provenance{grid, noise, seed, static_cast<std::uint32_t>(per_class), split};
    ds.images.resize(count);
    ds.labels.resize(count);
    ds.angles.resize(count);
    return ds;
}

template <typename StateFn>
std::pair<Dataset, Dataset> generate(const LabelSpec& spec, int n_train, int n_val,
                                     const NoiseConfig& noise, const GridSpec& grid,
                                     std::uint64_t seed, int jobs, StateFn state_of) {
    noise.validate();
    grid.validate();
    const auto order = layout(spec.class_count, n_train, n_val);
    Dataset train = make_split(spec, grid, noise, seed, n_train, "train",
                               static_cast<std::size_t>(spec.class_count) * n_train);
    Dataset val = make_split(spec, grid, noise, seed, n_val, "val",
                             static_cast<std::size_t>(spec.class_count) * n_val);

    const auto run_one = [&](const SampleOrder& s) {
        Rng draw(seed, s.sample_index, Rng::Stage::state_draw);
        const VVBState state = state_of(s.label, draw);
        Dataset& out = s.in_train ? train : val;
        out.images[s.slot] = make_image(state, grid, noise, s.sample_index);
        out.labels[s.slot] = s.label;
        out.angles[s.slot] = {state.theta, state.phi};
    };

#ifdef _OPENMP
    if (jobs != 1) {
        const int threads = jobs > 0 ? jobs : omp_get_max_threads();
        bool failed = false;
        std::string what;
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
        for (std::size_t i = 0; i < order.size(); ++i) {
            try {
                run_one(order[i]);
            } catch (const std::exception& e) {
#pragma omp critical
                {
                    failed = true;
                    what = e.what();
                }
            }
        }
        if (failed) throw DomainError("dataset generation failed: " + what);
        return {std::move(train), std::move(val)};
    }
#else
    (void)jobs;
#endif
    for (const auto& s : order) run_one(s);
    return {std::move(train), std::move(val)};
}

} // namespace

std::string task_name(Task t) {
    switch (t) {
        case Task::class15: return "class15";
        case Task::sector26: return "sector26";
        case Task::regression: return "regression";
    }
    throw DomainError("unknown task tag");
}

Task task_from_name(const std::string& name) {
    if (name == "class15") return Task::class15;
    if (name == "sector26") return Task::sector26;
    if (name == "regression") return Task::regression;
    throw DomainError("unknown task name: " + name);
}

LabelSpec LabelSpec::class15() {
    LabelSpec s;
    s.task = Task::class15;
    const int idx[6] = {-5, -3, -1, 1, 3, 5};
    for (int a = 0; a < 6; ++a)
        for (int b = a + 1; b < 6; ++b) s.class_list.emplace_back(idx[a], idx[b]);
    s.class_count = static_cast<std::uint16_t>(s.class_list.size());
    return s;
}

LabelSpec LabelSpec::sector26() {
    LabelSpec s;
    s.task = Task::sector26;
    s.class_count = kSectorCount;
    return s;
}

std::string label_name(const LabelSpec& spec, int label) {
    if (label < 0 || label >= spec.class_count) throw DomainError("label out of range");
    if (spec.task == Task::class15) {
        const auto& [a, b] = spec.class_list.at(static_cast<std::size_t>(label));
        return std::to_string(a) + ":" + std::to_string(b);
    }
    if (spec.task == Task::sector26) {
        std::string s = "s";
        if (label < 10) s += '0';
        return s + std::to_string(label);
    }
    return std::to_string(label);
}

void Dataset::validate() const {
    if (labels.size() != images.size() || angles.size() != images.size())
        throw ShapeError("dataset arrays have inconsistent lengths");
    for (const auto& img : images)
        if (img.resolution != provenance.grid.resolution)
            throw ShapeError("image resolution does not match dataset grid");
    if (label_spec.task != Task::regression)
        for (std::uint16_t l : labels)
            if (l >= label_spec.class_count) throw ShapeError("label out of range");
    if (label_spec.task == Task::class15 &&
        label_spec.class_list.size() != label_spec.class_count)
        throw ShapeError("class15 label spec must carry one (m1, m2) pair per class");
}

std::pair<Dataset, Dataset> generate_class15(int n_train, int n_val, const NoiseConfig& noise,
                                             const GridSpec& grid, std::uint64_t seed, int jobs) {
    const LabelSpec spec = LabelSpec::class15();
    return generate(spec, n_train, n_val, noise, grid, seed, jobs,
                    [&spec](std::uint16_t label, Rng& draw) {
                        const auto& [m1, m2] = spec.class_list[label];
                        const double phi = draw.uniform(0.0, 2.0 * std::numbers::pi);
                        return VVBState(m1, m2, std::numbers::pi / 2.0, phi);
                    });
}

std::pair<Dataset, Dataset> generate_sector26(int n_train, int n_val, const NoiseConfig& noise,
                                              const GridSpec& grid, std::uint64_t seed, int jobs) {
    return generate(LabelSpec::sector26(), n_train, n_val, noise, grid, seed, jobs,
                    [](std::uint16_t label, Rng& draw) {
                        const auto [theta, phi] = sector_sample(label, draw);
                        return VVBState(-1, 1, theta, phi);
                    });
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    ds.validate();
    ByteWriter w;
    w.bytes(kMagic, 4);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(ds.size()));
    w.u32(static_cast<std::uint32_t>(ds.provenance.grid.resolution));
    w.u32(kChannels);
    w.u8(static_cast<std::uint8_t>(ds.label_spec.task));
    w.u16(ds.label_spec.class_count);

    nlohmann::json prov;
    prov["provenance"] = ds.provenance;
    prov["label_spec"] = ds.label_spec;
    const std::string prov_str = prov.dump();
    w.u32(static_cast<std::uint32_t>(prov_str.size()));
    w.str(prov_str);

    for (std::size_t n = 0; n < ds.size(); ++n) {
        w.u16(ds.labels[n]);
        w.f64(ds.angles[n][0]);
        w.f64(ds.angles[n][1]);
        const StokesImage& img = ds.images[n];
        for (const auto* plane : {&img.s1, &img.s2, &img.s3, &img.intensity})
            for (float v : *plane) w.f32(v);
    }
    write_file_atomic(path, w.data());
}

Dataset load_dataset(const std::filesystem::path& path) {
    const auto buf = read_file(path);
    ByteReader r(buf);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw MagicMismatchError(path.string() + " is not a dataset file (bad magic)");
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw VersionMismatchError("dataset file " + path.string() + " has version " +
                                   std::to_string(version) + ", reader supports version " +
                                   std::to_string(kVersion));
    const std::uint32_t count = r.u32();
    const std::uint32_t resolution = r.u32();
    const std::uint32_t channels = r.u32();
    if (channels != kChannels)
        throw IoError("dataset file declares " + std::to_string(channels) +
                      " channels, expected " + std::to_string(kChannels));
    const std::uint8_t task_tag = r.u8();
    if (task_tag > 2) throw IoError("unknown task tag in dataset file");
    const std::uint16_t class_count = r.u16();

    const std::uint32_t prov_len = r.u32();
    nlohmann::json prov;
    try {
        prov = nlohmann::json::parse(r.str(prov_len));
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("dataset provenance block is not valid JSON: " + std::string(e.what()));
    }

    Dataset ds;
    ds.provenance = prov.at("provenance").get<Provenance>();
    ds.label_spec = prov.at("label_spec").get<LabelSpec>();
    if (ds.label_spec.task != static_cast<Task>(task_tag) ||
        ds.label_spec.class_count != class_count)
        throw IoError("dataset header and provenance block disagree on the label spec");
    if (ds.provenance.grid.resolution != static_cast<int>(resolution))
        throw IoError("dataset header and provenance block disagree on the resolution");

    ds.images.resize(count);
    ds.labels.resize(count);
    ds.angles.resize(count);
    for (std::uint32_t n = 0; n < count; ++n) {
        ds.labels[n] = r.u16();
        ds.angles[n][0] = r.f64();
        ds.angles[n][1] = r.f64();
        StokesImage img(static_cast<int>(resolution));
        for (auto* plane : {&img.s1, &img.s2, &img.s3, &img.intensity})
            for (float& v : *plane) v = r.f32();
        ds.images[n] = std::move(img);
    }
    if (!r.done()) throw IoError("dataset file has trailing bytes");
    ds.validate();
    return ds;
}

} // namespace vvb
