#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "vvb/grid.hpp"
#include "vvb/noise.hpp"
#include "vvb/stokes.hpp"

namespace vvb {

enum class Task : std::uint8_t { class15 = 0, sector26 = 1, regression = 2 };

std::string task_name(Task t);
Task task_from_name(const std::string& name);

/// Label semantics for one dataset / model pair.
struct LabelSpec {
    Task task = Task::class15;
    std::uint16_t class_count = 0;
    /// class15 only: the (m1, m2) pair realised by each class label.
    std::vector<std::pair<int, int>> class_list;

    /// The 15 unordered index pairs drawn from {-5,-3,-1,1,3,5}, stored as
    /// (min, max) and sorted lexicographically.
    static LabelSpec class15();
    /// 26 labels, one per sphere sector.
    static LabelSpec sector26();

    bool operator==(const LabelSpec&) const = default;
};

/// Human-readable class name, used in CSV headers ("-5:-3", "s07", ...).
std::string label_name(const LabelSpec& spec, int label);

/// Everything needed to regenerate a dataset from scratch.
struct Provenance {
    GridSpec grid;
    NoiseConfig noise;
    std::uint64_t seed = 0; ///< seed for the state draws (angles); noise.seed covers perturbations
    std::uint32_t per_class = 0;
    std::string split; ///< "train", "val" or ""

    bool operator==(const Provenance&) const = default;
};

struct Dataset {
    LabelSpec label_spec;
    Provenance provenance;
    std::vector<StokesImage> images;
    std::vector<std::uint16_t> labels;
    std::vector<std::array<double, 2>> angles; ///< ground-truth (theta, phi) per image

    std::size_t size() const { return images.size(); }
    int resolution() const { return provenance.grid.resolution; }
    /// Checks the parallel arrays line up and labels are in range.
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

/// Superposition-index classification set: theta = pi/2, phi uniform in
/// [0, 2*pi), one class per (m1, m2) pair. Returns {train, val}; the val
/// split uses fresh sample indices so the two never share a random stream.
std::pair<Dataset, Dataset> generate_class15(int n_train_per_class, int n_val_per_class,
                                             const NoiseConfig& noise, const GridSpec& grid,
                                             std::uint64_t seed, int jobs = 1);

/// Sphere-sector classification set for the m = (-1, 1) beam family; states
/// are drawn uniformly w.r.t. solid angle inside each sector.
std::pair<Dataset, Dataset> generate_sector26(int n_train_per_class, int n_val_per_class,
                                              const NoiseConfig& noise, const GridSpec& grid,
                                              std::uint64_t seed, int jobs = 1);

/// Binary dataset file (magic "VVBD", version 1, little-endian). Loading a
/// saved dataset reproduces it bit for bit, including provenance.
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

} // namespace vvb
