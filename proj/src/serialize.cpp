#include "vvb/serialize.hpp"

#include <cstring>
#include <map>

#include "vvb/bytes.hpp"
#include "vvb/errors.hpp"
#include "vvb/json_codec.hpp"

namespace vvb {

namespace {

constexpr char kMagic[4] = {'V', 'V', 'B', 'M'};
constexpr std::uint32_t kVersion = 1;

struct Tensor {
    std::vector<std::uint32_t> dims;
    std::vector<double> data;

    std::size_t numel() const {
        std::size_t n = 1;
        for (auto d : dims) n *= d;
        return n;
    }
};

void write_tensor(ByteWriter& w, const std::string& name, const Tensor& t) {
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.str(name);
    w.u32(static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) w.u32(d);
    for (double v : t.data) w.f64(v);
}

struct ModelFile {
    ModelKind kind;
    nlohmann::json meta;
    std::map<std::string, Tensor> tensors;
};

void save_model_file(const ModelFile& mf, const std::filesystem::path& path) {
    ByteWriter w;
    w.bytes(kMagic, 4);
    w.u32(kVersion);
    w.u8(static_cast<std::uint8_t>(mf.kind));
    const std::string meta = mf.meta.dump();
    w.u32(static_cast<std::uint32_t>(meta.size()));
    w.str(meta);
    w.u32(static_cast<std::uint32_t>(mf.tensors.size()));
    for (const auto& [name, t] : mf.tensors) write_tensor(w, name, t);
    write_file_atomic(path, w.data());
}

ModelFile load_model_file(const std::filesystem::path& path) {
    const auto buf = read_file(path);
    ByteReader r(buf);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw MagicMismatchError(path.string() + " is not a model file (bad magic)");
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw VersionMismatchError("model file " + path.string() + " has version " +
                                   std::to_string(version) + ", reader supports version " +
                                   std::to_string(kVersion));
    const std::uint8_t kind = r.u8();
    if (kind > 2) throw IoError("unknown model kind tag in " + path.string());

    ModelFile mf;
    mf.kind = static_cast<ModelKind>(kind);
    const std::uint32_t meta_len = r.u32();
    try {
        mf.meta = nlohmann::json::parse(r.str(meta_len));
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("model metadata block is not valid JSON: " + std::string(e.what()));
    }
    const std::uint32_t n_tensors = r.u32();
    for (std::uint32_t i = 0; i < n_tensors; ++i) {
        const std::uint16_t name_len = r.u16();
        const std::string name = r.str(name_len);
        Tensor t;
        t.dims.resize(r.u32());
        for (auto& d : t.dims) d = r.u32();
        t.data.resize(t.numel());
        for (double& v : t.data) v = r.f64();
        mf.tensors[name] = std::move(t);
    }
    if (!r.done()) throw IoError("model file has trailing bytes");
    return mf;
}

const Tensor& need_tensor(const ModelFile& mf, const std::string& name,
                          std::initializer_list<std::uint32_t> dims) {
    const auto it = mf.tensors.find(name);
    if (it == mf.tensors.end()) throw IoError("model file lacks tensor " + name);
    const Tensor& t = it->second;
    if (!std::equal(dims.begin(), dims.end(), t.dims.begin(), t.dims.end()))
        throw ShapeError("tensor " + name + " has an unexpected shape");
    return t;
}

Tensor from_vector(const Eigen::VectorXd& v) {
    Tensor t;
    t.dims = {static_cast<std::uint32_t>(v.size())};
    t.data.assign(v.data(), v.data() + v.size());
    return t;
}

Tensor from_matrix(const Eigen::MatrixXd& m) {
    Tensor t;
    t.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
    t.data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) t.data.push_back(m(r, c));
    return t;
}

Eigen::VectorXd to_vector(const Tensor& t) {
    return Eigen::Map<const Eigen::VectorXd>(t.data.data(),
                                             static_cast<Eigen::Index>(t.data.size()));
}

Eigen::MatrixXd to_matrix(const Tensor& t) {
    if (t.dims.size() != 2) throw ShapeError("expected a rank-2 tensor");
    Eigen::MatrixXd m(t.dims[0], t.dims[1]);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = t.data[k++];
    return m;
}

void put_pca_tensors(ModelFile& mf, const PCAModel& m, const std::string& prefix) {
    mf.tensors[prefix + "mean"] = from_vector(m.mean);
    mf.tensors[prefix + "components"] = from_matrix(m.components);
    mf.tensors[prefix + "explained_variance"] = from_vector(m.explained_variance);
    Tensor tv;
    tv.dims = {1};
    tv.data = {m.total_variance};
    mf.tensors[prefix + "total_variance"] = tv;
}

PCAModel get_pca_tensors(const ModelFile& mf, const std::string& prefix, int resolution) {
    PCAModel m;
    const auto it = mf.tensors.find(prefix + "components");
    if (it == mf.tensors.end()) throw IoError("model file lacks tensor " + prefix + "components");
    if (it->second.dims.size() != 2) throw ShapeError("PCA components must be rank 2");
    const std::uint32_t nc = it->second.dims[0];
    const std::uint32_t d = it->second.dims[1];
    m.components = to_matrix(it->second);
    m.mean = to_vector(need_tensor(mf, prefix + "mean", {d}));
    m.explained_variance = to_vector(need_tensor(mf, prefix + "explained_variance", {nc}));
    m.total_variance = need_tensor(mf, prefix + "total_variance", {1}).data[0];
    m.resolution = resolution;
    return m;
}

} // namespace

ModelKind peek_model_kind(const std::filesystem::path& path) {
    const auto buf = read_file(path);
    ByteReader r(buf);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw MagicMismatchError(path.string() + " is not a model file (bad magic)");
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw VersionMismatchError("model file " + path.string() + " has version " +
                                   std::to_string(version) + ", reader supports version " +
                                   std::to_string(kVersion));
    const std::uint8_t kind = r.u8();
    if (kind > 2) throw IoError("unknown model kind tag in " + path.string());
    return static_cast<ModelKind>(kind);
}

void save_pca_model(const PCAModel& m, const std::filesystem::path& path) {
    ModelFile mf;
    mf.kind = ModelKind::pca;
    mf.meta = {{"resolution", m.resolution}};
    put_pca_tensors(mf, m, "");
    save_model_file(mf, path);
}

PCAModel load_pca_model(const std::filesystem::path& path) {
    const ModelFile mf = load_model_file(path);
    if (mf.kind != ModelKind::pca)
        throw IoError(path.string() + " does not hold a PCA model");
    return get_pca_tensors(mf, "", mf.meta.at("resolution").get<int>());
}

void save_svm_pipeline(const SVMPipeline& m, const std::filesystem::path& path) {
    ModelFile mf;
    mf.kind = ModelKind::svm;
    mf.meta = {{"resolution", m.pca.resolution},
               {"label_spec", m.svm.label_spec},
               {"lambda", m.svm.lambda},
               {"epochs", m.svm.epochs},
               {"seed", m.svm.seed}};
    put_pca_tensors(mf, m.pca, "pca_");
    mf.tensors["weights"] = from_matrix(m.svm.weights);
    mf.tensors["biases"] = from_vector(m.svm.biases);
    save_model_file(mf, path);
}

SVMPipeline load_svm_pipeline(const std::filesystem::path& path) {
    const ModelFile mf = load_model_file(path);
    if (mf.kind != ModelKind::svm)
        throw IoError(path.string() + " does not hold an SVM model");
    SVMPipeline p;
    p.pca = get_pca_tensors(mf, "pca_", mf.meta.at("resolution").get<int>());
    p.svm.label_spec = mf.meta.at("label_spec").get<LabelSpec>();
    p.svm.lambda = mf.meta.at("lambda").get<double>();
    p.svm.epochs = mf.meta.at("epochs").get<int>();
    p.svm.seed = mf.meta.at("seed").get<std::uint64_t>();
    const auto it = mf.tensors.find("weights");
    if (it == mf.tensors.end()) throw IoError("model file lacks tensor weights");
    p.svm.weights = to_matrix(it->second);
    p.svm.biases = to_vector(
        need_tensor(mf, "biases", {static_cast<std::uint32_t>(p.svm.weights.rows())}));
    if (p.svm.weights.rows() != p.svm.label_spec.class_count)
        throw ShapeError("SVM weight rows do not match the label spec");
    if (p.svm.weights.cols() != p.pca.n_components())
        throw ShapeError("SVM feature width does not match the PCA component count");
    return p;
}

void save_cnn_bundle(const CNNBundle& b, const std::filesystem::path& path) {
    ModelFile mf;
    mf.kind = ModelKind::cnn;
    mf.meta = {{"resolution", b.model.resolution},
               {"classes", b.model.classes},
               {"seed", b.model.seed},
               {"label_spec", b.label_spec}};
    const auto params = b.model.param_tensors();
    const auto names = CNNModel::param_names();
    const int q = b.model.resolution / 4;
    const std::vector<std::vector<std::uint32_t>> dims = {
        {8, 3, 3, 3},
        {8},
        {16, 8, 3, 3},
        {16},
        {64, static_cast<std::uint32_t>(16 * q * q)},
        {64},
        {static_cast<std::uint32_t>(b.model.classes), 64},
        {static_cast<std::uint32_t>(b.model.classes)}};
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor t;
        t.dims = dims[i];
        t.data = *params[i];
        if (t.numel() != t.data.size()) throw ShapeError("CNN tensor size mismatch on save");
        mf.tensors[names[i]] = std::move(t);
    }
    save_model_file(mf, path);
}

CNNBundle load_cnn_bundle(const std::filesystem::path& path) {
    const ModelFile mf = load_model_file(path);
    if (mf.kind != ModelKind::cnn)
        throw IoError(path.string() + " does not hold a CNN model");
    CNNBundle b;
    b.label_spec = mf.meta.at("label_spec").get<LabelSpec>();
    const int resolution = mf.meta.at("resolution").get<int>();
    const int classes = mf.meta.at("classes").get<int>();
    b.model = CNNModel::create(resolution, classes, mf.meta.at("seed").get<std::uint64_t>());
    const auto params = b.model.param_tensors();
    const auto names = CNNModel::param_names();
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto it = mf.tensors.find(names[i]);
        if (it == mf.tensors.end())
            throw IoError("model file lacks tensor " + std::string(names[i]));
        if (it->second.data.size() != params[i]->size())
            throw ShapeError("tensor " + std::string(names[i]) + " has an unexpected shape");
        *params[i] = it->second.data;
    }
    return b;
}

} // namespace vvb
