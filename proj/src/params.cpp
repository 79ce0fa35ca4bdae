#include "darvrp/params.hpp"

#include <cmath>
#include <cstring>

#include "darvrp/vrplib.hpp"  // read_file / write_file

namespace darvrp {

namespace {

constexpr char kMagic[8] = {'D', 'A', 'R', 'V', 'R', 'P', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void append_raw(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T read_raw(std::string_view bytes, std::size_t& off) {
    if (off + sizeof(T) > bytes.size()) throw ParseError("checkpoint: truncated file");
    T v;
    std::memcpy(&v, bytes.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

}  // namespace

Tensor& ParamStore::create(const std::string& name, std::size_t rows, std::size_t cols) {
    require(!contains(name), "ParamStore: duplicate parameter '" + name + "'");
    Entry e;
    e.value = Tensor(rows, cols);
    e.grad = Tensor(rows, cols);
    e.adam_m = Tensor(rows, cols);
    e.adam_v = Tensor(rows, cols);
    return entries_.emplace(name, std::move(e)).first->second.value;
}

const Tensor& ParamStore::value(const std::string& name) const {
    auto it = entries_.find(name);
    require(it != entries_.end(), "ParamStore: unknown parameter '" + name + "'");
    return it->second.value;
}

Tensor& ParamStore::value(const std::string& name) {
    auto it = entries_.find(name);
    require(it != entries_.end(), "ParamStore: unknown parameter '" + name + "'");
    return it->second.value;
}

Tensor& ParamStore::grad(const std::string& name) {
    auto it = entries_.find(name);
    require(it != entries_.end(), "ParamStore: unknown parameter '" + name + "'");
    return it->second.grad;
}

void ParamStore::zero_grads() {
    for (auto& [name, e] : entries_) e.grad.zero();
}

void ParamStore::accumulate_grads(const std::map<std::string, Tensor>& grads) {
    for (const auto& [name, g] : grads) {
        Tensor& dst = grad(name);
        require(dst.same_shape(g), "accumulate_grads: shape mismatch for '" + name + "'");
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
    }
}

void ParamStore::adam_step(const AdamConfig& cfg) {
    step_ += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_));
    for (auto& [name, e] : entries_) {
        for (std::size_t i = 0; i < e.value.size(); ++i) {
            const double g = e.grad[i];
            e.adam_m[i] = cfg.beta1 * e.adam_m[i] + (1.0 - cfg.beta1) * g;
            e.adam_v[i] = cfg.beta2 * e.adam_v[i] + (1.0 - cfg.beta2) * g * g;
            const double m_hat = e.adam_m[i] / bc1;
            const double v_hat = e.adam_v[i] / bc2;
            e.value[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
        }
        e.grad.zero();
    }
}

double ParamStore::grad_l2_norm() const {
    double acc = 0.0;
    for (const auto& [name, e] : entries_)
        for (std::size_t i = 0; i < e.grad.size(); ++i) acc += e.grad[i] * e.grad[i];
    return std::sqrt(acc);
}

std::size_t ParamStore::scalar_count() const {
    std::size_t acc = 0;
    for (const auto& [name, e] : entries_) acc += e.value.size();
    return acc;
}

std::vector<std::string> ParamStore::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [name, e] : entries_) out.push_back(name);
    return out;
}

std::string ParamStore::serialize(const std::string& meta_json) const {
    std::string out;
    out.append(kMagic, sizeof(kMagic));
    append_raw<std::uint32_t>(out, kVersion);
    append_raw<std::int64_t>(out, step_);
    append_raw<std::uint32_t>(out, static_cast<std::uint32_t>(meta_json.size()));
    out.append(meta_json);
    append_raw<std::uint64_t>(out, entries_.size());
    for (const auto& [name, e] : entries_) {
        append_raw<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out.append(name);
        append_raw<std::uint64_t>(out, e.value.rows());
        append_raw<std::uint64_t>(out, e.value.cols());
        out.append(reinterpret_cast<const char*>(e.value.data()),
                   e.value.size() * sizeof(double));
    }
    return out;
}

ParamStore ParamStore::deserialize(std::string_view bytes, std::string* meta_json_out) {
    std::size_t off = 0;
    if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
        throw ParseError("checkpoint: bad magic, not a darvrp checkpoint");
    off += sizeof(kMagic);
    const auto version = read_raw<std::uint32_t>(bytes, off);
    if (version != kVersion)
        throw UnsupportedFormat("checkpoint: format version " + std::to_string(version) +
                                " not supported (expected " + std::to_string(kVersion) + ")");
    ParamStore store;
    store.step_ = read_raw<std::int64_t>(bytes, off);
    const auto meta_len = read_raw<std::uint32_t>(bytes, off);
    if (off + meta_len > bytes.size()) throw ParseError("checkpoint: truncated metadata");
    if (meta_json_out) *meta_json_out = std::string(bytes.substr(off, meta_len));
    off += meta_len;
    const auto count = read_raw<std::uint64_t>(bytes, off);
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto name_len = read_raw<std::uint32_t>(bytes, off);
        if (off + name_len > bytes.size()) throw ParseError("checkpoint: truncated name");
        std::string name(bytes.substr(off, name_len));
        off += name_len;
        const auto rows = read_raw<std::uint64_t>(bytes, off);
        const auto cols = read_raw<std::uint64_t>(bytes, off);
        const std::size_t payload = static_cast<std::size_t>(rows * cols) * sizeof(double);
        if (off + payload > bytes.size()) throw ParseError("checkpoint: truncated payload");
        Tensor& t = store.create(name, static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
        std::memcpy(t.data(), bytes.data() + off, payload);
        off += payload;
    }
    return store;
}

void ParamStore::save(const std::string& path, const std::string& meta_json) const {
    write_file(path, serialize(meta_json));
}

ParamStore ParamStore::load(const std::string& path, std::string* meta_json_out) {
    return deserialize(read_file(path), meta_json_out);
}

}  // namespace darvrp
