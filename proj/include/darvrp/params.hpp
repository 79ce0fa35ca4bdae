#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "darvrp/tensor.hpp"

namespace darvrp {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Named parameter tensors with matching gradient buffers and Adam state.
/// Iteration is always in sorted name order, which keeps accumulation,
/// updates and serialization deterministic.
class ParamStore {
public:
    Tensor& create(const std::string& name, std::size_t rows, std::size_t cols);
    bool contains(const std::string& name) const { return entries_.count(name) != 0; }

    const Tensor& value(const std::string& name) const;
    Tensor& value(const std::string& name);
    Tensor& grad(const std::string& name);

    void zero_grads();
    void accumulate_grads(const std::map<std::string, Tensor>& grads);

    /// Standard Adam step over every parameter; increments the step counter
    /// and zeroes the gradients afterwards.
    void adam_step(const AdamConfig& cfg);

    std::int64_t step() const { return step_; }
    void set_step(std::int64_t s) { step_ = s; }

    double grad_l2_norm() const;
    std::size_t size() const { return entries_.size(); }
    std::size_t scalar_count() const;

    std::vector<std::string> names() const;

    /// Versioned binary container: magic, version, a JSON metadata blob, then
    /// (name, rows, cols, float64 payload) records in sorted name order.
    /// Layout is documented in docs/formats.md.
    std::string serialize(const std::string& meta_json = "{}") const;
    static ParamStore deserialize(std::string_view bytes, std::string* meta_json_out = nullptr);

    void save(const std::string& path, const std::string& meta_json = "{}") const;
    static ParamStore load(const std::string& path, std::string* meta_json_out = nullptr);

private:
    struct Entry {
        Tensor value;
        Tensor grad;
        Tensor adam_m;
        Tensor adam_v;
    };
    std::map<std::string, Entry> entries_;
    std::int64_t step_ = 0;
};

}  // namespace darvrp
