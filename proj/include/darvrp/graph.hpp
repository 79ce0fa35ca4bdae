#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "darvrp/tensor.hpp"

namespace darvrp {

using NodeId = std::int32_t;

/// Boolean keep-mask. rows is either 1 (shared across query rows) or equal to
/// the number of query rows it gates.
struct Mask {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> keep;

    Mask() = default;
    Mask(std::size_t r, std::size_t c, std::uint8_t fill = 1) : rows(r), cols(c), keep(r * c, fill) {}
    bool at(std::size_t r, std::size_t c) const { return keep[(rows == 1 ? 0 : r) * cols + c] != 0; }
    void set(std::size_t r, std::size_t c, bool v) { keep[r * cols + c] = v ? 1 : 0; }
};

/// Reverse-mode tape over tensor-level operations. One Graph per forward
/// pass; no reuse across optimizer steps. In non-recording mode the same ops
/// run value-only, and rollback() frees step-local nodes so long greedy
/// rollouts stay memory-bounded.
class Graph {
public:
    explicit Graph(bool record = true) : record_(record) {}

    bool recording() const { return record_; }

    NodeId constant(Tensor t);
    /// Leaf tied to an externally owned parameter tensor. Repeated calls with
    /// the same name return the same node, so gradients accumulate.
    NodeId param(const std::string& name, const Tensor& value);

    NodeId matmul(NodeId a, NodeId b);
    /// a @ b^T * scale
    NodeId matmul_nt(NodeId a, NodeId b, double scale);
    /// x @ W + bias (bias broadcast over rows; pass kNone for no bias)
    NodeId linear(NodeId x, NodeId W, NodeId bias);
    NodeId add(NodeId a, NodeId b);
    NodeId scale(NodeId x, double c);
    NodeId relu(NodeId x);
    NodeId tanh_op(NodeId x);
    NodeId mean_rows(NodeId x);
    NodeId broadcast_rows(NodeId x, std::size_t m);
    NodeId concat_rows(NodeId a, NodeId b);
    NodeId concat_cols(std::span<const NodeId> parts);
    NodeId gather_rows(NodeId x, std::vector<int> idx);

    /// Scaled dot-product attention: softmax(q_h k_h^T / sqrt(d/heads)) v_h per
    /// head, heads concatenated. No projections; callers compose them.
    NodeId attention(NodeId q, NodeId k, NodeId v, int heads, const Mask* mask);

    /// Standard multi-head attention with input and output projections.
    NodeId multi_head_attention(NodeId q, NodeId k, NodeId v, NodeId wq, NodeId wk, NodeId wv,
                                NodeId wo, int heads, const Mask* mask);

    /// Per-feature normalization across rows with learned affine.
    NodeId instance_norm(NodeId x, NodeId gamma, NodeId beta, double eps = 1e-6);

    /// Stable masked softmax; masked entries are exactly 0. A fully masked row
    /// is a contract violation.
    NodeId softmax_masked(NodeId x, const Mask& mask);
    /// Stable masked log-softmax; masked entries are -inf.
    NodeId log_softmax_masked(NodeId x, const Mask& mask);

    /// C * tanh(x) on kept entries, -inf on masked ones.
    NodeId tanh_clip_masked(NodeId x, double clip, const Mask& mask);

    /// out[r] = x[r, cols[r]].  [m,n] -> [m,1]
    NodeId pick_per_row(NodeId x, std::vector<int> cols);

    /// sum_i w[i] * x[i] -> scalar. x must have one element per weight.
    NodeId weighted_sum(NodeId x, std::vector<double> weights);

    NodeId sum_all(NodeId x);

    const Tensor& value(NodeId id) const { return node_value(id); }
    double scalar_value(NodeId id) const;

    /// Reverse sweep from a scalar loss node. Each node is visited once;
    /// leaf gradients accumulate additively.
    void backward(NodeId loss);

    /// Gradient of a leaf/param/constant node after backward (zeros if the
    /// loss does not depend on it).
    Tensor grad_of(NodeId id) const;

    /// Adds scale * d(loss)/d(param) into out[name] for every named parameter,
    /// in sorted name order.
    void merge_param_grads(std::map<std::string, Tensor>& out, double scale = 1.0) const;

    std::size_t mark() const { return nodes_.size(); }
    /// Frees all nodes created after mark(). Value-only graphs.
    void rollback(std::size_t mark);

    std::size_t node_count() const { return nodes_.size(); }

    static constexpr NodeId kNone = -1;

private:
    struct Node {
        Tensor value;
        const Tensor* external = nullptr;  // set for param leaves
        Tensor grad;
        std::function<void(Graph&)> backprop;  // empty for leaves
        std::string param_name;
    };

    const Tensor& node_value(NodeId id) const {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        return n.external ? *n.external : n.value;
    }

    Tensor& grad_buf(NodeId id);
    bool has_grad(NodeId id) const;
    NodeId push(Tensor value, std::function<void(Graph&)> backprop);
    void check_id(NodeId id) const;

    std::vector<Node> nodes_;
    std::map<std::string, NodeId> param_ids_;
    bool record_ = true;
    bool backward_done_ = false;
};

}  // namespace darvrp
