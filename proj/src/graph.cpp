#include "darvrp/graph.hpp"

#include <cmath>
#include <limits>

namespace darvrp {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void Graph::check_id(NodeId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
        throw ContractViolation("graph: node id " + std::to_string(id) + " not on this tape");
}

NodeId Graph::push(Tensor value, std::function<void(Graph&)> backprop) {
    Node n;
    n.value = std::move(value);
    if (record_) n.backprop = std::move(backprop);
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

Tensor& Graph::grad_buf(NodeId id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.size() == 0) {
        const Tensor& v = node_value(id);
        n.grad = Tensor(v.rows(), v.cols());
    }
    return n.grad;
}

bool Graph::has_grad(NodeId id) const {
    return nodes_[static_cast<std::size_t>(id)].grad.size() != 0;
}

double Graph::scalar_value(NodeId id) const {
    check_id(id);
    const Tensor& v = node_value(id);
    require(v.size() == 1, "graph: node is not a scalar");
    return v[0];
}

NodeId Graph::constant(Tensor t) { return push(std::move(t), nullptr); }

NodeId Graph::param(const std::string& name, const Tensor& value) {
    auto it = param_ids_.find(name);
    if (it != param_ids_.end()) return it->second;
    Node n;
    n.external = &value;
    n.param_name = name;
    nodes_.push_back(std::move(n));
    const NodeId id = static_cast<NodeId>(nodes_.size() - 1);
    param_ids_[name] = id;
    return id;
}

NodeId Graph::matmul(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    Tensor out;
    darvrp::matmul(value(a), value(b), out);
    return push(std::move(out), [a, b, self = static_cast<NodeId>(nodes_.size())](Graph& g) {
        const Tensor& go = g.grad_buf(self);
        Tensor tmp;
        darvrp::matmul_nt(go, g.value(b), 1.0, tmp);
        Tensor& ga = g.grad_buf(a);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += tmp[i];
        darvrp::matmul_tn(g.value(a), go, tmp);
        Tensor& gb = g.grad_buf(b);
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += tmp[i];
    });
}

NodeId Graph::matmul_nt(NodeId a, NodeId b, double s) {
    check_id(a);
    check_id(b);
    Tensor out;
    darvrp::matmul_nt(value(a), value(b), s, out);
    return push(std::move(out), [a, b, s, self = static_cast<NodeId>(nodes_.size())](Graph& g) {
        const Tensor& go = g.grad_buf(self);
        Tensor tmp;
        darvrp::matmul(go, g.value(b), tmp);
        Tensor& ga = g.grad_buf(a);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += s * tmp[i];
        darvrp::matmul_tn(go, g.value(a), tmp);
        Tensor& gb = g.grad_buf(b);
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += s * tmp[i];
    });
}

NodeId Graph::linear(NodeId x, NodeId W, NodeId bias) {
    check_id(x);
    check_id(W);
    const Tensor& xv = value(x);
    const Tensor& wv = value(W);
    require(xv.cols() == wv.rows(), "linear: input width " + std::to_string(xv.cols()) +
                                        " does not match weight height " + std::to_string(wv.rows()));
    Tensor out;
    darvrp::matmul(xv, wv, out);
    if (bias != kNone) {
        check_id(bias);
        const Tensor& bv = value(bias);
        require(bv.size() == out.cols(), "linear: bias length does not match output width");
        for (std::size_t r = 0; r < out.rows(); ++r) {
            double* orow = out.row(r);
            for (std::size_t c = 0; c < out.cols(); ++c) orow[c] += bv[c];
        }
    }
    return push(std::move(out), [x, W, bias, self = static_cast<NodeId>(nodes_.size())](Graph& g) {
        const Tensor& go = g.grad_buf(self);
        Tensor tmp;
        darvrp::matmul_nt(go, g.value(W), 1.0, tmp);
        Tensor& gx = g.grad_buf(x);
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += tmp[i];
        darvrp::matmul_tn(g.value(x), go, tmp);
        Tensor& gw = g.grad_buf(W);
        for (std::size_t i = 0; i < gw.size(); ++i) gw[i] += tmp[i];
        if (bias != kNone) {
            Tensor& gb = g.grad_buf(bias);
            for (std::size_t r = 0; r < go.rows(); ++r) {
                const double* grow = go.row(r);
                for (std::size_t c = 0; c < go.cols(); ++c) gb[c] += grow[c];
            }
        }
    });
}

NodeId Graph::add(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    require(av.same_shape(bv), "add: shape mismatch");
    Tensor out = av;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
    return push(std::move(out), [a, b, self = static_cast<NodeId>(nodes_.size())](Graph& g) {
        const Tensor& go = g.grad_buf(self);
        Tensor& ga = g.grad_buf(a);
        Tensor& gb = g.grad_buf(b);
        for (std::size_t i = 0; i < go.size(); ++i) {
            ga[i] += go[i];
            gb[i] += go[i];
        }
    });
}

NodeId Graph::scale(NodeId x, double c) {
    check_id(x);
    Tensor out = value(x);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
    return push(std::move(out), [x, c, self = static_cast<NodeId>(nodes_.size())](Graph& g) {
        const Tensor& go = g.grad_buf(self);
        Tensor& gx = g.grad_buf(x);
        for (std::size_t i = 0; i < go.size(); ++i) gx[i] += c * go[i];
    });
}

NodeId Graph::relu(NodeId x) {
    check_id(x);
    Tensor out = value(x);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
    return push(std::move(out), [x, self = static_cast<NodeId>(nodes_.size())](Graph& g) {
        const Tensor& go = g.grad_buf(self);
        const Tensor& xv = g.value(x);
        Tensor& gx = g.grad_buf(x);
        for (std::size_t i = 0; i < go.size(); ++i)
            if (xv[i] > 0.0) gx[i] += go[i];
    });
}

NodeId Graph::tanh_op(NodeId x) {
    check_id(x);
    Tensor out = value(x);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
    return push(std::move(out), [x, self = static_cast<NodeId>(nodes_.size())](Graph& g) {
        const Tensor& go = g.grad_buf(self);
        const Tensor& t = g.value(self);
        Tensor& gx = g.grad_buf(x);
        for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i] * (1.0 - t[i] * t[i]);
    });
}

NodeId Graph::mean_rows(NodeId x) {
    check_id(x);
    const Tensor& xv = value(x);
    Tensor out(1, xv.cols());
    for (std::size_t r = 0; r < xv.rows(); ++r) {
        const double* row = xv.row(r);
        for (std::size_t c = 0; c < xv.cols(); ++c) out[c] += row[c];
    }
    const double inv = 1.0 / static_cast<double>(xv.rows());
    for (std::size_t c = 0; c < out.size(); ++c) out[c] *= inv;
    return push(std::move(out), [x, inv, self = static_cast<NodeId>(nodes_.size())](Graph& g) {
        const Tensor& go = g.grad_buf(self);
        Tensor& gx = g.grad_buf(x);
        for (std::size_t r = 0; r < gx.rows(); ++r) {
            double* grow = gx.row(r);
            for (std::size_t c = 0; c < gx.cols(); ++c) grow[c] += inv * go[c];
        }
    });
}

NodeId Graph::broadcast_rows(NodeId x, std::size_t m) {
    check_id(x);
    const Tensor& xv = value(x);
    require(xv.rows() == 1, "broadcast_rows: input must be a row vector");
    Tensor out(m, xv.cols());
    for (std::size_t r = 0; r < m; ++r)
        std::copy_n(xv.data(), xv.cols(), out.row(r));
    return push(std::move(out), [x, self = static_cast<NodeId>(nodes_.size())](Graph& g) {
        const Tensor& go = g.grad_buf(self);
        Tensor& gx = g.grad_buf(x);
        for (std::size_t r = 0; r < go.rows(); ++r) {
            const double* grow = go.row(r);
            for (std::size_t c = 0; c < go.cols(); ++c) gx[c] += grow[c];
        }
    });
}

NodeId Graph::concat_rows(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    require(av.cols() == bv.cols(), "concat_rows: column mismatch");
    Tensor out(av.rows() + bv.rows(), av.cols());
    std::copy_n(av.data(), av.size(), out.data());
    std::copy_n(bv.data(), bv.size(), out.data() + av.size());
    return push(std::move(out),
                [a, b, na = av.size(), self = static_cast<NodeId>(nodes_.size())](Graph& g) {
                    const Tensor& go = g.grad_buf(self);
                    Tensor& ga = g.grad_buf(a);
                    Tensor& gb = g.grad_buf(b);
                    for (std::size_t i = 0; i < na; ++i) ga[i] += go[i];
                    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += go[na + i];
                });
}

NodeId Graph::concat_cols(std::span<const NodeId> parts) {
    require(!parts.empty(), "concat_cols: no inputs");
    std::size_t rows = value(parts[0]).rows();
    std::size_t cols = 0;
    for (NodeId id : parts) {
        check_id(id);
        require(value(id).rows() == rows, "concat_cols: row mismatch");
        cols += value(id).cols();
    }
    Tensor out(rows, cols);
    std::size_t offset = 0;
    for (NodeId id : parts) {
        const Tensor& part = value(id);
        for (std::size_t r = 0; r < rows; ++r)
            std::copy_n(part.row(r), part.cols(), out.row(r) + offset);
        offset += part.cols();
    }
    std::vector<NodeId> ids(parts.begin(), parts.end());
    return push(std::move(out), [ids, self = static_cast<NodeId>(nodes_.size())](Graph& g) {
        const Tensor& go = g.grad_buf(self);
        std::size_t offset = 0;
        for (NodeId id : ids) {
            Tensor& gp = g.grad_buf(id);
            for (std::size_t r = 0; r < gp.rows(); ++r) {
                const double* grow = go.row(r) + offset;
                double* prow = gp.row(r);
                for (std::size_t c = 0; c < gp.cols(); ++c) prow[c] += grow[c];
            }
            offset += gp.cols();
        }
    });
}

NodeId Graph::gather_rows(NodeId x, std::vector<int> idx) {
    check_id(x);
    const Tensor& xv = value(x);
    Tensor out(idx.size(), xv.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        require(idx[r] >= 0 && static_cast<std::size_t>(idx[r]) < xv.rows(),
                "gather_rows: index out of range");
        std::copy_n(xv.row(static_cast<std::size_t>(idx[r])), xv.cols(), out.row(r));
    }
    return push(std::move(out),
                [x, idx = std::move(idx), self = static_cast<NodeId>(nodes_.size())](Graph& g) {
                    const Tensor& go = g.grad_buf(self);
                    Tensor& gx = g.grad_buf(x);
                    for (std::size_t r = 0; r < idx.size(); ++r) {
                        double* dst = gx.row(static_cast<std::size_t>(idx[r]));
                        const double* src = go.row(r);
                        for (std::size_t c = 0; c < go.cols(); ++c) dst[c] += src[c];
                    }
                });
}

NodeId Graph::attention(NodeId q, NodeId k, NodeId v, int heads, const Mask* mask) {
    check_id(q);
    check_id(k);
    check_id(v);
    const Tensor& qv = value(q);
    const Tensor& kv = value(k);
    const Tensor& vv = value(v);
    const std::size_t m = qv.rows(), n = kv.rows(), d = qv.cols();
    require(kv.cols() == d && vv.cols() == d && vv.rows() == n, "attention: shape mismatch");
    require(heads >= 1 && d % static_cast<std::size_t>(heads) == 0,
            "attention: width " + std::to_string(d) + " not divisible by " + std::to_string(heads) +
                " heads");
    if (mask) require((mask->rows == 1 || mask->rows == m) && mask->cols == n,
                      "attention: mask shape mismatch");
    const std::size_t dh = d / static_cast<std::size_t>(heads);
    const double sc = 1.0 / std::sqrt(static_cast<double>(dh));

    Tensor out(m, d);
    Tensor weights;  // [heads*m, n], only kept when recording
    if (record_) weights = Tensor(static_cast<std::size_t>(heads) * m, n);

    std::vector<double> scores(n);
    for (int h = 0; h < heads; ++h) {
        const std::size_t off = static_cast<std::size_t>(h) * dh;
        for (std::size_t i = 0; i < m; ++i) {
            const double* qrow = qv.row(i) + off;
            double best = kNegInf;
            for (std::size_t j = 0; j < n; ++j) {
                if (mask && !mask->at(i, j)) {
                    scores[j] = kNegInf;
                    continue;
                }
                const double* krow = kv.row(j) + off;
                double acc = 0.0;
                for (std::size_t c = 0; c < dh; ++c) acc += qrow[c] * krow[c];
                scores[j] = acc * sc;
                if (scores[j] > best) best = scores[j];
            }
            if (best == kNegInf)
                throw ContractViolation("attention: fully masked query row " + std::to_string(i));
            double z = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                scores[j] = scores[j] == kNegInf ? 0.0 : std::exp(scores[j] - best);
                z += scores[j];
            }
            const double inv_z = 1.0 / z;
            double* orow = out.row(i) + off;
            for (std::size_t j = 0; j < n; ++j) {
                const double w = scores[j] * inv_z;
                if (record_) weights.at(static_cast<std::size_t>(h) * m + i, j) = w;
                if (w == 0.0) continue;
                const double* vrow = vv.row(j) + off;
                for (std::size_t c = 0; c < dh; ++c) orow[c] += w * vrow[c];
            }
        }
    }

    return push(std::move(out), [q, k, v, heads, dh, sc, m, n, w = std::move(weights),
                                 self = static_cast<NodeId>(nodes_.size())](Graph& g) {
        const Tensor& go = g.grad_buf(self);
        const Tensor& qv = g.value(q);
        const Tensor& kv = g.value(k);
        const Tensor& vv = g.value(v);
        Tensor& gq = g.grad_buf(q);
        Tensor& gk = g.grad_buf(k);
        Tensor& gv = g.grad_buf(v);
        std::vector<double> gw(n), gs(n);
        for (int h = 0; h < heads; ++h) {
            const std::size_t off = static_cast<std::size_t>(h) * dh;
            for (std::size_t i = 0; i < m; ++i) {
                const double* grow = go.row(i) + off;
                const double* wrow = w.row(static_cast<std::size_t>(h) * m + i);
                // dL/dw and v accumulation
                double dot = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    if (wrow[j] == 0.0) {
                        gw[j] = 0.0;
                        continue;
                    }
                    const double* vrow = vv.row(j) + off;
                    double acc = 0.0;
                    for (std::size_t c = 0; c < dh; ++c) acc += grow[c] * vrow[c];
                    gw[j] = acc;
                    dot += acc * wrow[j];
                    double* gvrow = gv.row(j) + off;
                    for (std::size_t c = 0; c < dh; ++c) gvrow[c] += wrow[j] * grow[c];
                }
                // softmax backward, then into q and k
                const double* qrow = qv.row(i) + off;
                double* gqrow = gq.row(i) + off;
                for (std::size_t j = 0; j < n; ++j) {
                    if (wrow[j] == 0.0) continue;
                    gs[j] = wrow[j] * (gw[j] - dot) * sc;
                    const double* krow = kv.row(j) + off;
                    double* gkrow = gk.row(j) + off;
                    for (std::size_t c = 0; c < dh; ++c) {
                        gqrow[c] += gs[j] * krow[c];
                        gkrow[c] += gs[j] * qrow[c];
                    }
                }
            }
        }
    });
}

NodeId Graph::multi_head_attention(NodeId q, NodeId k, NodeId v, NodeId wq, NodeId wk, NodeId wv,
                                   NodeId wo, int heads, const Mask* mask) {
    return matmul(attention(matmul(q, wq), matmul(k, wk), matmul(v, wv), heads, mask), wo);
}

NodeId Graph::instance_norm(NodeId x, NodeId gamma, NodeId beta, double eps) {
    check_id(x);
    check_id(gamma);
    check_id(beta);
    const Tensor& xv = value(x);
    const std::size_t n = xv.rows(), d = xv.cols();
    const Tensor& gv = value(gamma);
    const Tensor& bv = value(beta);
    require(gv.size() == d && bv.size() == d, "instance_norm: affine size mismatch");

    Tensor xhat(n, d);
    Tensor inv_std(1, d);
    Tensor out(n, d);
    for (std::size_t c = 0; c < d; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += xv.at(r, c);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double dev = xv.at(r, c) - mean;
            var += dev * dev;
        }
        var /= static_cast<double>(n);
        const double istd = 1.0 / std::sqrt(var + eps);
        inv_std[c] = istd;
        for (std::size_t r = 0; r < n; ++r) {
            const double xh = (xv.at(r, c) - mean) * istd;
            xhat.at(r, c) = xh;
            out.at(r, c) = gv[c] * xh + bv[c];
        }
    }
    Tensor xhat_saved, istd_saved;
    if (record_) {
        xhat_saved = std::move(xhat);
        istd_saved = std::move(inv_std);
    }
    return push(std::move(out),
                [x, gamma, beta, n, d, xhat = std::move(xhat_saved), istd = std::move(istd_saved),
                 self = static_cast<NodeId>(nodes_.size())](Graph& g) {
                    const Tensor& go = g.grad_buf(self);
                    const Tensor& gv = g.value(gamma);
                    Tensor& gx = g.grad_buf(x);
                    Tensor& gg = g.grad_buf(gamma);
                    Tensor& gb = g.grad_buf(beta);
                    const double inv_n = 1.0 / static_cast<double>(n);
                    for (std::size_t c = 0; c < d; ++c) {
                        double sum_gxh = 0.0, sum_gxh_xh = 0.0;
                        for (std::size_t r = 0; r < n; ++r) {
                            const double gy = go.at(r, c);
                            gg[c] += gy * xhat.at(r, c);
                            gb[c] += gy;
                            const double gxh = gy * gv[c];
                            sum_gxh += gxh;
                            sum_gxh_xh += gxh * xhat.at(r, c);
                        }
                        for (std::size_t r = 0; r < n; ++r) {
                            const double gxh = go.at(r, c) * gv[c];
                            gx.at(r, c) += istd[c] * (gxh - inv_n * sum_gxh -
                                                      inv_n * xhat.at(r, c) * sum_gxh_xh);
                        }
                    }
                });
}

namespace {

// Shared forward for the two masked softmax flavors.
void masked_softmax_forward(const Tensor& xv, const Mask& mask, bool log_form, Tensor& out,
                            Tensor& probs) {
    const std::size_t m = xv.rows(), n = xv.cols();
    require((mask.rows == 1 || mask.rows == m) && mask.cols == n,
            "softmax: mask shape mismatch");
    out = Tensor(m, n);
    probs = Tensor(m, n);
    for (std::size_t r = 0; r < m; ++r) {
        const double* xrow = xv.row(r);
        double best = kNegInf;
        for (std::size_t c = 0; c < n; ++c)
            if (mask.at(r, c) && xrow[c] > best) best = xrow[c];
        if (best == kNegInf)
            throw ContractViolation("softmax: fully masked row " + std::to_string(r));
        double z = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            if (!mask.at(r, c)) continue;
            z += std::exp(xrow[c] - best);
        }
        const double log_z = std::log(z);
        for (std::size_t c = 0; c < n; ++c) {
            if (!mask.at(r, c)) {
                probs.at(r, c) = 0.0;
                out.at(r, c) = log_form ? kNegInf : 0.0;
                continue;
            }
            const double centered = xrow[c] - best;
            const double p = std::exp(centered) / z;
            probs.at(r, c) = p;
            out.at(r, c) = log_form ? centered - log_z : p;
        }
    }
}

}  // namespace

NodeId Graph::softmax_masked(NodeId x, const Mask& mask) {
    check_id(x);
    Tensor out, probs;
    masked_softmax_forward(value(x), mask, false, out, probs);
    return push(std::move(out), [x, self = static_cast<NodeId>(nodes_.size())](Graph& g) {
        const Tensor& go = g.grad_buf(self);
        const Tensor& p = g.value(self);
        Tensor& gx = g.grad_buf(x);
        for (std::size_t r = 0; r < p.rows(); ++r) {
            const double* prow = p.row(r);
            const double* grow = go.row(r);
            double dot = 0.0;
            for (std::size_t c = 0; c < p.cols(); ++c) dot += grow[c] * prow[c];
            double* gxrow = gx.row(r);
            for (std::size_t c = 0; c < p.cols(); ++c) gxrow[c] += prow[c] * (grow[c] - dot);
        }
    });
}

NodeId Graph::log_softmax_masked(NodeId x, const Mask& mask) {
    check_id(x);
    Tensor out, probs;
    masked_softmax_forward(value(x), mask, true, out, probs);
    Tensor probs_saved;
    if (record_) probs_saved = std::move(probs);
    return push(std::move(out), [x, p = std::move(probs_saved),
                                 self = static_cast<NodeId>(nodes_.size())](Graph& g) {
        const Tensor& go = g.grad_buf(self);
        Tensor& gx = g.grad_buf(x);
        for (std::size_t r = 0; r < p.rows(); ++r) {
            const double* prow = p.row(r);
            const double* grow = go.row(r);
            double gsum = 0.0;
            for (std::size_t c = 0; c < p.cols(); ++c)
                if (prow[c] > 0.0) gsum += grow[c];
            double* gxrow = gx.row(r);
            for (std::size_t c = 0; c < p.cols(); ++c)
                if (prow[c] > 0.0) gxrow[c] += grow[c] - prow[c] * gsum;
        }
    });
}

NodeId Graph::tanh_clip_masked(NodeId x, double clip, const Mask& mask) {
    check_id(x);
    const Tensor& xv = value(x);
    const std::size_t m = xv.rows(), n = xv.cols();
    require((mask.rows == 1 || mask.rows == m) && mask.cols == n,
            "tanh_clip: mask shape mismatch");
    require(clip > 0.0, "tanh_clip: clip constant must be positive");
    Tensor out(m, n);
    Tensor t(m, n);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            const double th = std::tanh(xv.at(r, c));
            t.at(r, c) = th;
            out.at(r, c) = mask.at(r, c) ? clip * th : kNegInf;
        }
    Tensor t_saved;
    Mask mask_saved;
    if (record_) {
        t_saved = std::move(t);
        mask_saved = mask;
    }
    return push(std::move(out), [x, clip, t = std::move(t_saved), mk = std::move(mask_saved),
                                 self = static_cast<NodeId>(nodes_.size())](Graph& g) {
        const Tensor& go = g.grad_buf(self);
        Tensor& gx = g.grad_buf(x);
        for (std::size_t r = 0; r < gx.rows(); ++r)
            for (std::size_t c = 0; c < gx.cols(); ++c) {
                if (!mk.at(r, c)) continue;
                const double th = t.at(r, c);
                gx.at(r, c) += go.at(r, c) * clip * (1.0 - th * th);
            }
    });
}

NodeId Graph::pick_per_row(NodeId x, std::vector<int> cols) {
    check_id(x);
    const Tensor& xv = value(x);
    require(cols.size() == xv.rows(), "pick_per_row: one column index per row required");
    Tensor out(cols.size(), 1);
    for (std::size_t r = 0; r < cols.size(); ++r) {
        require(cols[r] >= 0 && static_cast<std::size_t>(cols[r]) < xv.cols(),
                "pick_per_row: column out of range");
        out.at(r, 0) = xv.at(r, static_cast<std::size_t>(cols[r]));
    }
    return push(std::move(out),
                [x, cols = std::move(cols), self = static_cast<NodeId>(nodes_.size())](Graph& g) {
                    const Tensor& go = g.grad_buf(self);
                    Tensor& gx = g.grad_buf(x);
                    for (std::size_t r = 0; r < cols.size(); ++r)
                        gx.at(r, static_cast<std::size_t>(cols[r])) += go.at(r, 0);
                });
}

NodeId Graph::weighted_sum(NodeId x, std::vector<double> weights) {
    check_id(x);
    const Tensor& xv = value(x);
    require(weights.size() == xv.size(), "weighted_sum: weight count mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) acc += weights[i] * xv[i];
    return push(Tensor::scalar(acc),
                [x, ws = std::move(weights), self = static_cast<NodeId>(nodes_.size())](Graph& g) {
                    const double go = g.grad_buf(self)[0];
                    Tensor& gx = g.grad_buf(x);
                    for (std::size_t i = 0; i < ws.size(); ++i) gx[i] += go * ws[i];
                });
}

NodeId Graph::sum_all(NodeId x) {
    check_id(x);
    const Tensor& xv = value(x);
    double acc = 0.0;
    for (std::size_t i = 0; i < xv.size(); ++i) acc += xv[i];
    return push(Tensor::scalar(acc), [x, self = static_cast<NodeId>(nodes_.size())](Graph& g) {
        const double go = g.grad_buf(self)[0];
        Tensor& gx = g.grad_buf(x);
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go;
    });
}

void Graph::backward(NodeId loss) {
    check_id(loss);
    require(record_, "backward: graph was built in value-only mode");
    require(!backward_done_, "backward: tape already consumed");
    require(node_value(loss).size() == 1, "backward: loss must be scalar");
    backward_done_ = true;
    grad_buf(loss)[0] = 1.0;
    for (NodeId id = loss; id >= 0; --id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (n.grad.size() == 0 || !n.backprop) continue;
        n.backprop(*this);
    }
}

Tensor Graph::grad_of(NodeId id) const {
    check_id(id);
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.size() != 0) return n.grad;
    const Tensor& v = node_value(id);
    return Tensor(v.rows(), v.cols());
}

void Graph::merge_param_grads(std::map<std::string, Tensor>& out, double s) const {
    for (const auto& [name, id] : param_ids_) {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        if (n.grad.size() == 0) continue;
        auto it = out.find(name);
        if (it == out.end()) {
            Tensor g = n.grad;
            if (s != 1.0)
                for (std::size_t i = 0; i < g.size(); ++i) g[i] *= s;
            out.emplace(name, std::move(g));
        } else {
            Tensor& g = it->second;
            require(g.same_shape(n.grad), "merge_param_grads: shape drift for " + name);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * n.grad[i];
        }
    }
}

void Graph::rollback(std::size_t mark) {
    require(!record_, "rollback: only value-only graphs can be truncated");
    require(mark <= nodes_.size(), "rollback: bad mark");
    for (auto it = param_ids_.begin(); it != param_ids_.end();) {
        if (static_cast<std::size_t>(it->second) >= mark)
            it = param_ids_.erase(it);
        else
            ++it;
    }
    nodes_.resize(mark);
}

}  // namespace darvrp
