#pragma once

#include <cmath>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "roadcast/tensor.hpp"
#include "roadcast/threadpool.hpp"

namespace roadcast::te {

using NodeId = int;

enum class Activation { Sigmoid, Tanh };

// C[M x N] += A[M x K] * B[K x N], row-major. The j-inner loop vectorizes.
template <typename T>
inline void gemm_acc(const T* a, const T* b, T* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const T* arow = a + static_cast<std::int64_t>(i) * k;
        T* crow = c + static_cast<std::int64_t>(i) * n;
        for (int kk = 0; kk < k; ++kk) {
            const T av = arow[kk];
            const T* brow = b + static_cast<std::int64_t>(kk) * n;
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

template <typename T>
class Graph;

template <typename T>
struct Node {
    virtual ~Node() = default;
    virtual void forward(Graph<T>& g) = 0;
    virtual void backward(Graph<T>& g) = 0;
    virtual const char* op_name() const = 0;
    /// Persistent state beyond trainable parameters (e.g. BN running stats).
    virtual void collect_state(std::vector<std::pair<std::string, Tensor<T>*>>&) {}

    Tensor<T> value;
    Tensor<T> grad;
    std::vector<NodeId> inputs;
    std::string name;
    bool trainable = false;
};

/// Reference to one trainable tensor, for optimizers and checkpoints.
template <typename T>
struct ParamRef {
    std::string name;
    Tensor<T>* value;
    Tensor<T>* grad;
};

/// Define-once, run-many computation graph with reverse-mode differentiation.
/// Nodes execute in creation order; inputs are set between runs. All ops are
/// deterministic for fixed inputs regardless of the worker-thread count.
template <typename T>
class Graph {
public:
    Node<T>& node(NodeId id) { return *nodes_[static_cast<std::size_t>(id)]; }
    const Node<T>& node(NodeId id) const { return *nodes_[static_cast<std::size_t>(id)]; }
    Tensor<T>& value(NodeId id) { return node(id).value; }
    Tensor<T>& grad(NodeId id) { return node(id).grad; }
    int node_count() const { return static_cast<int>(nodes_.size()); }

    bool training = true;
    bool check_finite = true;

    NodeId input(const std::string& name);
    NodeId param(const std::string& name, std::vector<int> shape);

    NodeId conv2d(NodeId x, NodeId w, NodeId b);
    NodeId maxpool2(NodeId x);
    NodeId batchnorm(NodeId x, NodeId gamma, NodeId beta, const std::string& name, int channels,
                     T eps = T(1e-3), T momentum = T(0.99));
    NodeId dense(NodeId x, NodeId w, NodeId b);
    NodeId relu(NodeId x);
    NodeId sigmoid(NodeId x);
    NodeId flatten(NodeId x);
    NodeId concat(NodeId a, NodeId b);
    NodeId lstm(NodeId x, NodeId wx, NodeId wh, NodeId b, int units, bool return_sequences,
                Activation inner_act = Activation::Sigmoid);
    /// Per-sample weighted binary cross entropy; y is an input of shape [B].
    NodeId weighted_bce(NodeId p, NodeId y, T w0, T w1);
    NodeId mean(NodeId x);
    NodeId l2_penalty(NodeId x, T lambda);
    NodeId add(NodeId a, NodeId b);

    void forward();
    /// Exact reverse-mode gradients of a scalar root into every node's grad.
    void backward(NodeId root);

    std::vector<ParamRef<T>> params();
    /// All persistent tensors in creation order (params first per node).
    std::vector<std::pair<std::string, Tensor<T>*>> state();

private:
    template <typename NodeT, typename... Args>
    NodeId make(std::vector<NodeId> ins, Args&&... args) {
        auto n = std::make_unique<NodeT>(std::forward<Args>(args)...);
        n->inputs = std::move(ins);
        nodes_.push_back(std::move(n));
        return static_cast<NodeId>(nodes_.size() - 1);
    }

    void assert_finite(NodeId id);

    std::vector<std::unique_ptr<Node<T>>> nodes_;
    std::vector<NodeId> params_;
};

// ----------------------------------------------------------------- leaves --

template <typename T>
struct InputNode : Node<T> {
    void forward(Graph<T>&) override {}
    void backward(Graph<T>&) override {}
    const char* op_name() const override { return "input"; }
};

template <typename T>
struct ParamNode : Node<T> {
    void forward(Graph<T>&) override {}
    void backward(Graph<T>&) override {}
    const char* op_name() const override { return "param"; }
    void collect_state(std::vector<std::pair<std::string, Tensor<T>*>>& out) override {
        out.push_back({this->name, &this->value});
    }
};

// ------------------------------------------------------------------- conv --

/// 3x3 stride-1 convolution with "same" zero padding, cross-correlation
/// convention. Kernel shape [3,3,C,K]; input [B,H,W,C]; output [B,H,W,K].
/// Work parallelizes per sample; weight gradients are first written to
/// per-sample slots and then reduced in sample order, so results do not
/// depend on the thread count.
template <typename T>
struct Conv2dNode : Node<T> {
    const char* op_name() const override { return "conv2d"; }

    static void im2col(const T* x, int h, int w, int c, T* col) {
        const int kc = 9 * c;
        for (int y = 0; y < h; ++y) {
            for (int xx = 0; xx < w; ++xx) {
                T* dst = col + (static_cast<std::int64_t>(y) * w + xx) * kc;
                for (int dy = 0; dy < 3; ++dy) {
                    const int sy = y + dy - 1;
                    for (int dx = 0; dx < 3; ++dx) {
                        const int sx = xx + dx - 1;
                        T* cell = dst + (dy * 3 + dx) * c;
                        if (sy < 0 || sy >= h || sx < 0 || sx >= w) {
                            for (int ch = 0; ch < c; ++ch) cell[ch] = T(0);
                        } else {
                            const T* src = x + (static_cast<std::int64_t>(sy) * w + sx) * c;
                            for (int ch = 0; ch < c; ++ch) cell[ch] = src[ch];
                        }
                    }
                }
            }
        }
    }

    void forward(Graph<T>& g) override {
        const auto& x = g.value(this->inputs[0]);
        const auto& kern = g.value(this->inputs[1]);
        const auto& bias = g.value(this->inputs[2]);
        if (x.rank() != 4) throw std::invalid_argument("conv2d expects [B,H,W,C]");
        const int b = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
        if (kern.rank() != 4 || kern.dim(0) != 3 || kern.dim(1) != 3 || kern.dim(2) != c)
            throw std::invalid_argument("conv2d kernel/channel mismatch: input " + x.shape_str() +
                                        " kernel " + kern.shape_str());
        const int k = kern.dim(3);
        if (bias.size() != k) throw std::invalid_argument("conv2d bias size mismatch");
        this->value.ensure_shape({b, h, w, k});

        const std::int64_t hw = static_cast<std::int64_t>(h) * w;
        const int kc = 9 * c;
        const T* kd = kern.data();
        const T* bd = bias.data();
        T* out = this->value.data();
        const T* in = x.data();
        threads::parallel_for(static_cast<std::size_t>(b), [&](std::size_t s) {
            thread_local std::vector<T> col;
            col.resize(static_cast<std::size_t>(hw) * kc);
            im2col(in + s * hw * c, h, w, c, col.data());
            T* o = out + s * hw * k;
            for (std::int64_t i = 0; i < hw; ++i)
                for (int j = 0; j < k; ++j) o[i * k + j] = bd[j];
            gemm_acc(col.data(), kd, o, static_cast<int>(hw), kc, k);
        });
    }

    void backward(Graph<T>& g) override {
        const auto& x = g.value(this->inputs[0]);
        const auto& kern = g.value(this->inputs[1]);
        const int b = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
        const int k = kern.dim(3);
        const std::int64_t hw = static_cast<std::int64_t>(h) * w;
        const int kc = 9 * c;

        auto& dx = g.grad(this->inputs[0]);
        auto& dw = g.grad(this->inputs[1]);
        auto& db = g.grad(this->inputs[2]);
        const T* dy = this->grad.data();
        const T* kd = kern.data();
        const T* in = x.data();

        // kernel transpose once: [K x 9C]
        kt_.resize(static_cast<std::size_t>(k) * kc);
        for (int i = 0; i < kc; ++i)
            for (int j = 0; j < k; ++j) kt_[static_cast<std::size_t>(j) * kc + i] = kd[i * k + j];

        dw_slots_.assign(static_cast<std::size_t>(b) * kc * k, T(0));
        db_slots_.assign(static_cast<std::size_t>(b) * k, T(0));
        T* dxp = dx.data();
        threads::parallel_for(static_cast<std::size_t>(b), [&](std::size_t s) {
            thread_local std::vector<T> col, dcol;
            col.resize(static_cast<std::size_t>(hw) * kc);
            dcol.assign(static_cast<std::size_t>(hw) * kc, T(0));
            im2col(in + s * hw * c, h, w, c, col.data());
            const T* dys = dy + s * hw * k;

            // dW_s = col^T * dY_s       (loop form keeps col accesses linear)
            T* dws = dw_slots_.data() + s * kc * k;
            for (std::int64_t i = 0; i < hw; ++i) {
                const T* crow = col.data() + i * kc;
                const T* drow = dys + i * k;
                for (int kk = 0; kk < kc; ++kk) {
                    const T cv = crow[kk];
                    if (cv == T(0)) continue;
                    T* wrow = dws + static_cast<std::int64_t>(kk) * k;
                    for (int j = 0; j < k; ++j) wrow[j] += cv * drow[j];
                }
            }
            T* dbs = db_slots_.data() + s * k;
            for (std::int64_t i = 0; i < hw; ++i)
                for (int j = 0; j < k; ++j) dbs[j] += dys[i * k + j];

            // dcol = dY_s * K^T, then scatter back
            gemm_acc(dys, kt_.data(), dcol.data(), static_cast<int>(hw), k, kc);
            T* dxs = dxp + s * hw * c;
            for (int y = 0; y < h; ++y) {
                for (int xx = 0; xx < w; ++xx) {
                    const T* src = dcol.data() + (static_cast<std::int64_t>(y) * w + xx) * kc;
                    for (int dy2 = 0; dy2 < 3; ++dy2) {
                        const int sy = y + dy2 - 1;
                        if (sy < 0 || sy >= h) continue;
                        for (int dx2 = 0; dx2 < 3; ++dx2) {
                            const int sx = xx + dx2 - 1;
                            if (sx < 0 || sx >= w) continue;
                            T* dst = dxs + (static_cast<std::int64_t>(sy) * w + sx) * c;
                            const T* cell = src + (dy2 * 3 + dx2) * c;
                            for (int ch = 0; ch < c; ++ch) dst[ch] += cell[ch];
                        }
                    }
                }
            }
        });
        // ordered reduction keeps gradients bit-identical for any thread count
        for (int s = 0; s < b; ++s) {
            const T* dws = dw_slots_.data() + static_cast<std::size_t>(s) * kc * k;
            for (std::int64_t i = 0; i < static_cast<std::int64_t>(kc) * k; ++i) dw[i] += dws[i];
            const T* dbs = db_slots_.data() + static_cast<std::size_t>(s) * k;
            for (int j = 0; j < k; ++j) db[j] += dbs[j];
        }
    }

    std::vector<T> kt_, dw_slots_, db_slots_;
};

// ------------------------------------------------------------------- pool --

template <typename T>
struct MaxPool2Node : Node<T> {
    const char* op_name() const override { return "maxpool2"; }

    void forward(Graph<T>& g) override {
        const auto& x = g.value(this->inputs[0]);
        if (x.rank() != 4) throw std::invalid_argument("maxpool2 expects [B,H,W,C]");
        const int b = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
        if (h % 2 || w % 2) throw std::invalid_argument("maxpool2 needs even H and W");
        const int oh = h / 2, ow = w / 2;
        this->value.ensure_shape({b, oh, ow, c});
        argmax_.resize(this->value.size());
        const T* in = x.data();
        T* out = this->value.data();
        std::int64_t oi = 0;
        for (int s = 0; s < b; ++s) {
            const T* xs = in + static_cast<std::int64_t>(s) * h * w * c;
            for (int y = 0; y < oh; ++y) {
                for (int xx = 0; xx < ow; ++xx) {
                    for (int ch = 0; ch < c; ++ch, ++oi) {
                        std::int64_t best_off = (static_cast<std::int64_t>(2 * y) * w + 2 * xx) * c + ch;
                        T best = xs[best_off];
                        for (int dy = 0; dy < 2; ++dy) {
                            for (int dx = 0; dx < 2; ++dx) {
                                const std::int64_t off =
                                    (static_cast<std::int64_t>(2 * y + dy) * w + 2 * xx + dx) * c + ch;
                                if (xs[off] > best) {
                                    best = xs[off];
                                    best_off = off;
                                }
                            }
                        }
                        out[oi] = best;
                        argmax_[static_cast<std::size_t>(oi)] =
                            static_cast<std::int64_t>(s) * h * w * c + best_off;
                    }
                }
            }
        }
    }

    void backward(Graph<T>& g) override {
        auto& dx = g.grad(this->inputs[0]);
        const T* dy = this->grad.data();
        for (std::int64_t i = 0; i < this->value.size(); ++i)
            dx[argmax_[static_cast<std::size_t>(i)]] += dy[i];
    }

    std::vector<std::int64_t> argmax_;
};

// -------------------------------------------------------------- batchnorm --

/// Per-channel batch normalization over every axis except the last. Training
/// mode uses batch statistics (population variance) and updates running
/// stats; inference mode uses the running stats.
template <typename T>
struct BatchNormNode : Node<T> {
    BatchNormNode(std::string state_name, int channels, T eps, T momentum)
        : state_name_(std::move(state_name)), eps_(eps), momentum_(momentum) {
        running_mean_.reshape({channels});
        running_var_.reshape({channels});
        running_var_.fill(T(1));
    }

    const char* op_name() const override { return "batchnorm"; }

    void collect_state(std::vector<std::pair<std::string, Tensor<T>*>>& out) override {
        out.push_back({state_name_ + ".running_mean", &running_mean_});
        out.push_back({state_name_ + ".running_var", &running_var_});
    }

    void forward(Graph<T>& g) override {
        const auto& x = g.value(this->inputs[0]);
        const auto& gamma = g.value(this->inputs[1]);
        const auto& beta = g.value(this->inputs[2]);
        const int c = x.dim(x.rank() - 1);
        if (gamma.size() != c || beta.size() != c)
            throw std::invalid_argument("batchnorm parameter size mismatch");
        this->value.ensure_shape(x.shape());
        if (running_mean_.size() != c)
            throw std::invalid_argument("batchnorm built for " +
                                        std::to_string(running_mean_.size()) +
                                        " channels, input has " + std::to_string(c));
        const std::int64_t rows = x.size() / c;
        const T* in = x.data();
        T* out = this->value.data();

        if (g.training) {
            mean_.assign(static_cast<std::size_t>(c), T(0));
            var_.assign(static_cast<std::size_t>(c), T(0));
            for (std::int64_t i = 0; i < rows; ++i)
                for (int ch = 0; ch < c; ++ch) mean_[static_cast<std::size_t>(ch)] += in[i * c + ch];
            for (int ch = 0; ch < c; ++ch) mean_[static_cast<std::size_t>(ch)] /= T(rows);
            for (std::int64_t i = 0; i < rows; ++i)
                for (int ch = 0; ch < c; ++ch) {
                    const T d = in[i * c + ch] - mean_[static_cast<std::size_t>(ch)];
                    var_[static_cast<std::size_t>(ch)] += d * d;
                }
            for (int ch = 0; ch < c; ++ch) var_[static_cast<std::size_t>(ch)] /= T(rows);
            inv_std_.resize(static_cast<std::size_t>(c));
            for (int ch = 0; ch < c; ++ch)
                inv_std_[static_cast<std::size_t>(ch)] =
                    T(1) / std::sqrt(var_[static_cast<std::size_t>(ch)] + eps_);
            xhat_.resize(static_cast<std::size_t>(rows) * c);
            for (std::int64_t i = 0; i < rows; ++i)
                for (int ch = 0; ch < c; ++ch) {
                    const T xh = (in[i * c + ch] - mean_[static_cast<std::size_t>(ch)]) *
                                 inv_std_[static_cast<std::size_t>(ch)];
                    xhat_[static_cast<std::size_t>(i * c + ch)] = xh;
                    out[i * c + ch] = gamma[ch] * xh + beta[ch];
                }
            for (int ch = 0; ch < c; ++ch) {
                running_mean_[ch] = momentum_ * running_mean_[ch] +
                                    (T(1) - momentum_) * mean_[static_cast<std::size_t>(ch)];
                running_var_[ch] = momentum_ * running_var_[ch] +
                                   (T(1) - momentum_) * var_[static_cast<std::size_t>(ch)];
            }
        } else {
            inv_std_.resize(static_cast<std::size_t>(c));
            for (int ch = 0; ch < c; ++ch)
                inv_std_[static_cast<std::size_t>(ch)] = T(1) / std::sqrt(running_var_[ch] + eps_);
            xhat_.resize(static_cast<std::size_t>(rows) * c);
            for (std::int64_t i = 0; i < rows; ++i)
                for (int ch = 0; ch < c; ++ch) {
                    const T xh = (in[i * c + ch] - running_mean_[ch]) *
                                 inv_std_[static_cast<std::size_t>(ch)];
                    xhat_[static_cast<std::size_t>(i * c + ch)] = xh;
                    out[i * c + ch] = gamma[ch] * xh + beta[ch];
                }
        }
    }

    void backward(Graph<T>& g) override {
        const auto& x = g.value(this->inputs[0]);
        const auto& gamma = g.value(this->inputs[1]);
        const int c = x.dim(x.rank() - 1);
        const std::int64_t rows = x.size() / c;
        auto& dx = g.grad(this->inputs[0]);
        auto& dgamma = g.grad(this->inputs[1]);
        auto& dbeta = g.grad(this->inputs[2]);
        const T* dy = this->grad.data();

        for (std::int64_t i = 0; i < rows; ++i)
            for (int ch = 0; ch < c; ++ch) {
                dgamma[ch] += dy[i * c + ch] * xhat_[static_cast<std::size_t>(i * c + ch)];
                dbeta[ch] += dy[i * c + ch];
            }

        if (!g.training) {  // running stats are constants here
            for (std::int64_t i = 0; i < rows; ++i)
                for (int ch = 0; ch < c; ++ch)
                    dx[i * c + ch] += dy[i * c + ch] * gamma[ch] * inv_std_[static_cast<std::size_t>(ch)];
            return;
        }

        // dx = (gamma*inv_std/N) * (N*dy - sum(dy) - xhat * sum(dy*xhat))
        sum_dy_.assign(static_cast<std::size_t>(c), T(0));
        sum_dyx_.assign(static_cast<std::size_t>(c), T(0));
        for (std::int64_t i = 0; i < rows; ++i)
            for (int ch = 0; ch < c; ++ch) {
                sum_dy_[static_cast<std::size_t>(ch)] += dy[i * c + ch];
                sum_dyx_[static_cast<std::size_t>(ch)] +=
                    dy[i * c + ch] * xhat_[static_cast<std::size_t>(i * c + ch)];
            }
        const T n = T(rows);
        for (std::int64_t i = 0; i < rows; ++i)
            for (int ch = 0; ch < c; ++ch) {
                const T coeff = gamma[ch] * inv_std_[static_cast<std::size_t>(ch)] / n;
                dx[i * c + ch] += coeff * (n * dy[i * c + ch] - sum_dy_[static_cast<std::size_t>(ch)] -
                                           xhat_[static_cast<std::size_t>(i * c + ch)] *
                                               sum_dyx_[static_cast<std::size_t>(ch)]);
            }
    }

    std::string state_name_;
    T eps_, momentum_;
    Tensor<T> running_mean_, running_var_;
    std::vector<T> mean_, var_, inv_std_, xhat_, sum_dy_, sum_dyx_;
};

// ------------------------------------------------------------------ dense --

template <typename T>
struct DenseNode : Node<T> {
    const char* op_name() const override { return "dense"; }

    void forward(Graph<T>& g) override {
        const auto& x = g.value(this->inputs[0]);
        const auto& w = g.value(this->inputs[1]);
        const auto& bias = g.value(this->inputs[2]);
        if (x.rank() != 2 || w.rank() != 2 || x.dim(1) != w.dim(0))
            throw std::invalid_argument("dense shape mismatch: " + x.shape_str() + " x " +
                                        w.shape_str());
        const int b = x.dim(0), n = x.dim(1), m = w.dim(1);
        if (bias.size() != m) throw std::invalid_argument("dense bias size mismatch");
        this->value.ensure_shape({b, m});
        T* out = this->value.data();
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < m; ++j) out[static_cast<std::int64_t>(i) * m + j] = bias[j];
        gemm_acc(x.data(), w.data(), out, b, n, m);
    }

    void backward(Graph<T>& g) override {
        const auto& x = g.value(this->inputs[0]);
        const auto& w = g.value(this->inputs[1]);
        const int b = x.dim(0), n = x.dim(1), m = w.dim(1);
        auto& dx = g.grad(this->inputs[0]);
        auto& dw = g.grad(this->inputs[1]);
        auto& db = g.grad(this->inputs[2]);
        const T* dy = this->grad.data();

        // dx += dy * w^T
        for (int i = 0; i < b; ++i) {
            const T* drow = dy + static_cast<std::int64_t>(i) * m;
            T* xrow = dx.data() + static_cast<std::int64_t>(i) * n;
            for (int k = 0; k < n; ++k) {
                const T* wrow = w.data() + static_cast<std::int64_t>(k) * m;
                T acc = T(0);
                for (int j = 0; j < m; ++j) acc += drow[j] * wrow[j];
                xrow[k] += acc;
            }
        }
        // dw += x^T * dy ; db += column sums of dy
        for (int i = 0; i < b; ++i) {
            const T* xrow = x.data() + static_cast<std::int64_t>(i) * n;
            const T* drow = dy + static_cast<std::int64_t>(i) * m;
            for (int k = 0; k < n; ++k) {
                const T xv = xrow[k];
                if (xv == T(0)) continue;
                T* wrow = dw.data() + static_cast<std::int64_t>(k) * m;
                for (int j = 0; j < m; ++j) wrow[j] += xv * drow[j];
            }
            for (int j = 0; j < m; ++j) db[j] += drow[j];
        }
    }
};

// ------------------------------------------------------------- activations --

template <typename T>
struct ReluNode : Node<T> {
    const char* op_name() const override { return "relu"; }
    void forward(Graph<T>& g) override {
        const auto& x = g.value(this->inputs[0]);
        this->value.ensure_shape(x.shape());
        for (std::int64_t i = 0; i < x.size(); ++i)
            this->value[i] = x[i] > T(0) ? x[i] : T(0);
    }
    void backward(Graph<T>& g) override {
        const auto& x = g.value(this->inputs[0]);
        auto& dx = g.grad(this->inputs[0]);
        for (std::int64_t i = 0; i < x.size(); ++i)
            if (x[i] > T(0)) dx[i] += this->grad[i];
    }
};

template <typename T>
struct SigmoidNode : Node<T> {
    const char* op_name() const override { return "sigmoid"; }
    void forward(Graph<T>& g) override {
        const auto& x = g.value(this->inputs[0]);
        this->value.ensure_shape(x.shape());
        for (std::int64_t i = 0; i < x.size(); ++i)
            this->value[i] = T(1) / (T(1) + std::exp(-x[i]));
    }
    void backward(Graph<T>& g) override {
        auto& dx = g.grad(this->inputs[0]);
        for (std::int64_t i = 0; i < this->value.size(); ++i) {
            const T v = this->value[i];
            dx[i] += this->grad[i] * v * (T(1) - v);
        }
    }
};

// -------------------------------------------------------- shape plumbing --

template <typename T>
struct FlattenNode : Node<T> {
    const char* op_name() const override { return "flatten"; }
    void forward(Graph<T>& g) override {
        const auto& x = g.value(this->inputs[0]);
        const int b = x.dim(0);
        this->value.ensure_shape({b, static_cast<int>(x.size() / b)});
        std::memcpy(this->value.data(), x.data(), sizeof(T) * static_cast<std::size_t>(x.size()));
    }
    void backward(Graph<T>& g) override {
        auto& dx = g.grad(this->inputs[0]);
        for (std::int64_t i = 0; i < dx.size(); ++i) dx[i] += this->grad[i];
    }
};

template <typename T>
struct ConcatNode : Node<T> {
    const char* op_name() const override { return "concat"; }
    void forward(Graph<T>& g) override {
        const auto& a = g.value(this->inputs[0]);
        const auto& b = g.value(this->inputs[1]);
        if (a.rank() != 2 || b.rank() != 2 || a.dim(0) != b.dim(0))
            throw std::invalid_argument("concat expects matching [B,*] inputs");
        const int rows = a.dim(0), na = a.dim(1), nb = b.dim(1);
        this->value.ensure_shape({rows, na + nb});
        for (int i = 0; i < rows; ++i) {
            std::memcpy(this->value.data() + static_cast<std::int64_t>(i) * (na + nb),
                        a.data() + static_cast<std::int64_t>(i) * na, sizeof(T) * na);
            std::memcpy(this->value.data() + static_cast<std::int64_t>(i) * (na + nb) + na,
                        b.data() + static_cast<std::int64_t>(i) * nb, sizeof(T) * nb);
        }
    }
    void backward(Graph<T>& g) override {
        auto& da = g.grad(this->inputs[0]);
        auto& db = g.grad(this->inputs[1]);
        const int rows = da.dim(0), na = da.dim(1), nb = db.dim(1);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < na; ++j)
                da[static_cast<std::int64_t>(i) * na + j] +=
                    this->grad[static_cast<std::int64_t>(i) * (na + nb) + j];
            for (int j = 0; j < nb; ++j)
                db[static_cast<std::int64_t>(i) * nb + j] +=
                    this->grad[static_cast<std::int64_t>(i) * (na + nb) + na + j];
        }
    }
};

// ------------------------------------------------------------------- lstm --

/// Standard LSTM recurrence, zero initial state, gate order [i, f, g, o].
/// Gates i/f/o use sigmoid; the candidate and cell-output activations use
/// inner_act (sigmoid by default here, tanh available). Weights: wx [D,4U],
/// wh [U,4U], bias [4U].
template <typename T>
struct LstmNode : Node<T> {
    LstmNode(int units, bool return_sequences, Activation act)
        : units_(units), return_seq_(return_sequences), act_(act) {}

    const char* op_name() const override { return "lstm"; }

    T act_fn(T v) const {
        return act_ == Activation::Sigmoid ? T(1) / (T(1) + std::exp(-v)) : std::tanh(v);
    }
    // derivative expressed through the post-activation value
    T act_grad(T post) const {
        return act_ == Activation::Sigmoid ? post * (T(1) - post) : T(1) - post * post;
    }

    void forward(Graph<T>& g) override {
        const auto& x = g.value(this->inputs[0]);
        const auto& wx = g.value(this->inputs[1]);
        const auto& wh = g.value(this->inputs[2]);
        const auto& bias = g.value(this->inputs[3]);
        if (x.rank() != 3) throw std::invalid_argument("lstm expects [B,T,D]");
        const int b = x.dim(0), t = x.dim(1), d = x.dim(2), u = units_;
        if (t < 1) throw std::invalid_argument("lstm needs a non-empty sequence");
        if (wx.dim(0) != d || wx.dim(1) != 4 * u || wh.dim(0) != u || wh.dim(1) != 4 * u ||
            bias.size() != 4 * u)
            throw std::invalid_argument("lstm weight shape mismatch for input " + x.shape_str());

        const std::int64_t bu = static_cast<std::int64_t>(b) * u;
        auto sized = [&](std::vector<T>& v) { v.assign(static_cast<std::size_t>(bu) * t, T(0)); };
        sized(gi_); sized(gf_); sized(gg_); sized(go_);
        sized(cell_); sized(act_cell_); sized(hidden_);
        pre_.assign(static_cast<std::size_t>(b) * 4 * u, T(0));
        xt_.assign(static_cast<std::size_t>(b) * d, T(0));
        hprev_.assign(static_cast<std::size_t>(bu), T(0));

        if (return_seq_) this->value.ensure_shape({b, t, u});
        else this->value.ensure_shape({b, u});

        for (int step = 0; step < t; ++step) {
            for (int s = 0; s < b; ++s)
                std::memcpy(xt_.data() + static_cast<std::int64_t>(s) * d,
                            x.data() + (static_cast<std::int64_t>(s) * t + step) * d,
                            sizeof(T) * static_cast<std::size_t>(d));
            for (int s = 0; s < b; ++s)
                for (int j = 0; j < 4 * u; ++j)
                    pre_[static_cast<std::size_t>(s) * 4 * u + j] = bias[j];
            gemm_acc(xt_.data(), wx.data(), pre_.data(), b, d, 4 * u);
            gemm_acc(hprev_.data(), wh.data(), pre_.data(), b, u, 4 * u);

            const std::int64_t off = static_cast<std::int64_t>(step) * bu;
            for (int s = 0; s < b; ++s) {
                const T* pr = pre_.data() + static_cast<std::int64_t>(s) * 4 * u;
                for (int j = 0; j < u; ++j) {
                    const std::int64_t idx = off + static_cast<std::int64_t>(s) * u + j;
                    const T iv = T(1) / (T(1) + std::exp(-pr[j]));
                    const T fv = T(1) / (T(1) + std::exp(-pr[u + j]));
                    const T gv = act_fn(pr[2 * u + j]);
                    const T ov = T(1) / (T(1) + std::exp(-pr[3 * u + j]));
                    const T cprev = step > 0 ? cell_[static_cast<std::size_t>(idx - bu)] : T(0);
                    const T cv = fv * cprev + iv * gv;
                    const T av = act_fn(cv);
                    const T hv = ov * av;
                    gi_[static_cast<std::size_t>(idx)] = iv;
                    gf_[static_cast<std::size_t>(idx)] = fv;
                    gg_[static_cast<std::size_t>(idx)] = gv;
                    go_[static_cast<std::size_t>(idx)] = ov;
                    cell_[static_cast<std::size_t>(idx)] = cv;
                    act_cell_[static_cast<std::size_t>(idx)] = av;
                    hidden_[static_cast<std::size_t>(idx)] = hv;
                    hprev_[static_cast<std::size_t>(s) * u + j] = hv;
                }
            }
            if (return_seq_) {
                for (int s = 0; s < b; ++s)
                    std::memcpy(this->value.data() + (static_cast<std::int64_t>(s) * t + step) * u,
                                hidden_.data() + off + static_cast<std::int64_t>(s) * u,
                                sizeof(T) * static_cast<std::size_t>(u));
            }
        }
        if (!return_seq_) {
            const std::int64_t off = static_cast<std::int64_t>(t - 1) * bu;
            for (int s = 0; s < b; ++s)
                std::memcpy(this->value.data() + static_cast<std::int64_t>(s) * u,
                            hidden_.data() + off + static_cast<std::int64_t>(s) * u,
                            sizeof(T) * static_cast<std::size_t>(u));
        }
    }

    void backward(Graph<T>& g) override {
        const auto& x = g.value(this->inputs[0]);
        const auto& wx = g.value(this->inputs[1]);
        const auto& wh = g.value(this->inputs[2]);
        const int b = x.dim(0), t = x.dim(1), d = x.dim(2), u = units_;
        auto& dx = g.grad(this->inputs[0]);
        auto& dwx = g.grad(this->inputs[1]);
        auto& dwh = g.grad(this->inputs[2]);
        auto& dbias = g.grad(this->inputs[3]);
        const std::int64_t bu = static_cast<std::int64_t>(b) * u;

        std::vector<T> dh(static_cast<std::size_t>(bu), T(0));
        std::vector<T> dc(static_cast<std::size_t>(bu), T(0));
        std::vector<T> da(static_cast<std::size_t>(b) * 4 * u, T(0));
        std::vector<T> wxt(static_cast<std::size_t>(4 * u) * d);
        std::vector<T> wht(static_cast<std::size_t>(4 * u) * u);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < 4 * u; ++j)
                wxt[static_cast<std::size_t>(j) * d + i] = wx[static_cast<std::int64_t>(i) * 4 * u + j];
        for (int i = 0; i < u; ++i)
            for (int j = 0; j < 4 * u; ++j)
                wht[static_cast<std::size_t>(j) * u + i] = wh[static_cast<std::int64_t>(i) * 4 * u + j];

        for (int step = t - 1; step >= 0; --step) {
            const std::int64_t off = static_cast<std::int64_t>(step) * bu;
            // output gradient entering at this step
            if (return_seq_) {
                for (int s = 0; s < b; ++s)
                    for (int j = 0; j < u; ++j)
                        dh[static_cast<std::size_t>(s) * u + j] +=
                            this->grad[(static_cast<std::int64_t>(s) * t + step) * u + j];
            } else if (step == t - 1) {
                for (std::int64_t i = 0; i < bu; ++i) dh[static_cast<std::size_t>(i)] += this->grad[i];
            }

            for (int s = 0; s < b; ++s) {
                for (int j = 0; j < u; ++j) {
                    const std::int64_t idx = off + static_cast<std::int64_t>(s) * u + j;
                    const std::size_t sj = static_cast<std::size_t>(s) * u + j;
                    const T iv = gi_[static_cast<std::size_t>(idx)];
                    const T fv = gf_[static_cast<std::size_t>(idx)];
                    const T gv = gg_[static_cast<std::size_t>(idx)];
                    const T ov = go_[static_cast<std::size_t>(idx)];
                    const T av = act_cell_[static_cast<std::size_t>(idx)];
                    const T cprev = step > 0 ? cell_[static_cast<std::size_t>(idx - bu)] : T(0);

                    const T dho = dh[sj];
                    const T dov = dho * av;
                    T dcv = dc[sj] + dho * ov * act_grad(av);
                    const T dfv = dcv * cprev;
                    const T div = dcv * gv;
                    const T dgv = dcv * iv;

                    T* das = da.data() + static_cast<std::size_t>(s) * 4 * u;
                    das[j] = div * iv * (T(1) - iv);
                    das[u + j] = dfv * fv * (T(1) - fv);
                    das[2 * u + j] = dgv * act_grad(gv);
                    das[3 * u + j] = dov * ov * (T(1) - ov);

                    dc[sj] = dcv * fv;
                }
            }

            // dbias, dWx, dWh accumulate in fixed (step, sample) order
            for (int s = 0; s < b; ++s) {
                const T* das = da.data() + static_cast<std::size_t>(s) * 4 * u;
                for (int j = 0; j < 4 * u; ++j) dbias[j] += das[j];
                const T* xrow = x.data() + (static_cast<std::int64_t>(s) * t + step) * d;
                for (int k = 0; k < d; ++k) {
                    const T xv = xrow[k];
                    if (xv == T(0)) continue;
                    T* wrow = dwx.data() + static_cast<std::int64_t>(k) * 4 * u;
                    for (int j = 0; j < 4 * u; ++j) wrow[j] += xv * das[j];
                }
                if (step > 0) {
                    const T* hrow = hidden_.data() + off - bu + static_cast<std::int64_t>(s) * u;
                    for (int k = 0; k < u; ++k) {
                        const T hv = hrow[k];
                        if (hv == T(0)) continue;
                        T* wrow = dwh.data() + static_cast<std::int64_t>(k) * 4 * u;
                        for (int j = 0; j < 4 * u; ++j) wrow[j] += hv * das[j];
                    }
                }
            }
            // dx_t = da * wx^T ; dh_{t-1} = da * wh^T
            for (int s = 0; s < b; ++s) {
                const T* das = da.data() + static_cast<std::size_t>(s) * 4 * u;
                T* dxrow = dx.data() + (static_cast<std::int64_t>(s) * t + step) * d;
                for (int k = 0; k < d; ++k) {
                    const T* wrow = wxt.data();
                    T acc = T(0);
                    for (int j = 0; j < 4 * u; ++j) acc += das[j] * wrow[static_cast<std::size_t>(j) * d + k];
                    dxrow[k] += acc;
                }
                T* dhs = dh.data() + static_cast<std::size_t>(s) * u;
                for (int k = 0; k < u; ++k) {
                    T acc = T(0);
                    for (int j = 0; j < 4 * u; ++j) acc += das[j] * wht[static_cast<std::size_t>(j) * u + k];
                    dhs[k] = acc;  // replaces: becomes the incoming dh for step-1
                }
            }
        }
    }

    int units_;
    bool return_seq_;
    Activation act_;
    std::vector<T> gi_, gf_, gg_, go_, cell_, act_cell_, hidden_, pre_, xt_, hprev_;
};

// ------------------------------------------------------------------- loss --

/// Per-sample weighted binary cross entropy. p has shape [B] or [B,1];
/// y is an input of shape [B] with 0/1 values. Output [B].
template <typename T>
struct WeightedBceNode : Node<T> {
    WeightedBceNode(T w0, T w1) : w0_(w0), w1_(w1) {}
    const char* op_name() const override { return "weighted_bce"; }

    static constexpr T kClamp = T(1e-7);

    void forward(Graph<T>& g) override {
        const auto& p = g.value(this->inputs[0]);
        const auto& y = g.value(this->inputs[1]);
        const int b = p.dim(0);
        if (p.size() != b || y.size() != b)
            throw std::invalid_argument("weighted_bce expects [B] probability and label vectors");
        this->value.ensure_shape({b});
        for (int i = 0; i < b; ++i) {
            const T pc = std::min(T(1) - kClamp, std::max(kClamp, p[i]));
            this->value[i] = -(w1_ * y[i] * std::log(pc) + w0_ * (T(1) - y[i]) * std::log(T(1) - pc));
        }
    }

    void backward(Graph<T>& g) override {
        const auto& p = g.value(this->inputs[0]);
        const auto& y = g.value(this->inputs[1]);
        auto& dp = g.grad(this->inputs[0]);
        const int b = p.dim(0);
        for (int i = 0; i < b; ++i) {
            if (p[i] < kClamp || p[i] > T(1) - kClamp) continue;  // clamped flat region
            const T pc = p[i];
            dp[i] += this->grad[i] * (-(w1_ * y[i] / pc) + w0_ * (T(1) - y[i]) / (T(1) - pc));
        }
    }

    T w0_, w1_;
};

template <typename T>
struct MeanNode : Node<T> {
    const char* op_name() const override { return "mean"; }
    void forward(Graph<T>& g) override {
        const auto& x = g.value(this->inputs[0]);
        this->value.ensure_shape({1});
        T acc = T(0);
        for (std::int64_t i = 0; i < x.size(); ++i) acc += x[i];
        this->value[0] = acc / T(x.size());
    }
    void backward(Graph<T>& g) override {
        auto& dx = g.grad(this->inputs[0]);
        const T gv = this->grad[0] / T(dx.size());
        for (std::int64_t i = 0; i < dx.size(); ++i) dx[i] += gv;
    }
};

/// lambda * sum(x^2); the L2 penalty term for the logistic baseline.
template <typename T>
struct L2PenaltyNode : Node<T> {
    explicit L2PenaltyNode(T lambda) : lambda_(lambda) {}
    const char* op_name() const override { return "l2_penalty"; }
    void forward(Graph<T>& g) override {
        const auto& x = g.value(this->inputs[0]);
        this->value.ensure_shape({1});
        T acc = T(0);
        for (std::int64_t i = 0; i < x.size(); ++i) acc += x[i] * x[i];
        this->value[0] = lambda_ * acc;
    }
    void backward(Graph<T>& g) override {
        const auto& x = g.value(this->inputs[0]);
        auto& dx = g.grad(this->inputs[0]);
        const T gv = this->grad[0];
        for (std::int64_t i = 0; i < x.size(); ++i) dx[i] += gv * T(2) * lambda_ * x[i];
    }
    T lambda_;
};

template <typename T>
struct AddNode : Node<T> {
    const char* op_name() const override { return "add"; }
    void forward(Graph<T>& g) override {
        const auto& a = g.value(this->inputs[0]);
        const auto& b = g.value(this->inputs[1]);
        if (a.shape() != b.shape()) throw std::invalid_argument("add shape mismatch");
        this->value.ensure_shape(a.shape());
        for (std::int64_t i = 0; i < a.size(); ++i) this->value[i] = a[i] + b[i];
    }
    void backward(Graph<T>& g) override {
        auto& da = g.grad(this->inputs[0]);
        auto& db = g.grad(this->inputs[1]);
        for (std::int64_t i = 0; i < da.size(); ++i) {
            da[i] += this->grad[i];
            db[i] += this->grad[i];
        }
    }
};

// ------------------------------------------------------------ graph impl --

template <typename T>
NodeId Graph<T>::input(const std::string& name) {
    NodeId id = make<InputNode<T>>({});
    node(id).name = name;
    return id;
}

template <typename T>
NodeId Graph<T>::param(const std::string& name, std::vector<int> shape) {
    NodeId id = make<ParamNode<T>>({});
    node(id).name = name;
    node(id).trainable = true;
    node(id).value.reshape(std::move(shape));
    params_.push_back(id);
    return id;
}

template <typename T>
NodeId Graph<T>::conv2d(NodeId x, NodeId w, NodeId b) {
    return make<Conv2dNode<T>>({x, w, b});
}
template <typename T>
NodeId Graph<T>::maxpool2(NodeId x) {
    return make<MaxPool2Node<T>>({x});
}
template <typename T>
NodeId Graph<T>::batchnorm(NodeId x, NodeId gamma, NodeId beta, const std::string& name,
                           int channels, T eps, T momentum) {
    return make<BatchNormNode<T>>({x, gamma, beta}, name, channels, eps, momentum);
}
template <typename T>
NodeId Graph<T>::dense(NodeId x, NodeId w, NodeId b) {
    return make<DenseNode<T>>({x, w, b});
}
template <typename T>
NodeId Graph<T>::relu(NodeId x) {
    return make<ReluNode<T>>({x});
}
template <typename T>
NodeId Graph<T>::sigmoid(NodeId x) {
    return make<SigmoidNode<T>>({x});
}
template <typename T>
NodeId Graph<T>::flatten(NodeId x) {
    return make<FlattenNode<T>>({x});
}
template <typename T>
NodeId Graph<T>::concat(NodeId a, NodeId b) {
    return make<ConcatNode<T>>({a, b});
}
template <typename T>
NodeId Graph<T>::lstm(NodeId x, NodeId wx, NodeId wh, NodeId b, int units, bool return_sequences,
                      Activation inner_act) {
    return make<LstmNode<T>>({x, wx, wh, b}, units, return_sequences, inner_act);
}
template <typename T>
NodeId Graph<T>::weighted_bce(NodeId p, NodeId y, T w0, T w1) {
    return make<WeightedBceNode<T>>({p, y}, w0, w1);
}
template <typename T>
NodeId Graph<T>::mean(NodeId x) {
    return make<MeanNode<T>>({x});
}
template <typename T>
NodeId Graph<T>::l2_penalty(NodeId x, T lambda) {
    return make<L2PenaltyNode<T>>({x}, lambda);
}
template <typename T>
NodeId Graph<T>::add(NodeId a, NodeId b) {
    return make<AddNode<T>>({a, b});
}

template <typename T>
void Graph<T>::assert_finite(NodeId id) {
    const auto& v = node(id).value;
    for (std::int64_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(static_cast<double>(v[i])))
            throw std::runtime_error(std::string("non-finite value in node '") + node(id).name +
                                     "' (" + node(id).op_name() + ")");
    }
}

template <typename T>
void Graph<T>::forward() {
    for (NodeId id = 0; id < node_count(); ++id) {
        node(id).forward(*this);
        if (check_finite) assert_finite(id);
    }
}

template <typename T>
void Graph<T>::backward(NodeId root) {
    if (node(root).value.size() != 1)
        throw std::invalid_argument("backward requires a scalar root");
    for (NodeId id = 0; id < node_count(); ++id) {
        auto& n = node(id);
        n.grad.ensure_shape(n.value.shape());
        n.grad.fill(T(0));
    }
    node(root).grad[0] = T(1);
    for (NodeId id = root; id >= 0; --id) node(id).backward(*this);
}

template <typename T>
std::vector<ParamRef<T>> Graph<T>::params() {
    std::vector<ParamRef<T>> out;
    for (NodeId id : params_) {
        auto& n = node(id);
        n.grad.ensure_shape(n.value.shape());
        out.push_back({n.name, &n.value, &n.grad});
    }
    return out;
}

template <typename T>
std::vector<std::pair<std::string, Tensor<T>*>> Graph<T>::state() {
    std::vector<std::pair<std::string, Tensor<T>*>> out;
    for (NodeId id = 0; id < node_count(); ++id) node(id).collect_state(out);
    return out;
}

}  // namespace roadcast::te
