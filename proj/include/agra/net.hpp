#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "agra/errors.hpp"
#include "agra/mat.hpp"
#include "agra/rng.hpp"

namespace agra {

namespace stream {
inline constexpr std::uint64_t kInit = 11;
inline constexpr std::uint64_t kShuffle = 12;
inline constexpr std::uint64_t kDropout = 13;
}  // namespace stream

enum class Mode { training, inference };

// Fixed regressor family: four conv+pool stages, then dense(50) -> relu ->
// dropout -> dense(1). Convolutions are valid cross-correlation, stride 1,
// and no layer anywhere carries a bias. Pooling is non-overlapping max.
struct ArchDescriptor {
    std::array<int, 4> conv_filters{8, 8, 16, 16};
    std::array<int, 4> conv_kernels{25, 5, 5, 5};
    std::array<int, 4> pool_sizes{3, 3, 3, 3};
    std::array<int, 2> dense_sizes{50, 1};
    double dropout_p = 0.5;
    int input_channels = 2;
    int input_length = 700;

    int stage_in_channels(int stage) const {
        return stage == 0 ? input_channels : conv_filters[static_cast<std::size_t>(stage - 1)];
    }

    int stage_in_length(int stage) const {
        int len = input_length;
        for (int i = 0; i < stage; ++i) {
            len = (len - conv_kernels[static_cast<std::size_t>(i)] + 1) /
                  pool_sizes[static_cast<std::size_t>(i)];
        }
        return len;
    }

    int conv_out_length(int stage) const {
        return stage_in_length(stage) - conv_kernels[static_cast<std::size_t>(stage)] + 1;
    }

    int pooled_length(int stage) const {
        return conv_out_length(stage) / pool_sizes[static_cast<std::size_t>(stage)];
    }

    int flatten_size() const { return conv_filters[3] * pooled_length(3); }

    void validate() const {
        if (input_channels != 2) throw std::invalid_argument("input_channels must be 2");
        if (!(dropout_p >= 0.0 && dropout_p < 1.0))
            throw std::invalid_argument("dropout_p must be in [0, 1)");
        if (dense_sizes[1] != 1) throw std::invalid_argument("output layer must have 1 unit");
        for (int s = 0; s < 4; ++s) {
            if (conv_out_length(s) < 1)
                throw std::invalid_argument("input_length " + std::to_string(input_length) +
                                            " too short: conv stage " + std::to_string(s) +
                                            " has empty output");
            if (pooled_length(s) < 1)
                throw std::invalid_argument("input_length " + std::to_string(input_length) +
                                            " too short: pool stage " + std::to_string(s) +
                                            " has empty output");
        }
    }

    friend bool operator==(const ArchDescriptor&, const ArchDescriptor&) = default;
};

// Weight tensors in declared order: conv0..conv3 as [out][in][k], then
// dense0, dense1 as [out][in].
using Gradients = std::vector<std::vector<double>>;

struct ModelParams {
    ArchDescriptor arch;
    std::vector<std::vector<double>> tensors;
    std::uint64_t init_seed = 0;
    int epochs_trained = 0;
    double final_train_loss = std::numeric_limits<double>::quiet_NaN();
    double final_test_mse = std::numeric_limits<double>::quiet_NaN();

    std::vector<double>& conv(int i) { return tensors[static_cast<std::size_t>(i)]; }
    const std::vector<double>& conv(int i) const { return tensors[static_cast<std::size_t>(i)]; }
    std::vector<double>& dense(int i) { return tensors[static_cast<std::size_t>(4 + i)]; }
    const std::vector<double>& dense(int i) const {
        return tensors[static_cast<std::size_t>(4 + i)];
    }

    bool all_finite() const {
        for (const auto& t : tensors)
            for (double v : t)
                if (!std::isfinite(v)) return false;
        return true;
    }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// (fan_in, fan_out) per tensor index, Glorot convention for conv kernels.
inline std::pair<int, int> tensor_fans(const ArchDescriptor& arch, int index) {
    if (index < 4) {
        int in_c = arch.stage_in_channels(index);
        int k = arch.conv_kernels[static_cast<std::size_t>(index)];
        int out_c = arch.conv_filters[static_cast<std::size_t>(index)];
        return {in_c * k, out_c * k};
    }
    int in = index == 4 ? arch.flatten_size() : arch.dense_sizes[0];
    int out = arch.dense_sizes[static_cast<std::size_t>(index - 4)];
    return {in, out};
}

inline std::size_t tensor_length(const ArchDescriptor& arch, int index) {
    if (index < 4) {
        return static_cast<std::size_t>(arch.conv_filters[static_cast<std::size_t>(index)]) *
               static_cast<std::size_t>(arch.stage_in_channels(index)) *
               static_cast<std::size_t>(arch.conv_kernels[static_cast<std::size_t>(index)]);
    }
    auto [fan_in, fan_out] = tensor_fans(arch, index);
    return static_cast<std::size_t>(fan_in) * static_cast<std::size_t>(fan_out);
}

inline Gradients zero_gradients(const ArchDescriptor& arch) {
    Gradients g(6);
    for (int i = 0; i < 6; ++i) g[static_cast<std::size_t>(i)].assign(tensor_length(arch, i), 0.0);
    return g;
}

// Glorot-uniform init, one splitmix stream, tensors filled in declared order.
inline ModelParams init_params(const ArchDescriptor& arch, std::uint64_t seed) {
    arch.validate();
    ModelParams p;
    p.arch = arch;
    p.init_seed = seed;
    p.tensors.resize(6);
    Rng rng(derive_seed(seed, stream::kInit));
    for (int i = 0; i < 6; ++i) {
        auto [fan_in, fan_out] = tensor_fans(arch, i);
        double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        auto& t = p.tensors[static_cast<std::size_t>(i)];
        t.resize(tensor_length(arch, i));
        for (auto& w : t) w = rng.uniform(-bound, bound);
    }
    return p;
}

// out[o][t] = sum_{c,k} w[o][c][k] * in[c][t+k]
inline Mat conv1d_forward(const Mat& in, const std::vector<double>& w, int out_c, int k) {
    const int in_c = static_cast<int>(in.rows());
    const int L = static_cast<int>(in.cols());
    const int L_out = L - k + 1;
    if (L_out < 1)
        throw ShapeError("conv1d: input length " + std::to_string(L) + " < kernel " +
                         std::to_string(k));
    Mat out(static_cast<std::size_t>(out_c), static_cast<std::size_t>(L_out));
    for (int o = 0; o < out_c; ++o) {
        double* orow = out.row(static_cast<std::size_t>(o));
        for (int c = 0; c < in_c; ++c) {
            const double* irow = in.row(static_cast<std::size_t>(c));
            const double* wrow = w.data() + (static_cast<std::size_t>(o) * in_c + c) * k;
            for (int kk = 0; kk < k; ++kk) {
                const double wv = wrow[kk];
                const double* shifted = irow + kk;
                for (int t = 0; t < L_out; ++t) orow[t] += wv * shifted[t];
            }
        }
    }
    return out;
}

// Adjoint of conv1d_forward. d_in (if non-null) gets the input gradient,
// d_w (if non-null) accumulates the weight gradient.
inline void conv1d_backward(const Mat& in, const std::vector<double>& w, int out_c, int k,
                            const Mat& d_out, Mat* d_in, std::vector<double>* d_w) {
    const int in_c = static_cast<int>(in.rows());
    const int L = static_cast<int>(in.cols());
    const int L_out = static_cast<int>(d_out.cols());
    if (static_cast<int>(d_out.rows()) != out_c || L_out != L - k + 1)
        throw ShapeError("conv1d_backward: upstream shape mismatch");
    if (d_in) *d_in = Mat(in.rows(), in.cols());
    for (int o = 0; o < out_c; ++o) {
        const double* grow = d_out.row(static_cast<std::size_t>(o));
        for (int c = 0; c < in_c; ++c) {
            const std::size_t base = (static_cast<std::size_t>(o) * in_c + c) * k;
            const double* irow = in.row(static_cast<std::size_t>(c));
            double* drow = d_in ? d_in->row(static_cast<std::size_t>(c)) : nullptr;
            for (int kk = 0; kk < k; ++kk) {
                if (d_in) {
                    const double wv = w[base + static_cast<std::size_t>(kk)];
                    double* dsh = drow + kk;
                    for (int t = 0; t < L_out; ++t) dsh[t] += wv * grow[t];
                }
                if (d_w) {
                    const double* ish = irow + kk;
                    double acc = 0.0;
                    for (int t = 0; t < L_out; ++t) acc += ish[t] * grow[t];
                    (*d_w)[base + static_cast<std::size_t>(kk)] += acc;
                }
            }
        }
    }
}

struct PoolResult {
    Mat out;
    std::vector<int> argmax;  // absolute column index per output entry
};

// Non-overlapping max pooling, stride == window, trailing remainder dropped.
// Ties break toward the lowest time index.
inline PoolResult maxpool_forward(const Mat& in, int window) {
    const int C = static_cast<int>(in.rows());
    const int L = static_cast<int>(in.cols());
    if (L < window) throw ShapeError("maxpool: input length < window");
    const int L_out = L / window;
    PoolResult r{Mat(static_cast<std::size_t>(C), static_cast<std::size_t>(L_out)),
                 std::vector<int>(static_cast<std::size_t>(C) * static_cast<std::size_t>(L_out))};
    for (int c = 0; c < C; ++c) {
        const double* irow = in.row(static_cast<std::size_t>(c));
        double* orow = r.out.row(static_cast<std::size_t>(c));
        for (int j = 0; j < L_out; ++j) {
            int best = j * window;
            double best_v = irow[best];
            for (int t = best + 1; t < (j + 1) * window; ++t) {
                if (irow[t] > best_v) {
                    best_v = irow[t];
                    best = t;
                }
            }
            orow[j] = best_v;
            r.argmax[static_cast<std::size_t>(c) * static_cast<std::size_t>(L_out) +
                     static_cast<std::size_t>(j)] = best;
        }
    }
    return r;
}

// Routes each upstream value to its argmax position; gradient mass is
// conserved.
inline Mat maxpool_backward(const std::vector<int>& argmax, const Mat& d_out, int in_length) {
    const int C = static_cast<int>(d_out.rows());
    const int L_out = static_cast<int>(d_out.cols());
    if (argmax.size() != static_cast<std::size_t>(C) * static_cast<std::size_t>(L_out))
        throw ShapeError("maxpool_backward: argmax size mismatch");
    Mat d_in(static_cast<std::size_t>(C), static_cast<std::size_t>(in_length));
    for (int c = 0; c < C; ++c) {
        const double* grow = d_out.row(static_cast<std::size_t>(c));
        double* drow = d_in.row(static_cast<std::size_t>(c));
        for (int j = 0; j < L_out; ++j) {
            int idx = argmax[static_cast<std::size_t>(c) * static_cast<std::size_t>(L_out) +
                             static_cast<std::size_t>(j)];
            if (idx < 0 || idx >= in_length)
                throw NumericError("maxpool_backward: argmax index out of range");
            drow[idx] += grow[j];
        }
    }
    return d_in;
}

inline Mat relu_forward(const Mat& in) {
    Mat out = in;
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
    return out;
}

// Subgradient at exactly 0 is 0.
inline Mat relu_backward(const Mat& pre, const Mat& d_out) {
    require_same_shape(pre, d_out, "relu_backward");
    Mat d_in = d_out;
    const auto& p = pre.data();
    auto& d = d_in.data();
    for (std::size_t i = 0; i < d.size(); ++i)
        if (!(p[i] > 0.0)) d[i] = 0.0;
    return d_in;
}

// out = W * in with W stored row-major [out][in]
inline std::vector<double> dense_forward(const std::vector<double>& in,
                                         const std::vector<double>& w, int out_dim) {
    const std::size_t in_dim = in.size();
    if (w.size() != static_cast<std::size_t>(out_dim) * in_dim)
        throw ShapeError("dense: weight shape mismatch");
    std::vector<double> out(static_cast<std::size_t>(out_dim), 0.0);
    for (int o = 0; o < out_dim; ++o) {
        const double* wrow = w.data() + static_cast<std::size_t>(o) * in_dim;
        double acc = 0.0;
        for (std::size_t i = 0; i < in_dim; ++i) acc += wrow[i] * in[i];
        out[static_cast<std::size_t>(o)] = acc;
    }
    return out;
}

inline void dense_backward(const std::vector<double>& in, const std::vector<double>& w,
                           const std::vector<double>& d_out, std::vector<double>* d_in,
                           std::vector<double>* d_w) {
    const std::size_t in_dim = in.size();
    const std::size_t out_dim = d_out.size();
    if (w.size() != out_dim * in_dim) throw ShapeError("dense_backward: weight shape mismatch");
    if (d_in) d_in->assign(in_dim, 0.0);
    for (std::size_t o = 0; o < out_dim; ++o) {
        const double* wrow = w.data() + o * in_dim;
        const double g = d_out[o];
        double* dwrow = d_w ? d_w->data() + o * in_dim : nullptr;
        for (std::size_t i = 0; i < in_dim; ++i) {
            if (d_in) (*d_in)[i] += wrow[i] * g;
            if (dwrow) dwrow[i] += g * in[i];
        }
    }
}

struct DropoutResult {
    std::vector<double> out;
    std::vector<double> scale;  // per-unit factor applied: 0 or 1/(1-p); empty in inference
};

// Inverted dropout: survivors scaled by 1/(1-p) in training, identity in
// inference.
inline DropoutResult dropout_forward(const std::vector<double>& in, double p, Mode mode,
                                     Rng* rng) {
    DropoutResult r;
    if (mode == Mode::inference || p <= 0.0) {
        r.out = in;
        if (mode == Mode::training) r.scale.assign(in.size(), 1.0);
        return r;
    }
    if (!rng) throw std::invalid_argument("dropout: training mode needs an rng");
    const double keep_scale = 1.0 / (1.0 - p);
    r.out.resize(in.size());
    r.scale.resize(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        const double s = rng->uniform() < p ? 0.0 : keep_scale;
        r.scale[i] = s;
        r.out[i] = in[i] * s;
    }
    return r;
}

// Everything reverse mode needs, cached stage by stage.
struct ForwardTrace {
    std::array<Mat, 4> conv_in;    // stage inputs
    std::array<Mat, 4> conv_out;   // pre-activation conv outputs
    std::array<Mat, 4> relu_out;   // pool inputs
    std::array<std::vector<int>, 4> pool_argmax;
    std::vector<double> flat;        // dense0 input
    std::vector<double> dense0_out;  // pre-activation
    std::vector<double> dropout_in;  // post-relu hidden
    std::vector<double> dropout_scale;
    std::vector<double> dropout_out;  // dense1 input
    double output = 0.0;              // predicted score
    Mode mode = Mode::inference;
};

// conv -> relu -> pool, four stages, flatten, dense -> relu -> dropout ->
// dense(1). The raw regression output is not clamped.
inline ForwardTrace forward(const ModelParams& model, const Signal& x, Mode mode = Mode::inference,
                            Rng* dropout_rng = nullptr) {
    const ArchDescriptor& a = model.arch;
    if (static_cast<int>(x.rows()) != a.input_channels ||
        static_cast<int>(x.cols()) != a.input_length)
        throw ShapeError("forward: input shape mismatch");
    ForwardTrace tr;
    tr.mode = mode;
    Mat cur = x;
    for (int s = 0; s < 4; ++s) {
        tr.conv_in[static_cast<std::size_t>(s)] = std::move(cur);
        tr.conv_out[static_cast<std::size_t>(s)] =
            conv1d_forward(tr.conv_in[static_cast<std::size_t>(s)], model.conv(s),
                           a.conv_filters[static_cast<std::size_t>(s)],
                           a.conv_kernels[static_cast<std::size_t>(s)]);
        tr.relu_out[static_cast<std::size_t>(s)] =
            relu_forward(tr.conv_out[static_cast<std::size_t>(s)]);
        PoolResult pooled = maxpool_forward(tr.relu_out[static_cast<std::size_t>(s)],
                                            a.pool_sizes[static_cast<std::size_t>(s)]);
        tr.pool_argmax[static_cast<std::size_t>(s)] = std::move(pooled.argmax);
        cur = std::move(pooled.out);
    }
    tr.flat = cur.data();
    tr.dense0_out = dense_forward(tr.flat, model.dense(0), a.dense_sizes[0]);
    tr.dropout_in = tr.dense0_out;
    for (double& v : tr.dropout_in) v = v > 0.0 ? v : 0.0;
    DropoutResult dr = dropout_forward(tr.dropout_in, a.dropout_p, mode, dropout_rng);
    tr.dropout_scale = std::move(dr.scale);
    tr.dropout_out = std::move(dr.out);
    std::vector<double> out = dense_forward(tr.dropout_out, model.dense(1), a.dense_sizes[1]);
    tr.output = out[0];
    return tr;
}

// Reverse pass from d(loss)/d(output). Fills the requested outputs only;
// grads must come from zero_gradients (accumulated into).
inline void backward(const ModelParams& model, const ForwardTrace& tr, double d_output,
                     Gradients* grads, Mat* input_grad) {
    const ArchDescriptor& a = model.arch;
    std::vector<double> d_dense1_out{d_output};
    std::vector<double> d_dropout_out;
    dense_backward(tr.dropout_out, model.dense(1), d_dense1_out, &d_dropout_out,
                   grads ? &(*grads)[5] : nullptr);
    // dropout backward: same per-unit scale
    std::vector<double> d_hidden = std::move(d_dropout_out);
    if (tr.mode == Mode::training) {
        for (std::size_t i = 0; i < d_hidden.size(); ++i) d_hidden[i] *= tr.dropout_scale[i];
    }
    // relu on the hidden layer
    for (std::size_t i = 0; i < d_hidden.size(); ++i)
        if (!(tr.dense0_out[i] > 0.0)) d_hidden[i] = 0.0;
    std::vector<double> d_flat;
    dense_backward(tr.flat, model.dense(0), d_hidden, &d_flat, grads ? &(*grads)[4] : nullptr);

    Mat d_cur(static_cast<std::size_t>(a.conv_filters[3]),
              static_cast<std::size_t>(a.pooled_length(3)));
    d_cur.data() = std::move(d_flat);
    for (int s = 3; s >= 0; --s) {
        Mat d_pool_in = maxpool_backward(tr.pool_argmax[static_cast<std::size_t>(s)], d_cur,
                                         a.conv_out_length(s));
        Mat d_conv_out = relu_backward(tr.conv_out[static_cast<std::size_t>(s)], d_pool_in);
        const bool need_input = s > 0 || input_grad != nullptr;
        Mat d_conv_in;
        conv1d_backward(tr.conv_in[static_cast<std::size_t>(s)], model.conv(s),
                        a.conv_filters[static_cast<std::size_t>(s)],
                        a.conv_kernels[static_cast<std::size_t>(s)], d_conv_out,
                        need_input ? &d_conv_in : nullptr,
                        grads ? &(*grads)[static_cast<std::size_t>(s)] : nullptr);
        if (s == 0) {
            if (input_grad) *input_grad = std::move(d_conv_in);
        } else {
            d_cur = std::move(d_conv_in);
        }
    }
}

// l1: squared error against the target score. l2: squared distance of the
// prediction from the optimal score 0.
inline double loss_l1(double score_hat, double score) {
    double d = score_hat - score;
    return d * d;
}

inline double loss_l2(double score_hat) { return score_hat * score_hat; }

struct ScoreAndGrad {
    double score = 0.0;  // raw prediction
    Mat grad;            // d loss_l2 / d x, same shape as x
};

// One inference forward plus one reverse pass; dropout inactive.
inline ScoreAndGrad l2_input_gradient(const ModelParams& model, const Signal& x) {
    ForwardTrace tr = forward(model, x, Mode::inference);
    ScoreAndGrad r;
    r.score = tr.output;
    backward(model, tr, 2.0 * tr.output, nullptr, &r.grad);
    return r;
}

// Exact reverse-mode gradient of loss_l2 with respect to every input entry.
inline Mat backward_to_input(const ModelParams& model, const Signal& x) {
    return l2_input_gradient(model, x).grad;
}

}  // namespace agra
