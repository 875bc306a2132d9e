#include "nasreg/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "nasreg/optimizer.hpp"

namespace nasreg {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::ReLU: return "ReLU";
        case Activation::Tanh: return "Tanh";
        case Activation::Identity: return "Identity";
        case Activation::Elu: return "ELU";
        case Activation::LeakyReLU: return "LeakyReLU";
        case Activation::Sigmoid: return "Sigmoid";
    }
    throw std::invalid_argument("unknown activation");
}

std::string to_string(LossKind l) { return l == LossKind::L1 ? "L1" : "L2"; }

Activation activation_from_string(const std::string& s) {
    if (s == "ReLU") return Activation::ReLU;
    if (s == "Tanh") return Activation::Tanh;
    if (s == "Identity") return Activation::Identity;
    if (s == "ELU") return Activation::Elu;
    if (s == "LeakyReLU") return Activation::LeakyReLU;
    if (s == "Sigmoid") return Activation::Sigmoid;
    throw std::invalid_argument("unknown activation '" + s + "'");
}

LossKind loss_from_string(const std::string& s) {
    if (s == "L1") return LossKind::L1;
    if (s == "L2") return LossKind::L2;
    throw std::invalid_argument("unknown loss '" + s + "'");
}

namespace {
constexpr double kLeakySlope = 0.01;
constexpr double kEluAlpha = 1.0;
}  // namespace

double apply_activation(Activation a, double t) {
    switch (a) {
        case Activation::ReLU: return t > 0.0 ? t : 0.0;
        case Activation::Tanh: return std::tanh(t);
        case Activation::Identity: return t;
        case Activation::Elu: return t > 0.0 ? t : kEluAlpha * (std::exp(t) - 1.0);
        case Activation::LeakyReLU: return t > 0.0 ? t : kLeakySlope * t;
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-t));
    }
    throw std::invalid_argument("unknown activation");
}

double activation_derivative(Activation a, double t) {
    switch (a) {
        case Activation::ReLU: return t > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: {
            const double th = std::tanh(t);
            return 1.0 - th * th;
        }
        case Activation::Identity: return 1.0;
        case Activation::Elu: return t > 0.0 ? 1.0 : kEluAlpha * std::exp(t);
        case Activation::LeakyReLU: return t > 0.0 ? 1.0 : kLeakySlope;
        case Activation::Sigmoid: {
            const double s = 1.0 / (1.0 + std::exp(-t));
            return s * (1.0 - s);
        }
    }
    throw std::invalid_argument("unknown activation");
}

void ArchitectureSpec::validate() const {
    if (hidden_layers < 1 || hidden_layers > 10)
        throw std::invalid_argument("hidden_layers must be in 1..10, got " + std::to_string(hidden_layers));
    if (neurons_per_layer < 10 || neurons_per_layer > 100)
        throw std::invalid_argument("neurons_per_layer must be in 10..100, got " +
                                    std::to_string(neurons_per_layer));
    if (std::find(std::begin(kBatchSizeLevels), std::end(kBatchSizeLevels), batch_size) ==
        std::end(kBatchSizeLevels))
        throw std::invalid_argument("batch_size must be one of 4/8/16/32/64, got " +
                                    std::to_string(batch_size));
    if (!(learning_rate >= kLearningRateMin && learning_rate <= kLearningRateMax))
        throw std::invalid_argument("learning_rate must be in [1e-4, 0.05], got " +
                                    std::to_string(learning_rate));
}

namespace {

bool relu_family(Activation a) {
    return a == Activation::ReLU || a == Activation::LeakyReLU || a == Activation::Elu;
}

DenseLayer init_layer(std::size_t fan_in, std::size_t fan_out, Activation a, Rng& rng) {
    const double limit = relu_family(a)
                             ? std::sqrt(6.0 / static_cast<double>(fan_in))
                             : std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseLayer layer;
    layer.w = Matrix(fan_in, fan_out);
    for (double& v : layer.w.storage()) v = (2.0 * rng.next_uniform() - 1.0) * limit;
    layer.b.assign(fan_out, 0.0);
    return layer;
}

}  // namespace

MlpModel build_mlp(const ArchitectureSpec& spec, std::size_t input_width, Rng& rng) {
    spec.validate();
    if (input_width < 1) throw std::invalid_argument("build_mlp: input_width must be >= 1");
    MlpModel m;
    m.spec = spec;
    m.input_width = input_width;
    const auto width = static_cast<std::size_t>(spec.neurons_per_layer);
    std::size_t in = input_width;
    for (int l = 0; l < spec.hidden_layers; ++l) {
        m.layers.push_back(init_layer(in, width, spec.activation, rng));
        in = width;
    }
    m.layers.push_back(init_layer(in, 1, spec.activation, rng));  // linear head
    return m;
}

namespace {

// Derivative w.r.t. the pre-activation, recovered from the activation value.
// Equivalent to activation_derivative at the matching pre-activation for
// every supported function (ELU differs by cancellation ulps on the negative
// branch).
double derivative_from_activation(Activation act, double a) {
    switch (act) {
        case Activation::ReLU: return a > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: return 1.0 - a * a;
        case Activation::Identity: return 1.0;
        case Activation::Elu: return a > 0.0 ? 1.0 : a + kEluAlpha;
        case Activation::LeakyReLU: return a > 0.0 ? 1.0 : kLeakySlope;
        case Activation::Sigmoid: return a * (1.0 - a);
    }
    throw std::invalid_argument("unknown activation");
}

struct ForwardCache {
    std::vector<Matrix> activations;  // activations[0] is the input; hidden layers only
    Matrix output;                    // final linear layer, one column
};

// rows of activation(x W + b) per hidden layer; identity on the final layer.
void forward_pass(const MlpModel& m, const Matrix& x, ForwardCache& cache) {
    if (x.cols() != m.input_width)
        throw std::invalid_argument("mlp forward: input width " + std::to_string(x.cols()) +
                                    ", model expects " + std::to_string(m.input_width));
    cache.activations.resize(m.layers.size());
    cache.activations[0] = x;
    for (std::size_t l = 0; l + 1 < m.layers.size(); ++l) {
        Matrix& a = cache.activations[l + 1];
        matmul_into(cache.activations[l], m.layers[l].w, a);
        const auto& bias = m.layers[l].b;
        for (std::size_t r = 0; r < a.rows(); ++r) {
            double* row = a.storage().data() + r * a.cols();
            for (std::size_t c = 0; c < a.cols(); ++c)
                row[c] = apply_activation(m.spec.activation, row[c] + bias[c]);
        }
    }
    const std::size_t last = m.layers.size() - 1;
    matmul_into(cache.activations[last], m.layers[last].w, cache.output);
    for (std::size_t r = 0; r < cache.output.rows(); ++r)
        cache.output(r, 0) += m.layers[last].b[0];
}

}  // namespace

std::vector<double> mlp_forward(const MlpModel& m, const Matrix& x) {
    ForwardCache cache;
    forward_pass(m, x, cache);
    std::vector<double> preds(x.rows());
    for (std::size_t r = 0; r < preds.size(); ++r) preds[r] = cache.output(r, 0);
    return preds;
}

double mlp_forward_one(const MlpModel& m, std::span<const double> x) {
    Matrix row(1, x.size());
    std::copy(x.begin(), x.end(), row.storage().begin());
    return mlp_forward(m, row)[0];
}

double mlp_loss(const MlpModel& m, const Matrix& x, std::span<const double> y, LossKind loss) {
    const auto preds = mlp_forward(m, x);
    double total = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double e = preds[i] - y[i];
        total += loss == LossKind::L2 ? e * e : std::abs(e);
    }
    return total / static_cast<double>(preds.size());
}

namespace {

// Shared by the public entry point and the training loop; caller-owned
// buffers avoid reallocation across minibatch steps.
struct BackpropWorkspace {
    ForwardCache cache;
    Matrix delta;
    Matrix prev_delta;
};

double loss_and_grad_impl(const MlpModel& m, const Matrix& x, std::span<const double> y,
                          LossKind loss, MlpGradients& out, BackpropWorkspace& ws) {
    if (x.rows() == 0) throw std::invalid_argument("mlp_loss_and_grad: empty batch");
    if (x.rows() != y.size()) throw std::invalid_argument("mlp_loss_and_grad: batch size mismatch");

    forward_pass(m, x, ws.cache);

    const double n = static_cast<double>(x.rows());
    double total = 0.0;
    if (ws.delta.rows() != x.rows() || ws.delta.cols() != 1) ws.delta = Matrix(x.rows(), 1);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const double e = ws.cache.output(r, 0) - y[r];
        if (!std::isfinite(e)) throw std::runtime_error("mlp_loss_and_grad: non-finite forward value");
        if (loss == LossKind::L2) {
            total += e * e;
            ws.delta(r, 0) = 2.0 * e / n;
        } else {
            total += std::abs(e);
            ws.delta(r, 0) = (e > 0.0 ? 1.0 : (e < 0.0 ? -1.0 : 0.0)) / n;
        }
    }
    total /= n;

    out.layers.resize(m.layers.size());
    for (std::size_t li = m.layers.size(); li-- > 0;) {
        const Matrix& a_prev = ws.cache.activations[li];
        matmul_at_into(a_prev, ws.delta, out.layers[li].w);
        out.layers[li].b.assign(ws.delta.cols(), 0.0);
        for (std::size_t r = 0; r < ws.delta.rows(); ++r)
            for (std::size_t c = 0; c < ws.delta.cols(); ++c) out.layers[li].b[c] += ws.delta(r, c);
        if (li == 0) break;
        matmul_bt_into(ws.delta, m.layers[li].w, ws.prev_delta);
        const Matrix& a = ws.cache.activations[li];
        for (std::size_t i = 0; i < ws.prev_delta.storage().size(); ++i)
            ws.prev_delta.storage()[i] *=
                derivative_from_activation(m.spec.activation, a.storage()[i]);
        std::swap(ws.delta, ws.prev_delta);
    }
    return total;
}

}  // namespace

double mlp_loss_and_grad(const MlpModel& m, const Matrix& x, std::span<const double> y,
                         LossKind loss, MlpGradients& out) {
    BackpropWorkspace ws;
    return loss_and_grad_impl(m, x, y, loss, out, ws);
}

namespace {

double validation_rmse(const MlpModel& m, const Dataset& val) {
    const auto preds = mlp_forward(m, val.features);
    double sq = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double e = preds[i] - val.targets[i];
        sq += e * e;
    }
    return std::sqrt(sq / static_cast<double>(preds.size()));
}

void gather_rows(const Matrix& x, std::span<const std::size_t> idx, Matrix& out) {
    if (out.rows() != idx.size() || out.cols() != x.cols()) out = Matrix(idx.size(), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
        std::copy_n(x.storage().begin() + static_cast<std::ptrdiff_t>(idx[i] * x.cols()), x.cols(),
                    out.storage().begin() + static_cast<std::ptrdiff_t>(i * x.cols()));
}

}  // namespace

TrainHistory train_mlp(MlpModel& m, const Dataset& train, const Dataset& val, const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw std::invalid_argument("train_mlp: epochs must be >= 1");
    if (val.n_rows() == 0) throw std::invalid_argument("train_mlp: validation set is empty");
    if (train.n_features() != m.input_width || val.n_features() != m.input_width)
        throw std::invalid_argument("train_mlp: dataset width does not match model input width");

    TrainHistory hist;
    Rng rng(cfg.seed);
    AdamOptimizer adam(m.spec.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon);

    const std::size_t n = train.n_rows();
    const auto batch = static_cast<std::size_t>(m.spec.batch_size);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    double best_rmse = validation_rmse(m, val);
    std::vector<DenseLayer> best_params = m.layers;
    hist.epochs.push_back({std::numeric_limits<double>::quiet_NaN(), best_rmse});
    hist.best_epoch = 0;

    MlpGradients grads;
    BackpropWorkspace ws;
    Matrix bx;
    std::vector<double> by;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle(std::span<std::size_t>(order), rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        bool bad = false;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t count = std::min(batch, n - start);
            const auto idx = std::span(order).subspan(start, count);
            gather_rows(train.features, idx, bx);
            by.resize(count);
            for (std::size_t i = 0; i < count; ++i) by[i] = train.targets[idx[i]];

            double loss;
            try {
                loss = loss_and_grad_impl(m, bx, by, m.spec.loss, grads, ws);
            } catch (const std::runtime_error&) {
                bad = true;
                break;
            }
            if (!std::isfinite(loss)) {
                bad = true;
                break;
            }
            std::vector<double*> params;
            std::vector<const double*> gptrs;
            std::vector<std::size_t> sizes;
            for (std::size_t l = 0; l < m.layers.size(); ++l) {
                params.push_back(m.layers[l].w.storage().data());
                gptrs.push_back(grads.layers[l].w.storage().data());
                sizes.push_back(m.layers[l].w.storage().size());
                params.push_back(m.layers[l].b.data());
                gptrs.push_back(grads.layers[l].b.data());
                sizes.push_back(m.layers[l].b.size());
            }
            adam.step(params, gptrs, sizes);
            epoch_loss += loss;
            ++batches;
            ++hist.optimizer_steps;
        }
        if (bad) {
            hist.diverged = true;
            hist.diverged_epoch = static_cast<std::size_t>(epoch);
            break;
        }
        const double val_rmse = validation_rmse(m, val);
        hist.epochs.push_back({epoch_loss / static_cast<double>(std::max<std::size_t>(batches, 1)), val_rmse});
        if (!std::isfinite(val_rmse)) {
            hist.diverged = true;
            hist.diverged_epoch = static_cast<std::size_t>(epoch);
            break;
        }
        if (val_rmse < best_rmse) {
            best_rmse = val_rmse;
            best_params = m.layers;
            hist.best_epoch = static_cast<std::size_t>(epoch);
        }
    }
    if (cfg.early_best || hist.diverged) m.layers = best_params;
    return hist;
}

}  // namespace nasreg
