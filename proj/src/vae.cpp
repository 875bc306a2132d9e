#include "nasreg/vae.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nasreg/optimizer.hpp"

namespace nasreg {

namespace {

double relu(double t) { return t > 0.0 ? t : 0.0; }
double relu_grad(double t) { return t > 0.0 ? 1.0 : 0.0; }

DenseLayer init_dense(std::size_t fan_in, std::size_t fan_out, bool relu_gain, Rng& rng) {
    const double limit = relu_gain ? std::sqrt(6.0 / static_cast<double>(fan_in))
                                   : std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseLayer l;
    l.w = Matrix(fan_in, fan_out);
    for (double& v : l.w.storage()) v = (2.0 * rng.next_uniform() - 1.0) * limit;
    l.b.assign(fan_out, 0.0);
    return l;
}

Matrix linear(const Matrix& x, const DenseLayer& l) {
    Matrix z = matmul(x, l.w);
    for (std::size_t r = 0; r < z.rows(); ++r)
        for (std::size_t c = 0; c < z.cols(); ++c) z(r, c) += l.b[c];
    return z;
}

Matrix relu_all(const Matrix& z) {
    Matrix a = z;
    for (double& v : a.storage()) v = relu(v);
    return a;
}

// accumulate dW = a_prev^T delta, db = column sums, return delta a_prev side
void linear_backward(const Matrix& a_prev, const DenseLayer& l, const Matrix& delta,
                     DenseLayer& grad, Matrix* delta_prev) {
    grad.w = matmul(transposed(a_prev), delta);
    grad.b.assign(l.b.size(), 0.0);
    for (std::size_t r = 0; r < delta.rows(); ++r)
        for (std::size_t c = 0; c < delta.cols(); ++c) grad.b[c] += delta(r, c);
    if (delta_prev) *delta_prev = matmul(delta, transposed(l.w));
}

}  // namespace

VaeModel vae_init(std::size_t input_width, Rng& rng) {
    if (input_width < 1) throw std::invalid_argument("vae_init: input_width must be >= 1");
    VaeModel m;
    m.input_width = input_width;
    m.enc_hidden = init_dense(input_width, VaeModel::kHiddenWidth, true, rng);
    m.enc_mu = init_dense(VaeModel::kHiddenWidth, VaeModel::kLatentWidth, false, rng);
    m.enc_logvar = init_dense(VaeModel::kHiddenWidth, VaeModel::kLatentWidth, false, rng);
    m.dec_hidden = init_dense(VaeModel::kLatentWidth, VaeModel::kHiddenWidth, true, rng);
    m.dec_out = init_dense(VaeModel::kHiddenWidth, input_width, false, rng);
    return m;
}

double gaussian_kl(std::span<const double> mu, std::span<const double> logvar) {
    double kl = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j)
        kl += -0.5 * (1.0 + logvar[j] - mu[j] * mu[j] - std::exp(logvar[j]));
    return kl;
}

VaeLossParts vae_loss_and_grad(const VaeModel& m, const Matrix& batch, const Matrix& eps,
                               VaeGradients* grads) {
    if (batch.cols() != m.input_width) throw std::invalid_argument("vae: batch width mismatch");
    if (eps.rows() != batch.rows() || eps.cols() != VaeModel::kLatentWidth)
        throw std::invalid_argument("vae: eps shape mismatch");
    const std::size_t b = batch.rows();
    const double inv_b = 1.0 / static_cast<double>(b);

    // forward
    const Matrix enc_z = linear(batch, m.enc_hidden);
    const Matrix h = relu_all(enc_z);
    const Matrix mu = linear(h, m.enc_mu);
    const Matrix lv = linear(h, m.enc_logvar);

    Matrix sigma = lv;
    for (double& v : sigma.storage()) v = std::exp(0.5 * v);
    Matrix z(b, VaeModel::kLatentWidth);
    for (std::size_t i = 0; i < z.storage().size(); ++i)
        z.storage()[i] = mu.storage()[i] + sigma.storage()[i] * eps.storage()[i];

    const Matrix dec_z = linear(z, m.dec_hidden);
    const Matrix g = relu_all(dec_z);
    const Matrix xhat = linear(g, m.dec_out);

    VaeLossParts parts;
    const double recon_weight = 1.0 / (2.0 * kVaeObservationVar);
    for (std::size_t i = 0; i < xhat.storage().size(); ++i) {
        const double e = xhat.storage()[i] - batch.storage()[i];
        parts.reconstruction += e * e;
    }
    parts.reconstruction *= inv_b * recon_weight;
    for (std::size_t r = 0; r < b; ++r) parts.kl += gaussian_kl(mu.row(r), lv.row(r));
    parts.kl *= inv_b;
    parts.total = parts.reconstruction + parts.kl;
    if (!std::isfinite(parts.total)) throw std::runtime_error("vae: non-finite loss");
    if (!grads) return parts;

    // backward
    Matrix dxhat(b, m.input_width);
    for (std::size_t i = 0; i < dxhat.storage().size(); ++i)
        dxhat.storage()[i] =
            2.0 * recon_weight * (xhat.storage()[i] - batch.storage()[i]) * inv_b;

    Matrix dg;
    linear_backward(g, m.dec_out, dxhat, grads->dec_out, &dg);
    for (std::size_t i = 0; i < dg.storage().size(); ++i) dg.storage()[i] *= relu_grad(dec_z.storage()[i]);
    Matrix dz;
    linear_backward(z, m.dec_hidden, dg, grads->dec_hidden, &dz);

    // reparameterization: z = mu + sigma*eps, sigma = exp(lv/2)
    Matrix dmu = dz;
    Matrix dlv(b, VaeModel::kLatentWidth);
    for (std::size_t i = 0; i < dlv.storage().size(); ++i)
        dlv.storage()[i] = dz.storage()[i] * eps.storage()[i] * sigma.storage()[i] * 0.5;

    // closed-form KL terms
    for (std::size_t i = 0; i < dmu.storage().size(); ++i) {
        dmu.storage()[i] += mu.storage()[i] * inv_b;
        dlv.storage()[i] += -0.5 * (1.0 - std::exp(lv.storage()[i])) * inv_b;
    }

    Matrix dh_mu, dh_lv;
    linear_backward(h, m.enc_mu, dmu, grads->enc_mu, &dh_mu);
    linear_backward(h, m.enc_logvar, dlv, grads->enc_logvar, &dh_lv);
    Matrix dh = dh_mu;
    for (std::size_t i = 0; i < dh.storage().size(); ++i) dh.storage()[i] += dh_lv.storage()[i];
    for (std::size_t i = 0; i < dh.storage().size(); ++i) dh.storage()[i] *= relu_grad(enc_z.storage()[i]);
    linear_backward(batch, m.enc_hidden, dh, grads->enc_hidden, nullptr);
    return parts;
}

VaeTrainResult vae_train(const Dataset& normalized, const VaeTrainConfig& cfg) {
    if (normalized.n_rows() == 0) throw std::invalid_argument("vae_train: empty dataset");
    const std::size_t n = normalized.n_rows();
    const std::size_t width = normalized.n_features() + 1;

    Matrix joint(n, width);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < normalized.n_features(); ++c) joint(r, c) = normalized.features(r, c);
        joint(r, width - 1) = normalized.targets[r];
    }

    Rng init_rng(derive_seed(cfg.seed, "vae-init"));
    Rng train_rng(derive_seed(cfg.seed, "vae-train"));
    VaeTrainResult result;
    result.model = vae_init(width, init_rng);
    VaeModel& m = result.model;

    AdamOptimizer adam(cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon);
    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    VaeGradients grads;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle(std::span<std::size_t>(order), train_rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t count = std::min(batch, n - start);
            Matrix bx(count, width);
            for (std::size_t i = 0; i < count; ++i)
                std::copy_n(joint.row(order[start + i]).begin(), width, bx.row(i).begin());
            Matrix eps(count, VaeModel::kLatentWidth);
            for (double& v : eps.storage()) v = train_rng.next_gaussian();

            VaeLossParts parts;
            try {
                parts = vae_loss_and_grad(m, bx, eps, &grads);
            } catch (const std::runtime_error& e) {
                throw std::runtime_error(std::string(e.what()) + " at epoch " + std::to_string(epoch));
            }

            const std::vector<double*> params = {
                m.enc_hidden.w.storage().data(), m.enc_hidden.b.data(),
                m.enc_mu.w.storage().data(),     m.enc_mu.b.data(),
                m.enc_logvar.w.storage().data(), m.enc_logvar.b.data(),
                m.dec_hidden.w.storage().data(), m.dec_hidden.b.data(),
                m.dec_out.w.storage().data(),    m.dec_out.b.data()};
            const std::vector<const double*> gptrs = {
                grads.enc_hidden.w.storage().data(), grads.enc_hidden.b.data(),
                grads.enc_mu.w.storage().data(),     grads.enc_mu.b.data(),
                grads.enc_logvar.w.storage().data(), grads.enc_logvar.b.data(),
                grads.dec_hidden.w.storage().data(), grads.dec_hidden.b.data(),
                grads.dec_out.w.storage().data(),    grads.dec_out.b.data()};
            const std::vector<std::size_t> sizes = {
                m.enc_hidden.w.storage().size(), m.enc_hidden.b.size(),
                m.enc_mu.w.storage().size(),     m.enc_mu.b.size(),
                m.enc_logvar.w.storage().size(), m.enc_logvar.b.size(),
                m.dec_hidden.w.storage().size(), m.dec_hidden.b.size(),
                m.dec_out.w.storage().size(),    m.dec_out.b.size()};
            adam.step(params, gptrs, sizes);
            epoch_loss += parts.total;
            ++batches;
        }
        result.loss_trace.push_back(epoch_loss / static_cast<double>(std::max<std::size_t>(batches, 1)));
    }
    return result;
}

Matrix vae_generate(const VaeModel& m, std::size_t count, Rng& rng) {
    if (count < 1) throw std::invalid_argument("vae_generate: count must be >= 1");
    Matrix z(count, VaeModel::kLatentWidth);
    for (double& v : z.storage()) v = rng.next_gaussian();
    const Matrix g = relu_all(linear(z, m.dec_hidden));
    Matrix rows = linear(g, m.dec_out);
    const double noise_sd = std::sqrt(kVaeObservationVar);
    for (double& v : rows.storage()) v += noise_sd * rng.next_gaussian();
    if (!rows.all_finite()) throw std::runtime_error("vae_generate: non-finite output");
    return rows;
}

Dataset augment_dataset(const Dataset& d, const VaeModel& m, std::size_t multiplier, Rng& rng) {
    if (m.input_width != d.n_features() + 1)
        throw std::invalid_argument("augment_dataset: model width does not match dataset");
    Dataset out = d;
    if (multiplier == 0) return out;
    const std::size_t extra = multiplier * d.n_rows();
    const Matrix rows = vae_generate(m, extra, rng);

    Matrix features(d.n_rows() + extra, d.n_features());
    std::copy(d.features.storage().begin(), d.features.storage().end(), features.storage().begin());
    out.targets.resize(d.n_rows() + extra);
    out.synthetic_flags.resize(d.n_rows() + extra);
    for (std::size_t r = 0; r < extra; ++r) {
        for (std::size_t c = 0; c < d.n_features(); ++c) features(d.n_rows() + r, c) = rows(r, c);
        out.targets[d.n_rows() + r] = rows(r, d.n_features());
        out.synthetic_flags[d.n_rows() + r] = true;
    }
    out.features = std::move(features);
    return out;
}

}  // namespace nasreg
