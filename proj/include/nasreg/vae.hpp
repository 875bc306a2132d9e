#pragma once

#include <cstdint>
#include <vector>

#include "nasreg/dataset.hpp"
#include "nasreg/matrix.hpp"
#include "nasreg/mlp.hpp"
#include "nasreg/rng.hpp"

namespace nasreg {

// Variational autoencoder over joint (features, target) rows in normalized
// space. Fixed geometry: hidden width 40, latent width 20, ReLU on hidden
// layers, identity heads and reconstruction output.
struct VaeModel {
    static constexpr std::size_t kHiddenWidth = 40;
    static constexpr std::size_t kLatentWidth = 20;

    std::size_t input_width = 0;
    DenseLayer enc_hidden;  // input_width x 40
    DenseLayer enc_mu;      // 40 x 20
    DenseLayer enc_logvar;  // 40 x 20
    DenseLayer dec_hidden;  // 20 x 40
    DenseLayer dec_out;     // 40 x input_width
};

struct VaeTrainConfig {
    double learning_rate = 1e-4;
    int batch_size = 8;
    int epochs = 200;
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
};

// Fixed variance of the Gaussian likelihood p(x|z) = N(decoder(z), var*I).
// It sets the reconstruction weight (1/(2 var) per squared error) and the
// noise added when sampling new rows.
constexpr inline double kVaeObservationVar = 0.25;

struct VaeLossParts {
    double total = 0.0;
    double reconstruction = 0.0;  // squared error / (2 var), summed per row, batch mean
    double kl = 0.0;              // closed-form diagonal-Gaussian KL, batch mean
};

struct VaeGradients {
    DenseLayer enc_hidden, enc_mu, enc_logvar, dec_hidden, dec_out;
};

VaeModel vae_init(std::size_t input_width, Rng& rng);

// -ELBO and gradients for one batch with the latent noise supplied explicitly
// (one row of eps per batch row), so the loss is a deterministic function.
VaeLossParts vae_loss_and_grad(const VaeModel& m, const Matrix& batch, const Matrix& eps,
                               VaeGradients* grads);

// Per-sample KL(q(z|x) || N(0, I)) for diagonal Gaussians.
double gaussian_kl(std::span<const double> mu, std::span<const double> logvar);

struct VaeTrainResult {
    VaeModel model;
    std::vector<double> loss_trace;  // per-epoch mean of total loss
};

VaeTrainResult vae_train(const Dataset& normalized, const VaeTrainConfig& cfg);

// Likelihood samples for latent draws z ~ N(0, I): decoder(z) plus Gaussian
// observation noise of variance kVaeObservationVar. Rows are in normalized
// space.
Matrix vae_generate(const VaeModel& m, std::size_t count, Rng& rng);

// Appends multiplier*n synthetic rows (flagged true) after the original rows.
// Decoder outputs split into features and target at the last column.
Dataset augment_dataset(const Dataset& d, const VaeModel& m, std::size_t multiplier, Rng& rng);

}  // namespace nasreg
