#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nasreg/dataset.hpp"
#include "nasreg/matrix.hpp"
#include "nasreg/rng.hpp"

namespace nasreg {

enum class Activation { ReLU, Tanh, Identity, Elu, LeakyReLU, Sigmoid };
enum class LossKind { L1, L2 };

constexpr inline std::size_t kActivationCount = 6;
std::string to_string(Activation a);
std::string to_string(LossKind l);
Activation activation_from_string(const std::string& s);
LossKind loss_from_string(const std::string& s);

double apply_activation(Activation a, double t);
double activation_derivative(Activation a, double t);  // w.r.t. pre-activation t

// One point of the architecture search space.
struct ArchitectureSpec {
    int hidden_layers = 1;         // 1..10
    int neurons_per_layer = 10;    // 10..100
    Activation activation = Activation::ReLU;
    int batch_size = 8;            // one of 4, 8, 16, 32, 64
    double learning_rate = 1e-3;   // [1e-4, 0.05]
    LossKind loss = LossKind::L2;

    void validate() const;  // throws std::invalid_argument when out of range
    bool operator==(const ArchitectureSpec&) const = default;
};

constexpr inline int kBatchSizeLevels[] = {4, 8, 16, 32, 64};
constexpr inline double kLearningRateMin = 1e-4;
constexpr inline double kLearningRateMax = 0.05;

struct DenseLayer {
    Matrix w;  // in x out
    std::vector<double> b;
};

// Fully-connected regressor: hidden layers share the spec's width and
// activation; the output head is a single linear unit.
struct MlpModel {
    ArchitectureSpec spec;
    std::size_t input_width = 0;
    std::vector<DenseLayer> layers;  // hidden_layers + 1 entries
};

// He-uniform init for the ReLU family, Xavier-uniform otherwise; zero biases.
MlpModel build_mlp(const ArchitectureSpec& spec, std::size_t input_width, Rng& rng);

std::vector<double> mlp_forward(const MlpModel& m, const Matrix& x);
double mlp_forward_one(const MlpModel& m, std::span<const double> x);

struct MlpGradients {
    std::vector<DenseLayer> layers;  // same shapes as the model
};

// Mean batch loss and its gradient w.r.t. every parameter. The L1 subgradient
// at zero residual is taken as 0.
double mlp_loss_and_grad(const MlpModel& m, const Matrix& x, std::span<const double> y,
                         LossKind loss, MlpGradients& out);
double mlp_loss(const MlpModel& m, const Matrix& x, std::span<const double> y, LossKind loss);

struct TrainConfig {
    int epochs = 300;
    bool early_best = true;  // keep parameters from the best-validation epoch
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
};

struct EpochStats {
    double train_loss = 0.0;
    double val_rmse = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;   // entry 0 is the pre-training state
    std::size_t optimizer_steps = 0;
    std::size_t best_epoch = 0;
    bool diverged = false;
    std::size_t diverged_epoch = 0;
};

// Seeded minibatch Adam using the spec's batch size and learning rate.
// Non-finite loss aborts the epoch loop; the best checkpoint so far is kept.
TrainHistory train_mlp(MlpModel& m, const Dataset& train, const Dataset& val,
                       const TrainConfig& cfg);

}  // namespace nasreg
