#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nasreg/matrix.hpp"
#include "nasreg/mlp.hpp"
#include "nasreg/rng.hpp"

namespace nasreg {

// --- architecture <-> unit cube encoding ------------------------------------

constexpr inline std::size_t kSpaceDims = 6;

// Integers min-max scaled, categoricals ordinal /(cardinality-1), learning
// rate scaled in log10 space. Order: hidden_layers, neurons, activation,
// batch_size, log10 learning rate, loss.
std::array<double, kSpaceDims> encode_spec(const ArchitectureSpec& spec);

// Rounds each coordinate to the nearest valid level. Throws on points
// outside the unit cube.
ArchitectureSpec decode_point(std::span<const double> point);

// --- Gaussian-process surrogate ----------------------------------------------

struct KernelHyper {
    double length_scale = 0.5;
    double signal_var = 1.0;
    double noise_var = 1e-4;
};

// Matern 5/2 on Euclidean distance.
double matern52(std::span<const double> a, std::span<const double> b, const KernelHyper& h);

struct GpSurrogate {
    Matrix x;                       // evaluated points, one per row
    std::vector<double> y_raw;      // observations in objective units
    std::vector<double> y_scaled;   // standardized observations
    double y_mean = 0.0;
    double y_sd = 1.0;
    KernelHyper hyper;
    Matrix chol;                    // lower factor of K + noise*I
    std::vector<double> alpha;      // (K + noise*I)^-1 y_scaled
    double chol_jitter = 0.0;

    double best_observed() const;   // incumbent (minimum observation)
};

// Hyperparameters picked by exhaustive log-space grid search on the log
// marginal likelihood; observations standardized internally.
GpSurrogate gp_fit(const Matrix& x, std::span<const double> y);
GpSurrogate gp_fit_with(const Matrix& x, std::span<const double> y, const KernelHyper& hyper);

double gp_log_marginal_likelihood(const Matrix& x, std::span<const double> y_scaled,
                                  const KernelHyper& hyper);

struct GpPosterior {
    double mean = 0.0;      // objective units
    double variance = 0.0;  // objective units squared, clamped >= 0
};

GpPosterior gp_posterior(const GpSurrogate& s, std::span<const double> point);

// --- acquisitions -------------------------------------------------------------

enum class AcquisitionKind { EI, PI, LCB };
enum class SuggestStrategy { EI, PI, LCB, GpHedge };

std::string to_string(AcquisitionKind k);
std::string to_string(SuggestStrategy s);
SuggestStrategy strategy_from_string(const std::string& s);

// Minimization convention: higher score = more promising candidate.
// EI and PI improve on `best`; the LCB score is -(mean - beta*sd).
double acquisition_score(const GpSurrogate& s, std::span<const double> point, AcquisitionKind kind,
                         double best, double beta);

// Portfolio bookkeeping for EI/PI/LCB: probabilities follow softmax(eta *
// gains); after each new observation a base acquisition's gain grows by the
// negated posterior mean at its nominee.
struct HedgeState {
    double eta = 1.0;
    std::array<double, 3> gains{};  // EI, PI, LCB
    std::array<std::vector<double>, 3> nominees;
    bool has_nominees = false;

    std::array<double, 3> probabilities() const;
};

struct Suggestion {
    std::vector<double> point;
    AcquisitionKind kind;                 // base acquisition that produced it
    std::array<double, 3> hedge_probs{};  // zero unless the hedge chose
    bool from_hedge = false;
};

// Maximizes the acquisition over n_candidates seeded uniform cube draws plus
// one Gaussian perturbation (sigma 0.05, clipped) of every evaluated point.
Suggestion gp_suggest(const GpSurrogate& s, SuggestStrategy strategy, HedgeState& hedge, Rng& rng,
                      std::size_t n_candidates = 1024, double beta = 1.96);

// Call after refitting the surrogate with the new observation.
void hedge_observe(HedgeState& hedge, const GpSurrogate& updated);

double standard_normal_cdf(double z);
double standard_normal_pdf(double z);

}  // namespace nasreg
