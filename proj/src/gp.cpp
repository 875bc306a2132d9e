#include "nasreg/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nasreg {

namespace {

constexpr double kLog10LrMin = -4.0;                  // log10(1e-4)
const double kLog10LrMax = std::log10(0.05);

double scale_int(int v, int lo, int hi) {
    return static_cast<double>(v - lo) / static_cast<double>(hi - lo);
}

int unscale_level(double coord, int lo, int hi) {
    const double raw = coord * static_cast<double>(hi - lo) + static_cast<double>(lo);
    const long rounded = std::lround(raw);
    return static_cast<int>(std::clamp<long>(rounded, lo, hi));
}

std::size_t nearest_index(double coord, std::size_t cardinality) {
    const double raw = coord * static_cast<double>(cardinality - 1);
    const long rounded = std::lround(raw);
    return static_cast<std::size_t>(std::clamp<long>(rounded, 0, static_cast<long>(cardinality - 1)));
}

constexpr Activation kActivationOrder[] = {Activation::ReLU,      Activation::Tanh,
                                           Activation::Identity,  Activation::Elu,
                                           Activation::LeakyReLU, Activation::Sigmoid};

std::size_t activation_index(Activation a) {
    for (std::size_t i = 0; i < kActivationCount; ++i)
        if (kActivationOrder[i] == a) return i;
    throw std::invalid_argument("unknown activation");
}

std::size_t batch_index(int batch) {
    for (std::size_t i = 0; i < std::size(kBatchSizeLevels); ++i)
        if (kBatchSizeLevels[i] == batch) return i;
    throw std::invalid_argument("batch_size not a search-space level");
}

}  // namespace

std::array<double, kSpaceDims> encode_spec(const ArchitectureSpec& spec) {
    spec.validate();
    std::array<double, kSpaceDims> p{};
    p[0] = scale_int(spec.hidden_layers, 1, 10);
    p[1] = scale_int(spec.neurons_per_layer, 10, 100);
    p[2] = static_cast<double>(activation_index(spec.activation)) / (kActivationCount - 1);
    p[3] = static_cast<double>(batch_index(spec.batch_size)) / (std::size(kBatchSizeLevels) - 1);
    p[4] = (std::log10(spec.learning_rate) - kLog10LrMin) / (kLog10LrMax - kLog10LrMin);
    p[5] = spec.loss == LossKind::L1 ? 0.0 : 1.0;
    return p;
}

ArchitectureSpec decode_point(std::span<const double> point) {
    if (point.size() != kSpaceDims) throw std::invalid_argument("decode_point: need 6 coordinates");
    for (double v : point)
        if (!(v >= -1e-9 && v <= 1.0 + 1e-9))
            throw std::invalid_argument("decode_point: coordinate outside the unit cube");
    ArchitectureSpec spec;
    spec.hidden_layers = unscale_level(point[0], 1, 10);
    spec.neurons_per_layer = unscale_level(point[1], 10, 100);
    spec.activation = kActivationOrder[nearest_index(point[2], kActivationCount)];
    spec.batch_size = kBatchSizeLevels[nearest_index(point[3], std::size(kBatchSizeLevels))];
    const double log_lr = std::clamp(point[4], 0.0, 1.0) * (kLog10LrMax - kLog10LrMin) + kLog10LrMin;
    spec.learning_rate = std::clamp(std::pow(10.0, log_lr), kLearningRateMin, kLearningRateMax);
    spec.loss = nearest_index(point[5], 2) == 0 ? LossKind::L1 : LossKind::L2;
    spec.validate();
    return spec;
}

double matern52(std::span<const double> a, std::span<const double> b, const KernelHyper& h) {
    if (a.size() != b.size()) throw std::invalid_argument("matern52: dimension mismatch");
    if (!(h.length_scale > 0.0) || !(h.signal_var > 0.0))
        throw std::invalid_argument("matern52: hyperparameters must be positive");
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sq += d * d;
    }
    const double r = std::sqrt(sq);
    const double s = std::sqrt(5.0) * r / h.length_scale;
    return h.signal_var * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

double GpSurrogate::best_observed() const {
    return *std::min_element(y_raw.begin(), y_raw.end());
}

namespace {

Matrix kernel_matrix(const Matrix& x, const KernelHyper& h) {
    const std::size_t n = x.rows();
    Matrix k(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = matern52(x.row(i), x.row(j), h);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

struct FitPieces {
    Matrix chol;
    std::vector<double> alpha;
    double jitter = 0.0;
    double lml = 0.0;
};

FitPieces factor_and_lml(const Matrix& x, std::span<const double> y_scaled, const KernelHyper& h) {
    const std::size_t n = x.rows();
    Matrix k = kernel_matrix(x, h);
    for (std::size_t i = 0; i < n; ++i) k(i, i) += h.noise_var;
    FitPieces out;
    auto [lower, jitter] = cholesky_factor(k, 0.0);
    out.chol = std::move(lower);
    out.jitter = jitter;

    Matrix b(n, 1);
    for (std::size_t i = 0; i < n; ++i) b(i, 0) = y_scaled[i];
    const Matrix a = cholesky_solve(out.chol, b);
    out.alpha.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.alpha[i] = a(i, 0);

    double quad = 0.0, logdet = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        quad += y_scaled[i] * out.alpha[i];
        logdet += std::log(out.chol(i, i));
    }
    out.lml = -0.5 * quad - logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    return out;
}

}  // namespace

double gp_log_marginal_likelihood(const Matrix& x, std::span<const double> y_scaled,
                                  const KernelHyper& hyper) {
    return factor_and_lml(x, y_scaled, hyper).lml;
}

GpSurrogate gp_fit_with(const Matrix& x, std::span<const double> y, const KernelHyper& hyper) {
    if (x.rows() < 2) throw std::invalid_argument("gp_fit: need at least 2 points");
    if (x.rows() != y.size()) throw std::invalid_argument("gp_fit: row/observation mismatch");

    GpSurrogate s;
    s.x = x;
    s.y_raw.assign(y.begin(), y.end());
    if (hyper.noise_var < 1e-8)
        throw std::invalid_argument("gp_fit: noise variance must be >= 1e-8");

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    var /= static_cast<double>(y.size());
    s.y_mean = mean;
    s.y_sd = var > 0.0 ? std::sqrt(var) : 1.0;  // constant observations stay at 0
    s.y_scaled.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) s.y_scaled[i] = (y[i] - s.y_mean) / s.y_sd;

    s.hyper = hyper;
    auto pieces = factor_and_lml(s.x, s.y_scaled, s.hyper);
    s.chol = std::move(pieces.chol);
    s.alpha = std::move(pieces.alpha);
    s.chol_jitter = pieces.jitter;
    return s;
}

GpSurrogate gp_fit(const Matrix& x, std::span<const double> y) {
    if (x.rows() < 2) throw std::invalid_argument("gp_fit: need at least 2 points");
    if (x.rows() != y.size()) throw std::invalid_argument("gp_fit: row/observation mismatch");

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    var /= static_cast<double>(y.size());
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    std::vector<double> y_scaled(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) y_scaled[i] = (y[i] - mean) / sd;

    KernelHyper best;
    double best_lml = -std::numeric_limits<double>::infinity();
    for (int li = 0; li < 8; ++li) {
        KernelHyper h;
        h.length_scale = std::exp(std::log(0.05) +
                                  (std::log(2.0) - std::log(0.05)) * static_cast<double>(li) / 7.0);
        for (double sf2 : {0.25, 1.0, 4.0}) {
            h.signal_var = sf2;
            for (int ni = 0; ni < 6; ++ni) {
                h.noise_var = std::pow(10.0, -6.0 + static_cast<double>(ni));
                double lml;
                try {
                    lml = gp_log_marginal_likelihood(x, y_scaled, h);
                } catch (const std::runtime_error&) {
                    continue;  // non-PSD cell, skip
                }
                if (lml > best_lml) {
                    best_lml = lml;
                    best = h;
                }
            }
        }
    }
    if (!std::isfinite(best_lml)) throw std::runtime_error("gp_fit: no factorizable grid cell");
    return gp_fit_with(x, y, best);
}

GpPosterior gp_posterior(const GpSurrogate& s, std::span<const double> point) {
    const std::size_t n = s.x.rows();
    Matrix kstar(n, 1);
    for (std::size_t i = 0; i < n; ++i) kstar(i, 0) = matern52(s.x.row(i), point, s.hyper);

    double mean_scaled = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean_scaled += kstar(i, 0) * s.alpha[i];

    const Matrix v = cholesky_solve(s.chol, kstar);
    double reduction = 0.0;
    for (std::size_t i = 0; i < n; ++i) reduction += kstar(i, 0) * v(i, 0);
    const double var_scaled = std::max(0.0, matern52(point, point, s.hyper) - reduction);

    GpPosterior p;
    p.mean = mean_scaled * s.y_sd + s.y_mean;
    p.variance = var_scaled * s.y_sd * s.y_sd;
    return p;
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double standard_normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

std::string to_string(AcquisitionKind k) {
    switch (k) {
        case AcquisitionKind::EI: return "EI";
        case AcquisitionKind::PI: return "PI";
        case AcquisitionKind::LCB: return "LCB";
    }
    throw std::invalid_argument("unknown acquisition");
}

std::string to_string(SuggestStrategy s) {
    switch (s) {
        case SuggestStrategy::EI: return "EI";
        case SuggestStrategy::PI: return "PI";
        case SuggestStrategy::LCB: return "LCB";
        case SuggestStrategy::GpHedge: return "GP_HEDGE";
    }
    throw std::invalid_argument("unknown strategy");
}

SuggestStrategy strategy_from_string(const std::string& s) {
    if (s == "EI") return SuggestStrategy::EI;
    if (s == "PI") return SuggestStrategy::PI;
    if (s == "LCB") return SuggestStrategy::LCB;
    if (s == "GP_HEDGE") return SuggestStrategy::GpHedge;
    throw std::invalid_argument("unknown acquisition strategy '" + s + "'");
}

double acquisition_score(const GpSurrogate& s, std::span<const double> point, AcquisitionKind kind,
                         double best, double beta) {
    const GpPosterior p = gp_posterior(s, point);
    const double sd = std::sqrt(p.variance);
    switch (kind) {
        case AcquisitionKind::EI: {
            if (sd == 0.0) return std::max(best - p.mean, 0.0);
            const double z = (best - p.mean) / sd;
            return (best - p.mean) * standard_normal_cdf(z) + sd * standard_normal_pdf(z);
        }
        case AcquisitionKind::PI: {
            if (sd == 0.0) return best > p.mean ? 1.0 : 0.0;
            return standard_normal_cdf((best - p.mean) / sd);
        }
        case AcquisitionKind::LCB:
            return -(p.mean - beta * sd);
    }
    throw std::invalid_argument("unknown acquisition");
}

std::array<double, 3> HedgeState::probabilities() const {
    const double gmax = *std::max_element(gains.begin(), gains.end());
    std::array<double, 3> p{};
    double total = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        p[i] = std::exp(eta * (gains[i] - gmax));
        total += p[i];
    }
    for (auto& v : p) v /= total;
    return p;
}

namespace {

std::vector<std::vector<double>> build_candidates(const GpSurrogate& s, Rng& rng,
                                                  std::size_t n_candidates) {
    const std::size_t dims = s.x.cols();
    std::vector<std::vector<double>> cands;
    cands.reserve(n_candidates + s.x.rows());
    for (std::size_t i = 0; i < n_candidates; ++i) {
        std::vector<double> p(dims);
        for (auto& v : p) v = rng.next_uniform();
        cands.push_back(std::move(p));
    }
    for (std::size_t r = 0; r < s.x.rows(); ++r) {
        std::vector<double> p(dims);
        for (std::size_t c = 0; c < dims; ++c)
            p[c] = std::clamp(s.x(r, c) + 0.05 * rng.next_gaussian(), 0.0, 1.0);
        cands.push_back(std::move(p));
    }
    return cands;
}

std::size_t argmax_candidate(const GpSurrogate& s, const std::vector<std::vector<double>>& cands,
                             AcquisitionKind kind, double best, double beta) {
    std::size_t arg = 0;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const double v = acquisition_score(s, cands[i], kind, best, beta);
        if (v > top) {
            top = v;
            arg = i;
        }
    }
    return arg;
}

}  // namespace

Suggestion gp_suggest(const GpSurrogate& s, SuggestStrategy strategy, HedgeState& hedge, Rng& rng,
                      std::size_t n_candidates, double beta) {
    const auto cands = build_candidates(s, rng, n_candidates);
    const double best = s.best_observed();

    if (strategy != SuggestStrategy::GpHedge) {
        const auto kind = strategy == SuggestStrategy::EI   ? AcquisitionKind::EI
                          : strategy == SuggestStrategy::PI ? AcquisitionKind::PI
                                                            : AcquisitionKind::LCB;
        Suggestion out;
        out.point = cands[argmax_candidate(s, cands, kind, best, beta)];
        out.kind = kind;
        return out;
    }

    constexpr AcquisitionKind kBases[] = {AcquisitionKind::EI, AcquisitionKind::PI,
                                          AcquisitionKind::LCB};
    for (std::size_t i = 0; i < 3; ++i)
        hedge.nominees[i] = cands[argmax_candidate(s, cands, kBases[i], best, beta)];
    hedge.has_nominees = true;

    const auto probs = hedge.probabilities();
    const double u = rng.next_uniform();
    std::size_t pick = 2;
    double acc = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        acc += probs[i];
        if (u < acc) {
            pick = i;
            break;
        }
    }
    Suggestion out;
    out.point = hedge.nominees[pick];
    out.kind = kBases[pick];
    out.hedge_probs = probs;
    out.from_hedge = true;
    return out;
}

void hedge_observe(HedgeState& hedge, const GpSurrogate& updated) {
    if (!hedge.has_nominees) return;
    for (std::size_t i = 0; i < 3; ++i)
        hedge.gains[i] += -gp_posterior(updated, hedge.nominees[i]).mean;
    hedge.has_nominees = false;
}

}  // namespace nasreg
