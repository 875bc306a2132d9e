#include "nasreg/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace nasreg {

void AdamOptimizer::step(std::span<double* const> params, std::span<const double* const> grads,
                         std::span<const std::size_t> sizes) {
    if (params.size() != grads.size() || params.size() != sizes.size())
        throw std::invalid_argument("AdamOptimizer::step: block count mismatch");
    if (m_.empty()) {
        m_.resize(params.size());
        v_.resize(params.size());
        for (std::size_t b = 0; b < params.size(); ++b) {
            m_[b].assign(sizes[b], 0.0);
            v_[b].assign(sizes[b], 0.0);
        }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    // folded bias correction: lr*(m/bc1)/(sqrt(v/bc2)+eps) with the scalar
    // factors hoisted out of the per-parameter loop
    const double lr_t = lr_ * std::sqrt(bc2) / bc1;
    const double eps_t = eps_ * std::sqrt(bc2);
    for (std::size_t b = 0; b < params.size(); ++b) {
        double* p = params[b];
        const double* g = grads[b];
        auto& m = m_[b];
        auto& v = v_[b];
        if (m.size() != sizes[b]) throw std::invalid_argument("AdamOptimizer::step: block size changed");
        for (std::size_t i = 0; i < sizes[b]; ++i) {
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
            p[i] -= lr_t * m[i] / (std::sqrt(v[i]) + eps_t);
        }
    }
}

}  // namespace nasreg
