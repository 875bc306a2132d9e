#pragma once

#include <span>
#include <vector>

namespace nasreg {

// Adam over a fixed list of parameter blocks. Moment buffers are allocated on
// the first step; the block layout must not change between steps.
class AdamOptimizer {
public:
    explicit AdamOptimizer(double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                           double epsilon = 1e-8)
        : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

    void step(std::span<double* const> params, std::span<const double* const> grads,
              std::span<const std::size_t> sizes);

    long steps_taken() const noexcept { return t_; }

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

}  // namespace nasreg
