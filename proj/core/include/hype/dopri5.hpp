#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace hype {

struct OdeOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double max_step = std::numeric_limits<double>::infinity();
};

/// Adaptive Dormand-Prince 5(4) with the standard fourth-order dense output.
class Dopri5 {
  public:
    using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

    Dopri5(std::size_t dimension, OdeOptions options);

    /// Starts (or restarts, after a discontinuity) at (t, y).
    void restart(double t, std::span<const double> y, const Rhs& f);

    /// Takes one accepted step, never passing `t_limit`. Returns false if
    /// the step size underflowed or the state became non-finite.
    bool step(double t_limit, const Rhs& f);

    /// Interpolated state anywhere in the last accepted step.
    void dense(double t, std::span<double> out) const;

    [[nodiscard]] double t() const noexcept { return t_; }
    [[nodiscard]] double t_previous() const noexcept { return t_old_; }
    [[nodiscard]] std::span<const double> y() const noexcept { return y_; }
    [[nodiscard]] std::size_t accepted_steps() const noexcept { return accepted_; }
    [[nodiscard]] std::size_t rejected_steps() const noexcept { return rejected_; }

  private:
    double initial_step(const Rhs& f);

    std::size_t n_;
    OdeOptions options_;
    double t_ = 0.0;
    double t_old_ = 0.0;
    double h_ = 0.0;
    std::vector<double> y_, y_new_, work_, k1_, k2_, k3_, k4_, k5_, k6_, k7_, err_;
    std::vector<double> r1_, r2_, r3_, r4_, r5_;
    std::size_t accepted_ = 0;
    std::size_t rejected_ = 0;
};

} // namespace hype
