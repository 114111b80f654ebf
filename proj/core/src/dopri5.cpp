#include "hype/dopri5.hpp"

#include <algorithm>
#include <cmath>

namespace hype {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kMinShrink = 0.2;
constexpr double kMaxGrow = 10.0;

} // namespace

Dopri5::Dopri5(std::size_t dimension, OdeOptions options)
    : n_(dimension), options_(options), y_(dimension), y_new_(dimension), work_(dimension), k1_(dimension),
      k2_(dimension), k3_(dimension), k4_(dimension), k5_(dimension), k6_(dimension), k7_(dimension),
      err_(dimension), r1_(dimension), r2_(dimension), r3_(dimension), r4_(dimension), r5_(dimension) {}

void Dopri5::restart(double t, std::span<const double> y, const Rhs& f) {
    t_ = t;
    t_old_ = t;
    std::copy(y.begin(), y.end(), y_.begin());
    f(t_, y_, k1_);
    // Keep the previous step size across discontinuities; it is a good guess
    // for piecewise-smooth fields and avoids a cold start after every jump.
    if (!(h_ > 0.0)) {
        h_ = initial_step(f);
    }
    std::copy(y_.begin(), y_.end(), r1_.begin());
    std::fill(r2_.begin(), r2_.end(), 0.0);
    std::fill(r3_.begin(), r3_.end(), 0.0);
    std::fill(r4_.begin(), r4_.end(), 0.0);
    std::fill(r5_.begin(), r5_.end(), 0.0);
}

double Dopri5::initial_step(const Rhs& f) {
    if (n_ == 0) {
        return std::min(1.0, options_.max_step);
    }
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        const double sk = options_.atol + options_.rtol * std::abs(y_[i]);
        dnf += (k1_[i] / sk) * (k1_[i] / sk);
        dny += (y_[i] / sk) * (y_[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, options_.max_step);
    for (std::size_t i = 0; i < n_; ++i) {
        work_[i] = y_[i] + h * k1_[i];
    }
    f(t_ + h, work_, k2_);
    double der2 = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        const double sk = options_.atol + options_.rtol * std::abs(y_[i]);
        der2 += ((k2_[i] - k1_[i]) / sk) * ((k2_[i] - k1_[i]) / sk);
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, options_.max_step});
}

bool Dopri5::step(double t_limit, const Rhs& f) {
    bool rejected_last = false;
    for (;;) {
        double h = std::min({h_, t_limit - t_, options_.max_step});
        if (!(h > 0.0) || t_ + h == t_) {
            return false;
        }
        const double* y = y_.data();
        for (std::size_t i = 0; i < n_; ++i) work_[i] = y[i] + h * a21 * k1_[i];
        f(t_ + c2 * h, work_, k2_);
        for (std::size_t i = 0; i < n_; ++i) work_[i] = y[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
        f(t_ + c3 * h, work_, k3_);
        for (std::size_t i = 0; i < n_; ++i) work_[i] = y[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
        f(t_ + c4 * h, work_, k4_);
        for (std::size_t i = 0; i < n_; ++i)
            work_[i] = y[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
        f(t_ + c5 * h, work_, k5_);
        for (std::size_t i = 0; i < n_; ++i)
            work_[i] = y[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i]);
        const double t_new = t_limit - t_ == h ? t_limit : t_ + h;
        f(t_new, work_, k6_);
        for (std::size_t i = 0; i < n_; ++i)
            y_new_[i] = y[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]);
        f(t_new, y_new_, k7_);

        double err = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < n_; ++i) {
            err_[i] = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
            const double sk = options_.atol + options_.rtol * std::max(std::abs(y[i]), std::abs(y_new_[i]));
            err += (err_[i] / sk) * (err_[i] / sk);
            finite = finite && std::isfinite(y_new_[i]);
        }
        err = n_ == 0 ? 0.0 : std::sqrt(err / static_cast<double>(n_));
        if (!finite || !std::isfinite(err)) {
            ++rejected_;
            h_ = h * kMinShrink;
            if (h_ < 1e-14 * std::max(1.0, std::abs(t_))) {
                return false;
            }
            rejected_last = true;
            continue;
        }

        if (err <= 1.0) {
            for (std::size_t i = 0; i < n_; ++i) {
                const double ydiff = y_new_[i] - y[i];
                const double bspl = h * k1_[i] - ydiff;
                r1_[i] = y[i];
                r2_[i] = ydiff;
                r3_[i] = bspl;
                r4_[i] = ydiff - h * k7_[i] - bspl;
                r5_[i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] + d7 * k7_[i]);
            }
            t_old_ = t_;
            t_ = t_new;
            std::swap(y_, y_new_);
            std::swap(k1_, k7_);
            ++accepted_;
            double grow = err == 0.0 ? kMaxGrow : std::min(kMaxGrow, std::max(kMinShrink, kSafety * std::pow(err, -0.2)));
            if (rejected_last) {
                grow = std::min(grow, 1.0);
            }
            // A step clipped by t_limit says nothing about the natural size.
            if (h >= h_) {
                h_ = h * grow;
            }
            return true;
        }
        ++rejected_;
        rejected_last = true;
        h_ = h * std::max(kMinShrink, kSafety * std::pow(err, -0.2));
        if (h_ < 1e-14 * std::max(1.0, std::abs(t_))) {
            return false;
        }
    }
}

void Dopri5::dense(double t, std::span<double> out) const {
    const double h = t_ - t_old_;
    if (h == 0.0) {
        std::copy(y_.begin(), y_.end(), out.begin());
        return;
    }
    const double theta = (t - t_old_) / h;
    const double theta1 = 1.0 - theta;
    for (std::size_t i = 0; i < n_; ++i) {
        out[i] = r1_[i] + theta * (r2_[i] + theta1 * (r3_[i] + theta * (r4_[i] + theta1 * r5_[i])));
    }
}

} // namespace hype
