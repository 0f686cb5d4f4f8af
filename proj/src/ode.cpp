#include "reslab/ode.hpp"

#include <algorithm>
#include <cmath>

namespace reslab {

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;

}  // namespace

OdeResult integrate_adaptive(const std::function<void(const double*, double*)>& f, Vec x0,
                             const std::function<OdeStop(double, const Vec&)>& on_step,
                             const OdeOptions& opts) {
  const int d = static_cast<int>(x0.size());
  Vec k1(d), k2(d), k3(d), k4(d), k5(d), k6(d), k7(d), tmp(d), x_new(d);

  double t = 0.0;
  double h = opts.h_init;
  long steps = 0;
  f(x0.data(), k1.data());  // FSAL seed

  while (steps < opts.max_steps) {
    h = std::min(h, opts.h_max);

    for (int i = 0; i < d; ++i) tmp[i] = x0[i] + h * kA21 * k1[i];
    f(tmp.data(), k2.data());
    for (int i = 0; i < d; ++i) tmp[i] = x0[i] + h * (kA31 * k1[i] + kA32 * k2[i]);
    f(tmp.data(), k3.data());
    for (int i = 0; i < d; ++i)
      tmp[i] = x0[i] + h * (kA41 * k1[i] + kA42 * k2[i] + kA43 * k3[i]);
    f(tmp.data(), k4.data());
    for (int i = 0; i < d; ++i)
      tmp[i] = x0[i] + h * (kA51 * k1[i] + kA52 * k2[i] + kA53 * k3[i] + kA54 * k4[i]);
    f(tmp.data(), k5.data());
    for (int i = 0; i < d; ++i)
      tmp[i] = x0[i] +
               h * (kA61 * k1[i] + kA62 * k2[i] + kA63 * k3[i] + kA64 * k4[i] + kA65 * k5[i]);
    f(tmp.data(), k6.data());
    for (int i = 0; i < d; ++i)
      x_new[i] = x0[i] + h * (kB1 * k1[i] + kB3 * k3[i] + kB4 * k4[i] + kB5 * k5[i] +
                              kB6 * k6[i]);
    f(x_new.data(), k7.data());

    double err = 0.0;
    for (int i = 0; i < d; ++i) {
      const double e = h * (kE1 * k1[i] + kE3 * k3[i] + kE4 * k4[i] + kE5 * k5[i] +
                            kE6 * k6[i] + kE7 * k7[i]);
      const double sc = opts.atol + opts.rtol * std::max(std::abs(x0[i]), std::abs(x_new[i]));
      err = std::max(err, std::abs(e) / sc);
    }

    if (err <= 1.0 || h <= 1e-14) {
      t += h;
      x0.swap(x_new);
      k1.swap(k7);
      ++steps;
      if (on_step(t, x0) == OdeStop::done) return {true, steps, t, x0};
    }
    const double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    h *= std::clamp(fac, 0.2, 5.0);
  }
  return {false, steps, t, x0};
}

}  // namespace reslab
