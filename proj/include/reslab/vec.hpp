#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace reslab {

using Vec = std::vector<double>;

inline double dot(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const double* a, int d) { return std::sqrt(dot(a, a, d)); }

inline double norm(const Vec& a) { return norm(a.data(), static_cast<int>(a.size())); }

inline double dist(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}

inline double dist(const Vec& a, const Vec& b) {
  return dist(a.data(), b.data(), static_cast<int>(a.size()));
}

inline bool all_finite(const double* a, int d) {
  for (int i = 0; i < d; ++i)
    if (!std::isfinite(a[i])) return false;
  return true;
}

}  // namespace reslab
