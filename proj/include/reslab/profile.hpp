#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace reslab {

// Periodic energy function sampled on a uniform phase grid over [0,1),
// evaluated between nodes by monotone cubic (PCHIP) interpolation.
class EnergyProfile {
 public:
  EnergyProfile() = default;
  EnergyProfile(std::vector<double> values, std::vector<std::uint8_t> flags = {});

  static EnergyProfile from_function(const std::function<double(double)>& f, int grid_size);

  int grid_size() const { return static_cast<int>(value_.size()); }
  double phase(int j) const { return static_cast<double>(j) / grid_size(); }
  const std::vector<double>& values() const { return value_; }
  const std::vector<std::uint8_t>& flags() const { return flag_; }
  bool any_flagged() const;

  // Interpolated evaluation, periodic in s.
  double operator()(double s) const;
  double derivative(double s) const;

  // Grid extremes (discrete; the interpolant cannot overshoot them by
  // monotonicity of PCHIP).
  double min_value() const;
  double max_value() const;
  int argmax_index() const;
  int argmin_index() const;

  // Profile rotated left by `grid_steps` nodes: shifted(j) = e(j + steps).
  EnergyProfile shifted(int grid_steps) const;

  // Centered second difference at node j (periodic).
  double second_difference(int j) const;

 private:
  void build_slopes();

  std::vector<double> value_;
  std::vector<double> slope_;  // PCHIP slopes at the nodes
  std::vector<std::uint8_t> flag_;
};

// Assumption-style shape check: exactly one (cyclic) local max and one local
// min on the grid, strictly monotone in between, all values finite and
// positive. Returns false with a reason when violated.
bool check_profile_shape(const EnergyProfile& p, std::string* why = nullptr);

// First phase on the decreasing branch where the second difference changes
// sign from negative to positive (the point of maximal decrease). Returns
// false if no sign change exists.
bool find_inflection(const EnergyProfile& p, double* phase, double* value);

// Profile pair interchange format: CSV with columns s, e_minus, e_plus, flags
// (flags = minus_flag + 2 * plus_flag), one row per grid phase.
struct ProfilePair {
  EnergyProfile minus;
  EnergyProfile plus;
};

void write_profiles_csv(const std::string& path, const std::string& meta,
                        const EnergyProfile& minus, const EnergyProfile& plus);
ProfilePair read_profiles_csv(const std::string& path);

}  // namespace reslab
