#include "reslab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "reslab/errors.hpp"
#include "reslab/io.hpp"

namespace reslab {

EnergyProfile::EnergyProfile(std::vector<double> values, std::vector<std::uint8_t> flags)
    : value_(std::move(values)), flag_(std::move(flags)) {
  if (value_.size() < 4) throw ConfigError("energy profile needs at least 4 grid points");
  if (flag_.empty()) flag_.assign(value_.size(), 0);
  if (flag_.size() != value_.size()) throw ConfigError("profile flag size mismatch");
  for (double v : value_)
    if (!std::isfinite(v)) throw ConfigError("energy profile values must be finite");
  build_slopes();
}

EnergyProfile EnergyProfile::from_function(const std::function<double(double)>& f,
                                           int grid_size) {
  std::vector<double> v(grid_size);
  for (int j = 0; j < grid_size; ++j) v[j] = f(static_cast<double>(j) / grid_size);
  return EnergyProfile(std::move(v));
}

bool EnergyProfile::any_flagged() const {
  return std::any_of(flag_.begin(), flag_.end(), [](std::uint8_t f) { return f != 0; });
}

void EnergyProfile::build_slopes() {
  // Fritsch-Butland monotone slopes on the uniform periodic grid.
  const int m = grid_size();
  const double dx = 1.0 / m;
  slope_.assign(m, 0.0);
  for (int j = 0; j < m; ++j) {
    const double d_prev = (value_[j] - value_[(j + m - 1) % m]) / dx;
    const double d_next = (value_[(j + 1) % m] - value_[j]) / dx;
    if (d_prev * d_next > 0.0)
      slope_[j] = 2.0 * d_prev * d_next / (d_prev + d_next);
  }
}

double EnergyProfile::operator()(double s) const {
  const int m = grid_size();
  double u = s - std::floor(s);
  double pos = u * m;
  int j = static_cast<int>(pos);
  if (j >= m) j = m - 1;
  const double t = pos - j;
  const double dx = 1.0 / m;
  const int j1 = (j + 1) % m;
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
  const double h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t);
  const double h11 = t * t * (t - 1);
  return h00 * value_[j] + h10 * dx * slope_[j] + h01 * value_[j1] + h11 * dx * slope_[j1];
}

double EnergyProfile::derivative(double s) const {
  const int m = grid_size();
  double u = s - std::floor(s);
  double pos = u * m;
  int j = static_cast<int>(pos);
  if (j >= m) j = m - 1;
  const double t = pos - j;
  const double dx = 1.0 / m;
  const int j1 = (j + 1) % m;
  const double g00 = 6 * t * t - 6 * t;
  const double g10 = 3 * t * t - 4 * t + 1;
  const double g01 = -6 * t * t + 6 * t;
  const double g11 = 3 * t * t - 2 * t;
  return (g00 * value_[j] + g10 * dx * slope_[j] + g01 * value_[j1] + g11 * dx * slope_[j1]) /
         dx;
}

double EnergyProfile::min_value() const { return *std::min_element(value_.begin(), value_.end()); }
double EnergyProfile::max_value() const { return *std::max_element(value_.begin(), value_.end()); }

int EnergyProfile::argmax_index() const {
  return static_cast<int>(std::max_element(value_.begin(), value_.end()) - value_.begin());
}

int EnergyProfile::argmin_index() const {
  return static_cast<int>(std::min_element(value_.begin(), value_.end()) - value_.begin());
}

EnergyProfile EnergyProfile::shifted(int grid_steps) const {
  const int m = grid_size();
  int k = ((grid_steps % m) + m) % m;
  std::vector<double> v(m);
  std::vector<std::uint8_t> f(m);
  for (int j = 0; j < m; ++j) {
    v[j] = value_[(j + k) % m];
    f[j] = flag_[(j + k) % m];
  }
  return EnergyProfile(std::move(v), std::move(f));
}

double EnergyProfile::second_difference(int j) const {
  const int m = grid_size();
  const double dx = 1.0 / m;
  const double prev = value_[(j + m - 1) % m];
  const double next = value_[(j + 1) % m];
  return (next - 2.0 * value_[j] + prev) / (dx * dx);
}

bool check_profile_shape(const EnergyProfile& p, std::string* why) {
  const auto& v = p.values();
  const int m = p.grid_size();
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  int maxima = 0, minima = 0;
  for (int j = 0; j < m; ++j) {
    if (!(v[j] > 0.0)) return fail("profile value not positive at index " + std::to_string(j));
    const double prev = v[(j + m - 1) % m];
    const double next = v[(j + 1) % m];
    if (v[j] == prev) return fail("profile has a flat step at index " + std::to_string(j));
    if (v[j] > prev && v[j] > next) ++maxima;
    if (v[j] < prev && v[j] < next) ++minima;
  }
  if (maxima != 1 || minima != 1)
    return fail("profile has " + std::to_string(maxima) + " maxima and " +
                std::to_string(minima) + " minima on the grid; need exactly one of each");
  return true;
}

void write_profiles_csv(const std::string& path, const std::string& meta,
                        const EnergyProfile& minus, const EnergyProfile& plus) {
  if (minus.grid_size() != plus.grid_size())
    throw ConfigError("profile pair must share one phase grid");
  CsvWriter csv(path, meta, {"s", "e_minus", "e_plus", "flags"});
  for (int j = 0; j < minus.grid_size(); ++j) {
    const int flags = minus.flags()[j] + 2 * plus.flags()[j];
    csv.row({CsvWriter::cell(minus.phase(j)), CsvWriter::cell(minus.values()[j]),
             CsvWriter::cell(plus.values()[j]), std::to_string(flags)});
  }
}

ProfilePair read_profiles_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read profile file: " + path);
  std::vector<double> vm, vp;
  std::vector<std::uint8_t> fm, fp;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {  // column header row
      if (line.rfind("s,", 0) != 0)
        throw ConfigError("profile file has an unexpected header: " + path);
      header_seen = true;
      continue;
    }
    std::istringstream ss(line);
    std::string cell;
    double cells[4];
    for (int i = 0; i < 4; ++i) {
      if (!std::getline(ss, cell, ',')) throw ConfigError("short profile row in " + path);
      cells[i] = std::strtod(cell.c_str(), nullptr);
    }
    vm.push_back(cells[1]);
    vp.push_back(cells[2]);
    const int flags = static_cast<int>(cells[3]);
    fm.push_back(static_cast<std::uint8_t>(flags & 1));
    fp.push_back(static_cast<std::uint8_t>((flags >> 1) & 1));
  }
  if (vm.size() < 4) throw ConfigError("profile file has too few rows: " + path);
  return ProfilePair{EnergyProfile(std::move(vm), std::move(fm)),
                     EnergyProfile(std::move(vp), std::move(fp))};
}

bool find_inflection(const EnergyProfile& p, double* phase, double* value) {
  const int m = p.grid_size();
  const int j_max = p.argmax_index();
  const int j_min = p.argmin_index();
  const int len = ((j_min - j_max) % m + m) % m;
  // walk the decreasing branch looking for the - to + sign change of e''
  for (int k = 1; k + 1 < len; ++k) {
    const int j = (j_max + k) % m;
    const double a = p.second_difference(j);
    const double b = p.second_difference((j + 1) % m);
    if (a < 0.0 && b >= 0.0) {
      // linear interpolation of the zero crossing between nodes j and j+1
      const double t = a / (a - b);
      const double s = (j + t) / m;
      if (phase) *phase = s - std::floor(s);
      if (value) *value = p(s);
      return true;
    }
  }
  return false;
}

}  // namespace reslab
