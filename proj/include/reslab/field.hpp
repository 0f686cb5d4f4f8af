#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "reslab/errors.hpp"
#include "reslab/vec.hpp"

namespace reslab {

enum class Basin { minus, plus };

inline Basin opposite(Basin b) { return b == Basin::minus ? Basin::plus : Basin::minus; }
inline const char* basin_name(Basin b) { return b == Basin::minus ? "-" : "+"; }

// A time-periodic vector field b(s, x) with period 1 in the phase s.
// Immutable after construction; safe to share across workers.
class DriftField {
 public:
  virtual ~DriftField() = default;

  virtual int dim() const = 0;
  virtual void drift(double s, const double* x, double* out) const = 0;

  // Present iff b = -grad_x U.
  virtual bool has_potential() const { return false; }
  virtual double potential(double /*s*/, const double* /*x*/) const {
    throw ConfigError("field has no potential");
  }

  // Analytic spatial Jacobian of b, row-major d*d. Returns false when only
  // finite differences are available.
  virtual bool jacobian(double /*s*/, const double* /*x*/, double* /*out*/) const {
    return false;
  }

  // Inward-drift constants: <x, b(s,x)> < -eta * |x| for |x| >= r0.
  double eta() const { return eta_; }
  double r0() const { return r0_; }

  Vec drift_at(double s, const Vec& x) const {
    Vec out(dim());
    drift(s, x.data(), out.data());
    return out;
  }

 protected:
  double eta_ = 1.0;
  double r0_ = 3.0;
};

struct Hyperplane {
  Vec normal;     // unit normal
  double offset;  // plane is {x : <x, normal> = offset}

  double signed_distance(const double* x) const {
    return dot(x, normal.data(), static_cast<int>(normal.size())) - offset;
  }
};

// Equilibria and separatrix data for a two-basin field (Assumption-style
// geometry: equilibria and boundary do not move with the phase).
struct GeometrySpec {
  Vec x_minus;
  Vec x_plus;
  std::optional<Hyperplane> separatrix;

  const Vec& equilibrium(Basin b) const { return b == Basin::minus ? x_minus : x_plus; }
  double equilibrium_gap() const { return dist(x_minus, x_plus); }

  // Orthonormal basis of the separatrix tangent space (d-1 vectors).
  std::vector<Vec> tangent_basis() const;
  // A point on the separatrix (projection of the origin).
  Vec separatrix_point() const;
};

enum class BasinLabel { minus, plus, unresolved };

inline const char* basin_label_name(BasinLabel b) {
  switch (b) {
    case BasinLabel::minus: return "-";
    case BasinLabel::plus: return "+";
    default: return "unresolved";
  }
}

}  // namespace reslab
