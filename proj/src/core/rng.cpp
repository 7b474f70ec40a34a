#include "motifrep/core/rng.h"

#include <cmath>

namespace motifrep {

double Rng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * 3.14159265358979323846 * u2);
  return r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace motifrep
