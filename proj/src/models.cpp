#include "extremo/models.hpp"

#include <cmath>
#include <locale>
#include <sstream>

#include "extremo/error.hpp"

namespace extremo {

namespace {

std::string format_number(double x) {
  if (x == kInf) return "inf";
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

IntervalSet::IntervalSet(double lower_, double upper_)
    : lower(lower_), upper(upper_) {
  if (!(lower > 0.0) || !std::isfinite(lower))
    throw DomainError("interval lower endpoint must be positive and finite");
  if (!(upper > lower))
    throw DomainError("interval upper endpoint must exceed the lower one");
}

std::string IntervalSet::to_string() const {
  return "(" + format_number(lower) + "," + format_number(upper) + ")";
}

MmaModel::MmaModel(double phi_, int d_, std::optional<int> radius, Norm norm_)
    : phi(phi_), d(d_), trunc_radius(0), norm(norm_) {
  if (!(phi > 0.0 && phi < 1.0))
    throw DomainError("MMA parameter phi must lie in (0, 1)");
  if (d < 1) throw DomainError("MMA dimension must be >= 1");
  trunc_radius = radius ? *radius : default_truncation_radius(phi);
  if (trunc_radius < 1) throw DomainError("MMA truncation radius must be >= 1");
}

int MmaModel::default_truncation_radius(double phi) {
  if (!(phi > 0.0 && phi < 1.0))
    throw DomainError("MMA parameter phi must lie in (0, 1)");
  int r = static_cast<int>(std::ceil(std::log(1e-12) / std::log(phi)));
  if (r < 1) r = 1;
  while (std::pow(phi, r) >= 1e-12) ++r;
  return r;
}

double MmaModel::weight(double z_norm) const noexcept {
  if (z_norm > trunc_radius) return 0.0;
  return std::pow(phi, z_norm);
}

std::string MmaModel::tag() const {
  return "mma(phi=" + format_number(phi) + ",R=" + std::to_string(trunc_radius) +
         ",norm=" + to_string(norm) + ")";
}

Variogram::Variogram(double theta_, double alpha_) : theta(theta_), alpha(alpha_) {
  if (!(theta >= 0.0) || !std::isfinite(theta))
    throw DomainError("variogram scale theta must be finite and nonnegative");
  if (!(alpha > 0.0 && alpha <= 2.0))
    throw DomainError("variogram exponent alpha must lie in (0, 2]");
}

double Variogram::operator()(const Lag& h) const {
  return at_distance(norm(h, Norm::euclidean));
}

double Variogram::at_distance(double r) const noexcept {
  if (r == 0.0) return 0.0;
  return theta * std::pow(r, alpha);
}

std::string Variogram::tag() const {
  return "power(theta=" + format_number(theta) + ",alpha=" + format_number(alpha) +
         ")";
}

BrModel::BrModel(Variogram variogram_, int d_) : variogram(variogram_), d(d_) {
  if (d < 1) throw DomainError("Brown-Resnick dimension must be >= 1");
}

std::string BrModel::tag() const { return "br(" + variogram.tag() + ")"; }

}  // namespace extremo
