#include "nvkerr/geometry.hpp"

#include <cmath>

#include "nvkerr/error.hpp"
#include "nvkerr/polarization.hpp"

namespace nvkerr {

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

Vec3 normalized(const Vec3& v) {
  const double len = norm(v);
  if (!(len > 0.0) || !std::isfinite(len)) throw DomainError("direction vector must be nonzero and finite");
  return {v[0] / len, v[1] / len, v[2] / len};
}

void BeamGeometry::validate() const {
  if (!(incidence_deg >= 0.0 && incidence_deg < 90.0)) {
    throw DomainError("geometry: incidence angle must lie in [0, 90) degrees");
  }
  if (!(n_outside >= 1.0) || !(n_inside >= 1.0)) throw DomainError("geometry: refractive indices must be >= 1");
}

namespace {

double sin_refracted(const BeamGeometry& g) {
  g.validate();
  const double s = g.n_outside * std::sin(deg_to_rad(g.incidence_deg)) / g.n_inside;
  if (s > 1.0) throw DomainError("geometry: total internal reflection, no refracted beam");
  return s;
}

}  // namespace

double refraction_angle(const BeamGeometry& g) { return rad_to_deg(std::asin(sin_refracted(g))); }

double transverse_field_fraction(const BeamGeometry& g) { return std::sin(std::asin(sin_refracted(g))); }

const std::array<Vec3, 4>& nv_axes() {
  static const std::array<Vec3, 4> axes = [] {
    const double k = 1.0 / std::sqrt(3.0);
    return std::array<Vec3, 4>{Vec3{k, k, k}, Vec3{k, -k, -k}, Vec3{-k, -k, k}, Vec3{-k, k, -k}};
  }();
  return axes;
}

NvProjections nv_projections(const Vec3& field_direction) {
  const double len = norm(field_direction);
  if (!(len > 0.0)) throw DomainError("nv_projections: field direction is the zero vector");
  if (std::abs(len - 1.0) > 1e-9) throw DomainError("nv_projections: field direction must be a unit vector");
  NvProjections out;
  double total = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    out.cosines[i] = dot(field_direction, nv_axes()[i]);
    total += std::abs(out.cosines[i]);
  }
  out.mean_abs = total / 4.0;
  return out;
}

}  // namespace nvkerr
