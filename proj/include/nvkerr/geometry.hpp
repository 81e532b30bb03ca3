#pragma once

#include <array>

namespace nvkerr {

using Vec3 = std::array<double, 3>;

double norm(const Vec3& v);
double dot(const Vec3& a, const Vec3& b);
/// Throws DomainError for the zero vector.
Vec3 normalized(const Vec3& v);

struct BeamGeometry {
  double incidence_deg = 20.0;  ///< pump angle from the surface normal
  double n_outside = 1.0;
  double n_inside = 2.41;       ///< diamond near 800 nm

  /// 0 <= incidence < 90 and both indices >= 1.
  void validate() const;
};

/// Snell refraction angle inside the crystal, degrees from the normal.
double refraction_angle(const BeamGeometry& g);

/// Fraction of the IFE field (along the refracted beam) lying perpendicular
/// to the surface normal: sin of the refraction angle.
double transverse_field_fraction(const BeamGeometry& g);

/// Unit vectors along [111], [1-1-1], [-1-11], [-11-1].
const std::array<Vec3, 4>& nv_axes();

struct NvProjections {
  std::array<double, 4> cosines{};  ///< cos(field, axis) in nv_axes() order
  double mean_abs = 0.0;
};

/// Projections of a unit field direction (|v| = 1 within 1e-9) on the NV axes.
NvProjections nv_projections(const Vec3& field_direction);

}  // namespace nvkerr
