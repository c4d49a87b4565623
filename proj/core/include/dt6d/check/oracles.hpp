#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dt6d/image.hpp"
#include "dt6d/mesh.hpp"
#include "dt6d/pose.hpp"
#include "dt6d/render.hpp"

// Independent reference implementations used to cross-check the production
// paths: quaternion algebra vs. trig matrix composition, per-pixel ray
// casting vs. the rasterizer, central finite differences vs. hand-written
// backprop. Kept separate from the code they verify.

namespace dt6d::check {

struct Quat {
  double w = 1, x = 0, y = 0, z = 0;

  static Quat from_axis_angle(const Vec3& axis, double angle_rad);
  Quat operator*(const Quat& o) const;
  Mat3 to_matrix() const;
};

/// Same Euler convention as euler_to_matrix, derived through quaternion
/// composition instead of matrix products.
Mat3 euler_matrix_quaternion_oracle(double rx_deg, double ry_deg, double rz_deg);

/// Reference renderer: one ray through each pixel center, Moller-Trumbore
/// intersection against every triangle, nearest hit shaded with the same
/// lighting model as the rasterizer.
RgbdFrame raycast_render(const TriMesh& mesh, const RigidPose& pose, const CameraIntrinsics& k,
                         const Lighting& light);

/// Kolmogorov-Smirnov D statistic of samples against U(lo,hi).
double ks_statistic_uniform(std::vector<double> samples, double lo, double hi);

/// Critical D at significance alpha (0.01) for n samples.
double ks_critical_alpha01(size_t n);

/// Chi-squared statistic of samples against U(lo,hi), equal-width bins.
double chi2_statistic_uniform(const std::vector<double>& samples, double lo, double hi, int bins);

/// chi^2 critical value at alpha = 0.01 for the given degrees of freedom
/// (supported: the df values the suite uses).
double chi2_critical_alpha01(int dof);

struct GradCheckReport {
  double max_rel_err = 0;
  size_t checked = 0;
};

/// Central finite differences of `loss` against analytic gradients, over
/// every entry of every span. `loss` must be a pure function of the
/// parameter values.
GradCheckReport finite_difference_check(std::span<double* const> params,
                                        std::span<const size_t> sizes,
                                        std::span<const double* const> analytic,
                                        const std::function<double()>& loss, double eps = 1e-5);

}  // namespace dt6d::check
