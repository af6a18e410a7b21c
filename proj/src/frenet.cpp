#include "ftrack/frenet.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ftrack/angle.hpp"
#include "ftrack/error.hpp"

namespace ftrack {

FrenetState ToFrenetAt(const PathSample& ref, const CartesianState& cart) {
  const double dx = cart.x - ref.x;
  const double dy = cart.y - ref.y;
  const double side = dy * std::cos(ref.theta) - dx * std::sin(ref.theta);
  const double dist = std::hypot(dx, dy);

  FrenetState fr;
  fr.s = ref.s;
  fr.l = side < 0.0 ? -dist : dist;

  const double one_minus_kl = 1.0 - ref.kappa * fr.l;
  if (std::abs(one_minus_kl) <= kFrenetSingularity) {
    throw Error(ErrorCode::kSingularCurvature,
                "1 - kappa_r * l = " + std::to_string(one_minus_kl));
  }
  const double dtheta = NormalizeAngle(cart.theta - ref.theta);
  if (std::abs(dtheta) >= std::numbers::pi / 2.0 - kFrenetSingularity) {
    throw Error(ErrorCode::kHeadingSingular,
                "heading error " + std::to_string(dtheta) + " rad");
  }
  const double cos_dt = std::cos(dtheta);
  const double sin_dt = std::sin(dtheta);
  const double tan_dt = sin_dt / cos_dt;

  fr.s_dot = cart.v * cos_dt / one_minus_kl;
  fr.l_prime = one_minus_kl * tan_dt;
  fr.l_dot = cart.v * sin_dt;

  // Rate of heading error per unit arc length, d(dtheta)/ds.
  const double dtheta_ds = cart.kappa * one_minus_kl / cos_dt - ref.kappa;
  const double kl_prime = ref.dkappa * fr.l + ref.kappa * fr.l_prime;
  fr.l_dprime = -kl_prime * tan_dt +
                one_minus_kl / (cos_dt * cos_dt) * dtheta_ds;
  fr.s_ddot = (cart.a * cos_dt -
               fr.s_dot * fr.s_dot * (fr.l_prime * dtheta_ds - kl_prime)) /
              one_minus_kl;
  fr.l_ddot = fr.l_dprime * fr.s_dot * fr.s_dot + fr.l_prime * fr.s_ddot;
  return fr;
}

FrenetState ToFrenet(const ReferencePath& path, const CartesianState& cart,
                     std::optional<double> hint_s,
                     const ProjectOptions& options) {
  double s = 0.0;
  try {
    s = path.Project(cart.x, cart.y, hint_s, options);
  } catch (const Error& e) {
    throw Error(ErrorCode::kProjectionFailed, e.what());
  }
  return ToFrenetAt(path.Sample(s), cart);
}

CartesianState ToCartesian(const ReferencePath& path, const FrenetState& fr) {
  const PathSample ref = path.Sample(fr.s);
  const double one_minus_kl = 1.0 - ref.kappa * fr.l;
  if (std::abs(one_minus_kl) <= kFrenetSingularity) {
    throw Error(ErrorCode::kSingularCurvature,
                "1 - kappa_r * l = " + std::to_string(one_minus_kl));
  }
  const double sin_r = std::sin(ref.theta);
  const double cos_r = std::cos(ref.theta);

  CartesianState c;
  c.x = ref.x - fr.l * sin_r;
  c.y = ref.y + fr.l * cos_r;
  const double dtheta = std::atan2(fr.l_prime, one_minus_kl);
  c.theta = NormalizeAngle(ref.theta + dtheta);
  const double along = fr.s_dot * one_minus_kl;
  c.v = std::sqrt(along * along + fr.l_dot * fr.l_dot);

  const double cos_dt = std::cos(dtheta);
  const double tan_dt = std::tan(dtheta);
  const double kl_prime = ref.dkappa * fr.l + ref.kappa * fr.l_prime;
  // Invert the l'' relation for the heading-error rate, then kappa_x.
  const double dtheta_ds = (fr.l_dprime + kl_prime * tan_dt) * cos_dt * cos_dt /
                           one_minus_kl;
  c.kappa = (dtheta_ds + ref.kappa) * cos_dt / one_minus_kl;
  // Invert the s_ddot relation for a_x.
  c.a = (fr.s_ddot * one_minus_kl +
         fr.s_dot * fr.s_dot * (fr.l_prime * dtheta_ds - kl_prime)) /
        cos_dt;
  return c;
}

}  // namespace ftrack
