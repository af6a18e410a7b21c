#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace ftrack {

struct Waypoint {
  double x = 0.0;
  double y = 0.0;
};

// Pose and curvature of the reference path at arc length s.
struct PathSample {
  double s = 0.0;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;   // (-pi, pi]
  double kappa = 0.0;   // 1/m
  double dkappa = 0.0;  // dkappa/ds, 1/m^2
};

struct ProjectOptions {
  // Queries farther than this from the path are rejected.
  double corridor = 50.0;
  // Half-width of the local search window used when a hint is given.
  double hint_window = 5.0;
  // Two minima in separate basins closer than abs + rel * d are ambiguous.
  double ambiguity_abs_tol = 1e-6;
  double ambiguity_rel_tol = 1e-3;
  // Golden-section stopping width.
  double tolerance = 1e-8;
};

// Open planar curve through waypoints: a chord-length natural cubic spline,
// reparameterized by arc length. Immutable after construction.
class ReferencePath {
 public:
  static constexpr std::size_t kCoarseSamples = 2000;

  // Throws kTooFewWaypoints (< 3 points), kDuplicateWaypoint, kInvalidParams
  // (non-finite coordinates).
  explicit ReferencePath(std::span<const Waypoint> waypoints);

  double total_length() const { return total_length_; }
  const std::vector<Waypoint>& waypoints() const { return waypoints_; }

  // Arc length at each waypoint; strictly increasing, starts at 0.
  const std::vector<double>& knot_lengths() const { return knot_s_; }

  // Throws kOutOfRange when s is outside [0, total_length].
  PathSample Sample(double s) const;

  // Arc length of the path point nearest to (x, y). With a hint the search is
  // restricted to a window around it and falls back to a global search if the
  // minimum lands on the window edge. Throws kProjectionAmbiguous or
  // kTooFarFromPath.
  double Project(double x, double y, std::optional<double> hint = std::nullopt,
                 const ProjectOptions& options = {}) const;

 private:
  struct Segment {
    // Polynomial coefficients in local parameter t in [0, du].
    std::array<double, 4> cx{};
    std::array<double, 4> cy{};
    double du = 0.0;
  };

  // Start of an adaptive quadrature cell: arc length, segment, local t.
  struct ArcNode {
    double s = 0.0;
    std::size_t segment = 0;
    double t = 0.0;
  };

  struct Derivs {
    double x, y, dx, dy, ddx, ddy, dddx, dddy;
  };

  struct Candidate {
    double s;
    double dist2;
  };

  Derivs Evaluate(std::size_t segment, double t) const;
  double Speed(std::size_t segment, double t) const;
  double SegmentArc(std::size_t segment, double t0, double t1) const;
  void BuildArcTable();
  void LocateParam(double s, std::size_t& segment, double& t) const;
  double Distance2(double s, double x, double y) const;
  Candidate Refine(double lo, double hi, double x, double y,
                   double tolerance) const;
  double ProjectGlobal(double x, double y, const ProjectOptions& options) const;

  std::vector<Waypoint> waypoints_;
  std::vector<Segment> segments_;
  std::vector<ArcNode> arc_nodes_;
  std::vector<double> knot_s_;
  std::vector<Waypoint> coarse_;  // positions at j * coarse_stride_
  double coarse_stride_ = 0.0;
  double total_length_ = 0.0;
};

}  // namespace ftrack
