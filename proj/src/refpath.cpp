#include "ftrack/refpath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ftrack/angle.hpp"
#include "ftrack/error.hpp"

namespace ftrack {
namespace {

constexpr double kMinChord = 1e-9;

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 8> kGlNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

// Second derivatives of the natural cubic spline through (u_i, v_i).
std::vector<double> NaturalSplineMoments(const std::vector<double>& u,
                                         const std::vector<double>& v) {
  const std::size_t n = u.size();
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;
  const std::size_t k = n - 2;
  std::vector<double> diag(k), upper(k), rhs(k);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = u[i] - u[i - 1];
    const double h1 = u[i + 1] - u[i];
    diag[i - 1] = 2.0 * (h0 + h1);
    upper[i - 1] = h1;
    rhs[i - 1] = 6.0 * ((v[i + 1] - v[i]) / h1 - (v[i] - v[i - 1]) / h0);
  }
  // Thomas algorithm; the sub-diagonal entry of row r is h_{r}, which equals
  // upper[r - 1].
  for (std::size_t r = 1; r < k; ++r) {
    const double w = upper[r - 1] / diag[r - 1];
    diag[r] -= w * upper[r - 1];
    rhs[r] -= w * rhs[r - 1];
  }
  m[k] = rhs[k - 1] / diag[k - 1];
  for (std::size_t r = k - 1; r-- > 0;) {
    m[r + 1] = (rhs[r] - upper[r] * m[r + 2]) / diag[r];
  }
  return m;
}

}  // namespace

ReferencePath::ReferencePath(std::span<const Waypoint> waypoints)
    : waypoints_(waypoints.begin(), waypoints.end()) {
  if (waypoints_.size() < 3) {
    throw Error(ErrorCode::kTooFewWaypoints,
                "need at least 3 waypoints, got " +
                    std::to_string(waypoints_.size()));
  }
  const std::size_t n = waypoints_.size();
  std::vector<double> u(n, 0.0), xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Waypoint& w = waypoints_[i];
    if (!std::isfinite(w.x) || !std::isfinite(w.y)) {
      throw Error(ErrorCode::kInvalidParams,
                  "non-finite waypoint at index " + std::to_string(i));
    }
    xs[i] = w.x;
    ys[i] = w.y;
    if (i > 0) {
      const double chord = std::hypot(w.x - xs[i - 1], w.y - ys[i - 1]);
      if (!(chord > kMinChord)) {
        throw Error(ErrorCode::kDuplicateWaypoint,
                    "waypoints " + std::to_string(i - 1) + " and " +
                        std::to_string(i) + " coincide");
      }
      u[i] = u[i - 1] + chord;
    }
  }

  const std::vector<double> mx = NaturalSplineMoments(u, xs);
  const std::vector<double> my = NaturalSplineMoments(u, ys);
  segments_.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = u[i + 1] - u[i];
    Segment& seg = segments_[i];
    seg.du = h;
    auto fill = [h](std::array<double, 4>& c, double v0, double v1, double m0,
                    double m1) {
      c[0] = v0;
      c[1] = (v1 - v0) / h - h * (2.0 * m0 + m1) / 6.0;
      c[2] = 0.5 * m0;
      c[3] = (m1 - m0) / (6.0 * h);
    };
    fill(seg.cx, xs[i], xs[i + 1], mx[i], mx[i + 1]);
    fill(seg.cy, ys[i], ys[i + 1], my[i], my[i + 1]);
  }

  BuildArcTable();

  coarse_stride_ = total_length_ / static_cast<double>(kCoarseSamples);
  coarse_.resize(kCoarseSamples + 1);
  for (std::size_t j = 0; j <= kCoarseSamples; ++j) {
    const double s = std::min(total_length_, coarse_stride_ * static_cast<double>(j));
    std::size_t seg = 0;
    double t = 0.0;
    LocateParam(s, seg, t);
    const Derivs d = Evaluate(seg, t);
    coarse_[j] = {d.x, d.y};
  }
}

ReferencePath::Derivs ReferencePath::Evaluate(std::size_t segment,
                                              double t) const {
  const Segment& g = segments_[segment];
  const auto& a = g.cx;
  const auto& b = g.cy;
  Derivs d{};
  d.x = a[0] + t * (a[1] + t * (a[2] + t * a[3]));
  d.y = b[0] + t * (b[1] + t * (b[2] + t * b[3]));
  d.dx = a[1] + t * (2.0 * a[2] + 3.0 * t * a[3]);
  d.dy = b[1] + t * (2.0 * b[2] + 3.0 * t * b[3]);
  d.ddx = 2.0 * a[2] + 6.0 * t * a[3];
  d.ddy = 2.0 * b[2] + 6.0 * t * b[3];
  d.dddx = 6.0 * a[3];
  d.dddy = 6.0 * b[3];
  return d;
}

double ReferencePath::Speed(std::size_t segment, double t) const {
  const auto& a = segments_[segment].cx;
  const auto& b = segments_[segment].cy;
  const double dx = a[1] + t * (2.0 * a[2] + 3.0 * t * a[3]);
  const double dy = b[1] + t * (2.0 * b[2] + 3.0 * t * b[3]);
  return std::sqrt(dx * dx + dy * dy);
}

double ReferencePath::SegmentArc(std::size_t segment, double t0,
                                 double t1) const {
  const double half = 0.5 * (t1 - t0);
  const double mid = 0.5 * (t1 + t0);
  double sum = 0.0;
  for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
    sum += kGlWeights[i] * Speed(segment, mid + half * kGlNodes[i]);
  }
  return half * sum;
}

void ReferencePath::BuildArcTable() {
  struct Cell {
    std::size_t segment;
    double t0;
    double length;
  };
  std::vector<Cell> cells;
  constexpr int kMaxDepth = 30;

  // Adaptive bisection: a cell is accepted once one Gauss-Legendre rule over
  // it agrees with the two rules over its halves.
  auto adapt = [&](auto&& self, std::size_t seg, double a, double b,
                   double whole, double tol, int depth) -> void {
    const double m = 0.5 * (a + b);
    const double left = SegmentArc(seg, a, m);
    const double right = SegmentArc(seg, m, b);
    if (depth >= kMaxDepth ||
        (depth > 0 && std::abs(left + right - whole) <= tol)) {
      cells.push_back({seg, a, left});
      cells.push_back({seg, m, right});
      return;
    }
    self(self, seg, a, m, left, 0.5 * tol, depth + 1);
    self(self, seg, m, b, right, 0.5 * tol, depth + 1);
  };

  knot_s_.assign(1, 0.0);
  for (std::size_t seg = 0; seg < segments_.size(); ++seg) {
    const double du = segments_[seg].du;
    const double whole = SegmentArc(seg, 0.0, du);
    const std::size_t first = cells.size();
    adapt(adapt, seg, 0.0, du, whole, 1e-13 * std::max(1.0, whole), 0);
    double len = 0.0;
    for (std::size_t c = first; c < cells.size(); ++c) len += cells[c].length;
    knot_s_.push_back(knot_s_.back() + len);
  }

  arc_nodes_.clear();
  arc_nodes_.reserve(cells.size());
  double s = 0.0;
  for (const Cell& c : cells) {
    arc_nodes_.push_back({s, c.segment, c.t0});
    s += c.length;
  }
  total_length_ = s;
}

void ReferencePath::LocateParam(double s, std::size_t& segment,
                                double& t) const {
  auto it = std::upper_bound(
      arc_nodes_.begin(), arc_nodes_.end(), s,
      [](double value, const ArcNode& node) { return value < node.s; });
  std::size_t k = (it == arc_nodes_.begin())
                      ? 0
                      : static_cast<std::size_t>(it - arc_nodes_.begin()) - 1;
  const ArcNode& node = arc_nodes_[k];
  segment = node.segment;
  const double t0 = node.t;
  double t1 = segments_[segment].du;
  double s1 = (k + 1 < arc_nodes_.size()) ? arc_nodes_[k + 1].s : total_length_;
  if (k + 1 < arc_nodes_.size() && arc_nodes_[k + 1].segment == segment) {
    t1 = arc_nodes_[k + 1].t;
  }
  const double target = s - node.s;
  const double cell = s1 - node.s;
  if (cell <= 0.0 || target <= 0.0) {
    t = t0;
    return;
  }
  if (target >= cell) {
    t = t1;
    return;
  }

  // Newton on arc(t0, t) = target, safeguarded by the cell bracket.
  double lo = t0, hi = t1;
  double x = t0 + (t1 - t0) * (target / cell);
  for (int iter = 0; iter < 50; ++iter) {
    const double f = SegmentArc(segment, t0, x) - target;
    if (f > 0.0) hi = x; else lo = x;
    const double step = f / Speed(segment, x);
    double next = x - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  t = x;
}

PathSample ReferencePath::Sample(double s) const {
  if (!(s >= 0.0 && s <= total_length_)) {
    throw Error(ErrorCode::kOutOfRange,
                "s=" + std::to_string(s) + " outside [0, " +
                    std::to_string(total_length_) + "]");
  }
  std::size_t seg = 0;
  double t = 0.0;
  LocateParam(s, seg, t);
  const Derivs d = Evaluate(seg, t);

  const double speed2 = d.dx * d.dx + d.dy * d.dy;
  const double speed = std::sqrt(speed2);
  const double cross = d.dx * d.ddy - d.dy * d.ddx;
  const double dot = d.dx * d.ddx + d.dy * d.ddy;
  const double dcross = d.dx * d.dddy - d.dy * d.dddx;

  PathSample out;
  out.s = s;
  out.x = d.x;
  out.y = d.y;
  out.theta = NormalizeAngle(std::atan2(d.dy, d.dx));
  out.kappa = cross / (speed2 * speed);
  // dk/du = (cross' |r'|^2 - 3 cross (r'.r'')) / |r'|^5, then divide by ds/du.
  const double dk_du =
      (dcross * speed2 - 3.0 * cross * dot) / (speed2 * speed2 * speed);
  out.dkappa = dk_du / speed;
  return out;
}

double ReferencePath::Distance2(double s, double x, double y) const {
  std::size_t seg = 0;
  double t = 0.0;
  LocateParam(s, seg, t);
  const Derivs d = Evaluate(seg, t);
  const double ex = d.x - x;
  const double ey = d.y - y;
  return ex * ex + ey * ey;
}

ReferencePath::Candidate ReferencePath::Refine(double lo, double hi, double x,
                                               double y,
                                               double tolerance) const {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - (b - a) * kInvPhi;
  double d = a + (b - a) * kInvPhi;
  double fc = Distance2(c, x, y);
  double fd = Distance2(d, x, y);
  while (b - a > tolerance) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - (b - a) * kInvPhi;
      fc = Distance2(c, x, y);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + (b - a) * kInvPhi;
      fd = Distance2(d, x, y);
    }
  }
  Candidate best{0.5 * (a + b), 0.0};
  best.dist2 = Distance2(best.s, x, y);
  for (double end : {lo, hi}) {
    const double e = Distance2(end, x, y);
    if (e < best.dist2) best = {end, e};
  }

  // Golden section stalls where the squared distance is flat to rounding;
  // polish with Newton on the stationarity condition (p(s) - q) . t(s) = 0.
  for (int iter = 0; iter < 4; ++iter) {
    const PathSample p = Sample(best.s);
    const double tx = std::cos(p.theta), ty = std::sin(p.theta);
    const double ex = p.x - x, ey = p.y - y;
    const double g = ex * tx + ey * ty;
    const double normal_offset = -ex * -ty + -ey * tx;  // (q - p) . n
    const double dg = 1.0 - p.kappa * normal_offset;
    if (!(dg > 0.0)) break;
    const double next = std::clamp(best.s - g / dg, lo, hi);
    const double e = Distance2(next, x, y);
    if (!(e <= best.dist2)) break;
    const bool converged = std::abs(next - best.s) < 1e-13 * std::max(1.0, total_length_);
    best = {next, e};
    if (converged) break;
  }
  return best;
}

double ReferencePath::ProjectGlobal(double x, double y,
                                    const ProjectOptions& options) const {
  const std::size_t n = coarse_.size();
  std::vector<double> d2(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double ex = coarse_[j].x - x;
    const double ey = coarse_[j].y - y;
    d2[j] = ex * ex + ey * ey;
  }

  // Discrete local minima of the coarse scan, best first.
  std::vector<std::size_t> minima;
  for (std::size_t j = 0; j < n; ++j) {
    const bool left_ok = (j == 0) || d2[j] <= d2[j - 1];
    const bool right_ok = (j + 1 == n) || d2[j] < d2[j + 1];
    if (left_ok && right_ok) minima.push_back(j);
  }
  std::sort(minima.begin(), minima.end(),
            [&](std::size_t a, std::size_t b) { return d2[a] < d2[b]; });
  constexpr std::size_t kMaxCandidates = 16;
  if (minima.size() > kMaxCandidates) minima.resize(kMaxCandidates);

  std::vector<Candidate> refined;
  refined.reserve(minima.size());
  for (std::size_t j : minima) {
    const double lo = (j == 0) ? 0.0 : coarse_stride_ * static_cast<double>(j - 1);
    const double hi = std::min(total_length_, coarse_stride_ * static_cast<double>(j + 1));
    refined.push_back(Refine(lo, hi, x, y, options.tolerance));
  }
  const auto best_it = std::min_element(
      refined.begin(), refined.end(),
      [](const Candidate& a, const Candidate& b) { return a.dist2 < b.dist2; });
  const Candidate best = *best_it;
  const double best_d = std::sqrt(best.dist2);
  if (best_d > options.corridor) {
    throw Error(ErrorCode::kTooFarFromPath,
                "query is " + std::to_string(best_d) + " m from the path");
  }

  const double tol = options.ambiguity_abs_tol + options.ambiguity_rel_tol * best_d;
  for (const Candidate& c : refined) {
    if (std::abs(c.s - best.s) > 2.0 * coarse_stride_ &&
        std::sqrt(c.dist2) - best_d <= tol) {
      throw Error(ErrorCode::kProjectionAmbiguous,
                  "equidistant path points at s=" + std::to_string(best.s) +
                      " and s=" + std::to_string(c.s));
    }
  }
  return best.s;
}

double ReferencePath::Project(double x, double y, std::optional<double> hint,
                              const ProjectOptions& options) const {
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw Error(ErrorCode::kInvalidParams, "non-finite query point");
  }
  if (!hint) return ProjectGlobal(x, y, options);

  const double center = std::clamp(*hint, 0.0, total_length_);
  const double half = std::max(options.hint_window, 4.0 * coarse_stride_);
  const double lo = std::max(0.0, center - half);
  const double hi = std::min(total_length_, center + half);

  const auto first = static_cast<std::size_t>(std::ceil(lo / coarse_stride_));
  const auto last = std::min(coarse_.size() - 1,
                             static_cast<std::size_t>(std::floor(hi / coarse_stride_)));
  std::size_t best_j = first;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t j = first; j <= last; ++j) {
    const double ex = coarse_[j].x - x;
    const double ey = coarse_[j].y - y;
    const double d2 = ex * ex + ey * ey;
    if (d2 < best_d2) {
      best_d2 = d2;
      best_j = j;
    }
  }
  const double a = std::max(lo, coarse_stride_ * (static_cast<double>(best_j) - 1.0));
  const double b = std::min(hi, coarse_stride_ * (static_cast<double>(best_j) + 1.0));
  const Candidate c = Refine(a, b, x, y, options.tolerance);

  const bool at_lower_edge = lo > 0.0 && c.s - lo < coarse_stride_;
  const bool at_upper_edge = hi < total_length_ && hi - c.s < coarse_stride_;
  if (at_lower_edge || at_upper_edge) return ProjectGlobal(x, y, options);
  if (std::sqrt(c.dist2) > options.corridor) {
    throw Error(ErrorCode::kTooFarFromPath,
                "query is " + std::to_string(std::sqrt(c.dist2)) +
                    " m from the path");
  }
  return c.s;
}

}  // namespace ftrack
