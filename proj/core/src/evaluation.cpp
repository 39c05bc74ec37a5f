#include "ringlio/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>

#include <fmt/format.h>

#include "ringlio/errors.hpp"
#include "ringlio/text_io.hpp"

namespace ringlio {

void validate_trajectory(const Trajectory& trajectory) {
  for (std::size_t k = 1; k < trajectory.size(); ++k) {
    if (!(trajectory[k].t > trajectory[k - 1].t)) {
      throw DomainError(fmt::format("trajectory timestamps must increase (index {}: {} after {})", k,
                                    trajectory[k].t, trajectory[k - 1].t));
    }
  }
}

Trajectory read_trajectory(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  Trajectory out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::istringstream fields{std::string(body)};
    std::vector<double> v;
    std::string tok;
    while (fields >> tok) {
      double value = 0.0;
      if (!parse_double(tok, value)) throw ParseError(path.string(), line_no, fmt::format("invalid number '{}'", tok));
      v.push_back(value);
    }
    if (v.size() != 8) {
      throw ParseError(path.string(), line_no, fmt::format("expected 8 fields 't x y z qx qy qz qw', got {}", v.size()));
    }
    const double qn = std::sqrt(v[4] * v[4] + v[5] * v[5] + v[6] * v[6] + v[7] * v[7]);
    if (!(std::abs(qn - 1.0) < 1e-3)) {
      throw ParseError(path.string(), line_no, fmt::format("quaternion norm {} is not 1", qn));
    }
    StampedPose s;
    s.t = v[0];
    s.pose.translation = Vec3(v[1], v[2], v[3]);
    s.pose.rotation = UnitQuaternion(v[7], v[4], v[5], v[6]);
    if (!out.empty() && !(s.t > out.back().t)) {
      throw ParseError(path.string(), line_no, "timestamps must be strictly increasing");
    }
    out.push_back(s);
  }
  return out;
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& trajectory) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  for (const auto& s : trajectory) {
    const auto& q = s.pose.rotation;
    const auto& p = s.pose.translation;
    os << fmt::format("{:.9f} {:.9f} {:.9f} {:.9f} {:.9f} {:.9f} {:.9f} {:.9f}\n", s.t, p.x(), p.y(), p.z(), q.x(),
                      q.y(), q.z(), q.w());
  }
}

std::vector<IndexPair> associate(const Trajectory& est, const Trajectory& gt, double max_dt) {
  if (est.empty() || gt.empty()) throw DomainError("associate: empty trajectory");
  struct Candidate {
    double dt;
    std::size_t est;
    std::size_t gt;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double t = est[i].t;
    auto lo = std::lower_bound(gt.begin(), gt.end(), t - max_dt,
                               [](const StampedPose& s, double v) { return s.t < v; });
    for (auto it = lo; it != gt.end() && it->t <= t + max_dt; ++it) {
      const double dt = std::abs(it->t - t);
      if (dt <= max_dt) candidates.push_back({dt, i, static_cast<std::size_t>(it - gt.begin())});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.dt, a.est, a.gt) < std::tie(b.dt, b.est, b.gt);
  });
  std::vector<bool> est_used(est.size(), false);
  std::vector<bool> gt_used(gt.size(), false);
  std::vector<IndexPair> pairs;
  for (const auto& c : candidates) {
    if (est_used[c.est] || gt_used[c.gt]) continue;
    est_used[c.est] = true;
    gt_used[c.gt] = true;
    pairs.push_back({c.est, c.gt});
  }
  if (pairs.empty()) {
    throw EmptyAssociationError(fmt::format("no estimate/ground-truth timestamps within {} s", max_dt));
  }
  std::sort(pairs.begin(), pairs.end(), [](const IndexPair& a, const IndexPair& b) { return a.est < b.est; });
  return pairs;
}

AssociatedPoses gather(const Trajectory& est, const Trajectory& gt, std::span<const IndexPair> pairs) {
  AssociatedPoses out;
  for (const auto& p : pairs) {
    out.t.push_back(gt.at(p.gt).t);
    out.est.push_back(est.at(p.est).pose);
    out.gt.push_back(gt.at(p.gt).pose);
  }
  return out;
}

std::vector<FramePair> frame_pairs(std::size_t n, std::size_t gap) {
  std::vector<FramePair> out;
  if (gap == 0) return out;
  for (std::size_t k = 0; k + gap < n; ++k) out.push_back({k, k + gap});
  return out;
}

namespace {

struct ErrorSum {
  double trans = 0.0;
  double rot = 0.0;
  std::size_t count = 0;

  void add(const PoseSE3& ei, const PoseSE3& ej, const PoseSE3& gi, const PoseSE3& gj) {
    const PoseSE3 delta = between(between(gi, gj), between(ei, ej));
    trans += delta.translation.norm();
    rot += rotation_angle(delta.rotation);
    ++count;
  }

  RelativeError mean() const {
    RelativeError e;
    e.pairs = count;
    if (count > 0) {
      e.e_trans = trans / static_cast<double>(count);
      e.e_rot = rot / static_cast<double>(count);
    }
    return e;
  }
};

}  // namespace

RelativeError relative_errors(std::span<const PoseSE3> est, std::span<const PoseSE3> gt,
                              std::span<const FramePair> pairs) {
  if (pairs.empty()) throw DomainError("relative_errors: empty frame-pair set");
  ErrorSum sum;
  for (const auto& p : pairs) {
    if (p.i >= est.size() || p.j >= est.size() || p.i >= gt.size() || p.j >= gt.size()) {
      throw DomainError(fmt::format("relative_errors: pair ({}, {}) out of range", p.i, p.j));
    }
    sum.add(est[p.i], est[p.j], gt[p.i], gt[p.j]);
  }
  return sum.mean();
}

EvaluationReport evaluate_trajectories(const Trajectory& est, const Trajectory& gt, std::span<const std::size_t> gaps,
                                       double max_dt) {
  const auto pairs = associate(est, gt, max_dt);
  const AssociatedPoses poses = gather(est, gt, pairs);
  EvaluationReport report;
  report.associated = pairs.size();
  std::vector<FramePair> pooled;
  for (const std::size_t gap : gaps) {
    const auto fp = frame_pairs(poses.est.size(), gap);
    GapError g;
    g.gap = gap;
    if (!fp.empty()) g.error = relative_errors(poses.est, poses.gt, fp);
    report.per_gap.push_back(g);
    pooled.insert(pooled.end(), fp.begin(), fp.end());
  }
  if (pooled.empty()) throw DomainError("evaluate_trajectories: too few associated poses for any frame pair");
  report.pooled = relative_errors(poses.est, poses.gt, pooled);
  return report;
}

void write_metrics_csv(const std::filesystem::path& path, const EvaluationReport& report) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;
  os << "gap,pairs,e_trans_m,e_rot_rad,e_rot_deg\n";
  for (const auto& g : report.per_gap) {
    os << fmt::format("{},{},{:.9g},{:.9g},{:.9g}\n", g.gap, g.error.pairs, g.error.e_trans, g.error.e_rot,
                      g.error.e_rot * kRadToDeg);
  }
  os << fmt::format("pooled,{},{:.9g},{:.9g},{:.9g}\n", report.pooled.pairs, report.pooled.e_trans,
                    report.pooled.e_rot, report.pooled.e_rot * kRadToDeg);
}

std::vector<AxisError> per_axis_error_series(const AssociatedPoses& poses) {
  std::vector<AxisError> out;
  out.reserve(poses.est.size());
  for (std::size_t k = 0; k < poses.est.size() && k < poses.gt.size(); ++k) {
    AxisError e;
    e.t = k < poses.t.size() ? poses.t[k] : 0.0;
    e.translation = poses.est[k].translation - poses.gt[k].translation;
    e.rpy = rpy_from_quat(poses.est[k].rotation * poses.gt[k].rotation.inverse());
    out.push_back(e);
  }
  return out;
}

AssociatedPoses anchor_to_first(const AssociatedPoses& poses) {
  AssociatedPoses out = poses;
  if (poses.est.empty() || poses.gt.empty()) return out;
  const PoseSE3 offset = poses.gt.front() * poses.est.front().inverse();
  for (auto& p : out.est) p = offset * p;
  return out;
}

void write_error_series_csv(const std::filesystem::path& path, std::span<const AxisError> series) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << "t,dx,dy,dz,droll,dpitch,dyaw\n";
  for (const auto& e : series) {
    os << fmt::format("{:.9f},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", e.t, e.translation.x(), e.translation.y(),
                      e.translation.z(), e.rpy.x(), e.rpy.y(), e.rpy.z());
  }
}

Eigen::Matrix<double, 6, 1> mean_abs_error(std::span<const AxisError> series) {
  Eigen::Matrix<double, 6, 1> m = Eigen::Matrix<double, 6, 1>::Zero();
  if (series.empty()) return m;
  for (const auto& e : series) {
    m.head<3>() += e.translation.cwiseAbs();
    m.tail<3>() += e.rpy.cwiseAbs();
  }
  return m / static_cast<double>(series.size());
}

}  // namespace ringlio
