// Copyright 2026 The TAL Racing Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "tal/raceline.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tal/csv.hpp"

namespace tal::raceline
{
namespace
{

double menger(const Vec2 & a, const Vec2 & b, const Vec2 & c)
{
  const Vec2 d1 = b - a;
  const Vec2 d2 = c - b;
  const double denom = norm(d1) * norm(d2) * norm(c - a);
  if (!(denom > 0.0)) {
    throw RacelineError("path_curvature: repeated points");
  }
  return 2.0 * cross(d1, d2) / denom;
}

// kappa at index i of the offset path; i must have two neighbours.
double offset_curvature(
  std::span<const Vec2> base, std::span<const Vec2> normals, std::span<const double> alpha,
  std::size_t i)
{
  const std::size_t n = base.size();
  const std::size_t a = (i + n - 1) % n;
  const std::size_t c = (i + 1) % n;
  return menger(
    base[a] + normals[a] * alpha[a], base[i] + normals[i] * alpha[i],
    base[c] + normals[c] * alpha[c]);
}

// Indices whose curvature enters the objective.
std::pair<std::size_t, std::size_t> interior(std::size_t n, bool closed)
{
  return closed ? std::pair{std::size_t{0}, n} : std::pair{std::size_t{1}, n - 1};
}

double offset_objective(
  std::span<const Vec2> base, std::span<const Vec2> normals, std::span<const double> alpha,
  bool closed)
{
  const auto [lo, hi] = interior(base.size(), closed);
  double sum = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double k = offset_curvature(base, normals, alpha, i);
    sum += k * k;
  }
  return sum;
}

using SpMat = Eigen::SparseMatrix<double>;

// Projected Newton method (Bertsekas) for min 1/2 x'Hx + g'x, lo <= x <= hi.
// Variables within eps of a bound with the gradient pushing outward are held;
// the rest take a Newton step, followed by an Armijo search along the
// projection arc. The objective decreases monotonically.
Eigen::VectorXd solve_box_qp(
  const SpMat & h, const Eigen::VectorXd & g, const Eigen::VectorXd & lo,
  const Eigen::VectorXd & hi)
{
  const Eigen::Index n = g.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n).cwiseMax(lo).cwiseMin(hi);
  auto q = [&](const Eigen::VectorXd & z) { return 0.5 * z.dot(h * z) + g.dot(z); };
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd grad = h * x + g;
    const Eigen::VectorXd pg = (x - grad).cwiseMax(lo).cwiseMin(hi) - x;
    const double pg_norm = pg.cwiseAbs().maxCoeff();
    if (pg_norm < 1e-12) {
      break;
    }
    const double eps = std::min(1e-6, pg_norm);
    std::vector<Eigen::Index> free_index(static_cast<std::size_t>(n), -1);
    Eigen::Index nf = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool held = (x[i] <= lo[i] + eps && grad[i] > 0.0) ||
                        (x[i] >= hi[i] - eps && grad[i] < 0.0);
      if (!held) {
        free_index[static_cast<std::size_t>(i)] = nf++;
      }
    }
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
    if (nf > 0) {
      Eigen::VectorXd rhs(nf);
      std::vector<Eigen::Triplet<double>> trips;
      for (Eigen::Index col = 0; col < h.outerSize(); ++col) {
        const Eigen::Index fc = free_index[static_cast<std::size_t>(col)];
        if (fc < 0) {
          continue;
        }
        rhs[fc] = -grad[col];
        for (SpMat::InnerIterator itr(h, col); itr; ++itr) {
          const Eigen::Index fr = free_index[static_cast<std::size_t>(itr.row())];
          if (fr >= 0) {
            trips.emplace_back(fr, fc, itr.value());
          }
        }
      }
      SpMat hf(nf, nf);
      hf.setFromTriplets(trips.begin(), trips.end());
      Eigen::SimplicialLDLT<SpMat> ldlt(hf);
      if (ldlt.info() != Eigen::Success) {
        throw RacelineError("min_curvature_path: QP factorization failed");
      }
      const Eigen::VectorXd df = ldlt.solve(rhs);
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index f = free_index[static_cast<std::size_t>(i)];
        if (f >= 0) {
          dir[i] = df[f];
        }
      }
    }
    // Held variables follow the steepest descent direction.
    for (Eigen::Index i = 0; i < n; ++i) {
      if (free_index[static_cast<std::size_t>(i)] < 0) {
        dir[i] = -grad[i];
      }
    }
    const double q0 = q(x);
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const Eigen::VectorXd trial = (x + t * dir).cwiseMax(lo).cwiseMin(hi);
      const Eigen::VectorXd step = trial - x;
      if (q(trial) <= q0 + 1e-4 * grad.dot(step)) {
        moved = step.cwiseAbs().maxCoeff() > 0.0;
        x = trial;
        break;
      }
    }
    if (!moved) {
      break;
    }
  }
  return x;
}

double segment_length(std::span<const double> cum_s, double total, bool closed, std::size_t i)
{
  const std::size_t n = cum_s.size();
  if (i + 1 < n) {
    return cum_s[i + 1] - cum_s[i];
  }
  return closed ? total - cum_s[n - 1] : 0.0;
}

constexpr double kCurvatureChord = 1.0;  // m

}  // namespace

std::vector<double> path_curvature(std::span<const Vec2> points, bool closed, std::size_t stride)
{
  const std::size_t n = points.size();
  if (n < 3) {
    throw RacelineError("path_curvature: need at least 3 points");
  }
  if (stride == 0) {
    throw RacelineError("path_curvature: stride must be positive");
  }
  stride = std::min(stride, (n - 1) / 2);
  stride = std::max<std::size_t>(stride, 1);
  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (closed) {
      k[i] = menger(points[(i + n - stride) % n], points[i], points[(i + stride) % n]);
      continue;
    }
    const std::size_t m = std::min({stride, i, n - 1 - i});
    if (m > 0) {
      k[i] = menger(points[i - m], points[i], points[i + m]);
    }
  }
  if (!closed) {
    k[0] = k[1];
    k[n - 1] = k[n - 2];
  }
  return k;
}

double curvature_objective(std::span<const Vec2> points, bool closed)
{
  const auto k = path_curvature(points, closed);
  const auto [lo, hi] = interior(points.size(), closed);
  double sum = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    sum += k[i] * k[i];
  }
  return sum;
}

std::vector<Vec2> centerline_normals(const track::Centerline & line)
{
  const std::size_t n = line.size();
  std::vector<Vec2> normals(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 d;
    if (line.closed) {
      d = line.points[(i + 1) % n] - line.points[(i + n - 1) % n];
    } else if (i == 0) {
      d = line.points[1] - line.points[0];
    } else if (i + 1 == n) {
      d = line.points[n - 1] - line.points[n - 2];
    } else {
      d = line.points[i + 1] - line.points[i - 1];
    }
    normals[i] = left_normal(d) * (1.0 / norm(d));
  }
  return normals;
}

MinCurvatureResult min_curvature_path(
  const track::Centerline & line, double vehicle_width, double margin, int max_iterations,
  double tolerance)
{
  const std::size_t n = line.size();
  if (n < 3) {
    throw RacelineError("min_curvature_path: need at least 3 points");
  }
  const auto normals = centerline_normals(line);
  const std::span<const Vec2> base = line.points;
  const auto en = static_cast<Eigen::Index>(n);

  Eigen::VectorXd lo(en);
  Eigen::VectorXd hi(en);
  for (std::size_t i = 0; i < n; ++i) {
    lo[static_cast<Eigen::Index>(i)] = -(line.width_right[i] - vehicle_width / 2.0 - margin);
    hi[static_cast<Eigen::Index>(i)] = line.width_left[i] - vehicle_width / 2.0 - margin;
    if (lo[static_cast<Eigen::Index>(i)] > hi[static_cast<Eigen::Index>(i)]) {
      throw RacelineError("min_curvature_path: track narrower than vehicle plus margins");
    }
  }

  MinCurvatureResult res;
  res.alpha.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    res.alpha[i] = std::clamp(0.0, lo[k], hi[k]);
  }
  double current = offset_objective(base, normals, res.alpha, line.closed);
  res.objective.push_back(current);

  const auto [row_lo, row_hi] = interior(n, line.closed);
  constexpr double kH = 1e-7;
  for (int iter = 0; iter < max_iterations; ++iter) {
    // Banded Jacobian of the curvature rows by central differences.
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd k0 = Eigen::VectorXd::Zero(en);
    std::vector<double> probe = res.alpha;
    for (std::size_t i = row_lo; i < row_hi; ++i) {
      k0[static_cast<Eigen::Index>(i)] = offset_curvature(base, normals, res.alpha, i);
      for (std::size_t off : {n - 1, std::size_t{0}, std::size_t{1}}) {
        const std::size_t j = (i + off) % n;
        const double keep = probe[j];
        probe[j] = keep + kH;
        const double kp = offset_curvature(base, normals, probe, i);
        probe[j] = keep - kH;
        const double km = offset_curvature(base, normals, probe, i);
        probe[j] = keep;
        trips.emplace_back(
          static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j), (kp - km) / (2.0 * kH));
      }
    }
    SpMat jac(en, en);
    jac.setFromTriplets(trips.begin(), trips.end());
    SpMat hess = SpMat(jac.transpose()) * jac;
    const double ridge = 1e-9 * std::max(1.0, hess.diagonal().mean());
    for (Eigen::Index i = 0; i < en; ++i) {
      hess.coeffRef(i, i) += ridge;
    }
    const Eigen::VectorXd grad = jac.transpose() * k0;
    Eigen::VectorXd alpha = Eigen::Map<const Eigen::VectorXd>(res.alpha.data(), en);
    const Eigen::VectorXd delta = solve_box_qp(hess, grad, lo - alpha, hi - alpha);

    // Halve the step until the nonlinear objective does not increase.
    double scale = 1.0;
    std::vector<double> trial(n);
    double value = current;
    bool accepted = false;
    for (int h = 0; h < 10; ++h, scale *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = res.alpha[i] + scale * delta[static_cast<Eigen::Index>(i)];
      }
      value = offset_objective(base, normals, trial, line.closed);
      if (value <= current) {
        accepted = true;
        break;
      }
    }
    res.iterations = iter + 1;
    if (!accepted) {
      res.converged = true;  // no descent left along the linearized step
      break;
    }
    const double step = scale * delta.cwiseAbs().maxCoeff();
    res.alpha = trial;
    current = value;
    res.objective.push_back(current);
    if (step < tolerance) {
      res.converged = true;
      break;
    }
  }
  res.path.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    res.path[i] = base[i] + normals[i] * res.alpha[i];
  }
  return res;
}

std::vector<double> speed_profile(
  std::span<const double> curvature, std::span<const double> cum_s, double total_length,
  bool closed, const SpeedLimits & lim)
{
  const std::size_t n = curvature.size();
  if (n < 2 || cum_s.size() != n) {
    throw RacelineError("speed_profile: curvature and cum_s must match and hold 2+ points");
  }
  const std::size_t segments = closed ? n : n - 1;
  for (std::size_t i = 0; i < segments; ++i) {
    if (!(segment_length(cum_s, total_length, closed, i) > 0.0)) {
      throw RacelineError("speed_profile: non-positive segment length");
    }
  }
  const double mu_g = lim.mu * lim.gravity;
  auto a_avail = [&](double k, double v) {
    const double r = k * v * v / mu_g;
    return lim.a_max * std::sqrt(std::max(0.0, 1.0 - r * r));
  };
  // Fastest speed one segment away when starting at or below v. Near the
  // lateral limit little grip is left for acceleration, so the best start
  // can lie below v: v^2 + 2 a_avail ds is concave in v^2 and peaks where
  // r / sqrt(1 - r^2) = mu g / (2 a_max ds |k|), r = |k| v^2 / (mu g).
  auto reach = [&](double k, double v, double ds) {
    double w = v * v;
    const double ak = std::abs(k);
    if (ak > 0.0) {
      const double c = mu_g / (2.0 * lim.a_max * ds * ak);
      w = std::min(w, c / std::sqrt(1.0 + c * c) * mu_g / ak);
    }
    return std::sqrt(w + 2.0 * a_avail(k, std::sqrt(w)) * ds);
  };
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = std::abs(curvature[i]);
    v[i] = k > 0.0 ? std::min(lim.v_max, std::sqrt(mu_g / k)) : lim.v_max;
  }
  for (int sweep = 0; sweep < 1000; ++sweep) {
    const std::vector<double> before = v;
    for (std::size_t i = 0; i < segments; ++i) {
      const std::size_t j = (i + 1) % n;
      const double ds = segment_length(cum_s, total_length, closed, i);
      v[j] = std::min(v[j], reach(curvature[i], v[i], ds));
    }
    for (std::size_t k = segments; k-- > 0;) {
      const std::size_t j = (k + 1) % n;
      const double ds = segment_length(cum_s, total_length, closed, k);
      v[k] = std::min(v[k], reach(curvature[j], v[j], ds));
    }
    if (!closed || v == before) {
      break;
    }
  }
  for (auto & x : v) {
    x = std::max(x, lim.v_min);
  }
  return v;
}

RaceTrajectory make_trajectory(std::vector<Vec2> points, bool closed, const SpeedLimits & limits)
{
  RaceTrajectory t;
  t.closed = closed;
  double closing = 0.0;
  t.cum_s = cumulative_length(points, closed, &closing);
  t.total_length = t.cum_s.back() + closing;
  const std::size_t n = points.size();
  // Millimetre ripple from the width bounds would dominate a three-point
  // estimate at 0.1 m spacing, so measure over chords of about a metre.
  const double mean_step = t.total_length / static_cast<double>(closed ? n : n - 1);
  const auto stride =
    static_cast<std::size_t>(std::max(1.0, std::round(kCurvatureChord / 2.0 / mean_step)));
  t.curvature = path_curvature(points, closed, stride);
  t.heading.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 d;
    if (closed) {
      d = points[(i + 1) % n] - points[(i + n - 1) % n];
    } else {
      d = points[std::min(i + 1, n - 1)] - points[i == 0 ? 0 : i - 1];
    }
    t.heading[i] = std::atan2(d.y, d.x);
  }
  t.v_ref = speed_profile(t.curvature, t.cum_s, t.total_length, closed, limits);
  t.points = std::move(points);
  return t;
}

RaceTrajectory generate_raceline(const track::Centerline & line, const RacelineParams & params)
{
  const auto opt = min_curvature_path(
    line, params.vehicle_width, params.margin, params.max_iterations, params.tolerance);
  const PlanarSpline spline(opt.path, line.closed);
  return make_trajectory(spline.resample(params.spacing), line.closed, params.limits);
}

double predicted_lap_time(const RaceTrajectory & traj)
{
  const std::size_t n = traj.size();
  const std::size_t segments = traj.closed ? n : n - 1;
  double t = 0.0;
  for (std::size_t i = 0; i < segments; ++i) {
    const double ds = segment_length(traj.cum_s, traj.total_length, traj.closed, i);
    t += 2.0 * ds / (traj.v_ref[i] + traj.v_ref[(i + 1) % n]);
  }
  return t;
}

std::vector<std::string> check_trajectory(
  const RaceTrajectory & traj, const SpeedLimits & lim, double tol)
{
  std::vector<std::string> out;
  const std::size_t n = traj.size();
  auto fail = [&](std::size_t i, const std::string & what) {
    std::ostringstream os;
    os << what << " at waypoint " << i;
    out.push_back(os.str());
  };
  const double mu_g = lim.mu * lim.gravity;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = traj.v_ref[i];
    if (v < lim.v_min - 1e-12 || v > lim.v_max + 1e-12) {
      fail(i, "v_ref outside [v_min, v_max]");
    }
    if (std::abs(traj.curvature[i]) * v * v > mu_g * (1.0 + tol) && v > lim.v_min) {
      fail(i, "lateral friction exceeded");
    }
  }
  const std::size_t segments = traj.closed ? n : n - 1;
  for (std::size_t i = 0; i < segments; ++i) {
    const std::size_t j = (i + 1) % n;
    const double ds = segment_length(traj.cum_s, traj.total_length, traj.closed, i);
    const double dv2 = std::abs(traj.v_ref[j] * traj.v_ref[j] - traj.v_ref[i] * traj.v_ref[i]);
    if (dv2 > 2.0 * lim.a_max * ds * (1.0 + tol)) {
      fail(i, "longitudinal acceleration exceeded");
    }
  }
  return out;
}

std::string raceline_to_csv(const RaceTrajectory & traj)
{
  csv::Writer w({"s_m", "x_m", "y_m", "psi_rad", "kappa_radpm", "vx_mps"});
  for (std::size_t i = 0; i < traj.size(); ++i) {
    w.row({traj.cum_s[i], traj.points[i].x, traj.points[i].y, traj.heading[i],
           traj.curvature[i], traj.v_ref[i]});
  }
  return w.str();
}

RaceTrajectory load_raceline_csv(std::string_view text, bool closed)
{
  try {
    const auto table = csv::parse(text);
    RaceTrajectory t;
    t.closed = closed;
    const auto x = table.numbers("x_m");
    const auto y = table.numbers("y_m");
    t.cum_s = table.numbers("s_m");
    t.heading = table.numbers("psi_rad");
    t.curvature = table.numbers("kappa_radpm");
    t.v_ref = table.numbers("vx_mps");
    if (x.size() < 3) {
      throw RacelineError("raceline CSV needs at least 3 waypoints");
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      t.points.push_back({x[i], y[i]});
      if (i > 0 && !(t.cum_s[i] > t.cum_s[i - 1])) {
        throw RacelineError("raceline CSV: s_m must increase strictly");
      }
    }
    t.total_length = t.cum_s.back() + (closed ? norm(t.points.front() - t.points.back()) : 0.0);
    return t;
  } catch (const csv::CsvError & e) {
    throw RacelineError(std::string("raceline CSV: ") + e.what());
  }
}

}  // namespace tal::raceline
