#include "pcrbtrack/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

namespace pcrbtrack {

PropulsionParams PropulsionParams::from(const Scenario& sc) {
  return {sc.sys.P0, sc.sys.Pi, sc.sys.Utip, sc.sys.vh, sc.sys.chi};
}

double induced_factor(double v, double vh) {
  const double b = v * v / (2.0 * vh * vh);
  return 1.0 / std::sqrt(std::hypot(1.0, b) + b);
}

double propulsion_power(double v, const PropulsionParams& pp) {
  const double av = std::abs(v);
  return pp.P0 * (1.0 + 3.0 * v * v / (pp.Utip * pp.Utip)) + pp.Pi * induced_factor(v, pp.vh) +
         0.5 * pp.chi * av * av * av;
}

double propulsion_power_direct(double v, const PropulsionParams& pp) {
  const double av = std::abs(v);
  const double v2 = v * v;
  const double vh2 = pp.vh * pp.vh;
  const double induced = std::sqrt(std::sqrt(1.0 + v2 * v2 / (4.0 * vh2 * vh2)) - v2 / (2.0 * vh2));
  return pp.P0 * (1.0 + 3.0 * v2 / (pp.Utip * pp.Utip)) + pp.Pi * induced +
         0.5 * pp.chi * av * av * av;
}

double max_endurance_speed(const PropulsionParams& pp, double v_hi) {
  const auto r = boost::math::tools::brent_find_minima(
      [&pp](double v) { return propulsion_power(v, pp); }, 0.0, v_hi,
      std::numeric_limits<double>::digits / 2);
  return r.first;
}

// ---------------------------------------------------------------------------
// SCA backup planner

namespace {

// Linearized induced-power constraint of one slot:  xi^-2 <= b xi + c v + a.
struct Linearization {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  static Linearization at(double v_r, double xi_r, double vh) {
    const double vh2 = vh * vh;
    return {-xi_r * xi_r - v_r * v_r / vh2, 2.0 * xi_r, 2.0 * v_r / vh2};
  }

  // Smallest feasible xi for velocity v: root of xi^-2 - b xi - (a + c v),
  // which is convex and strictly decreasing in xi > 0.
  double xi_star(double v, double guess) const {
    const double w = a + c * v;
    double xi = guess > 0.0 ? guess : 1.0;
    for (int it = 0; it < 100; ++it) {
      const double inv = 1.0 / xi;
      const double h = inv * inv - b * xi - w;
      const double dh = -2.0 * inv * inv * inv - b;
      double next = xi - h / dh;
      if (next <= 0.0) next = 0.5 * xi;
      if (std::abs(next - xi) <= 1e-15 * xi) return next;
      xi = next;
    }
    return xi;
  }

  double dxi_dv(double xi) const {
    const double inv = 1.0 / xi;
    return -c / (2.0 * inv * inv * inv + b);
  }
};

struct SlotModel {
  const PropulsionParams& pp;

  // Convex per-slot surrogate power with xi eliminated, and its slope.
  double slope(const Linearization& lin, double v, double& xi) const {
    xi = lin.xi_star(v, xi);
    const double U2 = pp.Utip * pp.Utip;
    return 6.0 * pp.P0 * v / U2 + 1.5 * pp.chi * std::abs(v) * v + pp.Pi * lin.dxi_dv(xi);
  }

  double surrogate(double v, double xi) const {
    const double av = std::abs(v);
    return pp.P0 * (1.0 + 3.0 * v * v / (pp.Utip * pp.Utip)) + pp.Pi * xi +
           0.5 * pp.chi * av * av * av;
  }
};

struct Group {
  Linearization lin;
  int count = 0;
  double v = 0.0;
  double xi = 0.0;
};

// argmin_v f(v) - nu v over [-v_max, v_max] for one group.
double group_response(const SlotModel& model, Group& g, double nu, double v_max) {
  double xi = g.xi;
  if (model.slope(g.lin, -v_max, xi) >= nu) {
    g.xi = g.lin.xi_star(-v_max, xi);
    return -v_max;
  }
  xi = g.xi;
  if (model.slope(g.lin, v_max, xi) <= nu) {
    g.xi = g.lin.xi_star(v_max, xi);
    return v_max;
  }
  double lo = -v_max;
  double hi = v_max;
  xi = g.xi;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + v_max); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (model.slope(g.lin, mid, xi) < nu)
      lo = mid;
    else
      hi = mid;
  }
  const double v = 0.5 * (lo + hi);
  g.xi = g.lin.xi_star(v, xi);
  return v;
}

// Solves one convex subproblem in place. Returns the KKT residual.
double solve_subproblem(const SlotModel& model, std::vector<Group>& groups, double total,
                        double v_max) {
  int slots = 0;
  for (const auto& g : groups) slots += g.count;

  double nu = 0.0;
  if (groups.size() == 1) {
    auto& g = groups.front();
    g.v = std::clamp(total / g.count, -v_max, v_max);
    double xi = g.xi;
    nu = model.slope(g.lin, g.v, xi);
    g.xi = xi;
  } else {
    double nu_lo = std::numeric_limits<double>::infinity();
    double nu_hi = -std::numeric_limits<double>::infinity();
    for (auto& g : groups) {
      double xi = g.xi;
      nu_lo = std::min(nu_lo, model.slope(g.lin, -v_max, xi));
      xi = g.xi;
      nu_hi = std::max(nu_hi, model.slope(g.lin, v_max, xi));
    }
    auto response_sum = [&](double n) {
      double s = 0.0;
      for (auto& g : groups) {
        g.v = group_response(model, g, n, v_max);
        s += g.count * g.v;
      }
      return s;
    };
    for (int it = 0; it < 200 && nu_hi - nu_lo > 1e-14 * (1.0 + std::abs(nu_hi)); ++it) {
      const double mid = 0.5 * (nu_lo + nu_hi);
      if (response_sum(mid) < total)
        nu_lo = mid;
      else
        nu_hi = mid;
    }
    nu = 0.5 * (nu_lo + nu_hi);
    response_sum(nu);
  }

  // Close the remaining equality residual on groups away from their bounds.
  for (int pass = 0; pass < 4; ++pass) {
    double sum = 0.0;
    for (const auto& g : groups) sum += g.count * g.v;
    const double r = total - sum;
    if (r == 0.0) break;
    int free = 0;
    for (const auto& g : groups)
      if ((r > 0.0 && g.v < v_max) || (r < 0.0 && g.v > -v_max)) free += g.count;
    if (free == 0) break;
    for (auto& g : groups)
      if ((r > 0.0 && g.v < v_max) || (r < 0.0 && g.v > -v_max))
        g.v = std::clamp(g.v + r / free, -v_max, v_max);
  }

  double kkt = 0.0;
  double sum = 0.0;
  for (auto& g : groups) {
    g.xi = g.lin.xi_star(g.v, g.xi);
    double xi = g.xi;
    const double grad = model.slope(g.lin, g.v, xi) - nu;
    double r;
    if (g.v <= -v_max)
      r = std::max(0.0, -grad);
    else if (g.v >= v_max)
      r = std::max(0.0, grad);
    else
      r = std::abs(grad);
    kkt = std::max(kkt, r / (1.0 + std::abs(nu)));
    sum += g.count * g.v;
  }
  return std::max(kkt, std::abs(sum - total) / std::max(1.0, static_cast<double>(slots)));
}

double profile_energy(const std::vector<double>& v, double dT, const PropulsionParams& pp) {
  double e = 0.0;
  for (double vi : v) e += propulsion_power(vi, pp) * dT;
  return e;
}

void fix_sum(std::vector<double>& v, double total, double v_max) {
  for (size_t pass = 0; pass <= v.size(); ++pass) {
    double sum = 0.0;
    for (double x : v) sum += x;
    const double r = total - sum;
    if (std::abs(r) <= 1e-12 * (1.0 + std::abs(total))) return;
    int free = 0;
    for (double x : v)
      if ((r > 0.0 && x < v_max) || (r < 0.0 && x > -v_max)) ++free;
    if (free == 0) return;
    for (double& x : v)
      if ((r > 0.0 && x < v_max) || (r < 0.0 && x > -v_max))
        x = std::clamp(x + r / free, -v_max, v_max);
  }
}

}  // namespace

BackupPlan sca_from(std::vector<double> v, double displacement, double dT, double v_max,
                    const PropulsionParams& pp) {
  const SlotModel model{pp};
  const double total = displacement / dT;
  BackupPlan plan;
  if (v.empty()) return plan;

  std::vector<double> xi(v.size());
  for (size_t l = 0; l < v.size(); ++l) xi[l] = induced_factor(v[l], pp.vh);

  auto surrogate_energy = [&]() {
    double e = 0.0;
    for (size_t l = 0; l < v.size(); ++l) e += model.surrogate(v[l], xi[l]) * dT;
    return e;
  };
  double prev = surrogate_energy();
  plan.surrogate_trace.push_back(prev);

  constexpr int kMaxIter = 30;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    // Slots sharing a linearization point share the subproblem solution.
    std::map<std::pair<double, double>, size_t> index;
    std::vector<Group> groups;
    std::vector<size_t> slot_group(v.size());
    for (size_t l = 0; l < v.size(); ++l) {
      const auto key = std::make_pair(v[l], xi[l]);
      auto it = index.find(key);
      if (it == index.end()) {
        it = index.emplace(key, groups.size()).first;
        groups.push_back({Linearization::at(v[l], xi[l], pp.vh), 0, v[l], xi[l]});
      }
      ++groups[it->second].count;
      slot_group[l] = it->second;
    }

    plan.kkt_residual = solve_subproblem(model, groups, total, v_max);
    for (size_t l = 0; l < v.size(); ++l) {
      v[l] = groups[slot_group[l]].v;
      xi[l] = groups[slot_group[l]].xi;
    }
    ++plan.sca_iterations;

    const double cur = surrogate_energy();
    plan.surrogate_trace.push_back(cur);
    const bool done = (prev - cur) < 1e-6 * std::abs(prev);
    prev = cur;
    if (done) break;
  }

  plan.velocities = std::move(v);
  plan.E_b = prev;
  plan.E_actual = profile_energy(plan.velocities, dT, pp);
  return plan;
}

BackupPlan backup_plan(double x_start, double x_F, int slots, double dT, double v_max,
                       const PropulsionParams& pp) {
  if (slots < 0) throw std::invalid_argument("backup_plan: negative slot count");
  const double displacement = x_F - x_start;
  const double reach = slots * v_max * dT;
  if (std::abs(displacement) > reach + 1e-9 * (1.0 + reach)) {
    std::ostringstream msg;
    msg << "backup_plan: displacement " << displacement << " m exceeds reach " << reach
        << " m over " << slots << " slots";
    throw InfeasibleError(msg.str());
  }
  if (slots == 0) return {};

  const double total = displacement / dT;
  std::vector<double> constant(static_cast<size_t>(slots),
                               std::clamp(total / slots, -v_max, v_max));
  fix_sum(constant, total, v_max);

  // Forward and backward max-endurance legs in the proportion that matches
  // the displacement, interleaved, then shifted onto the equality constraint.
  const double v_me = std::min(max_endurance_speed(pp), v_max);
  const double lean = std::clamp(total / (slots * v_me), -1.0, 1.0);
  const int forward = std::clamp(static_cast<int>(std::lround(0.5 * slots * (1.0 + lean))), 0, slots);
  std::vector<double> alternating(static_cast<size_t>(slots), -v_me);
  for (int k = 0; k < forward; ++k)
    alternating[static_cast<size_t>((static_cast<long>(k) * slots) / std::max(forward, 1))] = v_me;
  double base_sum = 0.0;
  for (double x : alternating) base_sum += x;
  const double shift = (total - base_sum) / slots;
  for (double& x : alternating) x = std::clamp(x + shift, -v_max, v_max);
  fix_sum(alternating, total, v_max);

  BackupPlan best = sca_from(std::move(constant), displacement, dT, v_max, pp);
  BackupPlan alt = sca_from(std::move(alternating), displacement, dT, v_max, pp);
  if (alt.E_b < best.E_b) best = std::move(alt);
  return best;
}

// ---------------------------------------------------------------------------

DpResult dp_oracle(double x_start, double x_F, int slots, double dT, double v_max,
                   const PropulsionParams& pp, const DpGrid& grid, Exec exec) {
  if (slots < 1) throw std::invalid_argument("dp_oracle: need at least one slot");
  const double ratio = grid.v_step * dT / grid.x_step;
  const long stride = std::lround(ratio);
  if (stride < 1 || std::abs(ratio - static_cast<double>(stride)) > 1e-9 * ratio)
    throw std::invalid_argument("dp_oracle: v_step * dT must be a multiple of x_step");
  const long J = static_cast<long>(std::floor(v_max / grid.v_step + 1e-9));
  if (static_cast<double>(slots) * static_cast<double>(J) > 1e8)
    throw std::length_error("dp_oracle: state space exceeds 1e8");

  const double displacement = x_F - x_start;
  const long target = std::lround(displacement / grid.x_step);
  if (std::abs(target * grid.x_step - displacement) > 1e-6 * grid.x_step)
    throw std::invalid_argument("dp_oracle: displacement is not on the x_step lattice");
  const long S = slots * J * stride;
  if (std::labs(target) > S) throw InfeasibleError("dp_oracle: displacement unreachable");

  const auto width = static_cast<size_t>(2 * S + 1);
  std::vector<double> step_cost(static_cast<size_t>(2 * J + 1));
  for (long j = -J; j <= J; ++j)
    step_cost[static_cast<size_t>(j + J)] = propulsion_power(j * grid.v_step, pp) * dT;

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(width, inf), next(width, inf);
  cost[static_cast<size_t>(S)] = 0.0;
  std::vector<std::vector<int>> arg(static_cast<size_t>(slots), std::vector<int>(width, -1));

  for (int i = 0; i < slots; ++i) {
    dp_relax(cost, step_cost, static_cast<int>(stride), next, arg[static_cast<size_t>(i)], exec);
    const long remaining = slots - i - 1;
    for (long s = 0; s < static_cast<long>(width); ++s)
      if (std::labs(target - (s - S)) > remaining * J * stride) next[static_cast<size_t>(s)] = inf;
    std::swap(cost, next);
  }

  DpResult out;
  out.energy = cost[static_cast<size_t>(target + S)];
  if (!std::isfinite(out.energy)) throw InfeasibleError("dp_oracle: no feasible profile");
  out.velocities.resize(static_cast<size_t>(slots));
  long s = target + S;
  for (int i = slots - 1; i >= 0; --i) {
    const int j = arg[static_cast<size_t>(i)][static_cast<size_t>(s)];
    out.velocities[static_cast<size_t>(i)] = (j - J) * grid.v_step;
    s -= (j - J) * stride;
  }
  return out;
}

std::vector<SpeedInterval> feasible_speed_intervals(double E_slot, double dT, double v_max,
                                                    const PropulsionParams& pp) {
  const double v_min_power = std::min(max_endurance_speed(pp), v_max);
  auto excess = [&](double v) { return propulsion_power(v, pp) * dT - E_slot; };
  if (excess(v_min_power) > 0.0) return {};

  boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 3);
  SpeedInterval iv{0.0, v_max};
  if (excess(0.0) > 0.0) {
    const auto r = boost::math::tools::bisect(excess, 0.0, v_min_power, tol);
    iv.lo = r.second;  // feasible side of the bracket
  }
  if (excess(v_max) > 0.0) {
    const auto r = boost::math::tools::bisect(excess, v_min_power, v_max, tol);
    iv.hi = r.first;
  }
  return {iv};
}

bool feasibility_gate(const EnergyLedger& ledger, double v_candidate, double dT, double E_b,
                      const PropulsionParams& pp) {
  return ledger.consumed + propulsion_power(v_candidate, pp) * dT + E_b <=
         ledger.budget + kGateTolerance;
}

}  // namespace pcrbtrack
