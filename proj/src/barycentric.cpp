#include "meshforge/barycentric.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace meshforge {

std::vector<Barycentric> barycentric_lattice(int k) {
  if (k < 1) throw std::invalid_argument("lattice order must be positive");
  if (k == 1) return {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
  const int steps = k - 1;
  std::vector<Barycentric> out;
  out.reserve(static_cast<std::size_t>(k * (k + 1) / 2));
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; i + j <= steps; ++j) {
      const double a = static_cast<double>(i) / steps;
      const double b = static_cast<double>(j) / steps;
      out.push_back({a, b, static_cast<double>(steps - i - j) / steps});
    }
  return out;
}

BarycentricPlan build_barycentric_plan(std::span<const double> areas, int alpha, int beta, InterpolationCount rule) {
  if (alpha <= 0 || beta <= 0) throw std::invalid_argument("alpha and beta must be positive integers");
  BarycentricPlan plan;
  plan.alpha = alpha;
  plan.beta = beta;
  if (areas.empty()) {
    plan.offsets = {0};
    return plan;
  }
  for (double a : areas)
    if (!(a >= 0.0)) throw std::invalid_argument("facet areas must be non-negative");
  const auto [lo_it, hi_it] = std::minmax_element(areas.begin(), areas.end());
  const double lo = *lo_it, range = *hi_it - *lo_it;

  plan.order.resize(areas.size());
  for (std::size_t f = 0; f < areas.size(); ++f) {
    if (!(range > 0.0)) {
      plan.order[f] = beta;
      continue;
    }
    const double t = (areas[f] - lo) / range;
    plan.order[f] = rule == InterpolationCount::literal_floor
                        ? static_cast<int>(std::floor(t)) * alpha + beta
                        : static_cast<int>(std::floor(alpha * t)) + beta;
  }

  std::map<int, std::vector<Barycentric>> lattices;
  plan.offsets.reserve(areas.size() + 1);
  plan.offsets.push_back(0);
  for (int k : plan.order) {
    auto it = lattices.find(k);
    if (it == lattices.end()) it = lattices.emplace(k, barycentric_lattice(k)).first;
    plan.coords.insert(plan.coords.end(), it->second.begin(), it->second.end());
    plan.offsets.push_back(static_cast<int>(plan.coords.size()));
  }
  return plan;
}

}  // namespace meshforge
