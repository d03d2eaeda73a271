#include "fon/opinion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fon {

namespace {

void require_finite_opinion(const GaussianOpinion& o) {
  if (!std::isfinite(o.center) || !std::isfinite(o.sdv) || o.sdv < 0.0) {
    throw std::invalid_argument("opinion must have finite center and sdv >= 0");
  }
}

}  // namespace

double closeness(const GaussianOpinion& a, const GaussianOpinion& b) {
  require_finite_opinion(a);
  require_finite_opinion(b);
  const double spread = a.sdv + b.sdv;
  if (spread == 0.0) {
    return a.center == b.center ? 1.0 : 0.0;
  }
  const double gap = (a.center - b.center) / spread;
  return std::exp(-gap * gap);
}

GaussianOpinion weighted_average(std::span<const GaussianOpinion> opinions,
                                 std::span<const double> weights) {
  if (opinions.empty() || opinions.size() != weights.size()) {
    throw std::invalid_argument(
        "weighted_average needs equal, nonzero numbers of opinions and weights");
  }
  double wsum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("weights must be finite and non-negative");
    }
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12) {
    throw std::invalid_argument("weights must sum to 1");
  }
  GaussianOpinion out;
  for (std::size_t i = 0; i < opinions.size(); ++i) {
    require_finite_opinion(opinions[i]);
    out.center += weights[i] * opinions[i].center;
    out.sdv += weights[i] * opinions[i].sdv;
  }
  return out;
}

GaussianOpinion compose_conditional(double sigma_x, const GaussianOpinion& v) {
  if (!std::isfinite(sigma_x) || sigma_x < 0.0) {
    throw std::invalid_argument("sigma_x must be finite and >= 0");
  }
  require_finite_opinion(v);
  return GaussianOpinion{v.center, sigma_x + v.sdv};
}

std::vector<std::pair<double, double>> compose_oracle(
    double sigma_x, const GaussianOpinion& v, double lo, double hi,
    int grid_points) {
  require_finite_opinion(v);
  if (!(sigma_x > 0.0) || !(v.sdv > 0.0)) {
    throw std::invalid_argument("compose_oracle needs strictly positive spreads");
  }
  if (grid_points < 100) {
    throw std::invalid_argument("compose_oracle needs grid_points >= 100");
  }
  const double reach = 5.0 * (sigma_x + v.sdv);
  if (!(lo < hi) || lo > v.center - reach || hi < v.center + reach) {
    throw std::invalid_argument(
        "compose_oracle domain must cover v.center +/- 5*(sigma_x + v.sdv)");
  }

  // Max-min composition in exponent form: the membership at x is
  // exp(-min_v max(alpha, beta)) with alpha = (x-v)^2/sx^2 and
  // beta = (v-c)^2/sv^2. Both exponents are convex parabolas in v, so
  // max(alpha, beta) is convex and a strided scan brackets its grid
  // minimum: the refinement window around the coarse argmin is exact for
  // convex sequences. The inner grid is 8x finer than the output grid so
  // the discretization budget stays O(output spacing) even when the two
  // spreads are very different.
  const int nx = grid_points;
  const long nv = 8L * grid_points;
  const double hx = (hi - lo) / (nx - 1);
  const double hv = (hi - lo) / static_cast<double>(nv - 1);
  const double inv_sx2 = 1.0 / (sigma_x * sigma_x);
  const double inv_sv2 = 1.0 / (v.sdv * v.sdv);
  const double cv = v.center;

  auto exponent = [&](double x, long j) {
    const double vj = lo + hv * static_cast<double>(j);
    const double a = (x - vj) * (x - vj) * inv_sx2;
    const double b = (vj - cv) * (vj - cv) * inv_sv2;
    return a > b ? a : b;
  };

  const long stride = std::max<long>(1, nv / 128);
  std::vector<std::pair<double, double>> samples;
  samples.reserve(static_cast<std::size_t>(nx));
  for (int ix = 0; ix < nx; ++ix) {
    const double x = lo + hx * ix;
    long best = 0;
    double best_e = exponent(x, 0);
    for (long j = stride; j < nv; j += stride) {
      const double e = exponent(x, j);
      if (e < best_e) {
        best_e = e;
        best = j;
      }
    }
    const long from = std::max<long>(0, best - stride);
    const long to = std::min<long>(nv - 1, best + stride);
    for (long j = from; j <= to; ++j) {
      const double e = exponent(x, j);
      if (e < best_e) best_e = e;
    }
    samples.emplace_back(x, std::exp(-best_e));
  }
  return samples;
}

}  // namespace fon
