#pragma once

#include <span>
#include <utility>
#include <vector>

namespace fon {

/// A Gaussian fuzzy opinion: the center is the opinion itself (an expected
/// price, in market use) and the standard deviation is the uncertainty
/// about it.
struct GaussianOpinion {
  double center = 0.0;
  double sdv = 0.0;  // >= 0
};

/// Height of the intersection of two Gaussian opinions,
/// exp(-|c1-c2|^2 / (s1+s2)^2), in [0, 1].
///
/// When both spreads are zero the continuity limit is used: 1 for equal
/// centers, 0 otherwise. Throws std::invalid_argument on non-finite input
/// or negative spread.
double closeness(const GaussianOpinion& a, const GaussianOpinion& b);

/// Convex combination of Gaussian opinions: centers and spreads both
/// average linearly. Weights must be non-negative and sum to 1 within
/// 1e-12; throws std::invalid_argument otherwise (also for empty or
/// mismatched inputs).
GaussianOpinion weighted_average(std::span<const GaussianOpinion> opinions,
                                 std::span<const double> weights);

/// Composition of a Gaussian conditional spread sigma_x with a Gaussian
/// input v: the result keeps v's center and the spreads add.
GaussianOpinion compose_conditional(double sigma_x, const GaussianOpinion& v);

/// Brute-force max-min composition on a uniform grid, used as an
/// independent numerical check against compose_conditional. Returns
/// (x, membership) samples for grid_points values of x spanning [lo, hi].
///
/// Requires sigma_x > 0, v.sdv > 0, grid_points >= 100 and a domain
/// covering v.center +/- 5*(sigma_x + v.sdv); throws std::invalid_argument
/// otherwise.
std::vector<std::pair<double, double>> compose_oracle(
    double sigma_x, const GaussianOpinion& v, double lo, double hi,
    int grid_points);

}  // namespace fon
