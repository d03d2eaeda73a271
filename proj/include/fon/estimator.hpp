#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fon/opinion.hpp"

namespace fon {

/// One pseudo-investor equivalent to the whole population: sigma is the
/// harmonic-style aggregate of the individual uncertainties, pbar the
/// matching geometric-style aggregate of the expected prices.
struct CombinedState {
  double sigma = 0.0;  // > 0
  double pbar = 0.0;   // > 0
};

CombinedState combined_state(std::span<const GaussianOpinion> opinions,
                             std::span<const double> strengths);

/// ln p_{t+1} = ln p_t + (ln pbar - ln p_t) / sigma + eps; the one-investor
/// form of the price equation.
double combined_price_step(double log_price, const CombinedState& combined,
                           double eps);

/// Recursive least squares with exponential forgetting on the regression
/// r_{t+1} = s_t' v + eps, s_t = (1, -ln p_t).
struct RlsState {
  Eigen::Vector2d v_hat = Eigen::Vector2d::Zero();
  Eigen::Matrix2d P = Eigen::Matrix2d::Identity();
  double lambda = 0.999;  // in (0, 1]
};

/// One RLS update. P is re-symmetrized after the rank-one downdate so the
/// positive-definite invariant survives floating point.
RlsState rls_step(const RlsState& state, const Eigen::Vector2d& s,
                  double r_next);

/// Direct minimizer of the exponentially weighted squared error plus the
/// prior term lambda^T (v - v0)' P0^{-1} (v - v0); the batch equivalent of
/// RLS started at (v0, P0), used as its test oracle. Throws
/// std::runtime_error when the normal equations are singular.
Eigen::Vector2d batch_ls_oracle(
    std::span<const std::pair<Eigen::Vector2d, double>> data, double lambda,
    const Eigen::Vector2d& v0, const Eigen::Matrix2d& P0);

struct PricePoint {
  std::string date;
  double price = 0.0;  // > 0
};
using PriceSeries = std::vector<PricePoint>;

/// Parses `date,adj_close` CSV (ISO-8601 dates, strictly increasing,
/// positive prices). Throws std::invalid_argument naming the 1-based line
/// number of the first malformed row.
PriceSeries parse_price_csv(std::istream& in);
PriceSeries load_price_csv(const std::string& path);

/// Estimate for one time index; sigma_hat = 1 / v2 and pbar_hat =
/// exp(v1 / v2) are meaningful only while v2 stays positive, so steps with
/// v2 <= 1e-9 are emitted as gaps instead of huge or negative
/// uncertainties.
struct EstimatePoint {
  int t = 0;
  bool gap = false;
  double sigma_hat = 0.0;
  double pbar_hat = 0.0;
  Eigen::Vector2d v_hat = Eigen::Vector2d::Zero();
};

/// Folds rls_step over the series: the estimate at index t uses the return
/// observed at t+1, so a series of N prices yields N-1 estimates
/// (t = 0 .. N-2).
std::vector<EstimatePoint> estimate_series(const PriceSeries& series,
                                           double lambda,
                                           const Eigen::Vector2d& v0,
                                           const Eigen::Matrix2d& P0);

enum class Signal { None, Buy, Sell };

/// Ramp membership: 0 at zero_at, 1 at one_at, linear between; the two
/// knots may run in either direction.
struct Ramp {
  double zero_at = 0.0;
  double one_at = 1.0;
  double operator()(double x) const;
};

struct SignalParams {
  int tau = 5;          // lookback, >= 1
  double delta = 0.25;  // firing threshold, in (0, 1)
  Ramp pb{0.02, 0.06};
  Ramp nb{-0.02, -0.06};
  Ramp p{0.0, 0.02};
  Ramp n{0.0, -0.02};
};

struct SignalResult {
  Signal signal = Signal::None;
  bool conflict = false;  // both rules fired; reported as None
};

/// Trend-reversal rules on the log changes of price and estimated combined
/// uncertainty over the lookback window. Indices with gap estimates at
/// either end return None.
SignalResult trading_signal(const PriceSeries& series,
                            std::span<const EstimatePoint> estimates,
                            const SignalParams& params, int t);

/// Share of the absolute price movement attributed to the opinion-driven
/// model term rather than the residual, in [0, 1]. Gap estimates and the
/// first `burn_in` indices are excluded from both sums; returns 0 when the
/// series carries no movement at all.
double word_of_mouth_proportion(const PriceSeries& series,
                                std::span<const EstimatePoint> estimates,
                                int burn_in = 0);

}  // namespace fon
