#include "fon/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fon {

CombinedState combined_state(std::span<const GaussianOpinion> opinions,
                             std::span<const double> strengths) {
  if (opinions.empty() || opinions.size() != strengths.size()) {
    throw std::invalid_argument(
        "combined_state needs equal, nonzero numbers of opinions and strengths");
  }
  double inv_sum = 0.0;   // sum a_i / sigma_i
  double weighted = 0.0;  // sum a_i ln(pbar_i) / sigma_i
  for (std::size_t i = 0; i < opinions.size(); ++i) {
    if (!(strengths[i] > 0.0)) {
      throw std::invalid_argument("strengths must be > 0");
    }
    if (!(opinions[i].sdv > 0.0) || !(opinions[i].center > 0.0)) {
      throw std::invalid_argument(
          "combined_state needs positive centers and uncertainties");
    }
    const double w = strengths[i] / opinions[i].sdv;
    inv_sum += w;
    weighted += w * std::log(opinions[i].center);
  }
  CombinedState out;
  out.sigma = 1.0 / inv_sum;
  out.pbar = std::exp(out.sigma * weighted);
  return out;
}

double combined_price_step(double log_price, const CombinedState& combined,
                           double eps) {
  return log_price + (std::log(combined.pbar) - log_price) / combined.sigma +
         eps;
}

RlsState rls_step(const RlsState& state, const Eigen::Vector2d& s,
                  double r_next) {
  const Eigen::Vector2d Ps = state.P * s;
  const double denom = s.dot(Ps) + state.lambda;
  const Eigen::Vector2d gain = Ps / denom;
  RlsState next;
  next.lambda = state.lambda;
  next.v_hat = state.v_hat + gain * (r_next - s.dot(state.v_hat));
  const Eigen::Matrix2d P =
      (Eigen::Matrix2d::Identity() - gain * s.transpose()) * state.P /
      state.lambda;
  next.P = 0.5 * (P + P.transpose());
  return next;
}

Eigen::Vector2d batch_ls_oracle(
    std::span<const std::pair<Eigen::Vector2d, double>> data, double lambda,
    const Eigen::Vector2d& v0, const Eigen::Matrix2d& P0) {
  if (data.empty()) throw std::invalid_argument("batch_ls_oracle needs data");
  const double prior_weight =
      std::pow(lambda, static_cast<double>(data.size()));
  const Eigen::Matrix2d P0_inv = P0.fullPivLu().inverse();
  Eigen::Matrix2d gram = prior_weight * P0_inv;
  Eigen::Vector2d rhs = prior_weight * (P0_inv * v0);
  // lambda^(T-k) weights, k = 1..T.
  double w = 1.0;
  for (auto it = data.rbegin(); it != data.rend(); ++it) {
    gram += w * it->first * it->first.transpose();
    rhs += w * it->first * it->second;
    w *= lambda;
  }
  Eigen::FullPivLU<Eigen::Matrix2d> lu(gram);
  if (!lu.isInvertible()) {
    throw std::runtime_error("batch_ls_oracle: singular normal equations");
  }
  return lu.solve(rhs);
}

PriceSeries parse_price_csv(std::istream& in) {
  PriceSeries series;
  std::string line;
  int line_no = 0;
  const auto fail = [&](const std::string& what) {
    throw std::invalid_argument("price CSV line " + std::to_string(line_no) +
                                ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "date,adj_close") fail("expected header 'date,adj_close'");
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail("expected 'date,price'");
    PricePoint pt;
    pt.date = line.substr(0, comma);
    if (pt.date.empty()) fail("empty date");
    const std::string num = line.substr(comma + 1);
    std::size_t used = 0;
    try {
      pt.price = std::stod(num, &used);
    } catch (const std::exception&) {
      fail("unparsable price '" + num + "'");
    }
    if (used != num.size()) fail("trailing junk after price");
    if (!(pt.price > 0.0) || !std::isfinite(pt.price)) {
      fail("price must be finite and > 0");
    }
    if (!series.empty() && !(series.back().date < pt.date)) {
      fail("dates must be strictly increasing");
    }
    series.push_back(std::move(pt));
  }
  return series;
}

PriceSeries load_price_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open price CSV: " + path);
  return parse_price_csv(in);
}

std::vector<EstimatePoint> estimate_series(const PriceSeries& series,
                                           double lambda,
                                           const Eigen::Vector2d& v0,
                                           const Eigen::Matrix2d& P0) {
  if (series.size() < 2) {
    throw std::invalid_argument("estimate_series needs at least two prices");
  }
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("lambda must be in (0, 1]");
  }
  constexpr double kMinSlope = 1e-9;

  RlsState rls{v0, P0, lambda};
  std::vector<EstimatePoint> estimates;
  estimates.reserve(series.size() - 1);
  for (std::size_t t = 0; t + 1 < series.size(); ++t) {
    const Eigen::Vector2d s(1.0, -std::log(series[t].price));
    const double r = std::log(series[t + 1].price / series[t].price);
    rls = rls_step(rls, s, r);
    EstimatePoint pt;
    pt.t = static_cast<int>(t);
    pt.v_hat = rls.v_hat;
    if (rls.v_hat[1] <= kMinSlope) {
      pt.gap = true;
      pt.sigma_hat = std::numeric_limits<double>::quiet_NaN();
      pt.pbar_hat = std::numeric_limits<double>::quiet_NaN();
    } else {
      pt.sigma_hat = 1.0 / rls.v_hat[1];
      pt.pbar_hat = std::exp(rls.v_hat[0] / rls.v_hat[1]);
    }
    estimates.push_back(pt);
  }
  return estimates;
}

double Ramp::operator()(double x) const {
  const double t = (x - zero_at) / (one_at - zero_at);
  return std::clamp(t, 0.0, 1.0);
}

SignalResult trading_signal(const PriceSeries& series,
                            std::span<const EstimatePoint> estimates,
                            const SignalParams& params, int t) {
  if (params.tau < 1) throw std::invalid_argument("tau must be >= 1");
  if (t < params.tau || t >= static_cast<int>(estimates.size())) {
    throw std::invalid_argument("signal index needs estimates at t and t-tau");
  }
  const EstimatePoint& now = estimates[static_cast<std::size_t>(t)];
  const EstimatePoint& then = estimates[static_cast<std::size_t>(t - params.tau)];
  if (now.gap || then.gap) return {};

  const double r_p =
      std::log(series[static_cast<std::size_t>(t)].price /
               series[static_cast<std::size_t>(t - params.tau)].price);
  const double r_s = std::log(now.sigma_hat / then.sigma_hat);

  const bool sell = params.pb(r_p) * params.pb(r_s) > params.delta ||
                    params.n(r_p) * params.n(r_s) > params.delta;
  const bool buy = params.nb(r_p) * params.pb(r_s) > params.delta ||
                   params.p(r_p) * params.n(r_s) > params.delta;
  if (sell && buy) return {Signal::None, true};
  if (sell) return {Signal::Sell, false};
  if (buy) return {Signal::Buy, false};
  return {};
}

double word_of_mouth_proportion(const PriceSeries& series,
                                std::span<const EstimatePoint> estimates,
                                int burn_in) {
  if (estimates.size() + 1 != series.size()) {
    throw std::invalid_argument("estimates do not match the series");
  }
  if (burn_in < 0) throw std::invalid_argument("burn_in must be >= 0");
  double model_sum = 0.0;
  double resid_sum = 0.0;
  for (std::size_t t = static_cast<std::size_t>(burn_in); t < estimates.size();
       ++t) {
    const EstimatePoint& e = estimates[t];
    if (e.gap) continue;
    const double log_p = std::log(series[t].price);
    const double model = (std::log(e.pbar_hat) - log_p) / e.sigma_hat;
    const double ret = std::log(series[t + 1].price / series[t].price);
    model_sum += std::abs(model);
    resid_sum += std::abs(ret - model);
  }
  const double total = model_sum + resid_sum;
  return total == 0.0 ? 0.0 : model_sum / total;
}

}  // namespace fon
