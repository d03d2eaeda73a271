#include "fon/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fon {

void finalize_market_params(MarketParams& params) {
  const auto n = params.traders.size();
  if (n == 0) throw std::invalid_argument("traders: need at least one");
  if (!(params.sigma_eps >= 0.0) || !std::isfinite(params.sigma_eps)) {
    throw std::invalid_argument("sigma_eps: must be finite and >= 0");
  }
  if (!(params.network.b > 0.0)) throw std::invalid_argument("b: must be > 0");
  if (!(params.network.sigma_floor > 0.0)) {
    throw std::invalid_argument("sigma_floor: must be > 0");
  }
  if (params.max_steps < 0) throw std::invalid_argument("max_steps: must be >= 0");
  params.network.d.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const TraderSpec& s = params.traders[i];
    const std::string at = " (trader " + std::to_string(i) + ")";
    // a = 0 is admitted: it turns the investor off and reduces the price
    // equation to a pure random walk.
    if (!(s.a >= 0.0) || !std::isfinite(s.a)) {
      throw std::invalid_argument("a: must be finite and >= 0" + at);
    }
    if (!(s.d >= 0.0 && s.d <= 1.0)) {
      throw std::invalid_argument("d: must be in [0,1]" + at);
    }
    if ((s.behavior == Behavior::Manipulator) != (s.d == 1.0)) {
      throw std::invalid_argument("d: manipulators and only manipulators have d = 1" + at);
    }
    if ((s.behavior == Behavior::Follower || s.behavior == Behavior::Contrarian) &&
        !(s.c > 0.0)) {
      throw std::invalid_argument("c: follower/contrarian threshold must be > 0" + at);
    }
    params.network.d[static_cast<Eigen::Index>(i)] = s.d;
  }
}

double excess_demand(int i, const MarketState& state, const TraderSpec& spec,
                     int ind) {
  if (ind == 0) return 0.0;
  return spec.a * (std::log(state.network.centers[i]) - state.log_price) /
         state.network.sdvs[i];
}

int indicator(int i, const MarketState& state, const MarketParams& params) {
  const TraderSpec& spec = params.traders[static_cast<std::size_t>(i)];
  if (spec.behavior == Behavior::Ordinary ||
      spec.behavior == Behavior::Manipulator) {
    return 1;
  }
  double log_ref = 0.0;
  switch (params.scheme) {
    case MarketScheme::Local: {
      const auto neighbors = neighbor_set(i, state.network, params.network);
      log_ref = std::log(anchored_mean(state.network.centers, neighbors));
      break;
    }
    case MarketScheme::Global: {
      std::vector<int> all(static_cast<std::size_t>(state.network.n()));
      std::iota(all.begin(), all.end(), 0);
      log_ref = std::log(anchored_mean(state.network.centers, all));
      break;
    }
    case MarketScheme::RealPrice:
      log_ref = state.log_price;
      break;
  }
  const double gap = std::abs(std::log(state.network.centers[i]) - log_ref);
  return spec.behavior == Behavior::Follower ? (gap < spec.c ? 1 : 0)
                                             : (gap > spec.c ? 1 : 0);
}

namespace {

ReferenceScheme network_scheme(const MarketParams& params,
                               const MarketState& state) {
  switch (params.scheme) {
    case MarketScheme::Local:
      return ReferenceScheme::local();
    case MarketScheme::Global:
      return ReferenceScheme::global();
    case MarketScheme::RealPrice: {
      const double price = std::exp(state.log_price);
      return ReferenceScheme::external([price](int) { return price; });
    }
  }
  throw std::logic_error("unreachable");
}

SchemeKind detection_kind(MarketScheme scheme) {
  switch (scheme) {
    case MarketScheme::Local:
      return SchemeKind::Local;
    case MarketScheme::Global:
      return SchemeKind::Global;
    case MarketScheme::RealPrice:
      return SchemeKind::External;
  }
  throw std::logic_error("unreachable");
}

}  // namespace

MarketState market_step(const MarketState& state, const MarketParams& params,
                        Rng& rng) {
  const int n = state.network.n();
  double demand = 0.0;
  for (int i = 0; i < n; ++i) {
    demand += excess_demand(i, state, params.traders[static_cast<std::size_t>(i)],
                            indicator(i, state, params));
  }
  const double eps = rng.normal(0.0, params.sigma_eps);

  MarketState next;
  next.t = state.t + 1;
  next.log_price = state.log_price + demand + eps;
  next.network = network_step(state.network, network_scheme(params, state),
                              params.network);
  return next;
}

SimulationTrace run_simulation(const MarketParams& params,
                               const MarketState& initial, int steps,
                               Rng& rng, const RunOptions& opts) {
  if (steps < 0 || steps > params.max_steps) {
    throw std::invalid_argument("steps: must be in [0, max_steps]");
  }
  if (initial.network.n() != static_cast<int>(params.traders.size())) {
    throw std::invalid_argument("initial state and trader list disagree on n");
  }
  if (!std::isfinite(initial.log_price)) {
    throw std::invalid_argument("initial log price must be finite");
  }
  for (int i = 0; i < initial.network.n(); ++i) {
    if (!(initial.network.centers[i] > 0.0)) {
      throw std::invalid_argument("initial expected prices must be > 0");
    }
    if (!(initial.network.sdvs[i] > 0.0)) {
      throw std::invalid_argument("initial uncertainties must be > 0");
    }
  }

  SimulationTrace trace;
  trace.log_prices.reserve(static_cast<std::size_t>(steps) + 1);
  trace.states.reserve(static_cast<std::size_t>(steps) + 1);
  trace.indicators.reserve(static_cast<std::size_t>(steps) + 1);
  ConvergenceDetector detector(detection_kind(params.scheme), opts.convergence);

  auto record = [&](const MarketState& s) {
    trace.log_prices.push_back(s.log_price);
    trace.states.push_back(s.network);
    std::vector<std::uint8_t> ind(static_cast<std::size_t>(s.network.n()));
    for (int i = 0; i < s.network.n(); ++i) {
      ind[static_cast<std::size_t>(i)] =
          static_cast<std::uint8_t>(indicator(i, s, params));
    }
    trace.indicators.push_back(std::move(ind));
  };

  MarketState current = initial;
  record(current);
  bool converged = detector.feed(current.network);
  for (int k = 0; k < steps && !(converged && opts.stop_on_convergence); ++k) {
    current = market_step(current, params, rng);
    record(current);
    if (!std::isfinite(current.log_price) ||
        std::abs(current.log_price) > 700.0) {
      trace.diverged = true;
      // Only the RealPrice network consumes the price level; under Local
      // or Global the opinion dynamics stay valid, so keep stepping them.
      if (params.scheme == MarketScheme::RealPrice) break;
    }
    converged = detector.feed(current.network);
  }
  trace.convergence = detector.record();
  if (!trace.convergence.converged) {
    trace.convergence.partition =
        partition_groups(current.network, opts.convergence.group_tol);
  }
  return trace;
}

PredictedLimit predicted_limit_log_price(const ConvergenceRecord& record,
                                         const NetworkState& final_state,
                                         std::span<const TraderSpec> traders,
                                         MarketScheme scheme) {
  if (!record.converged) {
    throw std::invalid_argument("predicted limit needs a converged network");
  }
  if (scheme == MarketScheme::RealPrice) {
    throw std::invalid_argument(
        "no closed-form limit under RealPrice reference");
  }
  double strength = 0.0;  // sum a_i / sigma_i,inf
  double weighted = 0.0;  // sum a_i ln(pbar_i,inf) / sigma_i,inf
  for (int i = 0; i < final_state.n(); ++i) {
    const double w = traders[static_cast<std::size_t>(i)].a / final_state.sdvs[i];
    strength += w;
    weighted += w * std::log(final_state.centers[i]);
  }
  PredictedLimit out;
  out.stable = strength > 0.0 && strength < 2.0;
  if (scheme == MarketScheme::Global) {
    if (record.partition.size() != 1) {
      throw std::invalid_argument("Global limit needs a single consensus group");
    }
    out.log_price = std::log(record.partition.group_centers.front());
  } else {
    out.log_price = weighted / strength;
  }
  return out;
}

double manipulator_consensus_target(std::span<const TraderSpec> traders,
                                    const NetworkState& initial) {
  double sum = 0.0;
  int m = 0;
  for (int i = 0; i < initial.n(); ++i) {
    if (traders[static_cast<std::size_t>(i)].behavior == Behavior::Manipulator) {
      sum += initial.centers[i];
      ++m;
    }
  }
  if (m == 0) throw std::invalid_argument("no manipulators present");
  return sum / static_cast<double>(m);
}

MarketState make_initial_state(const InitialRecipe& recipe, int n,
                               double sigma_floor, Rng& rng) {
  if (n < 1) throw std::invalid_argument("n: must be >= 1");
  if (!(recipe.p0 > 0.0)) throw std::invalid_argument("p0: must be > 0");
  if (!(recipe.pbar_lo > 0.0) || !(recipe.pbar_hi >= recipe.pbar_lo)) {
    throw std::invalid_argument("pbar0: need 0 < lo <= hi");
  }
  if (!(recipe.sigma_lo >= 0.0) || !(recipe.sigma_hi >= recipe.sigma_lo)) {
    throw std::invalid_argument("sigma0: need 0 <= lo <= hi");
  }

  NetworkState net;
  net.t = 0;
  net.centers.resize(n);
  net.sdvs.resize(n);
  if (recipe.pbar_grid) {
    for (int i = 0; i < n; ++i) {
      net.centers[i] = n == 1 ? 0.5 * (recipe.pbar_lo + recipe.pbar_hi)
                              : recipe.pbar_lo +
                                    (recipe.pbar_hi - recipe.pbar_lo) *
                                        (static_cast<double>(i) /
                                         static_cast<double>(n - 1));
    }
  } else {
    for (int i = 0; i < n; ++i) {
      net.centers[i] = rng.uniform(recipe.pbar_lo, recipe.pbar_hi);
    }
  }
  for (int i = 0; i < n; ++i) {
    net.sdvs[i] = std::max(rng.uniform(recipe.sigma_lo, recipe.sigma_hi),
                           sigma_floor);
  }
  for (const auto& [idx, value] : recipe.center_overrides) {
    if (idx < 0 || idx >= n) {
      throw std::invalid_argument("center override index out of range");
    }
    if (!(value > 0.0)) {
      throw std::invalid_argument("center override must be > 0");
    }
    net.centers[idx] = value;
  }

  MarketState state;
  state.t = 0;
  state.log_price = std::log(recipe.p0);
  state.network = std::move(net);
  return state;
}

}  // namespace fon
