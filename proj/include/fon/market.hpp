#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fon/network.hpp"
#include "fon/rng.hpp"

namespace fon {

enum class Behavior { Ordinary, Follower, Contrarian, Manipulator };

struct TraderSpec {
  double a = 0.002;  // strength, > 0
  double d = 0.6;    // confidence bound in [0, 1]; 1 iff Manipulator
  Behavior behavior = Behavior::Ordinary;
  double c = 0.0;    // indicator threshold, > 0 for Follower/Contrarian
};

enum class MarketScheme { Local, Global, RealPrice };

struct MarketParams {
  std::vector<TraderSpec> traders;
  double sigma_eps = 0.02;
  MarketScheme scheme = MarketScheme::Local;
  NetworkParams network;  // d must mirror traders[i].d
  std::uint64_t seed = 1;
  int max_steps = 5000;
};

/// Fills network.d from the trader list and checks every invariant,
/// throwing std::invalid_argument naming the offending field.
void finalize_market_params(MarketParams& params);

struct MarketState {
  int t = 0;
  double log_price = 0.0;
  NetworkState network;
};

struct SimulationTrace {
  std::vector<double> log_prices;                    // steps + 1 entries
  std::vector<NetworkState> states;                  // steps + 1 entries
  std::vector<std::vector<std::uint8_t>> indicators; // steps + 1 entries
  std::uint64_t seed = 0;
  ConvergenceRecord convergence;
  /// The price equation is locally unstable when sum a_i/sigma_i,t leaves
  /// (0, 2); a run whose log price escapes the representable price range
  /// stops here instead of feeding non-finite values into the network.
  bool diverged = false;

  int steps() const { return static_cast<int>(log_prices.size()) - 1; }
};

/// Net buy/sell pressure of one investor:
/// indicator * a * (ln pbar_i - ln p) / sigma_i.
double excess_demand(int i, const MarketState& state, const TraderSpec& spec,
                     int indicator);

/// Trade gate for investor i on the time-t snapshot. Ordinary investors and
/// manipulators always trade; a follower trades only while its expected
/// price is within 100c% of the reference (neighbor mean, population mean
/// or real price depending on the scheme), a contrarian only beyond that.
int indicator(int i, const MarketState& state, const MarketParams& params);

/// One synchronous step of price and network, both reading the time-t
/// snapshot; under RealPrice the network's external signal is p_t (not
/// p_{t+1}). Draws exactly one noise deviate.
MarketState market_step(const MarketState& state, const MarketParams& params,
                        Rng& rng);

struct RunOptions {
  bool stop_on_convergence = false;
  ConvergenceOptions convergence{};
};

/// Runs `steps` market steps (or fewer when stopping at convergence) and
/// records every state, price and indicator vector. Deterministic given
/// the rng state.
SimulationTrace run_simulation(const MarketParams& params,
                               const MarketState& initial, int steps,
                               Rng& rng, const RunOptions& opts = {});

struct PredictedLimit {
  double log_price = 0.0;
  bool stable = false;  // 0 < sum a_i / sigma_i,inf < 2
};

/// Long-run expected log price after the network has converged: the
/// strength/uncertainty-weighted mean of the converged log expectations
/// (Local), or the log of the consensus price (Global). Throws
/// std::invalid_argument when the record is not converged or the scheme
/// has no closed-form limit.
PredictedLimit predicted_limit_log_price(const ConvergenceRecord& record,
                                         const NetworkState& final_state,
                                         std::span<const TraderSpec> traders,
                                         MarketScheme scheme);

/// Average of the manipulators' initial expected prices; the common value
/// every ordinary investor is pulled to under RealPrice reference. Throws
/// std::invalid_argument when no manipulator is present.
double manipulator_consensus_target(std::span<const TraderSpec> traders,
                                    const NetworkState& initial);

/// Initial-condition recipe: expected prices on a deterministic grid over
/// [lo, hi] or drawn uniformly; uncertainties uniform on [sigma_lo,
/// sigma_hi) clamped to the floor. Centers are drawn first (when random),
/// then uncertainties, each in index order, so a seed pins the state.
struct InitialRecipe {
  double p0 = 10.0;
  bool pbar_grid = true;
  double pbar_lo = 5.0;
  double pbar_hi = 25.0;
  double sigma_lo = 0.0;
  double sigma_hi = 1.0;
  std::vector<std::pair<int, double>> center_overrides;  // (index, value)
};

MarketState make_initial_state(const InitialRecipe& recipe, int n,
                               double sigma_floor, Rng& rng);

}  // namespace fon
