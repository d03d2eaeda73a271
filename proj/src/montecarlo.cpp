#include "fon/montecarlo.hpp"

#include <bit>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "fon/numio.hpp"
#include "fon/rng.hpp"

namespace fon {

std::uint64_t derive_run_seed(std::uint64_t base_seed, double d, int n,
                              double b, MarketScheme scheme, int run) {
  std::uint64_t h = mix64(base_seed);
  h = mix64(h ^ std::bit_cast<std::uint64_t>(d));
  h = mix64(h ^ static_cast<std::uint64_t>(n));
  h = mix64(h ^ std::bit_cast<std::uint64_t>(b));
  h = mix64(h ^ static_cast<std::uint64_t>(scheme));
  h = mix64(h ^ static_cast<std::uint64_t>(run));
  return h;
}

CellStats run_cell(const ExperimentGrid& grid, double d, int n, double b) {
  if (grid.runs_per_cell < 1) {
    throw std::invalid_argument("runs_per_cell must be >= 1");
  }
  MarketParams params;
  params.scheme = grid.scheme;
  params.sigma_eps = grid.sigma_eps;
  params.network.b = b;
  params.network.sigma_floor = grid.sigma_floor;
  params.max_steps = grid.max_steps;
  params.traders.assign(
      static_cast<std::size_t>(n),
      TraderSpec{grid.a, d,
                 d == 1.0 ? Behavior::Manipulator : Behavior::Ordinary, 0.0});
  finalize_market_params(params);

  InitialRecipe recipe;
  recipe.p0 = grid.p0;
  recipe.pbar_grid = true;
  recipe.pbar_lo = grid.pbar_lo;
  recipe.pbar_hi = grid.pbar_hi;
  recipe.sigma_lo = grid.sigma0_lo;
  recipe.sigma_hi = grid.sigma0_hi;

  RunOptions opts;
  opts.stop_on_convergence = true;
  opts.convergence = grid.convergence;

  CellStats stats;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int run = 0; run < grid.runs_per_cell; ++run) {
    Rng rng(derive_run_seed(grid.base_seed, d, n, b, grid.scheme, run));
    const MarketState initial =
        make_initial_state(recipe, n, grid.sigma_floor, rng);
    const SimulationTrace trace =
        run_simulation(params, initial, grid.max_steps, rng, opts);
    if (!trace.convergence.converged) {
      ++stats.shortfall;
      continue;
    }
    const double value =
        grid.metric == Metric::GroupCount
            ? static_cast<double>(trace.convergence.partition.size())
            : static_cast<double>(trace.convergence.t_n);
    sum += value;
    sum_sq += value * value;
    ++stats.count;
  }
  if (stats.count > 0) stats.mean = sum / stats.count;
  if (stats.count > 1) {
    const double var =
        (sum_sq - sum * sum / stats.count) / (stats.count - 1);
    stats.std = std::sqrt(std::max(var, 0.0));
  }
  return stats;
}

std::vector<CellResult> run_grid(const ExperimentGrid& grid) {
  if (grid.d_values.empty() || grid.n_values.empty() || grid.b_values.empty()) {
    throw std::invalid_argument("grid axes must be non-empty");
  }
  std::vector<CellResult> results;
  results.reserve(grid.d_values.size() * grid.n_values.size() *
                  grid.b_values.size());
  for (double d : grid.d_values) {
    for (int n : grid.n_values) {
      for (double b : grid.b_values) {
        results.push_back({d, n, b, run_cell(grid, d, n, b)});
      }
    }
  }
  return results;
}

std::string to_string(MarketScheme scheme) {
  switch (scheme) {
    case MarketScheme::Local:
      return "local";
    case MarketScheme::Global:
      return "global";
    case MarketScheme::RealPrice:
      return "realprice";
  }
  return "?";
}

std::string to_string(Metric metric) {
  return metric == Metric::GroupCount ? "group_count" : "steps_to_consensus";
}

void write_stats_csv(std::ostream& out, const ExperimentGrid& grid,
                     const std::vector<CellResult>& results) {
  out << "scheme,d,n,b,metric,mean,std,runs,shortfall\n";
  for (const auto& row : results) {
    out << to_string(grid.scheme) << ',' << format_double(row.d) << ','
        << row.n << ',' << format_double(row.b) << ','
        << to_string(grid.metric) << ',' << format_double(row.stats.mean)
        << ',' << format_double(row.stats.std) << ',' << row.stats.count
        << ',' << row.stats.shortfall << '\n';
  }
}

void write_stats_json(std::ostream& out, const ExperimentGrid& grid,
                      const std::vector<CellResult>& results) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : results) {
    rows.push_back({{"scheme", to_string(grid.scheme)},
                    {"d", row.d},
                    {"n", row.n},
                    {"b", row.b},
                    {"metric", to_string(grid.metric)},
                    {"mean", row.stats.mean},
                    {"std", row.stats.std},
                    {"runs", row.stats.count},
                    {"shortfall", row.stats.shortfall}});
  }
  nlohmann::json doc{{"base_seed", grid.base_seed},
                     {"runs_per_cell", grid.runs_per_cell},
                     {"cells", rows}};
  out << doc.dump(2) << '\n';
}

}  // namespace fon
