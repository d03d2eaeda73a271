#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fon/market.hpp"

namespace fon {

enum class Metric { GroupCount, StepsToConsensus };

/// One parameter sweep: the cross product of d, n and b axes, each cell
/// re-run with derived seeds.
struct ExperimentGrid {
  MarketScheme scheme = MarketScheme::Local;
  Metric metric = Metric::GroupCount;
  std::vector<double> d_values;
  std::vector<int> n_values;
  std::vector<double> b_values;
  int runs_per_cell = 100;
  double a = 0.002;
  double sigma_eps = 0.02;
  double p0 = 10.0;
  double pbar_lo = 5.0;
  double pbar_hi = 25.0;
  double sigma0_lo = 0.0;
  double sigma0_hi = 1.0;
  double sigma_floor = 1e-9;
  int max_steps = 5000;
  std::uint64_t base_seed = 1;
  ConvergenceOptions convergence{};
};

struct CellStats {
  double mean = 0.0;
  double std = 0.0;   // sample standard deviation over the included runs
  int count = 0;      // runs that converged and entered the stats
  int shortfall = 0;  // runs that hit max_steps without converging
};

struct CellResult {
  double d = 0.0;
  int n = 0;
  double b = 0.0;
  CellStats stats;
};

/// Per-run seed: a pure mix of the base seed, the cell coordinates (bit
/// patterns of d and b, plus n and the scheme) and the run index, so any
/// cell and any single run can be reproduced in isolation.
std::uint64_t derive_run_seed(std::uint64_t base_seed, double d, int n,
                              double b, MarketScheme scheme, int run);

CellStats run_cell(const ExperimentGrid& grid, double d, int n, double b);

/// All cells in axis order (d outer, n middle, b inner). Cells are
/// independent by seed construction.
std::vector<CellResult> run_grid(const ExperimentGrid& grid);

void write_stats_csv(std::ostream& out, const ExperimentGrid& grid,
                     const std::vector<CellResult>& results);
void write_stats_json(std::ostream& out, const ExperimentGrid& grid,
                      const std::vector<CellResult>& results);

std::string to_string(MarketScheme scheme);
std::string to_string(Metric metric);

}  // namespace fon
