#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "fon/opinion.hpp"

namespace fon {

/// How an investor forms the uncertainty input for the next step: distance
/// to the neighbor mean (Local), to the population mean (Global), or to an
/// external signal such as the market price (External).
enum class SchemeKind { Local, Global, External };

struct ReferenceScheme {
  SchemeKind kind = SchemeKind::Local;
  /// External only; queried with the time index of the state being advanced.
  std::function<double(int)> signal;

  static ReferenceScheme local() { return {SchemeKind::Local, {}}; }
  static ReferenceScheme global() { return {SchemeKind::Global, {}}; }
  static ReferenceScheme external(std::function<double(int)> g) {
    return {SchemeKind::External, std::move(g)};
  }
};

struct NetworkParams {
  Eigen::ArrayXd d;          // per-investor confidence bound, each in [0, 1]
  double b = 1.0;            // uncertainty scaling, > 0
  double sigma_floor = 1e-9; // lower clamp applied to every updated sdv
};

/// Snapshot of all opinions at one time step. Immutable by convention:
/// network_step returns a fresh snapshot.
struct NetworkState {
  int t = 0;
  Eigen::ArrayXd centers;
  Eigen::ArrayXd sdvs;

  int n() const { return static_cast<int>(centers.size()); }
  GaussianOpinion opinion(int i) const { return {centers[i], sdvs[i]}; }
};

struct GroupPartition {
  std::vector<std::vector<int>> groups;  // disjoint, cover 0..n-1, by min index
  std::vector<double> group_centers;     // within-group means
  std::vector<double> group_sdvs;

  std::size_t size() const { return groups.size(); }
};

struct ConvergenceOptions {
  double tol = 1e-10;     // per-step change threshold
  int window = 5;         // consecutive quiet steps required
  double group_tol = 1e-6;
};

struct ConvergenceRecord {
  bool converged = false;
  int t_n = -1;  // first state of the quiet run
  GroupPartition partition;
};

/// Mean of values[idx], accumulated as deviations from the lowest-index
/// entry. Exact when all selected values are equal, and identical across
/// callers that share the index set, which is what makes consensus states
/// exact fixed points of the update.
double anchored_mean(const Eigen::ArrayXd& values, std::span<const int> idx);

/// Indices j with closeness(opinion_i, opinion_j) >= d_i, ascending.
/// d_i = 1 always yields {i}, so an investor with the maximal bound never
/// follows anyone. Throws std::out_of_range for a bad index.
std::vector<int> neighbor_set(int i, const NetworkState& state,
                              const NetworkParams& params);

/// b * |own center - reference| evaluated on the time-t snapshot.
double uncertainty_input(int i, const NetworkState& state,
                         const ReferenceScheme& scheme,
                         const NetworkParams& params);

/// One synchronous update: every center becomes the uniform average of the
/// old neighbor centers, every sdv the uniform average of the old neighbor
/// sdvs plus the uncertainty input, clamped from below by sigma_floor.
NetworkState network_step(const NetworkState& state,
                          const ReferenceScheme& scheme,
                          const NetworkParams& params);

/// Transitive closure of |c_i - c_j| <= tol, with within-group mean
/// centers and sdvs.
GroupPartition partition_groups(const NetworkState& state, double tol);

/// Streaming convergence check: feed states in order; fires once the last
/// `window` transitions are quiet. Quiet means every center changes by at
/// most tol, plus every sdv for Local/Global; under External reference the
/// sdvs may grow forever, so instead the centers must have collapsed to a
/// single group (a frozen multi-group plateau is not a consensus).
class ConvergenceDetector {
 public:
  ConvergenceDetector(SchemeKind kind, ConvergenceOptions opts)
      : kind_(kind), opts_(opts) {}

  /// Returns true once converged (then stays true).
  bool feed(const NetworkState& state);

  const ConvergenceRecord& record() const { return record_; }

 private:
  SchemeKind kind_;
  ConvergenceOptions opts_;
  NetworkState prev_;
  bool has_prev_ = false;
  int streak_ = 0;
  ConvergenceRecord record_;
};

/// Offline form of the detector over a recorded trace; the partition in the
/// record is taken from the last state.
ConvergenceRecord detect_convergence(std::span<const NetworkState> trace,
                                     SchemeKind kind,
                                     const ConvergenceOptions& opts = {});

}  // namespace fon
