#include "fon/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fon {

double anchored_mean(const Eigen::ArrayXd& values, std::span<const int> idx) {
  const double anchor = values[idx.front()];
  double dev = 0.0;
  for (int j : idx) dev += values[j] - anchor;
  return anchor + dev / static_cast<double>(idx.size());
}

std::vector<int> neighbor_set(int i, const NetworkState& state,
                              const NetworkParams& params) {
  const int n = state.n();
  if (i < 0 || i >= n) throw std::out_of_range("investor index out of range");
  const double di = params.d[i];
  if (di >= 1.0) return {i};
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n));
  const GaussianOpinion self = state.opinion(i);
  for (int j = 0; j < n; ++j) {
    if (closeness(self, state.opinion(j)) >= di) out.push_back(j);
  }
  return out;
}

double uncertainty_input(int i, const NetworkState& state,
                         const ReferenceScheme& scheme,
                         const NetworkParams& params) {
  double ref = 0.0;
  switch (scheme.kind) {
    case SchemeKind::Local:
      ref = anchored_mean(state.centers, neighbor_set(i, state, params));
      break;
    case SchemeKind::Global: {
      std::vector<int> all(static_cast<std::size_t>(state.n()));
      std::iota(all.begin(), all.end(), 0);
      ref = anchored_mean(state.centers, all);
      break;
    }
    case SchemeKind::External:
      if (!scheme.signal) {
        throw std::invalid_argument("External reference needs a signal");
      }
      ref = scheme.signal(state.t);
      break;
  }
  return params.b * std::abs(state.centers[i] - ref);
}

NetworkState network_step(const NetworkState& state,
                          const ReferenceScheme& scheme,
                          const NetworkParams& params) {
  const int n = state.n();
  NetworkState next;
  next.t = state.t + 1;
  next.centers.resize(n);
  next.sdvs.resize(n);

  // The global mean does not depend on i; hoist it.
  double global_ref = 0.0;
  std::vector<int> all;
  if (scheme.kind == SchemeKind::Global) {
    all.resize(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    global_ref = anchored_mean(state.centers, all);
  } else if (scheme.kind == SchemeKind::External) {
    if (!scheme.signal) {
      throw std::invalid_argument("External reference needs a signal");
    }
    global_ref = scheme.signal(state.t);
  }

  for (int i = 0; i < n; ++i) {
    const auto neighbors = neighbor_set(i, state, params);
    const double center_mean = anchored_mean(state.centers, neighbors);
    const double sdv_mean = anchored_mean(state.sdvs, neighbors);
    const double ref = scheme.kind == SchemeKind::Local ? center_mean : global_ref;
    const double u = params.b * std::abs(state.centers[i] - ref);
    next.centers[i] = center_mean;
    next.sdvs[i] = std::max(sdv_mean + u, params.sigma_floor);
  }
  return next;
}

GroupPartition partition_groups(const NetworkState& state, double tol) {
  const int n = state.n();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return state.centers[a] < state.centers[b];
  });

  // On a line the transitive closure of |c_i - c_j| <= tol is exactly the
  // chains split at consecutive gaps > tol.
  std::vector<std::vector<int>> chains;
  for (int k = 0; k < n; ++k) {
    const int i = order[k];
    if (k == 0 ||
        state.centers[i] - state.centers[order[k - 1]] > tol) {
      chains.emplace_back();
    }
    chains.back().push_back(i);
  }

  GroupPartition part;
  for (auto& g : chains) std::sort(g.begin(), g.end());
  std::sort(chains.begin(), chains.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  for (auto& g : chains) {
    part.group_centers.push_back(anchored_mean(state.centers, g));
    part.group_sdvs.push_back(anchored_mean(state.sdvs, g));
    part.groups.push_back(std::move(g));
  }
  return part;
}

bool ConvergenceDetector::feed(const NetworkState& state) {
  if (record_.converged) return true;
  if (!has_prev_) {
    prev_ = state;
    has_prev_ = true;
    return false;
  }
  double dc = 0.0;
  double ds = 0.0;
  for (int i = 0; i < state.n(); ++i) {
    dc = std::max(dc, std::abs(state.centers[i] - prev_.centers[i]));
    ds = std::max(ds, std::abs(state.sdvs[i] - prev_.sdvs[i]));
  }
  const bool quiet = kind_ == SchemeKind::External
                         ? dc <= opts_.tol
                         : dc <= opts_.tol && ds <= opts_.tol;
  streak_ = quiet ? streak_ + 1 : 0;
  prev_ = state;
  if (streak_ >= opts_.window) {
    auto part = partition_groups(state, opts_.group_tol);
    if (kind_ == SchemeKind::External && part.size() != 1) {
      return false;  // frozen plateau, groups will still merge
    }
    record_.converged = true;
    record_.t_n = state.t - streak_;
    record_.partition = std::move(part);
  }
  return record_.converged;
}

ConvergenceRecord detect_convergence(std::span<const NetworkState> trace,
                                     SchemeKind kind,
                                     const ConvergenceOptions& opts) {
  if (trace.empty()) throw std::invalid_argument("empty trace");
  ConvergenceDetector det(kind, opts);
  for (const auto& s : trace) {
    if (det.feed(s)) break;
  }
  ConvergenceRecord rec = det.record();
  rec.partition = partition_groups(trace.back(), opts.group_tol);
  return rec;
}

}  // namespace fon
