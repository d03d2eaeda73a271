#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fon/network.hpp"
#include "fon/rng.hpp"

using fon::NetworkParams;
using fon::NetworkState;
using fon::ReferenceScheme;
using fon::SchemeKind;

namespace {

NetworkState make_state(std::vector<double> centers, std::vector<double> sdvs,
                        int t = 0) {
  NetworkState s;
  s.t = t;
  s.centers = Eigen::Map<Eigen::ArrayXd>(centers.data(),
                                         static_cast<Eigen::Index>(centers.size()));
  s.sdvs =
      Eigen::Map<Eigen::ArrayXd>(sdvs.data(), static_cast<Eigen::Index>(sdvs.size()));
  return s;
}

NetworkParams uniform_params(int n, double d, double b = 1.0) {
  NetworkParams p;
  p.d = Eigen::ArrayXd::Constant(n, d);
  p.b = b;
  return p;
}

}  // namespace

TEST_CASE("neighbor_set follows the closeness threshold") {
  const auto state = make_state({0.0, 1.0, 10.0}, {0.5, 0.5, 0.5});
  const auto params = uniform_params(3, 0.3);
  // closeness(0,1) = exp(-1) ~ 0.368 >= 0.3, closeness(0,2) ~ exp(-100).
  CHECK(fon::neighbor_set(0, state, params) == std::vector<int>{0, 1});
  CHECK(fon::neighbor_set(2, state, params) == std::vector<int>{2});

  const auto consensus = make_state({4.0, 4.0, 4.0}, {0.1, 2.0, 0.7});
  CHECK(fon::neighbor_set(1, consensus, uniform_params(3, 0.99)) ==
        std::vector<int>{0, 1, 2});

  // d = 1 pins the set to the investor itself even at closeness 1.
  CHECK(fon::neighbor_set(1, consensus, uniform_params(3, 1.0)) ==
        std::vector<int>{1});

  CHECK_THROWS_AS(fon::neighbor_set(3, state, params), std::out_of_range);
  CHECK_THROWS_AS(fon::neighbor_set(-1, state, params), std::out_of_range);
}

TEST_CASE("neighbor sets are symmetric and self-including for equal d < 1") {
  fon::Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.raw() % 8);
    std::vector<double> c(n), s(n);
    for (int i = 0; i < n; ++i) {
      c[i] = rng.uniform(-5, 5);
      s[i] = rng.uniform(0.05, 2.0);
    }
    const auto state = make_state(c, s);
    const auto params = uniform_params(n, rng.uniform(0.0, 0.999));
    std::vector<std::vector<int>> sets;
    for (int i = 0; i < n; ++i) sets.push_back(fon::neighbor_set(i, state, params));
    for (int i = 0; i < n; ++i) {
      CHECK(std::find(sets[i].begin(), sets[i].end(), i) != sets[i].end());
      for (int j : sets[i]) {
        CHECK(std::find(sets[j].begin(), sets[j].end(), i) != sets[j].end());
      }
    }
  }
}

TEST_CASE("uncertainty_input measures distance to the reference") {
  const auto pair = make_state({0.0, 2.0}, {2.0, 2.0});
  const auto params = uniform_params(2, 0.5);
  // closeness = exp(-4/16) ~ 0.78, so both are neighbors of both.
  CHECK(fon::uncertainty_input(0, pair, ReferenceScheme::local(), params) == 1.0);
  CHECK(fon::uncertainty_input(1, pair, ReferenceScheme::local(), params) == 1.0);

  const auto consensus = make_state({3.0, 3.0, 3.0}, {1.0, 1.0, 1.0});
  CHECK(fon::uncertainty_input(1, consensus, ReferenceScheme::local(),
                               uniform_params(3, 0.5)) == 0.0);
  CHECK(fon::uncertainty_input(1, consensus, ReferenceScheme::global(),
                               uniform_params(3, 0.5)) == 0.0);

  auto ext = ReferenceScheme::external([](int) { return 5.0; });
  auto p01 = uniform_params(3, 0.5, 0.1);
  CHECK(fon::uncertainty_input(0, consensus, ext, p01) ==
        doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("network_step leaves separated investors alone") {
  const auto state = make_state({0.0, 2.0}, {1.0, 1.0});
  // closeness = exp(-1) ~ 0.37 < 0.5: both are singletons.
  const auto next =
      fon::network_step(state, ReferenceScheme::local(), uniform_params(2, 0.5));
  CHECK(next.t == 1);
  CHECK(next.centers[0] == 0.0);
  CHECK(next.centers[1] == 2.0);
  CHECK(next.sdvs[0] == 1.0);
  CHECK(next.sdvs[1] == 1.0);
}

TEST_CASE("network_step averages neighbors synchronously") {
  const auto state = make_state({0.0, 2.0}, {2.0, 2.0});
  const auto next =
      fon::network_step(state, ReferenceScheme::local(), uniform_params(2, 0.5));
  CHECK(next.centers[0] == 1.0);
  CHECK(next.centers[1] == 1.0);
  CHECK(next.sdvs[0] == 3.0);  // mean sdv 2 plus |0 - 1|
  CHECK(next.sdvs[1] == 3.0);
}

TEST_CASE("a consensus state is an exact fixed point under Local reference") {
  const double c = 0.1 + 0.2;  // deliberately not a round binary value
  const auto state = make_state({c, c, c, c, c}, {0.37, 0.37, 0.37, 0.37, 0.37});
  const auto params = uniform_params(5, 0.6);
  const auto next = fon::network_step(state, ReferenceScheme::local(), params);
  for (int i = 0; i < 5; ++i) {
    CHECK(next.centers[i] == c);
    CHECK(next.sdvs[i] == 0.37);
    CHECK(fon::uncertainty_input(i, state, ReferenceScheme::local(), params) == 0.0);
  }
}

TEST_CASE("updated spreads are clamped to the floor") {
  const auto state = make_state({1.0, 1.0}, {0.0, 0.0});
  auto params = uniform_params(2, 0.5);
  params.sigma_floor = 1e-9;
  const auto next = fon::network_step(state, ReferenceScheme::local(), params);
  CHECK(next.sdvs[0] == 1e-9);
  CHECK(next.sdvs[1] == 1e-9);
}

TEST_CASE("center bounds never expand") {
  fon::Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.raw() % 10);
    std::vector<double> c(n), s(n);
    for (int i = 0; i < n; ++i) {
      c[i] = rng.uniform(-10, 10);
      s[i] = rng.uniform(0.05, 3.0);
    }
    const auto state = make_state(c, s);
    const auto params = uniform_params(n, rng.uniform(0.0, 1.0));
    const auto next =
        fon::network_step(state, ReferenceScheme::local(), params);
    const double slack = 1e-12 * state.centers.abs().maxCoeff();
    CHECK(next.centers.maxCoeff() <= state.centers.maxCoeff() + slack);
    CHECK(next.centers.minCoeff() >= state.centers.minCoeff() - slack);
  }
}

TEST_CASE("partition_groups is the transitive closure of center closeness") {
  const auto consensus = make_state({2.0, 2.0, 2.0}, {0.1, 0.2, 0.3});
  CHECK(fon::partition_groups(consensus, 1e-9).size() == 1);

  const auto split = make_state({0.0, 0.0, 100.0}, {1.0, 1.0, 1.0});
  const auto part = fon::partition_groups(split, 1e-9);
  REQUIRE(part.size() == 2);
  CHECK(part.groups[0] == std::vector<int>{0, 1});
  CHECK(part.groups[1] == std::vector<int>{2});
  CHECK(part.group_centers[0] == 0.0);
  CHECK(part.group_centers[1] == 100.0);
  CHECK(part.group_sdvs[0] == doctest::Approx(1.0));

  // Chaining: consecutive gaps within tol merge transitively.
  const auto chain = make_state({0.0, 0.5, 1.0, 3.0}, {1, 1, 1, 1});
  CHECK(fon::partition_groups(chain, 0.6).size() == 2);
}

TEST_CASE("detect_convergence needs a sustained quiet window") {
  const auto a = make_state({0.0, 1.0}, {1.0, 1.0}, 0);
  std::vector<NetworkState> trace;
  for (int t = 0; t < 12; ++t) {
    auto s = a;
    s.t = t;
    trace.push_back(s);
  }
  const auto rec = fon::detect_convergence(trace, SchemeKind::Local);
  CHECK(rec.converged);
  CHECK(rec.t_n == 0);

  // Too short to confirm.
  std::vector<NetworkState> brief(trace.begin(), trace.begin() + 4);
  CHECK_FALSE(fon::detect_convergence(brief, SchemeKind::Local).converged);

  // Movement first, then freeze: t_n is the first quiet state.
  std::vector<NetworkState> moving;
  for (int t = 0; t < 12; ++t) {
    auto s = make_state({t < 3 ? 1.0 + t : 4.0, 0.0}, {1.0, 1.0}, t);
    moving.push_back(s);
  }
  const auto rec2 = fon::detect_convergence(moving, SchemeKind::Local);
  CHECK(rec2.converged);
  CHECK(rec2.t_n == 3);
}

TEST_CASE("External detection ignores growing spreads but requires one group") {
  // Frozen two-group plateau: centers constant, sdvs inflating.
  std::vector<NetworkState> plateau;
  for (int t = 0; t < 20; ++t) {
    plateau.push_back(make_state({0.0, 5.0}, {1.0 + t, 1.0 + t}, t));
  }
  CHECK_FALSE(fon::detect_convergence(plateau, SchemeKind::External).converged);
  // The same trace under Local rules is not quiet either (sdvs move).
  CHECK_FALSE(fon::detect_convergence(plateau, SchemeKind::Local).converged);

  // Single group with growing sdvs: consensus under External rules only.
  std::vector<NetworkState> merged;
  for (int t = 0; t < 20; ++t) {
    merged.push_back(make_state({5.0, 5.0}, {1.0 + t, 1.0 + t}, t));
  }
  CHECK(fon::detect_convergence(merged, SchemeKind::External).converged);
  CHECK(fon::detect_convergence(merged, SchemeKind::External).t_n == 0);
  CHECK_FALSE(fon::detect_convergence(merged, SchemeKind::Global).converged);
}
