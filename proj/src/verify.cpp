#include "fon/verify.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "fon/estimator.hpp"
#include "fon/market.hpp"
#include "fon/montecarlo.hpp"
#include "fon/network.hpp"
#include "fon/opinion.hpp"
#include "fon/rng.hpp"

namespace fon {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

MarketParams ordinary_market(int n, double a, double d, double b,
                             double sigma_eps, MarketScheme scheme) {
  MarketParams p;
  p.scheme = scheme;
  p.sigma_eps = sigma_eps;
  p.network.b = b;
  p.traders.assign(static_cast<std::size_t>(n),
                   TraderSpec{a, d, Behavior::Ordinary, 0.0});
  finalize_market_params(p);
  return p;
}

CheckResult closeness_symmetry(std::uint64_t seed) {
  CheckResult res{"closeness_symmetry", "Def. 2", true, ""};
  Rng rng(seed);
  for (int k = 0; k < 1000 && res.pass; ++k) {
    const GaussianOpinion a{rng.uniform(-20, 20), rng.uniform(0, 5)};
    const GaussianOpinion b{rng.uniform(-20, 20), rng.uniform(0, 5)};
    const double ab = closeness(a, b);
    res.pass = ab == closeness(b, a) && ab >= 0.0 && ab <= 1.0 &&
               closeness(a, a) == 1.0;
  }
  res.detail = res.pass ? "exact over 1000 random pairs" : "asymmetry found";
  return res;
}

CheckResult composition_oracle(std::uint64_t seed, double tol) {
  CheckResult res{"composition_grid_oracle", "Lemma 2", true, ""};
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double sx = rng.uniform(0.4, 2.0);
    const GaussianOpinion v{rng.uniform(-5, 5), rng.uniform(0.4, 2.0)};
    const double reach = 5.0 * (sx + v.sdv);
    const auto samples =
        compose_oracle(sx, v, v.center - reach, v.center + reach, 10000);
    const auto closed = compose_conditional(sx, v);
    for (const auto& [x, m] : samples) {
      const double gap = (x - closed.center) / closed.sdv;
      worst = std::max(worst, std::abs(m - std::exp(-gap * gap)));
    }
  }
  res.pass = worst <= tol;
  res.detail = "max grid error " + fmt(worst) + " vs " + fmt(tol);
  return res;
}

CheckResult local_group_convergence(std::uint64_t seed) {
  CheckResult res{"local_group_convergence", "Theorems 1-2", false, ""};
  auto params = ordinary_market(60, 0.002, 0.6, 1.0, 0.02, MarketScheme::Local);
  Rng rng(seed);
  InitialRecipe recipe;  // grid [5,25], sigma0 U(0,1)
  const auto initial = make_initial_state(recipe, 60, 1e-9, rng);
  RunOptions opts;
  opts.stop_on_convergence = true;
  const auto trace = run_simulation(params, initial, 5000, rng, opts);
  if (!trace.convergence.converged) {
    res.detail = "no convergence within 5000 steps";
    return res;
  }
  const auto& final_state = trace.states.back();
  bool exact = true;
  const auto next = network_step(final_state, ReferenceScheme::local(),
                                 params.network);
  for (int i = 0; i < final_state.n(); ++i) {
    exact = exact &&
            uncertainty_input(i, final_state, ReferenceScheme::local(),
                              params.network) == 0.0 &&
            next.centers[i] == final_state.centers[i] &&
            next.sdvs[i] == final_state.sdvs[i];
  }
  res.pass = exact;
  res.detail = "t_n=" + std::to_string(trace.convergence.t_n) + ", " +
               std::to_string(trace.convergence.partition.size()) +
               " groups, fixed point " + (exact ? "exact" : "violated");
  return res;
}

CheckResult global_consensus(std::uint64_t seed) {
  CheckResult res{"global_consensus", "Theorem 3", false, ""};
  auto params = ordinary_market(60, 0.005, 0.95, 0.1, 0.02, MarketScheme::Global);
  Rng rng(seed);
  InitialRecipe recipe;
  recipe.sigma_hi = 5.0;
  const auto initial = make_initial_state(recipe, 60, 1e-9, rng);
  RunOptions opts;
  opts.stop_on_convergence = true;
  const auto trace = run_simulation(params, initial, 5000, rng, opts);
  res.pass = trace.convergence.converged &&
             trace.convergence.partition.size() == 1;
  res.detail = trace.convergence.converged
                   ? "consensus at t_n=" + std::to_string(trace.convergence.t_n)
                   : "no convergence";
  return res;
}

CheckResult external_consensus(std::uint64_t seed) {
  CheckResult res{"external_consensus", "Theorem 4", false, ""};
  auto params =
      ordinary_market(60, 0.005, 0.95, 0.1, 0.02, MarketScheme::RealPrice);
  Rng rng(seed);
  InitialRecipe recipe;
  recipe.sigma_hi = 5.0;
  const auto initial = make_initial_state(recipe, 60, 1e-9, rng);
  const auto trace = run_simulation(params, initial, 400, rng, {});
  if (!trace.convergence.converged) {
    res.detail = "no center consensus within 400 steps";
    return res;
  }
  const int start = trace.convergence.t_n + 1;
  bool exact = true;
  bool growing = true;
  for (int t = start; t + 1 < static_cast<int>(trace.states.size()); ++t) {
    const auto& now = trace.states[static_cast<std::size_t>(t)];
    const auto& next = trace.states[static_cast<std::size_t>(t) + 1];
    const double sigma_common = now.sdvs[0];
    const double x_inf = now.centers[0];
    const double p_t = std::exp(trace.log_prices[static_cast<std::size_t>(t)]);
    const double expected =
        sigma_common + params.network.b * std::abs(x_inf - p_t);
    for (int i = 0; i < now.n(); ++i) {
      exact = exact && now.sdvs[i] == sigma_common && next.sdvs[i] == expected;
    }
    growing = growing && next.sdvs[0] >= now.sdvs[0];
  }
  res.pass = exact && growing;
  res.detail = "t_n=" + std::to_string(trace.convergence.t_n) +
               ", spread recursion " + (exact ? "exact" : "violated") +
               (growing ? ", non-decreasing" : ", shrank");
  return res;
}

CheckResult combined_form_identity(std::uint64_t seed, double tol) {
  CheckResult res{"combined_form_identity", "Def. 5, Theorem 1", true, ""};
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const int n = 1 + static_cast<int>(rng.raw() % 60);
    std::vector<GaussianOpinion> ops;
    std::vector<double> a;
    for (int i = 0; i < n; ++i) {
      ops.push_back({rng.uniform(1.0, 30.0), rng.uniform(0.05, 5.0)});
      a.push_back(rng.uniform(1e-4, 0.05));
    }
    const double lp = std::log(rng.uniform(1.0, 30.0));
    double demand = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::size_t u = static_cast<std::size_t>(i);
      demand += a[u] * (std::log(ops[u].center) - lp) / ops[u].sdv;
    }
    const double direct = lp + demand;
    const double via_combined =
        combined_price_step(lp, combined_state(ops, a), 0.0);
    worst = std::max(worst, std::abs(direct - via_combined));
  }
  res.pass = worst <= tol;
  res.detail = "max |direct - combined| = " + fmt(worst) + " vs " + fmt(tol);
  return res;
}

CheckResult rls_batch_equivalence(std::uint64_t seed, double tol) {
  CheckResult res{"rls_batch_equivalence", "Eq. (64)-(67) pipeline", true, ""};
  Rng rng(seed);
  double worst = 0.0;
  bool spd = true;
  for (double lambda : {1.0, 0.999, 0.9}) {
    for (int rep = 0; rep < 10; ++rep) {
      RlsState state;
      state.v_hat = Eigen::Vector2d(0.5, 0.1);
      state.P = Eigen::Matrix2d::Identity() * 10.0;
      state.lambda = lambda;
      std::vector<std::pair<Eigen::Vector2d, double>> data;
      for (int k = 0; k < 50; ++k) {
        const Eigen::Vector2d s(1.0, -std::log(rng.uniform(5.0, 20.0)));
        const double r = rng.normal(0.0, 0.05);
        data.emplace_back(s, r);
        state = rls_step(state, s, r);
        spd = spd && state.P(0, 0) > 0.0 && state.P.determinant() > 0.0 &&
              std::abs(state.P(0, 1) - state.P(1, 0)) <= 1e-12;
      }
      const auto batch =
          batch_ls_oracle(data, lambda, Eigen::Vector2d(0.5, 0.1),
                          Eigen::Matrix2d::Identity() * 10.0);
      worst = std::max(worst, (state.v_hat - batch).cwiseAbs().maxCoeff());
    }
  }
  res.pass = worst <= tol && spd;
  res.detail = "max |rls - batch| = " + fmt(worst) + " vs " + fmt(tol) +
               (spd ? ", P spd" : ", P violated");
  return res;
}

CheckResult price_contraction(std::uint64_t seed, double tol) {
  CheckResult res{"price_contraction", "Theorem 5, Eq. (46)", false, ""};
  auto params = ordinary_market(6, 0.03, 0.5, 1.0, 0.0, MarketScheme::Local);
  Rng rng(seed);
  InitialRecipe recipe;
  recipe.pbar_lo = 9.0;
  recipe.pbar_hi = 11.0;
  recipe.sigma_lo = 0.5;
  recipe.sigma_hi = 1.0;
  const auto initial = make_initial_state(recipe, 6, 1e-9, rng);
  const auto trace = run_simulation(params, initial, 400, rng, {});
  if (!trace.convergence.converged) {
    res.detail = "network did not converge";
    return res;
  }
  const auto limit = predicted_limit_log_price(
      trace.convergence, trace.states.back(), params.traders, params.scheme);
  if (!limit.stable) {
    res.detail = "configuration not in the stable band";
    return res;
  }
  double strength = 0.0;
  for (int i = 0; i < trace.states.back().n(); ++i) {
    strength += params.traders[static_cast<std::size_t>(i)].a /
                trace.states.back().sdvs[i];
  }
  const double ratio_expected = std::abs(1.0 - strength);
  double worst = 0.0;
  int checked = 0;
  for (int t = trace.convergence.t_n;
       t + 1 < static_cast<int>(trace.log_prices.size()); ++t) {
    const double z0 =
        trace.log_prices[static_cast<std::size_t>(t)] - limit.log_price;
    const double z1 =
        trace.log_prices[static_cast<std::size_t>(t) + 1] - limit.log_price;
    if (std::abs(z0) < 1e-8) break;  // quantization takes over
    worst = std::max(worst, std::abs(std::abs(z1 / z0) - ratio_expected));
    ++checked;
  }
  res.pass = checked >= 10 && worst <= tol;
  res.detail = "ratio error " + fmt(worst) + " over " + std::to_string(checked) +
               " steps vs " + fmt(tol);
  return res;
}

CheckResult manipulator_recursions(std::uint64_t seed, double tol) {
  CheckResult res{"manipulator_recursions", "Theorem 6", false, ""};
  const int n = 20;
  MarketParams params =
      ordinary_market(n, 0.002, 0.95, 0.1, 0.02, MarketScheme::RealPrice);
  params.traders[5] = TraderSpec{0.002, 1.0, Behavior::Manipulator, 0.0};
  params.traders[15] = TraderSpec{0.002, 1.0, Behavior::Manipulator, 0.0};
  finalize_market_params(params);

  Rng rng(seed);
  InitialRecipe recipe;
  recipe.sigma_hi = 5.0;
  recipe.center_overrides = {{5, 10.0}, {15, 20.0}};
  const auto initial = make_initial_state(recipe, n, 1e-9, rng);
  const auto trace = run_simulation(params, initial, 1500, rng, {});
  if (trace.diverged) {
    res.detail = "price diverged";
    return res;
  }

  bool frozen = true;
  for (std::size_t t = 0; t + 1 < trace.states.size() && frozen; ++t) {
    const auto& now = trace.states[t];
    const auto& next = trace.states[t + 1];
    const double p_t = std::exp(trace.log_prices[t]);
    for (int i : {5, 15}) {
      frozen = frozen && next.centers[i] == now.centers[i] &&
               next.sdvs[i] ==
                   now.sdvs[i] +
                       params.network.b * std::abs(now.centers[i] - p_t);
    }
  }

  const double target =
      manipulator_consensus_target(params.traders, initial.network);
  const double common = trace.states.back().centers[0];
  const double gap = std::abs(common - target);
  res.pass = frozen && gap <= tol;
  res.detail = std::string("manipulator recursion ") +
               (frozen ? "exact" : "violated") + ", |common - target| = " +
               fmt(gap) + " vs " + fmt(tol);
  return res;
}

}  // namespace

std::vector<CheckResult> run_verify(const VerifyOptions& opts) {
  const auto tol = [&](double fallback) {
    return opts.tol_override.value_or(fallback);
  };
  std::vector<CheckResult> results;
  results.push_back(closeness_symmetry(opts.seed));
  results.push_back(composition_oracle(opts.seed + 1, tol(1e-3)));
  results.push_back(local_group_convergence(opts.seed + 2));
  results.push_back(global_consensus(opts.seed + 3));
  results.push_back(external_consensus(opts.seed + 4));
  results.push_back(combined_form_identity(opts.seed + 5, tol(1e-12)));
  results.push_back(rls_batch_equivalence(opts.seed + 6, tol(1e-8)));
  results.push_back(price_contraction(opts.seed + 7, tol(1e-6)));
  results.push_back(manipulator_recursions(opts.seed + 8, tol(1e-3)));
  return results;
}

}  // namespace fon
