#include "support.hpp"

#include "uowsn/align.hpp"
#include "uowsn/sim.hpp"
#include "uowsn/solver.hpp"

#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

using namespace uowsn;
using testing::dist;

namespace {

double post_procrustes_rmse(const Positions& truth, const Positions& estimate) {
  Positions best;
  double err = std::numeric_limits<double>::infinity();
  for (bool mirror : {false, true}) {
    Positions e = estimate;
    if (mirror) e.col(2) *= -1.0;
    const auto t = fit_procrustes(e, truth);
    err = std::min(err, rmse(truth, apply_transform(t, e)));
  }
  return err;
}

ObservedDistances noisy_obs(const Positions& p, double range, double sigma, double outlier_prob,
                            std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, sigma);
  std::bernoulli_distribution corrupt(outlier_prob);
  std::uniform_real_distribution<double> mag(0.0, 50.0);
  const int n = static_cast<int>(p.rows());
  ObservedDistances obs(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = dist(p, i, j);
      if (d > range) continue;
      const double o = corrupt(rng) ? mag(rng) : 0.0;
      obs.set(i, j, std::max(d + (sigma > 0.0 ? gauss(rng) : 0.0) + o, 0.0), o);
    }
  return obs;
}

}  // namespace

TEST_CASE("soft threshold") {
  CHECK(soft_threshold(5.0, 2.0) == 4.0);
  CHECK(soft_threshold(-5.0, 2.0) == -4.0);
  CHECK(soft_threshold(0.4, 1.0) == 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ux(-10.0, 10.0);
  std::uniform_real_distribution<double> ul(0.0, 8.0);
  const int steps = 40000;
  const double step = 24.0 / steps;
  for (int k = 0; k < 1000; ++k) {
    const double x = ux(rng);
    const double l = ul(rng);
    const double oracle = testing::grid_argmin(
        [&](double o) { return (x - o) * (x - o) + l * std::abs(o); }, -12.0, 12.0, steps);
    CHECK(std::abs(soft_threshold(x, l) - oracle) <= step);
  }
}

TEST_CASE("hard threshold minimises the counting penalty") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ux(-10.0, 10.0);
  std::uniform_real_distribution<double> ul(0.1, 8.0);
  for (int k = 0; k < 500; ++k) {
    const double x = ux(rng);
    const double l = ul(rng);
    const double o = hard_threshold(x, l);
    const double cost = (x - o) * (x - o) + (o != 0.0 ? l * l / 4.0 : 0.0);
    CHECK(cost <= std::min(x * x, l * l / 4.0) + 1e-12);
  }
}

TEST_CASE("half-quadratic minimiser") {
  Eigen::Matrix<double, 1, 3> r;
  r << 10.0, -0.5, 0.0;
  const auto a = hq_minimizer(r, 1.345, Loss::Huber);
  CHECK(a(0) == doctest::Approx(8.655));
  CHECK(a(1) == 0.0);
  CHECK(a(2) == 0.0);
  CHECK(hq_minimizer(r, 1.345, Loss::L2).isZero());
  CHECK_THROWS_AS(hq_minimizer(r, 0.0, Loss::Huber), DomainError);

  // Huber in additive form: mu(r) = argmin_a (r - a)^2 + 2 rho |a|.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int k = 0; k < 200; ++k) {
    Eigen::Matrix<double, 1, 1> x;
    x << u(rng);
    const double rho = 1.345;
    const double oracle = testing::grid_argmin(
        [&](double v) { return (x(0) - v) * (x(0) - v) + 2.0 * rho * std::abs(v); }, -8.0, 8.0, 32000);
    CHECK(std::abs(hq_minimizer(x, rho, Loss::Huber)(0) - oracle) <= 16.0 / 32000);
  }

  Eigen::Matrix<double, 1, 3> t;
  t << 3.0, 0.5, -2.0;
  const auto b = hq_minimizer(t, 1.0, Loss::Tukey);
  CHECK(b(0) == 3.0);
  CHECK(b(2) == -2.0);
  CHECK(b(1) == doctest::Approx(0.5 * (1.0 - std::pow(1.0 - 0.25, 2))));
}

TEST_CASE("base laplacian") {
  MaskMatrix full = MaskMatrix::Constant(4, 4, true);
  full.diagonal().setConstant(false);
  const MatrixXd l = base_laplacian(full);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(l(i, j) == (i == j ? 3.0 : -1.0));
  CHECK(base_laplacian(MaskMatrix::Constant(5, 5, false)).isZero());

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto obs = testing::random_mask_obs(testing::random_positions(8, rng), 0.4, rng);
    const MatrixXd b = base_laplacian(obs.mask);
    CHECK(b.rowwise().sum().cwiseAbs().maxCoeff() == 0.0);
    CHECK((b - b.transpose()).isZero());
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(b);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("majorization laplacian") {
  std::mt19937_64 rng(5);
  const Positions p = testing::random_positions(7, rng);
  const auto obs = testing::exact_obs(p);
  const MatrixXd zero = MatrixXd::Zero(7, 7);
  CHECK((laplacian_plus(p, zero, obs) - base_laplacian(obs.mask)).cwiseAbs().maxCoeff() < 1e-12);

  Positions coincident = p;
  coincident.row(1) = coincident.row(0);
  const MatrixXd lc = laplacian_plus(coincident, zero, obs);
  CHECK(lc(0, 1) == 0.0);
  CHECK(lc.allFinite());

  MatrixXd big = zero;
  big(2, 3) = big(3, 2) = obs.entries(2, 3) + 1.0;
  CHECK(laplacian_plus(p, big, obs)(2, 3) == 0.0);

  for (int trial = 0; trial < 20; ++trial) {
    const Positions q = testing::random_positions(6, rng);
    auto o = testing::random_mask_obs(testing::random_positions(6, rng), 0.5, rng);
    const MatrixXd lp = laplacian_plus(q, update_outliers(q, o, 3.0), o);
    CHECK(lp.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        if (i != j && !o.mask(i, j)) CHECK(lp(i, j) == 0.0);
  }
}

TEST_CASE("outlier update") {
  std::mt19937_64 rng(6);
  const Positions p = testing::random_positions(6, rng);
  auto obs = testing::exact_obs(p);
  CHECK(update_outliers(p, obs, 2.0).cwiseAbs().maxCoeff() < 1e-12);
  obs.set(0, 1, obs.entries(0, 1) + 50.0);
  const MatrixXd o = update_outliers(p, obs, 2.0);
  CHECK(o(0, 1) == doctest::Approx(49.0));
  CHECK(o(1, 0) == o(0, 1));
  CHECK(update_outliers(p, obs, SolverConfig::kDisabled).isZero());
  const MatrixXd h = update_outliers(p, obs, 2.0, OutlierRule::Hard);
  CHECK(h(0, 1) == doctest::Approx(50.0));
}

TEST_CASE("objective against an independent summation") {
  std::mt19937_64 rng(7);
  const Positions p = testing::random_positions(8, rng);
  const auto exact = testing::exact_obs(p);
  CHECK(objective(p, MatrixXd::Zero(8, 8), exact, 1.0) == doctest::Approx(0.0));
  for (int trial = 0; trial < 20; ++trial) {
    const Positions q = testing::random_positions(8, rng);
    const auto obs = testing::random_mask_obs(p, 0.6, rng);
    const MatrixXd o = update_outliers(q, obs, 4.0);
    CHECK(objective(q, o, obs, 4.0) == doctest::Approx(testing::objective_oracle(q, o, obs, 4.0)).epsilon(1e-12));
    // O equal to the residuals with no penalty cancels the data term.
    const MatrixXd r = update_outliers(q, obs, 0.0);
    CHECK(objective(q, r, obs, 0.0) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("position update is the ridge closed form on complete data") {
  std::mt19937_64 rng(8);
  const int n = 5;
  const Positions truth = testing::random_positions(n, rng);
  const auto obs = testing::exact_obs(truth);
  const Positions p = testing::random_positions(n, rng);
  SolverConfig cfg;
  cfg.lambda2 = 150.0;
  cfg.c = 0.7;
  const MatrixXd l = base_laplacian(obs.mask);
  const PositionUpdate update(l, cfg);
  const MatrixXd lp = laplacian_plus(p, MatrixXd::Zero(n, n), obs);
  const Positions a = hq_minimizer(hq_residual(l, lp, p), 1.0, Loss::Huber);
  const Positions next = update(p, lp, a);

  const Positions r = lp * p + a / cfg.c;
  const MatrixXd system = cfg.c * l.transpose() * l + cfg.lambda2 * MatrixXd::Identity(n, n);
  const Positions closed = cfg.c * system.ldlt().solve(l.transpose() * r);
  CHECK((next - closed).cwiseAbs().maxCoeff() < 1e-10);
  const Positions foc = cfg.c * l.transpose() * (l * next - r) + cfg.lambda2 * next;
  CHECK(foc.cwiseAbs().maxCoeff() < 1e-8);

  // lambda2 -> 0 with A = 0 reduces to (C / N) L+ P.
  SolverConfig tiny = cfg;
  tiny.lambda2 = 1e-12;
  const PositionUpdate plain(l, tiny);
  const MatrixXd centring = MatrixXd::Identity(n, n) - MatrixXd::Constant(n, n, 1.0 / n);
  const Positions guttman = centring * lp * p / n;
  CHECK((plain(p, lp, Positions::Zero(n, 3)) - guttman).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("truth is a fixed point up to the uniform shrinkage") {
  std::mt19937_64 rng(9);
  const int n = 6;
  Positions truth = testing::random_positions(n, rng);
  truth.rowwise() -= truth.colwise().mean();
  const auto obs = testing::exact_obs(truth);
  SolverConfig cfg;
  const MatrixXd l = base_laplacian(obs.mask);
  const PositionUpdate update(l, cfg);
  const MatrixXd lp = laplacian_plus(truth, MatrixXd::Zero(n, n), obs);
  const Positions next = update(truth, lp, Positions::Zero(n, 3));
  CHECK((next - update.shrink() * truth).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(optimal_scale(next, MatrixXd::Zero(n, n), obs) * update.shrink() == doctest::Approx(1.0));
}

TEST_CASE("optimal scale solves the one-dimensional least squares") {
  std::mt19937_64 rng(10);
  const Positions p = testing::random_positions(7, rng);
  const auto obs = testing::random_mask_obs(testing::random_positions(7, rng), 0.7, rng);
  const MatrixXd o = MatrixXd::Zero(7, 7);
  const double s = optimal_scale(p, o, obs);
  auto cost = [&](double t) { return objective(t * p, o, obs, SolverConfig::kDisabled); };
  CHECK(cost(s) <= cost(s * 1.001));
  CHECK(cost(s) <= cost(s * 0.999));
  CHECK(optimal_scale(Positions::Zero(7, 3), o, obs) == 1.0);
}

TEST_CASE("objective trace is non-increasing on random instances") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 8 + trial % 8;
    const Positions p = testing::random_positions(n, rng);
    const auto obs = noisy_obs(p, 80.0, 0.6, 0.2, rng);
    if (connected_components(obs.mask).size() != 1) continue;
    SolverConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(trial);
    cfg.loss = trial % 3 == 0 ? Loss::Tukey : Loss::Huber;
    const auto res = solve(obs, cfg);
    REQUIRE(!res.objective_trace.empty());
    for (std::size_t k = 1; k < res.objective_trace.size(); ++k)
      CHECK(res.objective_trace[k] <= res.objective_trace[k - 1] + 1e-9);
    for (double v : res.objective_trace) CHECK(std::isfinite(v));
  }
}

TEST_CASE("majorization laplacian row sums vanish along the iterations") {
  std::mt19937_64 rng(12);
  const Positions p = testing::random_positions(10, rng);
  const auto obs = noisy_obs(p, 80.0, 0.6, 0.3, rng);
  REQUIRE(connected_components(obs.mask).size() == 1);
  SolverConfig cfg;
  const PositionUpdate update(base_laplacian(obs.mask), cfg);
  SolverState state = initial_state(obs, cfg);
  for (int k = 0; k < 60; ++k) {
    iterate(state, obs, update, cfg);
    const MatrixXd lp = laplacian_plus(state.positions, state.outliers, obs);
    CHECK(lp.rowwise().sum().cwiseAbs().maxCoeff() < 1e-10);
    CHECK((state.outliers - state.outliers.transpose()).isZero());
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j)
        if (!obs.mask(i, j)) CHECK(state.outliers(i, j) == 0.0);
  }
}

TEST_CASE("masked entries never influence the result") {
  std::mt19937_64 rng(13);
  const Positions p = testing::random_positions(12, rng);
  auto obs = noisy_obs(p, 80.0, 0.6, 0.1, rng);
  REQUIRE(connected_components(obs.mask).size() == 1);
  SolverConfig cfg;
  cfg.seed = 99;
  const auto a = solve(obs, cfg);
  std::uniform_real_distribution<double> junk(0.0, 500.0);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j)
      if (i < j && !obs.mask(i, j)) obs.entries(i, j) = obs.entries(j, i) = junk(rng);
  const auto b = solve(obs, cfg);
  CHECK(a.positions == b.positions);
  CHECK(a.objective_trace == b.objective_trace);
}

TEST_CASE("exact recovery from complete noise-free distances") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 5; ++trial) {
    const Positions truth = testing::random_positions(10, rng);
    const auto obs = testing::exact_obs(truth);
    SolverConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(trial);
    const auto start = std::chrono::steady_clock::now();
    const auto res = solve(obs, cfg);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(post_procrustes_rmse(truth, res.positions) < 1e-6);
    CHECK(seconds < 1.0);
  }
}

TEST_CASE("two random starts agree up to rigid motion") {
  std::mt19937_64 rng(15);
  const Positions truth = testing::random_positions(12, rng);
  const auto obs = noisy_obs(truth, 90.0, 0.6, 0.0, rng);
  REQUIRE(connected_components(obs.mask).size() == 1);
  SolverConfig cfg;
  cfg.lambda1 = SolverConfig::kDisabled;
  cfg.tol = 1e-12;
  cfg.max_iters = 20000;
  cfg.mds_start = false;
  cfg.seed = 1;
  const auto a = solve(obs, cfg);
  cfg.seed = 2;
  const auto b = solve(obs, cfg);
  CHECK((pairwise_distances(a.positions) - pairwise_distances(b.positions)).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("outlier count shrinks as lambda1 grows") {
  std::mt19937_64 rng(16);
  const Positions truth = testing::random_positions(12, rng);
  const auto obs = noisy_obs(truth, 90.0, 0.6, 0.2, rng);
  REQUIRE(connected_components(obs.mask).size() == 1);
  long prev = std::numeric_limits<long>::max();
  for (double l1 : {1.0, 10.0, 100.0, 1000.0}) {
    SolverConfig cfg;
    cfg.lambda1 = l1;
    const auto res = solve(obs, cfg);
    const long count = (res.outliers.array() != 0.0).count();
    CHECK(count <= prev);
    prev = count;
  }
}

TEST_CASE("planted outliers are the largest estimated ones") {
  std::mt19937_64 rng(17);
  const Positions truth = testing::random_positions(10, rng);
  std::normal_distribution<double> gauss(0.0, 0.6);
  ObservedDistances obs(10);
  for (int i = 0; i < 10; ++i)
    for (int j = i + 1; j < 10; ++j) obs.set(i, j, dist(truth, i, j) + gauss(rng));
  const int planted[3][2] = {{0, 3}, {2, 7}, {5, 9}};
  const double extra[3] = {25.0, 32.0, 40.0};
  for (int k = 0; k < 3; ++k) {
    const int i = planted[k][0];
    const int j = planted[k][1];
    obs.set(i, j, obs.entries(i, j) + extra[k], extra[k]);
  }
  SolverConfig cfg;
  const auto res = solve(obs, cfg);
  std::vector<std::pair<double, std::pair<int, int>>> ranked;
  for (int i = 0; i < 10; ++i)
    for (int j = i + 1; j < 10; ++j) ranked.push_back({std::abs(res.outliers(i, j)), {i, j}});
  std::sort(ranked.rbegin(), ranked.rend());
  for (int k = 0; k < 3; ++k) {
    const auto pair = ranked[k].second;
    const bool hit = std::any_of(std::begin(planted), std::end(planted), [&](const int* pl) {
      return pl[0] == pair.first && pl[1] == pair.second;
    });
    CHECK(hit);
  }
  CHECK(post_procrustes_rmse(truth, res.positions) < 2.0);
}

TEST_CASE("disconnected observations are rejected with their components") {
  Positions p(4, 3);
  p << 0, 0, 0, 1, 0, 0, 10, 0, 0, 11, 0, 0;
  const auto obs = testing::exact_obs(p, [](int i, int j) { return (i < 2) == (j < 2); });
  try {
    solve(obs, SolverConfig{});
    FAIL("expected DisconnectedGraphError");
  } catch (const DisconnectedGraphError& e) {
    REQUIRE(e.components().size() == 2);
    CHECK(e.components()[0] == std::vector<int>{0, 1});
    CHECK(e.components()[1] == std::vector<int>{2, 3});
  }
}

TEST_CASE("shortest path completion against a relaxation oracle") {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 9;
    const auto obs = testing::random_mask_obs(testing::random_positions(n, rng), 0.3, rng);
    const MatrixXd sp = shortest_path_completion(obs);
    for (int s = 0; s < n; ++s) {
      std::vector<double> d(n, std::numeric_limits<double>::infinity());
      d[s] = 0.0;
      for (int round = 0; round < n; ++round)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            if (obs.mask(i, j)) d[j] = std::min(d[j], d[i] + obs.entries(i, j));
      for (int t = 0; t < n; ++t) CHECK(sp(s, t) == doctest::Approx(d[t]).epsilon(1e-12));
    }
  }
}

TEST_CASE("classical MDS realises an exact distance matrix") {
  std::mt19937_64 rng(19);
  const Positions p = testing::random_positions(9, rng);
  const MatrixXd d = pairwise_distances(p);
  const Positions q = classical_mds(d);
  CHECK((pairwise_distances(q) - d).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("relocation never raises a node's cost") {
  std::mt19937_64 rng(20);
  const Positions truth = testing::random_positions(10, rng);
  const auto obs = testing::exact_obs(truth);
  Positions p = truth;
  p.row(4) << 300.0, -50.0, 20.0;
  const double displaced = (p.row(4) - truth.row(4)).norm();
  const double before = objective(p, MatrixXd::Zero(10, 10), obs, SolverConfig::kDisabled);
  CHECK(relocate_nodes(p, obs, SolverConfig::kDisabled, OutlierRule::Soft, 24, 1) >= 1);
  const double after = objective(p, MatrixXd::Zero(10, 10), obs, SolverConfig::kDisabled);
  CHECK(after < before);
  CHECK((p.row(4) - truth.row(4)).norm() < displaced);
}

TEST_CASE("completed distances keep observations") {
  std::mt19937_64 rng(21);
  const Positions p = testing::random_positions(6, rng);
  const auto obs = testing::random_mask_obs(testing::random_positions(6, rng), 0.5, rng);
  const MatrixXd c = completed_distances(obs, p);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if (obs.mask(i, j))
        CHECK(c(i, j) == obs.entries(i, j));
      else
        CHECK(c(i, j) == doctest::Approx(dist(p, i, j)).epsilon(1e-12));
}

TEST_CASE("solver configuration validation and names") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.c = 0.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = SolverConfig{};
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = SolverConfig{};
  cfg.tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = SolverConfig{};
  cfg.lambda1 = -1.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = SolverConfig{};
  cfg.restarts = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  for (auto l : {Loss::Huber, Loss::Tukey, Loss::L2}) CHECK(parse_loss(to_string(l)) == l);
  for (auto r : {OutlierRule::Soft, OutlierRule::Hard}) CHECK(parse_outlier_rule(to_string(r)) == r);
  for (auto s : {ThresholdScale::Absolute, ThresholdScale::Mad, ThresholdScale::Rms})
    CHECK(parse_threshold_scale(to_string(s)) == s);
  CHECK_THROWS_AS(parse_loss("cauchy"), DomainError);
}
