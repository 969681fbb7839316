#include "doctest.h"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "mobo/acquisition.hpp"
#include "mobo/errors.hpp"
#include "oracles.hpp"

using namespace mobo;

namespace {

Posterior fixed_posterior(const Eigen::MatrixXd& mean) {
  const auto n = mean.rows();
  std::vector<Eigen::MatrixXd> cov(static_cast<std::size_t>(mean.cols()), Eigen::MatrixXd::Zero(n, n));
  return make_posterior({}, mean, cov);
}

ParetoFront make_front(const std::vector<ObjectiveVector>& pts, ObjectiveVector ref) {
  ParetoFront f(std::move(ref));
  for (const auto& p : pts) f.insert(p);
  return f;
}

Eigen::MatrixXd to_matrix(const std::vector<oracle::Vec>& rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  return m;
}

// Independent random draws from a discrete posterior, seeded per draw.
FunctionDraws sampled(const oracle::DiscretePosterior& post, std::uint64_t seed) {
  const std::size_t dims = post.atoms[0][0].size();
  return FunctionDraws(post.atoms.size(), dims, [post, seed](std::size_t draw) {
    std::mt19937_64 rng(seed * 1000003ULL + draw);
    return to_matrix(oracle::sample_outcome(post, rng));
  });
}

// Cycles through every joint outcome; exact when all weights are equal and
// the draw count is a multiple of the outcome count.
FunctionDraws cycled(const oracle::DiscretePosterior& post, std::size_t* outcomes) {
  std::vector<std::vector<oracle::Vec>> all;
  oracle::enumerate_outcomes(post, [&](const std::vector<oracle::Vec>& o, double) { all.push_back(o); });
  *outcomes = all.size();
  const std::size_t dims = post.atoms[0][0].size();
  return FunctionDraws(post.atoms.size(), dims,
                       [all](std::size_t draw) { return to_matrix(all[draw % all.size()]); });
}

oracle::DiscretePosterior three_candidates() {
  oracle::DiscretePosterior p;
  p.atoms = {{{3.0, 1.0}, {1.0, 0.5}}, {{1.0, 3.0}, {2.5, 2.5}}, {{2.0, 2.0}, {0.2, 0.2}}};
  p.weights = {{0.6, 0.4}, {0.3, 0.7}, {0.5, 0.5}};
  return p;
}

}  // namespace

TEST_CASE("estimate_qpmhi: deterministic posterior") {
  Eigen::MatrixXd mean(2, 2);
  mean << 2, 2, 1, 1;
  const auto r = estimate_qpmhi(fixed_posterior(mean), make_front({{1.5, 1.5}}, {0, 0}), 64, 1);
  CHECK(r.probs == std::vector<double>{1.0, 0.0});
  CHECK(r.improving_fraction == 1.0);
  CHECK(r.counts == std::vector<std::size_t>{64, 0});
  CHECK(r.pareto_membership == std::vector<double>{1.0, 0.0});
}

TEST_CASE("estimate_qpmhi: exchangeable candidates split evenly") {
  Eigen::MatrixXd mean(2, 2);
  mean << 5, 5, 5, 5;
  const std::vector<Eigen::MatrixXd> cov(2, Eigen::MatrixXd::Identity(2, 2));
  const std::size_t L = 4000;
  const auto r = estimate_qpmhi(make_posterior({}, mean, cov), ParetoFront({0, 0}), L, 11);
  const double tol = 4.0 * std::sqrt(0.25 / L);
  CHECK(std::abs(r.probs[0] - 0.5) <= tol);
  CHECK(std::abs(r.probs[1] - 0.5) <= tol);
  CHECK(r.counts[0] + r.counts[1] == L);
}

TEST_CASE("estimate_qpmhi agrees with outcome enumeration") {
  const auto post = three_candidates();
  const std::vector<oracle::Vec> front_pts = {{1.5, 1.5}};
  const oracle::Vec ref = {0.0, 0.0};
  double improving = 0.0;
  const auto exact = oracle::exact_pmhi(post, front_pts, ref, &improving);
  const std::size_t L = 20000;
  const auto r = estimate_qpmhi(sampled(post, 3), make_front(front_pts, ref), L);
  for (std::size_t i = 0; i < 3; ++i) {
    const double tol = 4.0 * std::sqrt(exact[i] * (1.0 - exact[i]) / L) + 1e-12;
    CHECK(std::abs(r.probs[i] - exact[i]) <= tol);
  }
  CHECK(std::abs(r.improving_fraction - improving) <= 4.0 * std::sqrt(improving * (1 - improving) / L) + 1e-12);
}

TEST_CASE("estimate_qpmhi is exact on a balanced enumeration") {
  oracle::DiscretePosterior post;
  post.atoms = {{{3.0, 1.0}, {1.0, 0.5}}, {{1.0, 3.0}, {2.5, 2.5}}, {{2.0, 2.0}, {0.2, 0.2}}, {{1.6, 1.7}, {0.9, 0.8}}};
  post.weights.assign(4, {0.5, 0.5});
  const std::vector<oracle::Vec> front_pts = {{1.5, 1.5}, {2.8, 0.4}};
  const oracle::Vec ref = {0.0, 0.0};
  double improving = 0.0;
  const auto exact = oracle::exact_pmhi(post, front_pts, ref, &improving);
  std::size_t outcomes = 0;
  const auto src = cycled(post, &outcomes);
  const auto r = estimate_qpmhi(src, make_front(front_pts, ref), outcomes * 5);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(r.probs[i] - exact[i]) <= 1e-12);
  CHECK(std::abs(r.improving_fraction - improving) <= 1e-12);
}

TEST_CASE("attribution partitions the improving draws") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 6;
    Eigen::MatrixXd mean(n, 3);
    for (Eigen::Index i = 0; i < mean.size(); ++i) mean.data()[i] = u(rng);
    std::vector<Eigen::MatrixXd> cov;
    for (int m = 0; m < 3; ++m) {
      Eigen::MatrixXd a = Eigen::MatrixXd::Random(n, n) * 0.2;
      cov.push_back(a * a.transpose());
    }
    const auto front = make_front({{0.6, 0.5, 0.7}, {0.8, 0.3, 0.4}}, {0, 0, 0});
    const auto r = estimate_qpmhi(make_posterior({}, mean, cov), front, 300, trial);
    const auto sum_counts = std::accumulate(r.counts.begin(), r.counts.end(), std::size_t{0});
    CHECK(sum_counts == r.improving_draws);
    const double sum_probs = std::accumulate(r.probs.begin(), r.probs.end(), 0.0);
    CHECK(std::abs(sum_probs - r.improving_fraction) <= 1e-12);
    CHECK(r.improving_fraction <= 1.0);
    for (double p : r.probs) CHECK((p >= 0.0 && p <= 1.0));
  }
}

TEST_CASE("a candidate that always dominates another gets at least its probability") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint64_t seed = rng();
    FunctionDraws src(4, 2, [seed](std::size_t draw) {
      std::mt19937_64 g(seed + draw);
      std::uniform_real_distribution<double> v(0.0, 2.0);
      Eigen::MatrixXd y(4, 2);
      for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = v(g);
      y(1, 0) = y(0, 0) - 0.1 * v(g);
      y(1, 1) = y(0, 1) - 0.1 * v(g);
      return y;
    });
    const auto r = estimate_qpmhi(src, make_front({{1.0, 1.0}}, {0, 0}), 500);
    CHECK(r.probs[0] >= r.probs[1]);
  }
}

TEST_CASE("qPMHI estimates are seeded and independent of thread count") {
  Eigen::MatrixXd mean = Eigen::MatrixXd::Random(40, 2).array() + 1.0;
  std::vector<Eigen::MatrixXd> cov;
  for (int m = 0; m < 2; ++m) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(40, 40) * 0.05;
    cov.push_back(a * a.transpose() + 0.01 * Eigen::MatrixXd::Identity(40, 40));
  }
  const auto post = make_posterior({}, mean, cov);
  const auto front = make_front({{1.2, 1.1}, {1.6, 0.5}}, {0, 0});
  const auto a = estimate_qpmhi(post, front, 333, 42, 1);
  const auto b = estimate_qpmhi(post, front, 333, 42, 4);
  const auto c = estimate_qpmhi(post, front, 333, 43, 1);
  CHECK(a.counts == b.counts);
  CHECK(a.probs == b.probs);
  CHECK(a.pareto_membership == b.pareto_membership);
  CHECK(select_batch(a, 5).indices == select_batch(b, 5).indices);
  CHECK(a.counts != c.counts);
}

TEST_CASE("Monte Carlo error shrinks like the inverse square root of L") {
  const auto post = three_candidates();
  const std::vector<oracle::Vec> front_pts = {{1.5, 1.5}};
  const oracle::Vec ref = {0.0, 0.0};
  const auto exact = oracle::exact_pmhi(post, front_pts, ref);
  const auto front = make_front(front_pts, ref);
  const std::size_t sizes[] = {64, 256, 1024, 4096};
  const int reps = 40;
  double err[4] = {0, 0, 0, 0};
  for (int s = 0; s < 4; ++s) {
    for (int rep = 0; rep < reps; ++rep) {
      const auto r = estimate_qpmhi(sampled(post, 1000 + rep * 7 + s), front, sizes[s]);
      double e = 0.0;
      for (std::size_t i = 0; i < 3; ++i) e = std::max(e, std::abs(r.probs[i] - exact[i]));
      err[s] += e / reps;
    }
  }
  for (int s = 0; s < 4; ++s) {
    MESSAGE("L=" << sizes[s] << " mean max-abs error " << err[s]);
    // scaled error stays within a constant band
    CHECK(err[s] * std::sqrt(static_cast<double>(sizes[s])) <= 2.0);
  }
  for (int s = 0; s < 3; ++s) CHECK(err[s + 1] < err[s]);
  CHECK(err[0] / err[3] >= 4.0);
}

TEST_CASE("pareto_membership_prob") {
  Eigen::MatrixXd a(1, 2), b(1, 2);
  a << 2, 2;
  b << 0.5, 0.5;
  const auto front = make_front({{1, 1}}, {0, 0});
  CHECK(pareto_membership_prob(fixed_posterior(a), front, 10, 1) == std::vector<double>{1.0});
  CHECK(pareto_membership_prob(fixed_posterior(b), front, 10, 1) == std::vector<double>{0.0});

  oracle::DiscretePosterior post;
  post.atoms = {{{2.0, 2.0}, {0.5, 0.5}}};
  post.weights = {{0.3, 0.7}};
  const std::size_t L = 20000;
  const auto m = pareto_membership_prob(sampled(post, 9), front, L);
  CHECK(std::abs(m[0] - 0.3) <= 4.0 * std::sqrt(0.21 / L));
}

TEST_CASE("select_batch") {
  AcquisitionResult r;
  r.probs = {0.5, 0.3, 0.2};
  r.pareto_membership = {0, 0, 0};
  CHECK(select_batch(r, 2).indices == std::vector<std::size_t>{0, 1});

  r.probs = {1, 0, 0};
  r.pareto_membership = {0.9, 0.7, 0.2};
  CHECK(select_batch(r, 2).indices == std::vector<std::size_t>{0, 1});

  r.probs = {0, 0.5, 0, 0};
  r.pareto_membership = {0, 0, 0.4, 0};
  r.mean_hvi = {0.1, 0, 0, 0.3};
  const auto all = select_batch(r, 10);
  CHECK(all.indices == std::vector<std::size_t>{1, 2, 3, 0});
  CHECK(all.truncated);

  r.probs = {0.25, 0.25, 0.25, 0.25};
  r.mean_hvi.clear();
  CHECK(select_batch(r, 2).indices == std::vector<std::size_t>{0, 1});
  CHECK_THROWS_AS(select_batch(r, 0), InvalidInput);
}

TEST_CASE("select_batch returns the best subset by summed probability") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + trial % 6;
    const std::size_t q = 1 + trial % n;
    AcquisitionResult r;
    r.probs.resize(n);
    double total = 0.0;
    for (auto& p : r.probs) total += (p = u(rng));
    for (auto& p : r.probs) p /= total;
    r.pareto_membership.assign(n, 0.0);
    auto got = select_batch(r, q).indices;
    CHECK(std::set<std::size_t>(got.begin(), got.end()).size() == q);
    std::sort(got.begin(), got.end());
    CHECK(got == oracle::best_subset(r.probs, q));
  }
}

TEST_CASE("estimate_qpo") {
  Eigen::MatrixXd v(2, 1);
  v << 3, 5;
  auto r = estimate_qpo(fixed_posterior(v), 4.0, 32, 1);
  CHECK(r.probs == std::vector<double>{0.0, 1.0});
  v << 1, 2;
  r = estimate_qpo(fixed_posterior(v), 4.0, 32, 1);
  CHECK(r.probs == std::vector<double>{0.0, 0.0});
  CHECK(r.improving_fraction == 0.0);
  CHECK_THROWS_AS(estimate_qpo(fixed_posterior(Eigen::MatrixXd::Zero(2, 2)), 0.0, 8, 1), InvalidInput);
}

TEST_CASE("qPO coincides with single-objective qPMHI") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::Index n = 12;
    Eigen::MatrixXd mean(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) mean(i, 0) = u(rng);
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(n, n) * 0.3;
    const auto post = make_posterior({}, mean, {a * a.transpose()});
    const double best = 0.5 * u(rng);
    const double c = 0.01 + std::abs(u(rng)) * 3.0;
    const auto qpo = estimate_qpo(post, best, 200, trial);
    const auto qpmhi = estimate_qpmhi(post, make_front({{best}}, {best - c}), 200, trial);
    CHECK(qpo.probs == qpmhi.probs);
    CHECK(select_batch(qpo, 4).indices == select_batch(qpmhi, 4).indices);
  }
}

TEST_CASE("constrained_qpmhi") {
  Eigen::MatrixXd mean(2, 2);
  mean << 3, 3, 2, 2;
  const auto post = fixed_posterior(mean);
  const auto front = make_front({{1, 1}}, {0, 0});
  Eigen::MatrixXd g(2, 1);
  const std::vector<double> zero{0.0};

  SUBCASE("all infeasible") {
    g << -1, -1;
    const auto r = constrained_qpmhi(post, fixed_posterior(g), zero, front, 50, 3);
    CHECK(r.probs == std::vector<double>{0.0, 0.0});
    CHECK(r.improving_fraction == 0.0);
  }
  SUBCASE("the better candidate is infeasible") {
    g << -1, 1;
    const auto r = constrained_qpmhi(post, fixed_posterior(g), zero, front, 50, 3);
    CHECK(r.probs == std::vector<double>{0.0, 1.0});
  }
  SUBCASE("vacuous thresholds reproduce the unconstrained estimate") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Random(30, 2).array() + 1.5;
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(30, 30) * 0.1;
    const auto noisy = make_posterior({}, m, {a * a.transpose(), a * a.transpose() * 2.0});
    Eigen::MatrixXd gm = Eigen::MatrixXd::Random(30, 2);
    const auto gpost = make_posterior({}, gm, {a * a.transpose(), a * a.transpose()});
    const double inf = std::numeric_limits<double>::infinity();
    const std::vector<double> vacuous{-inf, -inf};
    const auto plain = estimate_qpmhi(noisy, front, 250, 8, 1);
    const auto con = constrained_qpmhi(noisy, gpost, vacuous, front, 250, 8, 2);
    CHECK(plain.counts == con.counts);
    CHECK(plain.probs == con.probs);
    CHECK(plain.pareto_membership == con.pareto_membership);
    CHECK(plain.improving_fraction == con.improving_fraction);
  }
  SUBCASE("per-draw feasibility against enumeration") {
    // objective and constraint atoms enumerated jointly, one extra coordinate per candidate
    oracle::DiscretePosterior obj;
    obj.atoms = {{{3.0, 3.0}, {2.0, 0.5}}, {{2.0, 2.0}, {1.5, 1.5}}};
    obj.weights = {{0.5, 0.5}, {0.5, 0.5}};
    oracle::DiscretePosterior con;
    con.atoms = {{{1.0}, {-1.0}}, {{1.0}, {1.0}}};
    con.weights = {{0.5, 0.5}, {0.5, 0.5}};
    oracle::DiscretePosterior joint;
    for (std::size_t i = 0; i < 2; ++i) {
      joint.atoms.emplace_back();
      joint.weights.emplace_back();
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) {
          auto v = obj.atoms[i][a];
          v.push_back(con.atoms[i][b][0]);
          joint.atoms.back().push_back(v);
          joint.weights.back().push_back(0.25);
        }
    }
    const std::vector<oracle::Vec> front_pts = {{1.0, 1.0}};
    const oracle::Vec ref = {0.0, 0.0};
    std::size_t outcomes = 0;
    const auto all = cycled(joint, &outcomes);
    FunctionDraws objectives(2, 2, [&all](std::size_t d) { return Eigen::MatrixXd(all.draws(d, 1)[0].leftCols(2)); });
    FunctionDraws constraints(2, 1, [&all](std::size_t d) { return Eigen::MatrixXd(all.draws(d, 1)[0].rightCols(1)); });
    const auto r = estimate_qpmhi(objectives, make_front(front_pts, ref), outcomes * 3, 1, &constraints, zero);

    std::vector<double> expected(2, 0.0);
    oracle::enumerate_outcomes(joint, [&](const std::vector<oracle::Vec>& o, double p) {
      double best = 0.0;
      std::size_t w = 2;
      for (std::size_t i = 0; i < 2; ++i) {
        if (o[i][2] < 0.0) continue;
        const double v = oracle::hvi_bruteforce({o[i][0], o[i][1]}, front_pts, ref);
        if (v > best) {
          best = v;
          w = i;
        }
      }
      if (w < 2) expected[w] += p;
    });
    CHECK(std::abs(r.probs[0] - expected[0]) <= 1e-12);
    CHECK(std::abs(r.probs[1] - expected[1]) <= 1e-12);
  }
}

TEST_CASE("qehvi_mc") {
  Eigen::MatrixXd mean(3, 2);
  mean << 1, 3, 2.5, 2.5, 3, 1;
  const auto front = make_front({{2, 2}}, {0, 0});
  CHECK(qehvi_mc(fixed_posterior(mean), front, 1, 8, 1) == std::vector<std::size_t>{1});
  auto all = qehvi_mc(fixed_posterior(mean), front, 3, 8, 1);
  std::sort(all.begin(), all.end());
  CHECK(all == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("qehvi_mc follows the exhaustive greedy trace") {
  std::mt19937_64 rng(91);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int trial = 0; trial < 15; ++trial) {
    oracle::DiscretePosterior post;
    for (int i = 0; i < 4; ++i) {
      post.atoms.push_back({{u(rng), u(rng)}, {u(rng), u(rng)}});
      post.weights.push_back({0.5, 0.5});
    }
    const std::vector<oracle::Vec> front_pts = {{1.5, 1.5}};
    const oracle::Vec ref = {0.0, 0.0};
    const double base = oracle::hv_inclusion_exclusion(front_pts, ref);
    auto ehvi = [&](const std::vector<std::size_t>& subset) {
      double e = 0.0;
      oracle::enumerate_outcomes(post, [&](const std::vector<oracle::Vec>& o, double p) {
        auto pts = front_pts;
        for (std::size_t i : subset) pts.push_back(o[i]);
        e += p * (oracle::hv_inclusion_exclusion(pts, ref) - base);
      });
      return e;
    };
    std::vector<std::size_t> trace;
    for (int step = 0; step < 2; ++step) {
      std::size_t pick = 4;
      double best = -1.0;
      for (std::size_t i = 0; i < 4; ++i) {
        if (std::find(trace.begin(), trace.end(), i) != trace.end()) continue;
        auto s = trace;
        s.push_back(i);
        const double v = ehvi(s);
        if (v > best + 1e-12) {
          best = v;
          pick = i;
        }
      }
      trace.push_back(pick);
    }
    std::size_t outcomes = 0;
    const auto src = cycled(post, &outcomes);
    CHECK(qehvi_mc(src, make_front(front_pts, ref), 2, outcomes * 2) == trace);
  }
}

TEST_CASE("thompson_hvi") {
  Eigen::MatrixXd mean(4, 2);
  mean << 4, 1, 3.9, 1.05, 1, 4, 2.5, 2.5;
  const auto front = make_front({{2, 2}}, {0, 0});
  const auto picks = thompson_hvi(fixed_posterior(mean), front, 2, 5);
  // deterministic greedy incremental HVI
  std::vector<oracle::Vec> pts = {{2, 2}};
  std::vector<std::size_t> expected;
  for (int step = 0; step < 2; ++step) {
    std::size_t pick = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < 4; ++i) {
      if (std::find(expected.begin(), expected.end(), i) != expected.end()) continue;
      const double v = oracle::hvi_bruteforce({mean(i, 0), mean(i, 1)}, pts, {0, 0});
      if (v > best) {
        best = v;
        pick = i;
      }
    }
    expected.push_back(pick);
    pts.push_back({mean(pick, 0), mean(pick, 1)});
  }
  CHECK(picks == expected);

  SUBCASE("q = 1 matches the first qPMHI draw") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Random(25, 2).array() + 2.0;
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(25, 25) * 0.2;
    const auto post = make_posterior({}, m, {a * a.transpose(), a * a.transpose()});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto r = estimate_qpmhi(post, front, 1, seed);
      if (r.improving_draws == 0) continue;
      const auto winner = static_cast<std::size_t>(std::max_element(r.counts.begin(), r.counts.end()) - r.counts.begin());
      CHECK(thompson_hvi(post, front, 1, seed) == std::vector<std::size_t>{winner});
    }
  }
  SUBCASE("indices are distinct even without improvement") {
    Eigen::MatrixXd low = Eigen::MatrixXd::Constant(6, 2, 0.5);
    low(2, 0) = 0.7;
    const auto p = thompson_hvi(fixed_posterior(low), front, 6, 1);
    CHECK(std::set<std::size_t>(p.begin(), p.end()).size() == 6);
    CHECK(p.front() == 2);
  }
}

TEST_CASE("random_select") {
  auto all = random_select(10, 10, 3);
  CHECK(all.size() == 10);
  CHECK(std::set<std::size_t>(all.begin(), all.end()).size() == 10);
  CHECK(random_select(10, 4, 99) == random_select(10, 4, 99));

  const std::size_t n = 10, q = 3, trials = 10000;
  std::vector<std::size_t> hits(n, 0);
  for (std::size_t t = 0; t < trials; ++t)
    for (std::size_t i : random_select(n, q, t)) ++hits[i];
  const double p = static_cast<double>(q) / n;
  const double se = std::sqrt(p * (1 - p) / trials);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(static_cast<double>(hits[i]) / trials - p) <= 4.0 * se);
}

TEST_CASE("acquisition errors and serialization") {
  Eigen::MatrixXd mean(2, 2);
  mean << 2, 2, 1, 1;
  const auto front = make_front({}, {0, 0});
  CHECK_THROWS_AS(estimate_qpmhi(fixed_posterior(mean), front, 0, 1), InvalidInput);
  CHECK_THROWS_AS(estimate_qpmhi(fixed_posterior(mean), ParetoFront({0, 0, 0}), 4, 1), InvalidInput);
  CHECK(acquisition_from_string("qehvi") == AcquisitionKind::qehvi_mc);
  CHECK_THROWS_AS(acquisition_from_string("ucb"), InvalidInput);

  auto r = estimate_qpmhi(fixed_posterior(mean), front, 4, 1);
  r.selected = select_batch(r, 1).indices;
  CHECK(acquisition_csv(r, {"a", "b"}) ==
        "candidate_id,prob,pareto_membership,selected_rank\na,1,1,1\nb,0,1,\n");
  CHECK(acquisition_summary(r, 7).dump() == R"({"L":4,"improving_fraction":1.0,"seed":7})");
}
