#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "certkit/relevance.hpp"
#include "test_helpers.hpp"

using namespace certkit;
using namespace certkit::testing;

namespace {

// Exact conditional marginals from the brute-force table: probability of
// letter p on site k given the chosen prefix.
std::array<double, 4> brute_force_conditional(const std::vector<double>& pr,
                                              int n,
                                              const std::vector<int>& prefix) {
  std::array<double, 4> w{};
  const int k = static_cast<int>(prefix.size());
  for (std::uint64_t i = 0; i < pr.size(); ++i) {
    const auto p = PauliString::from_index(n, i);
    bool match = true;
    for (int q = 0; q < k && match; ++q)
      match = p.letter(q) == kPauliLetters[prefix[q]];
    if (!match) continue;
    const int code =
        std::string_view(kPauliLetters).find(p.letter(k));
    w[code] += pr[i];
  }
  double sum = w[0] + w[1] + w[2] + w[3];
  for (auto& v : w) v /= sum;
  return w;
}

}  // namespace

TEST_CASE("stabilizer sampling is uniform over the group") {
  const auto ghz = make_ghz(3);
  auto rng = make_rng(31);
  std::map<std::uint64_t, int> counts;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const auto s = sample_stabilizer(ghz, rng);
    CHECK((s.rho_i == 1.0 || s.rho_i == -1.0));
    CHECK(s.weight == doctest::Approx(1.0 / 8.0));
    counts[s.index]++;
  }
  CHECK(counts.size() == 8);
  // 3 sigma around 1/8.
  const double sigma = std::sqrt(draws * (1.0 / 8) * (7.0 / 8));
  for (const auto& [idx, c] : counts)
    CHECK(std::abs(c - draws / 8.0) < 3.5 * sigma);
  // Every sampled index really is in the group with the claimed sign.
  for (const auto& [idx, c] : counts) {
    const double v = expectation(ghz, PauliString::from_index(3, idx));
    CHECK(v != 0.0);
  }
}

TEST_CASE("n=1 |0> stabilizer samples only I and Z") {
  StabilizerState zero;
  zero.n = 1;
  zero.generators = {PauliString::from_text("Z")};
  auto rng = make_rng(32);
  for (int i = 0; i < 200; ++i) {
    const auto s = sample_stabilizer(zero, rng);
    const auto p = PauliString::from_index(1, s.index);
    CHECK((p.letter(0) == 'I' || p.letter(0) == 'Z'));
  }
}

TEST_CASE("dense table: |0> and GHZ2 weights") {
  DensePureState zero;
  zero.n = 1;
  zero.amplitudes = Eigen::Vector2cd(1.0, 0.0);
  DenseRelevanceTable table(zero);
  // Nonzero on I and Z only, each 1/2.
  CHECK(table.weights()[PauliString::from_text("I").index()] ==
        doctest::Approx(0.5));
  CHECK(table.weights()[PauliString::from_text("Z").index()] ==
        doctest::Approx(0.5));
  CHECK(table.total_weight() == doctest::Approx(1.0).epsilon(1e-12));

  DenseRelevanceTable ghz2(to_dense(make_ghz(2)));
  int nonzero = 0;
  for (double w : ghz2.weights()) {
    if (w > 1e-12) {
      CHECK(w == doctest::Approx(0.25));
      ++nonzero;
    }
  }
  CHECK(nonzero == 4);
  CHECK(ghz2.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("conditional weights match brute force exactly (dense states)") {
  auto rng = make_rng(33);
  for (int n = 2; n <= 3; ++n) {
    const auto psi = random_pure_state(n, rng);
    const auto pr = brute_force_relevance(psi.amplitudes, n);
    const StateModel state(psi);
    // Every prefix of every depth 0 .. n-1.
    std::vector<std::vector<int>> prefixes = {{}};
    std::vector<std::vector<int>> frontier = {{}};
    for (int depth = 1; depth < n; ++depth) {
      std::vector<std::vector<int>> next;
      for (const auto& pre : frontier)
        for (int p = 0; p < 4; ++p) {
          auto e = pre;
          e.push_back(p);
          next.push_back(e);
        }
      prefixes.insert(prefixes.end(), next.begin(), next.end());
      frontier = std::move(next);
    }
    for (const auto& pre : prefixes) {
      const auto got = conditional_weights(state, pre);
      const auto want = brute_force_conditional(pr, n, pre);
      for (int p = 0; p < 4; ++p)
        CHECK(got[p] == doctest::Approx(want[p]).epsilon(1e-9));
    }
  }
}

TEST_CASE("MPS and dense conditional weights agree at every step") {
  const auto w3 = make_w(3);
  const StateModel mps(w3);
  const StateModel dense(to_dense(w3));
  std::vector<std::vector<int>> prefixes = {{}, {0}, {3}, {1}, {0, 2},
                                            {3, 0}, {1, 1}};
  for (const auto& pre : prefixes) {
    const auto a = conditional_weights(mps, pre);
    const auto b = conditional_weights(dense, pre);
    for (int p = 0; p < 4; ++p)
      CHECK(a[p] == doctest::Approx(b[p]).epsilon(1e-10));
  }
}

TEST_CASE("conditional sampler distribution matches Pr(i) empirically") {
  auto rng = make_rng(34);
  const auto psi = random_pure_state(2, rng);
  const auto pr = brute_force_relevance(psi.amplitudes, 2);
  const StateModel state(psi);
  std::map<std::uint64_t, int> counts;
  const int draws = 200000;
  auto draw_rng = make_rng(35);
  for (int i = 0; i < draws; ++i)
    counts[sample_conditional(state, draw_rng).index]++;
  double tv = 0.0;
  for (std::uint64_t i = 0; i < pr.size(); ++i) {
    const double emp = counts.count(i) ? counts[i] / double(draws) : 0.0;
    tv += 0.5 * std::abs(emp - pr[i]);
  }
  CHECK(tv < 0.01);
}

TEST_CASE("product |00...0>: only Z/I-supported strings drawn") {
  const StateModel state(make_product({"0", "0", "0"}));
  auto rng = make_rng(36);
  for (int i = 0; i < 500; ++i) {
    const auto s = sample_conditional(state, rng);
    CHECK(PauliString::from_index(3, s.index).x_bits() == 0);
  }
}

TEST_CASE("strategy equivalence: all samplers target the same distribution") {
  // Exact comparison of conditional weights between representations.
  for (int n = 2; n <= 4; ++n) {
    const auto stab = make_ghz(n);
    const StateModel stab_model(stab);
    const StateModel dense_model(to_dense(stab));
    const StateModel mps_model(make_w(n));
    const StateModel mps_dense(to_dense(make_w(n)));
    const std::vector<std::vector<int>> stab_prefixes = {{}, {1}, {3}, {1, 2}};
    const std::vector<std::vector<int>> w_prefixes = {{}, {0}, {3}, {1, 1}};
    for (const auto& pre : stab_prefixes) {
      if (static_cast<int>(pre.size()) >= n) continue;
      auto a = conditional_weights(stab_model, pre);
      auto b = conditional_weights(dense_model, pre);
      for (int p = 0; p < 4; ++p)
        CHECK(a[p] == doctest::Approx(b[p]).epsilon(1e-10));
    }
    for (const auto& pre : w_prefixes) {
      if (static_cast<int>(pre.size()) >= n) continue;
      auto c = conditional_weights(mps_model, pre);
      auto d = conditional_weights(mps_dense, pre);
      for (int p = 0; p < 4; ++p)
        CHECK(c[p] == doctest::Approx(d[p]).epsilon(1e-10));
    }
    // Stabilizer sampler marginals agree with the dense table weights.
    DenseRelevanceTable table(to_dense(stab));
    auto rng = make_rng(37);
    std::map<std::uint64_t, int> counts;
    for (int i = 0; i < 20000; ++i)
      counts[sample_stabilizer(stab, rng).index]++;
    for (const auto& [idx, cnt] : counts)
      CHECK(table.weights()[idx] == doctest::Approx(1.0 / (1 << n)));
  }
}

TEST_CASE("determinism: same seed, same sequence") {
  const StateModel state(make_w(4));
  auto a = make_rng(99);
  auto b = make_rng(99);
  for (int i = 0; i < 20; ++i)
    CHECK(sample_conditional(state, a).index ==
          sample_conditional(state, b).index);
}

TEST_CASE("truncation policy") {
  TruncationPolicy policy{1.0};
  // n=3, eps=1: cutoff 1/8; W3 samples at |rho|=1/3 accepted.
  CHECK(policy.cutoff(3) == doctest::Approx(1.0 / 8.0));
  RelevanceSample w_sample{0, 1.0 / 3.0, (1.0 / 9.0) / 8.0};
  CHECK(policy.accepts(w_sample, 3));
  // Stabilizer samples never rejected.
  RelevanceSample stab_sample{0, -1.0, 1.0 / 8.0};
  CHECK(policy.accepts(stab_sample, 3));
  CHECK(policy.rejection_bound(4) == doctest::Approx(1.0 / 16.0));
  CHECK(policy.bias_bound(4) == doctest::Approx(0.25));
  // Exact rejection probability for random pure states <= d^-eps.
  auto rng = make_rng(38);
  for (int trial = 0; trial < 5; ++trial) {
    const auto psi = random_pure_state(3, rng);
    const auto pr = brute_force_relevance(psi.amplitudes, 3);
    double rejected = 0.0;
    for (std::uint64_t i = 0; i < pr.size(); ++i) {
      const double rho_i = std::sqrt(pr[i] * 8.0);
      if (rho_i < policy.cutoff(3)) rejected += pr[i];
    }
    CHECK(rejected <= policy.rejection_bound(3) + 1e-12);
  }
}

TEST_CASE("weight invariant: weight == rho^2/d within 1e-12") {
  const StateModel state(make_t(3));
  auto rng = make_rng(39);
  for (int i = 0; i < 100; ++i) {
    const auto s = sample_conditional(state, rng);
    CHECK(std::abs(s.weight - s.rho_i * s.rho_i / 8.0) < 1e-12);
    CHECK(std::abs(s.rho_i) > 0.0);
  }
}
