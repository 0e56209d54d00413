#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "certkit/ham_learn.hpp"
#include "test_helpers.hpp"

using namespace certkit;
using namespace certkit::testing;

namespace {

const std::complex<double> kImag(0.0, 1.0);

// Dense oracle for one constraint entry: i t tr(rho [P, A]).
double dense_t_entry(const std::vector<std::string>& labels,
                     const PauliString& p, const PauliString& a, double t) {
  const auto psi = to_dense(make_product(labels));
  const Eigen::MatrixXcd rho = psi.amplitudes * psi.amplitudes.adjoint();
  const Eigen::MatrixXcd comm =
      p.dense() * a.dense() - a.dense() * p.dense();
  return (kImag * t * (rho * comm).trace()).real();
}

}  // namespace

TEST_CASE("term basis combinatorics") {
  const auto basis = local_term_basis(4);
  CHECK(basis.size() == 39);  // 3*4 single-site + 9*3 bond terms
  for (const auto& p : basis) {
    int lo = -1, hi = -1;
    for (int q = 0; q < 4; ++q)
      if (p.letter(q) != 'I') {
        if (lo < 0) lo = q;
        hi = q;
      }
    CHECK(lo >= 0);
    CHECK(hi - lo <= 1);  // contiguous, at most 2 sites
    CHECK(p.sign() == 1);
  }
  // No duplicates.
  std::set<std::uint64_t> seen;
  for (const auto& p : basis) seen.insert(p.index());
  CHECK(seen.size() == basis.size());
}

TEST_CASE("random model: coefficient range and determinism") {
  auto rng = make_rng(101);
  const auto h = random_local_hamiltonian(5, rng);
  CHECK(h.coefficients.size() == 51);
  for (Eigen::Index l = 0; l < h.coefficients.size(); ++l) {
    CHECK(std::abs(h.coefficients(l)) >= 0.8);
    CHECK(std::abs(h.coefficients(l)) <= 1.2);
  }
  auto rng2 = make_rng(101);
  const auto h2 = random_local_hamiltonian(5, rng2);
  CHECK((h.coefficients - h2.coefficients).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-qubit evolution closed forms") {
  HamiltonianModel h;
  h.n = 1;
  h.basis = {PauliString::from_text("Z")};
  h.coefficients = Eigen::VectorXd::Ones(1);
  const auto plus = make_product({"+"});
  const double t = 1e-3;
  // <X(t)> = cos(2t): commuting-linear-term case, shift is O(t^2).
  const double x_shift =
      evolve_expectation(h, plus, PauliString::from_text("X"), t) - 1.0;
  CHECK(x_shift == doctest::Approx(std::cos(2 * t) - 1.0).epsilon(1e-9));
  CHECK(std::abs(x_shift) < 3e-6);
  // <Y(t)> = sin(2t): linear shift 2t.
  const double y_shift =
      evolve_expectation(h, plus, PauliString::from_text("Y"), t);
  CHECK(y_shift == doctest::Approx(std::sin(2 * t)).epsilon(1e-9));
  CHECK(y_shift == doctest::Approx(2 * t).epsilon(1e-5));
}

TEST_CASE("symbolic T equals the dense oracle entrywise (n=3, exhaustive)") {
  const double t = 1e-3;
  const auto system = assemble_constraints(3, t);
  CHECK(system.t_matrix.rows() ==
        static_cast<Eigen::Index>(system.rows.size()));
  for (std::size_t r = 0; r < system.rows.size(); ++r) {
    const auto& a = system.observables[system.rows[r].first];
    const auto& labels = system.states[system.rows[r].second];
    for (std::size_t l = 0; l < system.basis.size(); ++l) {
      const double want = dense_t_entry(labels, system.basis[l], a, t);
      CHECK(std::abs(system.t_matrix(r, l) - want) < 1e-12);
    }
  }
}

TEST_CASE("T rows are insensitive to far-away state factors") {
  auto rng = make_rng(102);
  const double t = 1e-3;
  const std::vector<std::string> labels = {"0", "1", "+", "-", "+i", "-i"};
  std::uniform_int_distribution<int> pick(0, 5);
  for (int trial = 0; trial < 20; ++trial) {
    // P and A supported on sites {0,1} of a 4-site chain.
    const auto p = PauliString::single(4, 0, "XYZ"[pick(rng) % 3]) *
                   PauliString::single(4, 1, "XYZ"[pick(rng) % 3]);
    const auto a = PauliString::single(4, pick(rng) % 2, "XYZ"[pick(rng) % 3]);
    std::vector<std::string> s1 = {labels[pick(rng)], labels[pick(rng)],
                                   labels[pick(rng)], labels[pick(rng)]};
    auto s2 = s1;
    s2[2] = labels[pick(rng)];
    s2[3] = labels[pick(rng)];
    CHECK(dense_t_entry(s1, p, a, t) ==
          doctest::Approx(dense_t_entry(s2, p, a, t)).epsilon(1e-12));
  }
}

TEST_CASE("disjoint supports give zero T entries") {
  const auto system = assemble_constraints(4, 1e-3);
  for (std::size_t r = 0; r < system.rows.size(); ++r) {
    const auto& a = system.observables[system.rows[r].first];
    for (std::size_t l = 0; l < system.basis.size(); ++l) {
      const auto& p = system.basis[l];
      bool overlap = false;
      for (int q = 0; q < 4; ++q)
        if (p.letter(q) != 'I' && a.letter(q) != 'I') overlap = true;
      if (!overlap) CHECK(system.t_matrix(r, l) == 0.0);
    }
  }
}

TEST_CASE("exact recovery with Richardson extrapolation (n <= 4)") {
  for (int n : {3, 4}) {
    auto rng = make_rng(103 + n);
    const auto h = random_local_hamiltonian(n, rng);
    const double t = 1e-4;
    auto full = assemble_constraints(n, t);
    auto half = assemble_constraints(n, t / 2);
    fill_shifts(full, h, ShiftNoise::kNone, 0.0, rng);
    fill_shifts(half, h, ShiftNoise::kNone, 0.0, rng);
    full.w = richardson_shifts(full.w, half.w);
    const auto report = solve(full, h);
    CHECK((report.coefficients - h.coefficients).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(report.rms_error < 1e-6);
    CHECK(report.rank == static_cast<int>(full.basis.size()));
  }
}

TEST_CASE("noiseless bias shrinks at least 3x when t halves") {
  auto rng = make_rng(107);
  const auto h = random_local_hamiltonian(4, rng);
  double errors[2];
  int idx = 0;
  for (double t : {1e-3, 5e-4})
    errors[idx++] = learn_run(h, t, ShiftNoise::kNone, 0.0, rng).rms_error;
  CHECK(errors[1] * 3.0 <= errors[0]);
}

TEST_CASE("noise-dominated error is linear in eps") {
  const double t = 1e-3;
  const auto base = assemble_constraints(4, t);
  auto rng = make_rng(108);
  const auto h = random_local_hamiltonian(4, rng);
  double mean[2] = {0.0, 0.0};
  const int trials = 20;
  int idx = 0;
  for (double eps : {1e-4, 2e-4}) {
    for (int trial = 0; trial < trials; ++trial) {
      auto system = base;
      fill_shifts(system, h, ShiftNoise::kUniform, eps, rng);
      mean[idx] += solve(system, h).rms_error / trials;
    }
    ++idx;
  }
  CHECK(mean[1] <= 2.2 * mean[0]);
  CHECK(mean[1] >= 1.3 * mean[0]);
}

TEST_CASE("solver diagnostics and consistency") {
  auto rng = make_rng(109);
  const auto h = random_local_hamiltonian(3, rng);
  auto system = assemble_constraints(3, 1e-3);
  fill_shifts(system, h, ShiftNoise::kUniform, 1e-4, rng);
  const auto report = solve(system, h);
  // T h~ reproduces w within the reported residual.
  CHECK((system.t_matrix * report.coefficients - system.w).norm() ==
        doctest::Approx(report.residual).epsilon(1e-10));
  // rms consistency identity.
  const double d = 8.0;
  CHECK(report.rms_error ==
        doctest::Approx(std::sqrt(
            (report.coefficients - h.coefficients).squaredNorm() / d))
            .epsilon(1e-10));
  for (Eigen::Index l = 0; l < report.scaling_amp.size(); ++l)
    CHECK(report.scaling_amp(l) ==
          doctest::Approx(std::sqrt(report.scaling_sum(l))).epsilon(1e-12));
}

TEST_CASE("aggregate scaling factor is non-decreasing in chain length") {
  double prev = 0.0;
  for (int n : {3, 4, 5}) {
    const auto report = solve(assemble_constraints(n, 1e-3));
    CHECK(report.total_scaling >= prev - 1e-9);
    prev = report.total_scaling;
  }
}

TEST_CASE("error paths") {
  CHECK_THROWS_AS(local_term_basis(1), std::invalid_argument);
  auto rng = make_rng(110);
  CHECK_THROWS_AS(random_local_hamiltonian(3, rng, 1.2, 0.8),
                  std::invalid_argument);
  CHECK_THROWS_AS(assemble_constraints(3, 0.0), std::invalid_argument);
}
