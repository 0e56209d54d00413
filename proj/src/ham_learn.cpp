#include "certkit/ham_learn.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <stdexcept>

namespace certkit {

namespace {

const std::complex<double> kImag(0.0, 1.0);

// tr(rho Q) for a product state and a possibly non-Hermitian Pauli: the
// letter expectations are real, the string phase multiplies them.
std::complex<double> product_trace(const std::vector<Eigen::Vector2cd>& sites,
                                   const PauliString& q) {
  std::complex<double> value = q.phase();
  for (int s = 0; s < q.num_qubits(); ++s) {
    if (q.letter(s) == 'I') continue;
    const Eigen::Matrix2cd m = pauli_letter_matrix(q.letter(s));
    value *= (sites[s].adjoint() * m * sites[s]).value();
    if (value == std::complex<double>(0.0, 0.0)) return value;
  }
  return value;
}

std::vector<Eigen::Vector2cd> label_factors(
    const std::vector<std::string>& labels) {
  std::vector<Eigen::Vector2cd> out;
  out.reserve(labels.size());
  for (const auto& label : labels) out.push_back(single_qubit_state(label));
  return out;
}

// Contiguous support window [lo, hi] of a 1- or 2-local chain term.
std::pair<int, int> support_range(const PauliString& p) {
  int lo = -1, hi = -1;
  for (int q = 0; q < p.num_qubits(); ++q) {
    if (p.letter(q) == 'I') continue;
    if (lo < 0) lo = q;
    hi = q;
  }
  return {lo, hi};
}

}  // namespace

std::vector<PauliString> local_term_basis(int n) {
  if (n < 2) throw std::invalid_argument("local_term_basis: need n >= 2");
  std::vector<PauliString> basis;
  for (int q = 0; q < n; ++q)
    for (char letter : {'X', 'Y', 'Z'})
      basis.push_back(PauliString::single(n, q, letter));
  for (int q = 0; q + 1 < n; ++q)
    for (char a : {'X', 'Y', 'Z'})
      for (char b : {'X', 'Y', 'Z'})
        basis.push_back(PauliString::single(n, q, a) *
                        PauliString::single(n, q + 1, b));
  return basis;
}

Eigen::MatrixXcd HamiltonianModel::dense(int dense_limit) const {
  if (n > dense_limit)
    throw std::invalid_argument("HamiltonianModel: dense limit exceeded");
  const std::int64_t d = 1ll << n;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
  for (std::size_t l = 0; l < basis.size(); ++l)
    h.noalias() += coefficients(l) * basis[l].dense(dense_limit);
  return h;
}

HamiltonianModel random_local_hamiltonian(int n, Rng& rng, double low,
                                          double high) {
  if (low <= 0.0 || high < low)
    throw std::invalid_argument("random_local_hamiltonian: bad range");
  HamiltonianModel h;
  h.n = n;
  h.basis = local_term_basis(n);
  h.coefficients.resize(h.basis.size());
  std::uniform_real_distribution<double> mag(low, high);
  std::uniform_int_distribution<int> sign(0, 1);
  for (Eigen::Index l = 0; l < h.coefficients.size(); ++l)
    h.coefficients(l) = mag(rng) * (sign(rng) ? 1.0 : -1.0);
  return h;
}

double evolve_expectation(const HamiltonianModel& h, const ProductState& rho,
                          const PauliString& a, double t) {
  if (rho.n != h.n || a.num_qubits() != h.n)
    throw std::invalid_argument("evolve_expectation: size mismatch");
  if (t <= 0.0) throw std::invalid_argument("evolve_expectation: t must be > 0");
  const Eigen::MatrixXcd hd = h.dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(hd);
  const Eigen::VectorXcd phases =
      (-kImag * t * eig.eigenvalues().cast<std::complex<double>>().array())
          .exp();
  const Eigen::MatrixXcd u =
      eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
  const auto psi = to_dense(rho);
  const Eigen::VectorXcd evolved = u * psi.amplitudes;
  return (evolved.adjoint() * a.dense() * evolved).value().real();
}

ConstraintSystem assemble_constraints(int n, double t) {
  if (t <= 0.0)
    throw std::invalid_argument("assemble_constraints: t must be > 0");
  ConstraintSystem system;
  system.n = n;
  system.time = t;
  system.basis = local_term_basis(n);
  system.observables = system.basis;

  static const std::vector<std::string> kLabels = {"0", "1", "+",
                                                   "-", "+i", "-i"};
  std::map<std::vector<std::string>, int> state_index;
  for (std::size_t i = 0; i < system.observables.size(); ++i) {
    const auto [lo, hi] = support_range(system.observables[i]);
    const int w0 = std::min(lo, n - 2);  // 2-site window start
    for (const auto& l0 : kLabels) {
      for (const auto& l1 : kLabels) {
        std::vector<std::string> labels(n, "0");
        labels[w0] = l0;
        labels[w0 + 1] = l1;
        auto found = state_index.find(labels);
        if (found == state_index.end()) {
          found = state_index.emplace(labels, system.states.size()).first;
          system.states.push_back(labels);
        }
        system.rows.emplace_back(static_cast<int>(i), found->second);
      }
    }
  }

  // Symbolic T: i t tr(rho [P_l, A_i]) = 2 i t tr(rho P_l A_i) when the
  // operators anticommute, zero otherwise.
  std::vector<std::vector<Eigen::Vector2cd>> factors;
  factors.reserve(system.states.size());
  for (const auto& labels : system.states)
    factors.push_back(label_factors(labels));

  system.t_matrix.resize(system.rows.size(), system.basis.size());
  for (std::size_t r = 0; r < system.rows.size(); ++r) {
    const auto& a = system.observables[system.rows[r].first];
    const auto& sites = factors[system.rows[r].second];
    for (std::size_t l = 0; l < system.basis.size(); ++l) {
      const auto& p = system.basis[l];
      if (p.commutes_with(a)) {
        system.t_matrix(r, l) = 0.0;
        continue;
      }
      const std::complex<double> value =
          kImag * t * 2.0 * product_trace(sites, p * a);
      if (std::abs(value.imag()) > 1e-9)
        throw std::logic_error("assemble_constraints: non-real T entry");
      system.t_matrix(r, l) = value.real();
    }
  }
  system.w = Eigen::VectorXd::Zero(system.rows.size());
  return system;
}

void fill_shifts(ConstraintSystem& system, const HamiltonianModel& h,
                 ShiftNoise noise, double eps, Rng& rng) {
  if (h.n != system.n)
    throw std::invalid_argument("fill_shifts: size mismatch");
  // Evolve each distinct initial state once and reuse it for every
  // observable measured on it.
  const Eigen::MatrixXcd hd = h.dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(hd);
  const Eigen::VectorXcd phases =
      (-kImag * system.time *
       eig.eigenvalues().cast<std::complex<double>>().array())
          .exp();
  const Eigen::MatrixXcd u =
      eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();

  std::vector<Eigen::VectorXcd> evolved;
  evolved.reserve(system.states.size());
  std::vector<std::vector<Eigen::Vector2cd>> factors;
  for (const auto& labels : system.states) {
    const auto psi = to_dense(make_product(labels));
    evolved.push_back(u * psi.amplitudes);
    factors.push_back(label_factors(labels));
  }

  std::uniform_real_distribution<double> uniform(-eps, eps);
  std::normal_distribution<double> gaussian(0.0, eps);
  for (std::size_t r = 0; r < system.rows.size(); ++r) {
    const auto& a = system.observables[system.rows[r].first];
    const auto& psi_t = evolved[system.rows[r].second];
    const double after = (psi_t.adjoint() * a.dense() * psi_t).value().real();
    const double before =
        product_trace(factors[system.rows[r].second], a).real();
    double shift = after - before;
    switch (noise) {
      case ShiftNoise::kNone: break;
      case ShiftNoise::kUniform: shift += uniform(rng); break;
      case ShiftNoise::kGaussian: shift += gaussian(rng); break;
    }
    system.w(r) = shift;
  }
}

Eigen::VectorXd richardson_shifts(const Eigen::VectorXd& w_full_t,
                                  const Eigen::VectorXd& w_half_t) {
  if (w_full_t.size() != w_half_t.size())
    throw std::invalid_argument("richardson_shifts: size mismatch");
  return 4.0 * w_half_t - w_full_t;
}

LearnReport solve(const ConstraintSystem& system) {
  if (system.t_matrix.rows() < system.t_matrix.cols())
    throw std::invalid_argument("solve: underdetermined constraint system");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(
      system.t_matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double sigma_max = svd.singularValues()(0);
  if (sigma_max <= 0.0) throw std::runtime_error("solve: all-zero system");
  const double cutoff = 1e-10 * sigma_max;

  LearnReport report;
  report.sv_cutoff = cutoff;
  const Eigen::Index cols = system.t_matrix.cols();
  Eigen::VectorXd inv_sigma = Eigen::VectorXd::Zero(svd.singularValues().size());
  for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
    if (svd.singularValues()(k) > cutoff) {
      inv_sigma(k) = 1.0 / svd.singularValues()(k);
      ++report.rank;
    }
  }
  const Eigen::MatrixXd pinv = svd.matrixV() * inv_sigma.asDiagonal() *
                               svd.matrixU().transpose();
  report.coefficients = pinv * system.w;
  report.residual =
      (system.t_matrix * report.coefficients - system.w).norm();
  report.scaling_sum.resize(cols);
  report.scaling_amp.resize(cols);
  for (Eigen::Index l = 0; l < cols; ++l) {
    report.scaling_sum(l) = pinv.row(l).squaredNorm();
    report.scaling_amp(l) = std::sqrt(report.scaling_sum(l));
  }
  report.total_scaling = report.scaling_sum.sum();
  report.rms_error = std::numeric_limits<double>::quiet_NaN();
  return report;
}

LearnReport learn_run(const HamiltonianModel& h, double t, ShiftNoise noise,
                      double eps, Rng& rng) {
  auto full = assemble_constraints(h.n, t);
  auto half = assemble_constraints(h.n, t / 2);
  fill_shifts(full, h, noise, eps, rng);
  fill_shifts(half, h, noise, eps, rng);
  full.w = richardson_shifts(full.w, half.w);
  return solve(full, h);
}

LearnReport solve(const ConstraintSystem& system,
                  const HamiltonianModel& truth) {
  LearnReport report = solve(system);
  report.rms_error = rms_distance(truth, report.coefficients);
  return report;
}

double rms_distance(const HamiltonianModel& truth,
                    const Eigen::VectorXd& estimate) {
  if (estimate.size() != truth.coefficients.size())
    throw std::invalid_argument("rms_distance: size mismatch");
  const double d = static_cast<double>(1ll << truth.n);
  return std::sqrt((truth.coefficients - estimate).squaredNorm() / d);
}

}  // namespace certkit
