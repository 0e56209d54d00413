#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "certkit/pauli.hpp"
#include "certkit/rng.hpp"
#include "certkit/states.hpp"

namespace certkit {

// Term basis for 2-local chain Hamiltonians: the 3 single-site Paulis on
// every site followed by the 9 two-site Pauli pairs on every nearest-neighbor
// bond (3n + 9(n-1) terms).
std::vector<PauliString> local_term_basis(int n);

/// H = sum_l h_l P_l over the local term basis.
struct HamiltonianModel {
  int n = 0;
  std::vector<PauliString> basis;
  Eigen::VectorXd coefficients;

  Eigen::MatrixXcd dense(int dense_limit = kDenseLimit) const;
};

// Coefficient magnitudes uniform in [low, high] with random signs.
HamiltonianModel random_local_hamiltonian(int n, Rng& rng, double low = 0.8,
                                          double high = 1.2);

// Exact <A(t)> on a product initial state via dense evolution.
double evolve_expectation(const HamiltonianModel& h, const ProductState& rho,
                          const PauliString& a, double t);

/// Additive error applied to each measured shift.
enum class ShiftNoise { kNone, kUniform, kGaussian };

/// Linear system W = T h.  Rows are (observable A_i, product state rho_j)
/// pairs; T_{row,l} = i t tr(rho_j [P_l, A_i]) is filled symbolically by
/// Pauli algebra; w holds the measured shifts <A_i(t)> - tr(A_i rho_j).
struct ConstraintSystem {
  int n = 0;
  double time = 0.0;
  std::vector<PauliString> basis;
  std::vector<PauliString> observables;
  std::vector<std::vector<std::string>> states;  // single-qubit labels
  std::vector<std::pair<int, int>> rows;         // (observable, state) indices
  Eigen::MatrixXd t_matrix;
  Eigen::VectorXd w;
};

// Default ensemble: observables = the term basis; for each observable all
// 6^2 local variations of single-qubit Pauli eigenstates over a 2-site
// window around its support, |0> elsewhere (deduplicated).  T is filled; w
// is zero until fill_shifts.
ConstraintSystem assemble_constraints(int n, double t);

// Simulate the experiment: fill w with exact dense-evolution shifts under h,
// optionally perturbed by additive noise of magnitude eps per entry.
void fill_shifts(ConstraintSystem& system, const HamiltonianModel& h,
                 ShiftNoise noise, double eps, Rng& rng);

// Combine runs at t and t/2 so the leading quadratic-in-t bias cancels:
// w <- 4 w(t/2) - w(t), valid against the t-scaled T of `at_t`.
Eigen::VectorXd richardson_shifts(const Eigen::VectorXd& w_full_t,
                                  const Eigen::VectorXd& w_half_t);

struct LearnReport {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd scaling_sum;  // per-coefficient sum_rows |T+|^2
  Eigen::VectorXd scaling_amp;  // noise amplification sqrt(sum_rows |T+|^2)
  double total_scaling = 0.0;   // sum over coefficients of scaling_sum
  int rank = 0;
  double sv_cutoff = 0.0;
  double residual = 0.0;   // |T h~ - w|
  double rms_error = 0.0;  // vs ground truth when provided, else NaN
};

// Moore-Penrose solve h~ = T+ w with relative singular-value cutoff 1e-10.
LearnReport solve(const ConstraintSystem& system);
LearnReport solve(const ConstraintSystem& system,
                  const HamiltonianModel& truth);

// Full learning pipeline: assemble at t and t/2, measure shifts under h,
// Richardson-combine so the leading bias cancels, and solve.
LearnReport learn_run(const HamiltonianModel& h, double t, ShiftNoise noise,
                      double eps, Rng& rng);

// d^-1 sqrt(tr(H - H~)^2) = sqrt(sum_l dh_l^2 / d) for the orthogonal basis.
double rms_distance(const HamiltonianModel& truth,
                    const Eigen::VectorXd& estimate);

}  // namespace certkit
