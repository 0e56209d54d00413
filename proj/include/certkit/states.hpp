#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <variant>
#include <vector>

#include "certkit/pauli.hpp"

namespace certkit {

/// Simultaneous +1 eigenstate of n independent commuting signed Pauli
/// generators.
struct StabilizerState {
  int n = 0;
  std::vector<PauliString> generators;
};

/// Pure matrix product state with open boundaries.  tensors[k][s] is the
/// D_{k-1} x D_k matrix for physical value s on site k, with D_0 = D_n = 1.
struct MpsState {
  int n = 0;
  std::vector<std::array<Eigen::MatrixXcd, 2>> tensors;
  bool normalized = false;
};

/// Dense state vector, qubit 0 = most significant bit of the basis index.
struct DensePureState {
  int n = 0;
  Eigen::VectorXcd amplitudes;
};

struct DensityMatrix {
  int n = 0;
  Eigen::MatrixXcd matrix;
};

/// Product of single-qubit pure states.
struct ProductState {
  int n = 0;
  std::vector<Eigen::Vector2cd> factors;
};

using StateModel = std::variant<StabilizerState, MpsState, DensePureState,
                                DensityMatrix, ProductState>;

int num_qubits(const StateModel& state);

// Exact rho_i = tr(rho P); real in [-1, 1] for Hermitian P.
double expectation(const StateModel& state, const PauliString& p);

double expectation(const StabilizerState& state, const PauliString& p);
double expectation(const MpsState& state, const PauliString& p);
double expectation(const DensePureState& state, const PauliString& p);
double expectation(const DensityMatrix& state, const PauliString& p);
double expectation(const ProductState& state, const PauliString& p);

// <psi| (o_0 ⊗ ... ⊗ o_{n-1}) |psi> for arbitrary single-site operators,
// contracted left to right in O(n chi^3).
std::complex<double> mps_product_expectation(
    const MpsState& state, const std::vector<Eigen::Matrix2cd>& ops);

// Named constructors (Table-style state families).
StabilizerState make_ghz(int n);
StabilizerState make_cluster_1d(int n, bool periodic = false);
MpsState make_w(int n);
MpsState make_t(int n);  // (n+1)^{-1/2} sum_j |1>^{j} |0>^{n-j}
// Labels from {"0","1","+","-","+i","-i"}.
ProductState make_product(const std::vector<std::string>& labels);
Eigen::Vector2cd single_qubit_state(const std::string& label);

void validate(const StabilizerState& state);
void normalize(MpsState& state);

// Dense bridges (n <= dense_limit).
DensePureState to_dense(const StateModel& state, int dense_limit = kDenseLimit);
DensePureState to_dense(const StabilizerState& state, int dense_limit = kDenseLimit);
DensePureState to_dense(const MpsState& state, int dense_limit = kDenseLimit);
DensePureState to_dense(const ProductState& state, int dense_limit = kDenseLimit);
DensityMatrix to_density(const StateModel& state, int dense_limit = kDenseLimit);

void validate(const DensityMatrix& rho);

// tr(rho P) for dense representations without materializing dense(P).
double pauli_expectation(const Eigen::VectorXcd& psi, const PauliString& p);
double pauli_expectation(const Eigen::MatrixXcd& rho, const PauliString& p);

}  // namespace certkit
