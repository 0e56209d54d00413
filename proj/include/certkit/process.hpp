#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "certkit/fidelity.hpp"
#include "certkit/states.hpp"

namespace certkit {

/// Gate in a named Clifford circuit.
struct CliffordGate {
  enum class Kind { kH, kS, kCnot };
  Kind kind;
  int a = 0;  // target qubit (control for CNOT)
  int b = 0;  // CNOT target
};

struct CliffordCircuit {
  int n = 0;
  std::vector<CliffordGate> gates;

  // "h0", "s1", "cnot0,1" joined by ';'.  Also accepts the bare names
  // "identity", "h", "s", "cnot" for 1- and 2-qubit circuits.
  static CliffordCircuit parse(int n, const std::string& text);
  Eigen::MatrixXcd unitary() const;
};

// U P U^dagger for a Hermitian Pauli, tracked symbolically (no dense math).
PauliString conjugate_through(const CliffordCircuit& circuit,
                              const PauliString& p);

/// Quantum operation on n qubits: explicit unitary, Kraus set, or a named
/// Clifford circuit (which additionally supports symbolic stabilizer math).
struct ChannelModel {
  enum class Kind { kUnitary, kKraus, kClifford };

  int n = 0;
  Kind kind = Kind::kUnitary;
  Eigen::MatrixXcd unitary;
  std::vector<Eigen::MatrixXcd> kraus;
  CliffordCircuit clifford;

  static ChannelModel from_unitary(int n, Eigen::MatrixXcd u);
  static ChannelModel from_kraus(int n, std::vector<Eigen::MatrixXcd> ops);
  static ChannelModel from_clifford(CliffordCircuit circuit);
  // Compose with a noise channel acting after the operation.
  ChannelModel with_noise(const NoiseSpec& noise) const;

  void validate() const;  // complete positivity / trace preservation
  bool is_unitary_like() const { return kind != Kind::kKraus; }
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const;
};

struct ChoiState {
  int n = 0;  // system qubits; the state lives on 2n qubits
  DensityMatrix state;
};

void validate(const ChoiState& choi);

// (1 x E)(|phi><phi|) with |phi> = d^{-1/2} sum |i>|i>; input copy occupies
// qubits 0..n-1, output copy qubits n..2n-1.
ChoiState choi_state(const ChannelModel& channel);

// Pure Choi vector of a unitary-like channel.
DensePureState choi_vector(const ChannelModel& channel);

// Stabilizer generators of a Clifford circuit's Choi state:
// {X_j x UX_jU^t, Z_j x UZ_jU^t}.
StabilizerState choi_stabilizer(const CliffordCircuit& circuit);

// a on qubits 0..n-1 tensored with b on qubits n..2n-1.
PauliString pauli_tensor(const PauliString& a, const PauliString& b);

// Average output fidelity (d F + 1)/(d + 1) from a Choi-state fidelity.
double average_fidelity(double f_choi, double d);

struct ProcessReport {
  FidelityReport report;
  double choi_fidelity = 0.0;
  double avg_fidelity = 0.0;
  bool product_protocol = false;
};

/// Backend that reproduces Choi-state Pauli statistics without entanglement:
/// each shot prepares a conjugated random product eigenstate of the input
/// Pauli, applies the channel, and measures the output Pauli.
class ProductProtocolBackend : public MeasurementBackend {
 public:
  explicit ProductProtocolBackend(ChannelModel actual);
  ShotRecord measure(const PauliString& p, long n_shots, Rng& rng) override;
  // Exact estimator expectation by enumerating every eigenstate branch.
  double exact_mean(const PauliString& p);

 private:
  double branch_value(const PauliString& input_letters,
                      const PauliString& output_letters, std::uint64_t mu);

  ChannelModel actual_;
  std::map<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>, double>
      cache_;
};

// Literal Choi-state construction for `actual`, certified against the
// target's Choi state.
ProcessReport certify_process_direct(const ChannelModel& target,
                                     const ChannelModel& actual,
                                     const ErrorBudget& budget,
                                     const TruncationPolicy& truncation,
                                     std::uint64_t seed);

// Entanglement-free scheme: product eigenstate inputs + local measurement.
ProcessReport certify_process_product_protocol(
    const ChannelModel& target, const ChannelModel& actual,
    const ErrorBudget& budget, const TruncationPolicy& truncation,
    std::uint64_t seed);

}  // namespace certkit
