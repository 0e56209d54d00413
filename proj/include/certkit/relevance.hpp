#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "certkit/pauli.hpp"
#include "certkit/rng.hpp"
#include "certkit/states.hpp"

namespace certkit {

/// A drawn basis index with its exact theoretical expectation and weight
/// Pr(i) = rho_i^2 / d.
struct RelevanceSample {
  std::uint64_t index = 0;
  double rho_i = 0.0;
  double weight = 0.0;

  PauliString pauli(int n) const { return PauliString::from_index(n, index); }
};

/// Truncation filter: reject indices with |rho_i| below d^{-(1+epsilon)/2}.
struct TruncationPolicy {
  double epsilon = 1.0;

  double cutoff(int n) const;
  bool accepts(const RelevanceSample& sample, int n) const;
  // Worst-case systematic fidelity bias: d^{1/2 - alpha}, alpha=(1+eps)/2.
  double bias_bound(int n) const;
  // Worst-case rejection probability d^{-epsilon}.
  double rejection_bound(int n) const;
};

// Uniform draw over the d stabilizer-group elements; rho_i is always +-1.
RelevanceSample sample_stabilizer(const StabilizerState& state, Rng& rng);

// One-time table of all 4^n weights for dense representations.
class DenseRelevanceTable {
 public:
  DenseRelevanceTable(const DensePureState& state,
                      int dense_limit = kDenseLimit);
  DenseRelevanceTable(const DensityMatrix& state,
                      int dense_limit = kDenseLimit);

  RelevanceSample sample(Rng& rng) const;
  const std::vector<double>& rho() const { return rho_; }
  const std::vector<double>& weights() const { return weights_; }
  double total_weight() const { return total_; }

 private:
  void finalize(int n);

  int n_;
  std::vector<double> rho_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

RelevanceSample sample_dense_bruteforce(const DenseRelevanceTable& table,
                                        Rng& rng);

// Per-site conditional weights q(p_k | p_1..p_{k-1}) of the chain-rule
// sampler, normalized over {I, X, Y, Z}.  `prefix` holds the letters already
// fixed on sites 0..k-1 as indices into kPauliLetters.
std::array<double, 4> conditional_weights(const StateModel& state,
                                          const std::vector<int>& prefix);

// Exact draw from Pr(i) by sequential conditional sampling.  MPS states use
// a linear-time doubled-transfer sweep; other representations go through the
// dense partial-trace chain.
RelevanceSample sample_conditional(const StateModel& state, Rng& rng);

// Representation-dispatched default: stabilizer path, MPS conditional sweep,
// dense table otherwise (built lazily and cached by the caller if reused).
class RelevanceSampler {
 public:
  explicit RelevanceSampler(const StateModel& state,
                            int dense_limit = kDenseLimit);
  RelevanceSample sample(Rng& rng) const;
  int num_qubits() const { return n_; }

 private:
  const StateModel& state_;
  int n_;
  std::shared_ptr<const DenseRelevanceTable> table_;  // dense path only
};

}  // namespace certkit
