#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "certkit/measurement.hpp"
#include "certkit/relevance.hpp"
#include "certkit/rng.hpp"
#include "certkit/states.hpp"

namespace certkit {

/// Two-stage error budget: eps1 controls the Monte Carlo sampling error
/// (Chebyshev), eps2 the finite-shot estimation error (Hoeffding), and the
/// two failure probabilities combine to at most delta_target by union bound.
struct ErrorBudget {
  double eps1 = 0.05;
  double eps2 = 0.05;
  double delta_target = 0.1;
  long n1 = 8000;

  void validate() const;
};

/// One Monte Carlo sample: the drawn index, its finite-shot record, and the
/// ratio sigma_tilde / rho_i that enters the estimator mean.
struct FidelitySample {
  RelevanceSample sample;
  ShotRecord shots;
  double ratio = 0.0;
};

struct FidelityReport {
  double estimate = 0.0;
  ErrorBudget budget;
  std::vector<FidelitySample> samples;
  long total_shots = 0;
  std::uint64_t seed = 0;
};

/// Source of +-1 measurement outcomes for Hermitian Pauli observables.
class MeasurementBackend {
 public:
  virtual ~MeasurementBackend() = default;
  virtual ShotRecord measure(const PauliString& p, long n_shots, Rng& rng) = 0;
};

/// Backend that samples shots from an explicit density matrix.
class DensityMatrixBackend : public MeasurementBackend {
 public:
  explicit DensityMatrixBackend(DensityMatrix sigma)
      : sigma_(std::move(sigma)) {}
  ShotRecord measure(const PauliString& p, long n_shots, Rng& rng) override {
    return measure_pauli(sigma_, p, n_shots, rng);
  }
  const DensityMatrix& sigma() const { return sigma_; }

 private:
  DensityMatrix sigma_;
};

// Monte Carlo fidelity estimate: draw n1 relevance samples from rho, measure
// each with a per-sample shot budget on the backend, and average the ratios.
FidelityReport estimate_fidelity(const StateModel& rho,
                                 MeasurementBackend& backend,
                                 const ErrorBudget& budget,
                                 const TruncationPolicy& truncation,
                                 std::uint64_t seed);

// Chebyshev failure probability 1/(N1 eps1^2) for the sampling stage.
double chebyshev_bound(long n1, double eps1);

// Hoeffding failure probability 2 exp(-eps2^2 N1^2 / (2 sum 1/(rho^2 N2)))
// for the finite-shot stage; `samples` holds (rho_i, n2) pairs.
double hoeffding_bound(const std::vector<std::pair<double, long>>& samples,
                       double eps2);

// Split eps and delta evenly between the two stages and size N1 so that the
// Chebyshev term alone is at most delta/2.
ErrorBudget plan_budget(const StateModel& rho, double eps, double delta);

}  // namespace certkit
