#pragma once

#include <cstdint>
#include <string>

#include "certkit/pauli.hpp"
#include "certkit/rng.hpp"
#include "certkit/states.hpp"

namespace certkit {

/// Noise channel applied to the theoretical state to produce the simulated
/// "experimental" state sigma.
struct NoiseSpec {
  enum class Kind {
    kNone,
    kGlobalDepolarizing,
    kLocalDepolarizing,
    kDephasing,
    kCoherentOverrotation,
  };

  Kind kind = Kind::kNone;
  double param = 0.0;  // probability, or angle for over-rotation

  // "none", "depolarizing:0.1", "local-depolarizing:0.05", "dephasing:0.2",
  // "overrotation:0.1".
  static NoiseSpec parse(const std::string& text);
  std::string to_text() const;
  void validate() const;
};

/// Finite-shot record for one measured Pauli setting.
struct ShotRecord {
  PauliString pauli;
  long plus_count = 0;
  long minus_count = 0;

  long n_shots() const { return plus_count + minus_count; }
  double mean() const {
    return static_cast<double>(plus_count - minus_count) / n_shots();
  }
};

// Materialize sigma as a density matrix (n <= dense limit).
DensityMatrix prepare_sigma(const StateModel& rho, const NoiseSpec& noise,
                            int dense_limit = kDenseLimit);

// Apply the noise channel to an explicit density matrix.
DensityMatrix apply_noise(const DensityMatrix& rho, const NoiseSpec& noise);

// i.i.d. +-1 outcomes with Pr(+1) = (1 + tr(sigma P)) / 2.
ShotRecord measure_pauli(const DensityMatrix& sigma, const PauliString& p,
                         long n_shots, Rng& rng);

// Single Bernoulli +-1 outcome for a known expectation value.
int sample_pm_outcome(double expectation_value, Rng& rng);

// Per-setting shot allocation N2 = ceil(2 ln(2/delta2) / (N1 eps2^2 rho^2)).
long shot_budget(double rho_i, long n1, double eps2, double delta2);

}  // namespace certkit
