#include "certkit/fidelity.hpp"

#include <cmath>
#include <stdexcept>

namespace certkit {

void ErrorBudget::validate() const {
  if (eps1 <= 0.0 || eps2 <= 0.0)
    throw std::invalid_argument("ErrorBudget: eps1/eps2 must be positive");
  if (delta_target <= 0.0 || delta_target >= 1.0)
    throw std::invalid_argument("ErrorBudget: delta_target outside (0, 1)");
  if (n1 < 1) throw std::invalid_argument("ErrorBudget: n1 < 1");
}

FidelityReport estimate_fidelity(const StateModel& rho,
                                 MeasurementBackend& backend,
                                 const ErrorBudget& budget,
                                 const TruncationPolicy& truncation,
                                 std::uint64_t seed) {
  budget.validate();
  const int n = num_qubits(rho);
  auto rng = make_rng(seed);
  RelevanceSampler sampler(rho);

  FidelityReport report;
  report.budget = budget;
  report.seed = seed;
  report.samples.reserve(budget.n1);
  const double delta2 = budget.delta_target / 2.0;

  double ratio_sum = 0.0;
  for (long k = 0; k < budget.n1; ++k) {
    RelevanceSample s{};
    bool accepted = false;
    for (int attempt = 0; attempt < 100000 && !accepted; ++attempt) {
      s = sampler.sample(rng);
      accepted = truncation.accepts(s, n);
    }
    if (!accepted)
      throw std::runtime_error(
          "estimate_fidelity: sampler kept rejecting below-cutoff indices");

    const long n2 = shot_budget(s.rho_i, budget.n1, budget.eps2, delta2);
    const auto p = PauliString::from_index(n, s.index);
    const auto shots = backend.measure(p, n2, rng);
    const double ratio = shots.mean() / s.rho_i;
    ratio_sum += ratio;
    report.total_shots += shots.n_shots();
    report.samples.push_back({s, shots, ratio});
  }
  report.estimate = ratio_sum / static_cast<double>(budget.n1);
  return report;
}

double chebyshev_bound(long n1, double eps1) {
  if (n1 < 1 || eps1 <= 0.0)
    throw std::invalid_argument("chebyshev_bound: bad parameters");
  return 1.0 / (static_cast<double>(n1) * eps1 * eps1);
}

double hoeffding_bound(const std::vector<std::pair<double, long>>& samples,
                       double eps2) {
  if (samples.empty() || eps2 <= 0.0)
    throw std::invalid_argument("hoeffding_bound: bad parameters");
  double inv_sum = 0.0;
  for (const auto& [rho_i, n2] : samples) {
    if (rho_i == 0.0 || n2 < 1)
      throw std::invalid_argument("hoeffding_bound: rho_i == 0 or n2 < 1");
    inv_sum += 1.0 / (rho_i * rho_i * static_cast<double>(n2));
  }
  const double n1 = static_cast<double>(samples.size());
  return 2.0 * std::exp(-eps2 * eps2 * n1 * n1 / (2.0 * inv_sum));
}

ErrorBudget plan_budget(const StateModel& rho, double eps, double delta) {
  if (eps <= 0.0 || eps >= 2.0 || delta <= 0.0 || delta >= 1.0)
    throw std::invalid_argument("plan_budget: bad parameters");
  (void)num_qubits(rho);  // validates the model
  ErrorBudget budget;
  budget.eps1 = eps / 2.0;
  budget.eps2 = eps / 2.0;
  budget.delta_target = delta;
  budget.n1 = static_cast<long>(
      std::ceil(2.0 / (delta * budget.eps1 * budget.eps1) - 1e-12));
  budget.validate();
  return budget;
}

}  // namespace certkit
