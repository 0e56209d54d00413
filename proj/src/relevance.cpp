#include "certkit/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace certkit {

namespace {

constexpr double kConditionalTolerance = 1e-6;

double dim_of(int n) { return static_cast<double>(1ull << n); }

}  // namespace

// ---------------------------------------------------------------------------
// Truncation

double TruncationPolicy::cutoff(int n) const {
  if (epsilon <= 0.0)
    throw std::invalid_argument("TruncationPolicy: epsilon must be positive");
  return std::pow(dim_of(n), -(1.0 + epsilon) / 2.0);
}

bool TruncationPolicy::accepts(const RelevanceSample& sample, int n) const {
  return std::abs(sample.rho_i) >= cutoff(n);
}

double TruncationPolicy::bias_bound(int n) const {
  return std::pow(dim_of(n), 0.5 - (1.0 + epsilon) / 2.0);
}

double TruncationPolicy::rejection_bound(int n) const {
  return std::pow(dim_of(n), -epsilon);
}

// ---------------------------------------------------------------------------
// Stabilizer sampling

RelevanceSample sample_stabilizer(const StabilizerState& state, Rng& rng) {
  std::uniform_int_distribution<std::uint64_t> dist(
      0, (1ull << state.n) - 1);
  const std::uint64_t subset = dist(rng);
  PauliString acc(state.n);
  for (int j = 0; j < state.n; ++j)
    if ((subset >> j) & 1u) acc = acc * state.generators[j];
  RelevanceSample sample;
  sample.index = acc.index();
  sample.rho_i = static_cast<double>(acc.sign());
  sample.weight = 1.0 / dim_of(state.n);
  return sample;
}

// ---------------------------------------------------------------------------
// Dense brute force

DenseRelevanceTable::DenseRelevanceTable(const DensePureState& state,
                                         int dense_limit)
    : n_(state.n) {
  if (state.n > dense_limit)
    throw std::invalid_argument("DenseRelevanceTable: dimension limit exceeded");
  const std::uint64_t count = 1ull << (2 * n_);
  rho_.resize(count);
  for (std::uint64_t i = 0; i < count; ++i)
    rho_[i] = pauli_expectation(state.amplitudes,
                                PauliString::from_index(n_, i));
  finalize(n_);
}

DenseRelevanceTable::DenseRelevanceTable(const DensityMatrix& state,
                                         int dense_limit)
    : n_(state.n) {
  if (state.n > dense_limit)
    throw std::invalid_argument("DenseRelevanceTable: dimension limit exceeded");
  const std::uint64_t count = 1ull << (2 * n_);
  rho_.resize(count);
  for (std::uint64_t i = 0; i < count; ++i)
    rho_[i] = pauli_expectation(state.matrix, PauliString::from_index(n_, i));
  finalize(n_);
}

void DenseRelevanceTable::finalize(int n) {
  const double d = dim_of(n);
  weights_.resize(rho_.size());
  cumulative_.resize(rho_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < rho_.size(); ++i) {
    weights_[i] = rho_[i] * rho_[i] / d;
    acc += weights_[i];
    cumulative_[i] = acc;
  }
  total_ = acc;
  if (total_ <= 0.0)
    throw std::logic_error("DenseRelevanceTable: zero total weight");
}

RelevanceSample DenseRelevanceTable::sample(Rng& rng) const {
  std::uniform_real_distribution<double> dist(0.0, total_);
  const double u = dist(rng);
  const auto it =
      std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  std::size_t idx = static_cast<std::size_t>(
      std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                               static_cast<std::ptrdiff_t>(rho_.size()) - 1));
  // Skip zero-weight cells the search may have landed on.
  while (idx + 1 < rho_.size() && weights_[idx] == 0.0) ++idx;
  RelevanceSample sample;
  sample.index = idx;
  sample.rho_i = rho_[idx];
  sample.weight = weights_[idx];
  return sample;
}

RelevanceSample sample_dense_bruteforce(const DenseRelevanceTable& table,
                                        Rng& rng) {
  return table.sample(rng);
}

// ---------------------------------------------------------------------------
// Conditional sampling, dense partial-trace path
//
// For a prefix q of chosen letters, the unnormalized conditional weight of
// extending with letter p is tr(T'^2) where T' = tr_site[(p ⊗ 1) T] and T is
// the running partial trace of (q ⊗ 1) rho over the fixed sites.  The chain
// rule gives sum_p tr(T'_p^2) = 2 tr(T^2), which is asserted on every step.

namespace {

Eigen::MatrixXcd conditional_step(const Eigen::MatrixXcd& t,
                                  const Eigen::Matrix2cd& p) {
  const Eigen::Index half = t.rows() / 2;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(half, half);
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c)
      if (p(a, c) != std::complex<double>(0.0, 0.0))
        out.noalias() += p(a, c) * t.block(c * half, a * half, half, half);
  return out;
}

struct DenseConditionalState {
  Eigen::MatrixXcd t;

  std::array<double, 4> raw_weights() const {
    std::array<double, 4> w{};
    for (int p = 0; p < 4; ++p) {
      const Eigen::MatrixXcd next =
          conditional_step(t, pauli_letter_matrix(kPauliLetters[p]));
      w[p] = next.squaredNorm();  // tr(T'^2) for Hermitian T'
    }
    return w;
  }

  void advance(int p) {
    t = conditional_step(t, pauli_letter_matrix(kPauliLetters[p]));
  }
};

void check_chain_consistency(const std::array<double, 4>& w, double parent) {
  const double sum = w[0] + w[1] + w[2] + w[3];
  if (parent <= 0.0 ||
      std::abs(sum / (2.0 * parent) - 1.0) > kConditionalTolerance)
    throw std::runtime_error(
        "sample_conditional: conditional weights failed normalization check");
}

std::array<double, 4> normalized(const std::array<double, 4>& w) {
  const double sum = w[0] + w[1] + w[2] + w[3];
  if (sum <= 0.0)
    throw std::runtime_error("conditional_weights: zero-probability prefix");
  std::array<double, 4> out{};
  for (int p = 0; p < 4; ++p) out[p] = std::max(w[p], 0.0) / sum;
  return out;
}

int draw_category(const std::array<double, 4>& probs, Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  const double u = dist(rng);
  double acc = 0.0;
  for (int p = 0; p < 4; ++p) {
    acc += probs[p];
    if (u < acc) return p;
  }
  return 3;
}

// -------------------------------------------------------------------------
// Conditional sampling, MPS doubled-transfer path
//
// The marginal weight is the expectation of a product of two-copy operators:
// (p ⊗ p) on already-chosen sites and the swap Omega on the rest.  The four
// MPS layers (bra/ket of each copy) give environments of size D^4.

using Env = Eigen::VectorXcd;

Eigen::Matrix4cd two_copy_op(int p) {
  const Eigen::Matrix2cd m = pauli_letter_matrix(kPauliLetters[p]);
  Eigen::Matrix4cd out;
  for (int s1p = 0; s1p < 2; ++s1p)
    for (int s2p = 0; s2p < 2; ++s2p)
      for (int s1 = 0; s1 < 2; ++s1)
        for (int s2 = 0; s2 < 2; ++s2)
          out(s1p * 2 + s2p, s1 * 2 + s2) = m(s1p, s1) * m(s2p, s2);
  return out;
}

Eigen::Matrix4cd swap_op() {
  Eigen::Matrix4cd out = Eigen::Matrix4cd::Zero();
  for (int s1p = 0; s1p < 2; ++s1p)
    for (int s2p = 0; s2p < 2; ++s2p)
      out(s1p * 2 + s2p, s2p * 2 + s1p) = 1.0;
  return out;
}

inline Eigen::Index env_index(Eigen::Index d, Eigen::Index a1p,
                              Eigen::Index a1, Eigen::Index a2p,
                              Eigen::Index a2) {
  return ((a1p * d + a1) * d + a2p) * d + a2;
}

// Contract one site into a right environment: returns the environment seen
// from the left of the site.
Env absorb_right(const std::array<Eigen::MatrixXcd, 2>& site,
                 const Eigen::Matrix4cd& op, const Env& right) {
  const Eigen::Index dl = site[0].rows();
  const Eigen::Index dr = site[0].cols();
  Env out = Env::Zero(dl * dl * dl * dl);
  for (int s1p = 0; s1p < 2; ++s1p)
    for (int s2p = 0; s2p < 2; ++s2p)
      for (int s1 = 0; s1 < 2; ++s1)
        for (int s2 = 0; s2 < 2; ++s2) {
          const std::complex<double> c = op(s1p * 2 + s2p, s1 * 2 + s2);
          if (c == std::complex<double>(0.0, 0.0)) continue;
          for (Eigen::Index b1p = 0; b1p < dl; ++b1p)
            for (Eigen::Index b1 = 0; b1 < dl; ++b1)
              for (Eigen::Index b2p = 0; b2p < dl; ++b2p)
                for (Eigen::Index b2 = 0; b2 < dl; ++b2) {
                  std::complex<double> acc(0.0, 0.0);
                  for (Eigen::Index a1p = 0; a1p < dr; ++a1p)
                    for (Eigen::Index a1 = 0; a1 < dr; ++a1)
                      for (Eigen::Index a2p = 0; a2p < dr; ++a2p)
                        for (Eigen::Index a2 = 0; a2 < dr; ++a2)
                          acc += std::conj(site[s1p](b1p, a1p)) *
                                 site[s1](b1, a1) *
                                 std::conj(site[s2p](b2p, a2p)) *
                                 site[s2](b2, a2) *
                                 right(env_index(dr, a1p, a1, a2p, a2));
                  out(env_index(dl, b1p, b1, b2p, b2)) += c * acc;
                }
        }
  return out;
}

// Contract one site into a left environment.
Env absorb_left(const std::array<Eigen::MatrixXcd, 2>& site,
                const Eigen::Matrix4cd& op, const Env& left) {
  const Eigen::Index dl = site[0].rows();
  const Eigen::Index dr = site[0].cols();
  Env out = Env::Zero(dr * dr * dr * dr);
  for (int s1p = 0; s1p < 2; ++s1p)
    for (int s2p = 0; s2p < 2; ++s2p)
      for (int s1 = 0; s1 < 2; ++s1)
        for (int s2 = 0; s2 < 2; ++s2) {
          const std::complex<double> c = op(s1p * 2 + s2p, s1 * 2 + s2);
          if (c == std::complex<double>(0.0, 0.0)) continue;
          for (Eigen::Index a1p = 0; a1p < dr; ++a1p)
            for (Eigen::Index a1 = 0; a1 < dr; ++a1)
              for (Eigen::Index a2p = 0; a2p < dr; ++a2p)
                for (Eigen::Index a2 = 0; a2 < dr; ++a2) {
                  std::complex<double> acc(0.0, 0.0);
                  for (Eigen::Index b1p = 0; b1p < dl; ++b1p)
                    for (Eigen::Index b1 = 0; b1 < dl; ++b1)
                      for (Eigen::Index b2p = 0; b2p < dl; ++b2p)
                        for (Eigen::Index b2 = 0; b2 < dl; ++b2)
                          acc += std::conj(site[s1p](b1p, a1p)) *
                                 site[s1](b1, a1) *
                                 std::conj(site[s2p](b2p, a2p)) *
                                 site[s2](b2, a2) *
                                 left(env_index(dl, b1p, b1, b2p, b2));
                  out(env_index(dr, a1p, a1, a2p, a2)) += c * acc;
                }
        }
  return out;
}

struct MpsConditionalState {
  const MpsState* mps = nullptr;
  std::vector<Env> right;  // right[k] = environment right of site k
  Env left;
  int site = 0;

  explicit MpsConditionalState(const MpsState& state) : mps(&state) {
    const int n = state.n;
    right.resize(n + 1);
    right[n] = Env::Ones(1);
    const Eigen::Matrix4cd omega = swap_op();
    for (int k = n - 1; k >= 0; --k)
      right[k] = absorb_right(state.tensors[k], omega, right[k + 1]);
    left = Env::Ones(1);
  }

  double parent_weight() const {
    // All-Omega contraction through the current site boundary.
    return (left.transpose() * right[site]).value().real();
  }

  std::array<double, 4> raw_weights() const {
    std::array<double, 4> w{};
    for (int p = 0; p < 4; ++p) {
      const Env l =
          absorb_left(mps->tensors[site], two_copy_op(p), left);
      // Two-copy Pauli weights carry a factor 2 relative to Omega = SWAP
      // (sum_p p⊗p = 2 SWAP); fold 1/2 in so weights sum to the parent.
      w[p] = 0.5 * (l.transpose() * right[site + 1]).value().real();
    }
    return w;
  }

  void advance(int p) {
    left = absorb_left(mps->tensors[site], two_copy_op(p), left);
    ++site;
  }
};

std::array<double, 4> scaled_for_check(std::array<double, 4> w) {
  // The dense path checks sum_p w_p == 2 * parent; the MPS raw_weights are
  // already halved, so scale back for the shared consistency check.
  for (auto& v : w) v *= 2.0;
  return w;
}

}  // namespace

std::array<double, 4> conditional_weights(const StateModel& state,
                                          const std::vector<int>& prefix) {
  const int n = num_qubits(state);
  if (static_cast<int>(prefix.size()) >= n)
    throw std::invalid_argument("conditional_weights: prefix too long");
  if (const auto* mps = std::get_if<MpsState>(&state)) {
    MpsConditionalState cond(*mps);
    for (int p : prefix) cond.advance(p);
    return normalized(cond.raw_weights());
  }
  DenseConditionalState cond{to_density(state).matrix};
  for (int p : prefix) cond.advance(p);
  return normalized(cond.raw_weights());
}

RelevanceSample sample_conditional(const StateModel& state, Rng& rng) {
  const int n = num_qubits(state);
  std::vector<int> letters;
  letters.reserve(n);

  if (const auto* mps = std::get_if<MpsState>(&state)) {
    MpsConditionalState cond(*mps);
    for (int k = 0; k < n; ++k) {
      const auto w = cond.raw_weights();
      check_chain_consistency(scaled_for_check(w), cond.parent_weight());
      const int p = draw_category(normalized(w), rng);
      letters.push_back(p);
      cond.advance(p);
    }
  } else {
    DenseConditionalState cond{to_density(state).matrix};
    for (int k = 0; k < n; ++k) {
      const auto w = cond.raw_weights();
      check_chain_consistency(w, cond.t.squaredNorm());
      const int p = draw_category(normalized(w), rng);
      letters.push_back(p);
      cond.advance(p);
    }
  }

  PauliString pauli(n);
  for (int k = 0; k < n; ++k)
    pauli = pauli * PauliString::single(n, k, kPauliLetters[letters[k]]);
  RelevanceSample sample;
  sample.index = pauli.index();
  sample.rho_i = expectation(state, pauli);
  sample.weight = sample.rho_i * sample.rho_i / dim_of(n);
  return sample;
}

// ---------------------------------------------------------------------------
// Dispatch

RelevanceSampler::RelevanceSampler(const StateModel& state, int dense_limit)
    : state_(state), n_(certkit::num_qubits(state)) {
  if (std::holds_alternative<StabilizerState>(state) ||
      std::holds_alternative<MpsState>(state))
    return;
  if (const auto* dm = std::get_if<DensityMatrix>(&state_)) {
    table_ = std::make_shared<DenseRelevanceTable>(*dm, dense_limit);
  } else {
    table_ = std::make_shared<DenseRelevanceTable>(to_dense(state_, dense_limit),
                                                   dense_limit);
  }
}

RelevanceSample RelevanceSampler::sample(Rng& rng) const {
  if (const auto* stab = std::get_if<StabilizerState>(&state_))
    return sample_stabilizer(*stab, rng);
  if (std::holds_alternative<MpsState>(state_))
    return sample_conditional(state_, rng);
  return table_->sample(rng);
}

}  // namespace certkit
