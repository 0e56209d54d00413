#include "certkit/measurement.hpp"

#include <cmath>
#include <stdexcept>

namespace certkit {

namespace {

const std::complex<double> kI(0.0, 1.0);

DensityMatrix single_qubit_channel_each(
    const DensityMatrix& rho,
    const std::vector<Eigen::Matrix2cd>& kraus) {
  // Apply the same single-qubit Kraus channel to every qubit in turn.
  DensityMatrix out = rho;
  const int n = rho.n;
  for (int q = 0; q < n; ++q) {
    Eigen::MatrixXcd next =
        Eigen::MatrixXcd::Zero(out.matrix.rows(), out.matrix.cols());
    for (const auto& k : kraus) {
      // Dense n-qubit embedding of the single-qubit operator on qubit q.
      Eigen::MatrixXcd op = Eigen::MatrixXcd::Identity(1, 1);
      for (int j = 0; j < n; ++j) {
        const Eigen::MatrixXcd factor =
            (j == q) ? Eigen::MatrixXcd(k)
                     : Eigen::MatrixXcd(Eigen::Matrix2cd::Identity());
        Eigen::MatrixXcd kron(op.rows() * 2, op.cols() * 2);
        for (Eigen::Index r = 0; r < op.rows(); ++r)
          for (Eigen::Index c = 0; c < op.cols(); ++c)
            kron.block(r * 2, c * 2, 2, 2) = op(r, c) * factor;
        op = std::move(kron);
      }
      next.noalias() += op * out.matrix * op.adjoint();
    }
    out.matrix = std::move(next);
  }
  return out;
}

}  // namespace

NoiseSpec NoiseSpec::parse(const std::string& text) {
  NoiseSpec spec;
  if (text == "none" || text.empty()) return spec;
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  if (colon == std::string::npos)
    throw std::invalid_argument("NoiseSpec: missing parameter in " + text);
  spec.param = std::stod(text.substr(colon + 1));
  if (name == "depolarizing") {
    spec.kind = Kind::kGlobalDepolarizing;
  } else if (name == "local-depolarizing") {
    spec.kind = Kind::kLocalDepolarizing;
  } else if (name == "dephasing") {
    spec.kind = Kind::kDephasing;
  } else if (name == "overrotation") {
    spec.kind = Kind::kCoherentOverrotation;
  } else {
    throw std::invalid_argument("NoiseSpec: unknown channel " + name);
  }
  spec.validate();
  return spec;
}

std::string NoiseSpec::to_text() const {
  switch (kind) {
    case Kind::kNone: return "none";
    case Kind::kGlobalDepolarizing:
      return "depolarizing:" + std::to_string(param);
    case Kind::kLocalDepolarizing:
      return "local-depolarizing:" + std::to_string(param);
    case Kind::kDephasing: return "dephasing:" + std::to_string(param);
    case Kind::kCoherentOverrotation:
      return "overrotation:" + std::to_string(param);
  }
  return "none";
}

void NoiseSpec::validate() const {
  if (kind == Kind::kNone || kind == Kind::kCoherentOverrotation) return;
  if (param < 0.0 || param > 1.0)
    throw std::invalid_argument("NoiseSpec: probability outside [0, 1]");
}

DensityMatrix apply_noise(const DensityMatrix& rho, const NoiseSpec& noise) {
  noise.validate();
  const double p = noise.param;
  const double d = static_cast<double>(1ll << rho.n);
  DensityMatrix out = rho;
  switch (noise.kind) {
    case NoiseSpec::Kind::kNone:
      break;
    case NoiseSpec::Kind::kGlobalDepolarizing:
      out.matrix = (1.0 - p) * rho.matrix +
                   (p / d) * Eigen::MatrixXcd::Identity(rho.matrix.rows(),
                                                        rho.matrix.cols());
      break;
    case NoiseSpec::Kind::kLocalDepolarizing: {
      const double s = std::sqrt(p / 3.0);
      std::vector<Eigen::Matrix2cd> kraus = {
          std::sqrt(1.0 - p) * Eigen::Matrix2cd::Identity(),
          s * pauli_letter_matrix('X'), s * pauli_letter_matrix('Y'),
          s * pauli_letter_matrix('Z')};
      out = single_qubit_channel_each(rho, kraus);
      break;
    }
    case NoiseSpec::Kind::kDephasing: {
      std::vector<Eigen::Matrix2cd> kraus = {
          std::sqrt(1.0 - p) * Eigen::Matrix2cd::Identity(),
          std::sqrt(p) * pauli_letter_matrix('Z')};
      out = single_qubit_channel_each(rho, kraus);
      break;
    }
    case NoiseSpec::Kind::kCoherentOverrotation: {
      Eigen::Matrix2cd u;
      const double half = noise.param / 2.0;
      u << std::exp(-kI * half), 0, 0, std::exp(kI * half);
      out = single_qubit_channel_each(rho, {u});
      break;
    }
  }
  return out;
}

DensityMatrix prepare_sigma(const StateModel& rho, const NoiseSpec& noise,
                            int dense_limit) {
  return apply_noise(to_density(rho, dense_limit), noise);
}

int sample_pm_outcome(double expectation_value, Rng& rng) {
  if (expectation_value > 1.0 + 1e-9 || expectation_value < -1.0 - 1e-9)
    throw std::invalid_argument("sample_pm_outcome: expectation outside [-1,1]");
  const double p_plus =
      std::clamp((1.0 + expectation_value) / 2.0, 0.0, 1.0);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return dist(rng) < p_plus ? +1 : -1;
}

ShotRecord measure_pauli(const DensityMatrix& sigma, const PauliString& p,
                         long n_shots, Rng& rng) {
  if (!p.is_hermitian())
    throw std::invalid_argument("measure_pauli: observable not Hermitian");
  if (n_shots < 1)
    throw std::invalid_argument("measure_pauli: need at least one shot");
  const double value = expectation(sigma, p);
  ShotRecord record{p, 0, 0};
  for (long m = 0; m < n_shots; ++m) {
    if (sample_pm_outcome(value, rng) > 0)
      ++record.plus_count;
    else
      ++record.minus_count;
  }
  return record;
}

long shot_budget(double rho_i, long n1, double eps2, double delta2) {
  if (rho_i == 0.0) throw std::invalid_argument("shot_budget: rho_i == 0");
  if (n1 < 1 || eps2 <= 0.0 || delta2 <= 0.0 || delta2 >= 1.0)
    throw std::invalid_argument("shot_budget: bad parameters");
  const double raw = 2.0 * std::log(2.0 / delta2) /
                     (static_cast<double>(n1) * eps2 * eps2 * rho_i * rho_i);
  if (raw > 1e12) throw std::overflow_error("shot_budget: budget overflow");
  return std::max<long>(1, static_cast<long>(std::ceil(raw - 1e-12)));
}

}  // namespace certkit
