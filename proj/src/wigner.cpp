#include "certkit/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

namespace certkit {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXcd annihilation(int dim) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
  for (int m = 1; m < dim; ++m) a(m - 1, m) = std::sqrt(double(m));
  return a;
}

Eigen::MatrixXcd displacement(int dim, std::complex<double> alpha) {
  const Eigen::MatrixXcd a = annihilation(dim);
  const Eigen::MatrixXcd gen =
      alpha * a.adjoint() - std::conj(alpha) * a;
  return gen.exp();
}

double wigner_fock(const CvState& state, std::complex<double> alpha) {
  if (std::abs(alpha) > state.validity_radius())
    throw std::invalid_argument(
        "wigner: phase-space point outside the Fock cutoff's validity "
        "radius");
  const int dim = static_cast<int>(state.fock.rows());
  const Eigen::MatrixXcd d = displacement(dim, alpha);
  Eigen::VectorXcd parity(dim);
  for (int m = 0; m < dim; ++m) parity(m) = (m % 2) ? -1.0 : 1.0;
  const Eigen::MatrixXcd displaced_parity =
      d * parity.asDiagonal() * d.adjoint();
  return 2.0 * (state.fock * displaced_parity).trace().real();
}

double square(double v) { return v * v; }

}  // namespace

CvState CvState::coherent(std::complex<double> a0) {
  CvState s;
  s.kind = Kind::kCoherent;
  s.alpha0 = a0;
  return s;
}

CvState CvState::cat(std::complex<double> a0) {
  CvState s;
  s.kind = Kind::kCat;
  s.alpha0 = a0;
  return s;
}

CvState CvState::mixture(std::complex<double> a0) {
  CvState s;
  s.kind = Kind::kMixture;
  s.alpha0 = a0;
  return s;
}

CvState CvState::fock_truncated(Eigen::MatrixXcd rho) {
  if (rho.rows() != rho.cols() || rho.rows() < 1)
    throw std::invalid_argument("CvState: Fock matrix must be square");
  if (std::abs(rho.trace().real() - 1.0) > 1e-8 ||
      std::abs(rho.trace().imag()) > 1e-8)
    throw std::invalid_argument("CvState: Fock matrix trace must be 1");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("CvState: Fock matrix must be Hermitian");
  CvState s;
  s.kind = Kind::kFock;
  s.fock = std::move(rho);
  return s;
}

CvState CvState::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("CvState: expected kind:amplitude in " + text);
  const std::string name = text.substr(0, colon);
  const double a0 = std::stod(text.substr(colon + 1));
  if (name == "coherent") return coherent(a0);
  if (name == "cat") return cat(a0);
  if (name == "mixture") return mixture(a0);
  throw std::invalid_argument("CvState: unknown kind " + name);
}

bool CvState::is_pure() const {
  switch (kind) {
    case Kind::kCoherent:
    case Kind::kCat:
      return true;
    case Kind::kMixture:
      return false;
    case Kind::kFock:
      return std::abs((fock * fock).trace().real() - 1.0) < 1e-8;
  }
  return false;
}

double CvState::validity_radius() const {
  if (kind != Kind::kFock) return std::numeric_limits<double>::infinity();
  // Inverse of the sizing rule M = ceil(4 r^2 + 25).
  const double m = static_cast<double>(fock_cutoff());
  return m <= 25.0 ? 0.0 : std::sqrt((m - 25.0) / 4.0);
}

std::complex<double> wigner_coherent_dyad(std::complex<double> beta,
                                          std::complex<double> gamma,
                                          std::complex<double> alpha) {
  const std::complex<double> phase1 =
      (std::conj(alpha) * beta - alpha * std::conj(beta)) / 2.0;
  const std::complex<double> phase2 =
      (alpha * std::conj(gamma) - std::conj(alpha) * gamma) / 2.0;
  const std::complex<double> overlap =
      -std::norm(gamma - alpha) / 2.0 - std::norm(alpha - beta) / 2.0 +
      std::conj(gamma - alpha) * (alpha - beta);
  return 2.0 * std::exp(phase1 + phase2 + overlap);
}

double wigner(const CvState& state, PhasePoint point) {
  const auto a = point.alpha;
  if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
    throw std::invalid_argument("wigner: non-finite phase-space point");
  const auto b = state.alpha0;
  switch (state.kind) {
    case CvState::Kind::kCoherent:
      return wigner_coherent_dyad(b, b, a).real();
    case CvState::Kind::kCat: {
      const double norm = 2.0 * (1.0 + std::exp(-2.0 * std::norm(b)));
      const std::complex<double> sum =
          wigner_coherent_dyad(b, b, a) + wigner_coherent_dyad(-b, -b, a) +
          wigner_coherent_dyad(b, -b, a) + wigner_coherent_dyad(-b, b, a);
      return sum.real() / norm;
    }
    case CvState::Kind::kMixture:
      return (wigner_coherent_dyad(b, b, a).real() +
              wigner_coherent_dyad(-b, -b, a).real()) /
             2.0;
    case CvState::Kind::kFock:
      return wigner_fock(state, a);
  }
  throw std::logic_error("wigner: bad state kind");
}

double default_box_halfwidth(const CvState& state) {
  return std::abs(state.alpha0) + 4.0;
}

PhasePoint sample_relevance_cv(const CvState& state, double box_halfwidth,
                               Rng& rng) {
  if (box_halfwidth <= 0.0)
    throw std::invalid_argument("sample_relevance_cv: bad box");
  std::uniform_real_distribution<double> coord(-box_halfwidth, box_halfwidth);
  std::uniform_real_distribution<double> height(0.0, 4.0);
  for (long attempt = 0; attempt < 10000000; ++attempt) {
    const PhasePoint p{{coord(rng), coord(rng)}};
    const double w = wigner(state, p);
    if (w * w > 4.0 + 1e-9)
      throw std::runtime_error(
          "sample_relevance_cv: envelope violated (W^2 > 4)");
    if (height(rng) < w * w) return p;
  }
  throw std::runtime_error("sample_relevance_cv: acceptance rate too low");
}

CvFidelityReport estimate_fidelity_cv(const CvState& rho, const CvState& sigma,
                                      long n_points, long shots_per_point,
                                      std::uint64_t seed) {
  if (!rho.is_pure())
    throw std::invalid_argument("estimate_fidelity_cv: target must be pure");
  if (n_points < 1 || shots_per_point < 1)
    throw std::invalid_argument("estimate_fidelity_cv: bad sample counts");
  auto rng = make_rng(seed);
  const double box = default_box_halfwidth(rho);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  CvFidelityReport report;
  report.shots_per_point = shots_per_point;
  report.seed = seed;
  report.points.reserve(n_points);
  double sum = 0.0;
  for (long k = 0; k < n_points; ++k) {
    CvSample sample;
    double w_rho = 0.0;
    for (int attempt = 0; attempt < 100000; ++attempt) {
      sample.point = sample_relevance_cv(rho, box, rng);
      w_rho = wigner(rho, sample.point);
      if (std::abs(w_rho) >= kCvCutoff) break;
      w_rho = 0.0;
    }
    if (w_rho == 0.0)
      throw std::runtime_error(
          "estimate_fidelity_cv: could not draw a point above the cutoff");
    sample.w_rho = w_rho;
    const double w_sigma = wigner(sigma, sample.point);
    const double p_plus = std::clamp((2.0 + w_sigma) / 4.0, 0.0, 1.0);
    long plus = 0;
    for (long s = 0; s < shots_per_point; ++s)
      if (unit(rng) < p_plus) ++plus;
    const double parity_mean =
        static_cast<double>(2 * plus - shots_per_point) /
        static_cast<double>(shots_per_point);
    sample.w_sigma_tilde = 2.0 * parity_mean;
    sample.ratio = sample.w_sigma_tilde / sample.w_rho;
    sum += sample.ratio;
    report.points.push_back(sample);
  }
  report.estimate = sum / static_cast<double>(n_points);
  return report;
}

namespace {

// Midpoint-rule integral of f over the centered square of half-width box.
template <typename F>
double grid_integral(double box, int n, F&& f) {
  const double h = 2.0 * box / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -box + (i + 0.5) * h;
    for (int j = 0; j < n; ++j) {
      const double y = -box + (j + 0.5) * h;
      sum += f(std::complex<double>(x, y));
    }
  }
  return sum * h * h;
}

}  // namespace

double cv_truncation_error(const CvState& rho, double cutoff) {
  if (cutoff <= 0.0)
    throw std::invalid_argument("cv_truncation_error: cutoff must be > 0");
  const double box = default_box_halfwidth(rho);
  auto integrand = [&](std::complex<double> a) {
    const double w = wigner(rho, PhasePoint{a});
    return std::abs(w) < cutoff ? w * w : 0.0;
  };
  const double coarse = grid_integral(box, 601, integrand);
  const double fine = grid_integral(box, 901, integrand);
  if (std::abs(fine - coarse) > 1e-4 * std::max(1.0, std::abs(fine)))
    throw std::runtime_error("cv_truncation_error: quadrature did not "
                             "converge");
  return std::sqrt(std::max(0.0, fine)) / kPi;
}

double wigner_overlap_integral(const CvState& rho, const CvState& sigma,
                               int grid_n) {
  const double box =
      std::max(default_box_halfwidth(rho), default_box_halfwidth(sigma));
  return grid_integral(box, grid_n, [&](std::complex<double> a) {
           return wigner(rho, PhasePoint{a}) * wigner(sigma, PhasePoint{a});
         }) /
         kPi;
}

}  // namespace certkit
