#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "certkit/rng.hpp"

namespace certkit {

struct PhasePoint {
  std::complex<double> alpha;
};

/// Single-mode continuous-variable state.  Coherent, cat (even superposition
/// of |a0> and |-a0>), and the incoherent mixture of the same pair have exact
/// closed-form Wigner functions; arbitrary states go through a Fock-truncated
/// density matrix.
struct CvState {
  enum class Kind { kCoherent, kCat, kMixture, kFock };

  Kind kind = Kind::kCoherent;
  std::complex<double> alpha0;
  Eigen::MatrixXcd fock;  // (M+1)x(M+1) density matrix, Fock path only

  static CvState coherent(std::complex<double> a0);
  static CvState cat(std::complex<double> a0);
  static CvState mixture(std::complex<double> a0);
  static CvState fock_truncated(Eigen::MatrixXcd rho);
  // "coherent:2", "cat:3", "mixture:3" (real amplitude).
  static CvState parse(const std::string& text);

  bool is_pure() const;
  int fock_cutoff() const { return static_cast<int>(fock.rows()) - 1; }
  // Largest |alpha| at which the Fock path is trusted; closed forms are
  // valid everywhere.
  double validity_radius() const;
};

// Displaced-parity Wigner function, convention W(alpha) = 2 <Pi(alpha)>,
// so |W| <= 2 and tr(rho sigma) = (1/pi) integral W_rho W_sigma.
double wigner(const CvState& state, PhasePoint point);

// Wigner transform of the coherent dyad |beta><gamma| (complex in general).
std::complex<double> wigner_coherent_dyad(std::complex<double> beta,
                                          std::complex<double> gamma,
                                          std::complex<double> alpha);

// Rejection sampling from the relevance density p(alpha) = W_rho^2 / pi over
// a centered square of the given half-width, uniform proposal, envelope 4.
PhasePoint sample_relevance_cv(const CvState& state, double box_halfwidth,
                               Rng& rng);

// Default box half-width |alpha0| + 4.
double default_box_halfwidth(const CvState& state);

struct CvSample {
  PhasePoint point;
  double w_rho = 0.0;
  double w_sigma_tilde = 0.0;  // 2 x empirical parity mean
  double ratio = 0.0;
};

struct CvFidelityReport {
  double estimate = 0.0;
  std::vector<CvSample> points;
  long shots_per_point = 0;
  std::uint64_t seed = 0;
};

// Points with |W_rho| below this are redrawn (variance cap); the bias is
// bounded by cv_truncation_error at the same cutoff.
inline constexpr double kCvCutoff = 1e-3;

// Monte Carlo fidelity: mean over sampled points of W~_sigma / W_rho with
// W~_sigma estimated from simulated +-1 parity shots.
CvFidelityReport estimate_fidelity_cv(const CvState& rho, const CvState& sigma,
                                      long n_points, long shots_per_point,
                                      std::uint64_t seed);

// Bias bound pi^-1 sqrt(integral of W_rho^2 over {|W_rho| < cutoff}),
// evaluated by grid quadrature with a convergence check.
double cv_truncation_error(const CvState& rho, double cutoff);

// (1/pi) integral over the default box of f(W_rho(alpha), W_sigma(alpha));
// exposed for oracle integrals in tests and reports.
double wigner_overlap_integral(const CvState& rho, const CvState& sigma,
                               int grid_n = 801);

}  // namespace certkit
