#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <string_view>

namespace certkit {

// Dense materialization is refused above this qubit count (d = 4096).
inline constexpr int kDenseLimit = 12;

/// Signed n-qubit Pauli operator in symplectic (x, z) encoding.
///
/// Internally the operator is i^e * X^x Z^z with e in Z_4 and per-qubit
/// factors X^{x_j} Z^{z_j}.  The Hermitian letter form  s * W_0 ⊗ ... ⊗ W_{n-1}
/// with W in {I,X,Y,Z} corresponds to e = #Y mod 4 (Y = i X Z), so a string is
/// Hermitian iff its letter-form phase is ±1.
class PauliString {
 public:
  explicit PauliString(int n);  // identity on n qubits

  // Index-encoded basis element (phase +1): bit j of x/z acts on qubit j,
  // index = x | (z << n), index in [0, 4^n).
  static PauliString from_index(int n, std::uint64_t index);
  // Text form "±XIZY..." (sign optional).
  static PauliString from_text(std::string_view text);
  // Single letter on qubit q of an n-qubit register; letter in {I,X,Y,Z}.
  static PauliString single(int n, int q, char letter);

  int num_qubits() const { return n_; }
  std::uint64_t x_bits() const { return x_; }
  std::uint64_t z_bits() const { return z_; }
  std::uint64_t index() const { return x_ | (z_ << n_); }

  bool x_bit(int q) const { return (x_ >> q) & 1u; }
  bool z_bit(int q) const { return (z_ >> q) & 1u; }
  char letter(int q) const;

  // Phase in letter form: i^w with w in Z_4.  Hermitian iff w is even.
  int phase_exponent() const;
  std::complex<double> phase() const;
  bool is_hermitian() const { return phase_exponent() % 2 == 0; }
  // +1 or -1; requires Hermitian.
  int sign() const;
  bool is_identity() const { return x_ == 0 && z_ == 0; }

  int weight() const;  // number of non-identity sites

  bool commutes_with(const PauliString& other) const;
  PauliString operator*(const PauliString& other) const;
  PauliString negated() const;
  // P^T in the computational basis: flips sign for every Y.
  PauliString transposed() const;

  bool operator==(const PauliString& other) const {
    return n_ == other.n_ && x_ == other.x_ && z_ == other.z_ &&
           e_ == other.e_;
  }
  bool same_axes(const PauliString& other) const {
    return n_ == other.n_ && x_ == other.x_ && z_ == other.z_;
  }

  std::string to_text() const;

  // Kronecker-product matrix, qubit 0 leftmost (most significant).
  Eigen::MatrixXcd dense(int dense_limit = kDenseLimit) const;

  // <b|P|b> for a computational basis label b (qubit 0 = most significant
  // bit).  Zero whenever any x bit is set.
  std::complex<double> expectation_on_basis_state(std::uint64_t bits) const;

  // P|b> = amplitude * |b ^ flip_mask()>, both in state-bit convention.
  std::uint64_t flip_mask() const;
  std::complex<double> amplitude_on_basis_state(std::uint64_t bits) const;

 private:
  PauliString(int n, std::uint64_t x, std::uint64_t z, int e);

  int n_;
  std::uint64_t x_;
  std::uint64_t z_;
  int e_;  // operator = i^e_ * X^x Z^z
};

inline constexpr const char* kPauliLetters = "IXYZ";

// 2x2 matrix of a single Pauli letter.
Eigen::Matrix2cd pauli_letter_matrix(char letter);

}  // namespace certkit
