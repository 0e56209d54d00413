#include "certkit/pauli.hpp"

#include <bit>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

namespace certkit {

namespace {

const std::complex<double> kI(0.0, 1.0);

std::complex<double> i_pow(int e) {
  switch (((e % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

void check_qubit_count(int n) {
  if (n < 1 || n > 32)
    throw std::invalid_argument("PauliString: qubit count must be in [1, 32]");
}

}  // namespace

PauliString::PauliString(int n) : n_(n), x_(0), z_(0), e_(0) {
  check_qubit_count(n);
}

PauliString::PauliString(int n, std::uint64_t x, std::uint64_t z, int e)
    : n_(n), x_(x), z_(z), e_(((e % 4) + 4) % 4) {}

PauliString PauliString::from_index(int n, std::uint64_t index) {
  check_qubit_count(n);
  if (index >> (2 * n))
    throw std::invalid_argument("PauliString: index out of range");
  const std::uint64_t mask = (n == 64) ? ~0ull : ((1ull << n) - 1);
  const std::uint64_t x = index & mask;
  const std::uint64_t z = (index >> n) & mask;
  // Letter form has phase +1, so e = #Y.
  return PauliString(n, x, z, std::popcount(x & z));
}

PauliString PauliString::single(int n, int q, char letter) {
  check_qubit_count(n);
  if (q < 0 || q >= n) throw std::invalid_argument("PauliString: bad qubit");
  std::uint64_t x = 0, z = 0;
  int e = 0;
  switch (letter) {
    case 'I': break;
    case 'X': x = 1ull << q; break;
    case 'Y': x = 1ull << q; z = 1ull << q; e = 1; break;
    case 'Z': z = 1ull << q; break;
    default: throw std::invalid_argument("PauliString: bad letter");
  }
  return PauliString(n, x, z, e);
}

PauliString PauliString::from_text(std::string_view text) {
  int sign = +1;
  if (!text.empty() && (text.front() == '+' || text.front() == '-')) {
    sign = text.front() == '-' ? -1 : +1;
    text.remove_prefix(1);
  }
  if (text.empty()) throw std::invalid_argument("PauliString: empty text");
  const int n = static_cast<int>(text.size());
  check_qubit_count(n);
  std::uint64_t x = 0, z = 0;
  int e = 0;
  for (int q = 0; q < n; ++q) {
    switch (text[q]) {
      case 'I': break;
      case 'X': x |= 1ull << q; break;
      case 'Y': x |= 1ull << q; z |= 1ull << q; ++e; break;
      case 'Z': z |= 1ull << q; break;
      default: throw std::invalid_argument("PauliString: bad letter in text");
    }
  }
  if (sign < 0) e += 2;
  return PauliString(n, x, z, e);
}

char PauliString::letter(int q) const {
  const int code = (x_bit(q) ? 1 : 0) | (z_bit(q) ? 2 : 0);
  // code: 0=I, 1=X, 3=Y, 2=Z
  static const char table[4] = {'I', 'X', 'Z', 'Y'};
  return table[code];
}

int PauliString::phase_exponent() const {
  return ((e_ - std::popcount(x_ & z_)) % 4 + 4) % 4;
}

std::complex<double> PauliString::phase() const {
  return i_pow(phase_exponent());
}

int PauliString::sign() const {
  const int w = phase_exponent();
  if (w % 2 != 0)
    throw std::logic_error("PauliString::sign: operator is not Hermitian");
  return w == 0 ? +1 : -1;
}

int PauliString::weight() const { return std::popcount(x_ | z_); }

bool PauliString::commutes_with(const PauliString& other) const {
  if (n_ != other.n_)
    throw std::invalid_argument("PauliString: size mismatch");
  const int sp = std::popcount(x_ & other.z_) + std::popcount(z_ & other.x_);
  return sp % 2 == 0;
}

PauliString PauliString::operator*(const PauliString& other) const {
  if (n_ != other.n_)
    throw std::invalid_argument("PauliString: size mismatch");
  // (i^a X^x1 Z^z1)(i^b X^x2 Z^z2): moving Z^z1 past X^x2 costs (-1)^{z1.x2}.
  const int e = e_ + other.e_ + 2 * std::popcount(z_ & other.x_);
  return PauliString(n_, x_ ^ other.x_, z_ ^ other.z_, e);
}

PauliString PauliString::negated() const {
  return PauliString(n_, x_, z_, e_ + 2);
}

PauliString PauliString::transposed() const {
  // (XZ)^T = ZX = -XZ, so each Y flips the sign.
  return PauliString(n_, x_, z_, e_ + 2 * std::popcount(x_ & z_));
}

std::string PauliString::to_text() const {
  const int w = phase_exponent();
  std::string out;
  switch (w) {
    case 0: out = "+"; break;
    case 1: out = "+i"; break;
    case 2: out = "-"; break;
    default: out = "-i"; break;
  }
  for (int q = 0; q < n_; ++q) out.push_back(letter(q));
  return out;
}

Eigen::Matrix2cd pauli_letter_matrix(char letter) {
  Eigen::Matrix2cd m;
  switch (letter) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -kI, kI, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("pauli_letter_matrix: bad letter");
  }
  return m;
}

Eigen::MatrixXcd PauliString::dense(int dense_limit) const {
  if (n_ > dense_limit)
    throw std::invalid_argument("PauliString::dense: dimension limit exceeded");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
  for (int q = 0; q < n_; ++q) {
    m = Eigen::kroneckerProduct(m, pauli_letter_matrix(letter(q))).eval();
  }
  return i_pow(phase_exponent()) * m;
}

std::uint64_t PauliString::flip_mask() const {
  std::uint64_t mask = 0;
  for (int q = 0; q < n_; ++q)
    if (x_bit(q)) mask |= 1ull << (n_ - 1 - q);
  return mask;
}

std::complex<double> PauliString::amplitude_on_basis_state(
    std::uint64_t bits) const {
  // P|b> = i^e (-1)^{z.b} |b ^ flip>, with qubit q at state bit n-1-q.
  int par = 0;
  for (int q = 0; q < n_; ++q)
    if (z_bit(q) && ((bits >> (n_ - 1 - q)) & 1u)) par ^= 1;
  return i_pow(e_ + 2 * par);
}

std::complex<double> PauliString::expectation_on_basis_state(
    std::uint64_t bits) const {
  if (bits >> n_)
    throw std::invalid_argument("PauliString: basis label out of range");
  if (x_ != 0) return {0.0, 0.0};
  return amplitude_on_basis_state(bits);
}

}  // namespace certkit
