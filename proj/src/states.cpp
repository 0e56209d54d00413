#include "certkit/states.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace certkit {

namespace {

const std::complex<double> kI(0.0, 1.0);

// Combined (x, z) axes as a 2n-bit key, used for GF(2) elimination.
std::uint64_t axes_key(const PauliString& p) {
  return p.x_bits() | (p.z_bits() << p.num_qubits());
}

}  // namespace

int num_qubits(const StateModel& state) {
  return std::visit([](const auto& s) { return s.n; }, state);
}

// ---------------------------------------------------------------------------
// Stabilizer states

void validate(const StabilizerState& state) {
  if (state.n < 1) throw std::invalid_argument("StabilizerState: n < 1");
  if (static_cast<int>(state.generators.size()) != state.n)
    throw std::invalid_argument("StabilizerState: need n generators");
  for (const auto& g : state.generators) {
    if (g.num_qubits() != state.n)
      throw std::invalid_argument("StabilizerState: generator size mismatch");
    if (!g.is_hermitian() || g.is_identity())
      throw std::invalid_argument("StabilizerState: bad generator");
  }
  for (std::size_t i = 0; i < state.generators.size(); ++i)
    for (std::size_t j = i + 1; j < state.generators.size(); ++j)
      if (!state.generators[i].commutes_with(state.generators[j]))
        throw std::invalid_argument("StabilizerState: generators anticommute");
  // Independence: symplectic rank must be n.
  std::vector<std::uint64_t> rows;
  for (const auto& g : state.generators) rows.push_back(axes_key(g));
  int rank = 0;
  for (int bit = 0; bit < 2 * state.n; ++bit) {
    int pivot = -1;
    for (std::size_t r = rank; r < rows.size(); ++r)
      if ((rows[r] >> bit) & 1u) { pivot = static_cast<int>(r); break; }
    if (pivot < 0) continue;
    std::swap(rows[rank], rows[pivot]);
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (static_cast<int>(r) != rank && ((rows[r] >> bit) & 1u))
        rows[r] ^= rows[rank];
    ++rank;
  }
  if (rank != state.n)
    throw std::invalid_argument("StabilizerState: generators not independent");
}

double expectation(const StabilizerState& state, const PauliString& p) {
  if (p.num_qubits() != state.n)
    throw std::invalid_argument("expectation: size mismatch");
  if (!p.is_hermitian())
    throw std::invalid_argument("expectation: observable not Hermitian");
  if (p.is_identity()) return 1.0;
  // Row-reduce p against the generators, accumulating the matching group
  // element; membership gives +-1 from the phase ratio, else 0.
  std::vector<PauliString> rows = state.generators;
  std::vector<bool> used(rows.size(), false);
  std::uint64_t target = axes_key(p);
  PauliString acc(state.n);
  for (int bit = 0; bit < 2 * state.n; ++bit) {
    int pivot = -1;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!used[r] && ((axes_key(rows[r]) >> bit) & 1u)) {
        pivot = static_cast<int>(r);
        break;
      }
    }
    if (pivot < 0) continue;
    used[pivot] = true;
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (static_cast<int>(r) != pivot && !used[r] &&
          ((axes_key(rows[r]) >> bit) & 1u))
        rows[r] = rows[r] * rows[pivot];
    if ((target >> bit) & 1u) {
      acc = acc * rows[pivot];
      target ^= axes_key(rows[pivot]);
    }
  }
  if (target != 0) return 0.0;
  // p = c * acc with c = +-1; acc stabilizes the state with eigenvalue +1.
  const int w = ((p.phase_exponent() - acc.phase_exponent()) % 4 + 4) % 4;
  return w == 0 ? 1.0 : -1.0;
}

StabilizerState make_ghz(int n) {
  if (n < 1) throw std::invalid_argument("make_ghz: n < 1");
  StabilizerState state;
  state.n = n;
  std::string xs(n, 'X');
  state.generators.push_back(PauliString::from_text(xs));
  for (int j = 0; j + 1 < n; ++j) {
    state.generators.push_back(PauliString::single(n, j, 'Z') *
                               PauliString::single(n, j + 1, 'Z'));
  }
  if (n == 1) state.generators = {PauliString::single(1, 0, 'X')};
  validate(state);
  return state;
}

StabilizerState make_cluster_1d(int n, bool periodic) {
  if (n < 1) throw std::invalid_argument("make_cluster_1d: n < 1");
  StabilizerState state;
  state.n = n;
  for (int j = 0; j < n; ++j) {
    PauliString g = PauliString::single(n, j, 'X');
    const int left = j - 1, right = j + 1;
    if (left >= 0)
      g = g * PauliString::single(n, left, 'Z');
    else if (periodic && n > 1)
      g = g * PauliString::single(n, n - 1, 'Z');
    if (right < n)
      g = g * PauliString::single(n, right, 'Z');
    else if (periodic && n > 1)
      g = g * PauliString::single(n, 0, 'Z');
    state.generators.push_back(g);
  }
  validate(state);
  return state;
}

// ---------------------------------------------------------------------------
// Matrix product states

std::complex<double> mps_product_expectation(
    const MpsState& state, const std::vector<Eigen::Matrix2cd>& ops) {
  if (static_cast<int>(ops.size()) != state.n)
    throw std::invalid_argument("mps_product_expectation: size mismatch");
  Eigen::MatrixXcd env = Eigen::MatrixXcd::Ones(1, 1);
  for (int k = 0; k < state.n; ++k) {
    const auto& site = state.tensors[k];
    Eigen::MatrixXcd next =
        Eigen::MatrixXcd::Zero(site[0].cols(), site[0].cols());
    for (int sb = 0; sb < 2; ++sb) {      // bra physical value
      for (int sk = 0; sk < 2; ++sk) {    // ket physical value
        const std::complex<double> c = ops[k](sb, sk);
        if (c == std::complex<double>(0.0, 0.0)) continue;
        next.noalias() += c * (site[sb].adjoint() * env * site[sk]);
      }
    }
    env = std::move(next);
  }
  return env(0, 0);
}

double expectation(const MpsState& state, const PauliString& p) {
  if (p.num_qubits() != state.n)
    throw std::invalid_argument("expectation: size mismatch");
  if (!p.is_hermitian())
    throw std::invalid_argument("expectation: observable not Hermitian");
  std::vector<Eigen::Matrix2cd> ops;
  ops.reserve(state.n);
  for (int q = 0; q < state.n; ++q)
    ops.push_back(pauli_letter_matrix(p.letter(q)));
  std::complex<double> val = mps_product_expectation(state, ops);
  val *= static_cast<double>(p.sign());
  if (!state.normalized) {
    std::vector<Eigen::Matrix2cd> id(state.n, Eigen::Matrix2cd::Identity());
    val /= mps_product_expectation(state, id).real();
  }
  return val.real();
}

void normalize(MpsState& state) {
  std::vector<Eigen::Matrix2cd> id(state.n, Eigen::Matrix2cd::Identity());
  const double norm2 = mps_product_expectation(state, id).real();
  if (norm2 <= 0.0) throw std::invalid_argument("normalize: null MPS");
  const double s = 1.0 / std::sqrt(norm2);
  state.tensors[0][0] *= s;
  state.tensors[0][1] *= s;
  state.normalized = true;
}

namespace {

MpsState chain_automaton_mps(int n, const Eigen::Matrix2cd& a0,
                             const Eigen::Matrix2cd& a1,
                             const Eigen::RowVector2cd& left,
                             const Eigen::Vector2cd& right) {
  MpsState state;
  state.n = n;
  state.tensors.resize(n);
  for (int k = 0; k < n; ++k) {
    Eigen::MatrixXcd m0 = a0, m1 = a1;
    if (k == 0) { m0 = (left * m0).eval(); m1 = (left * m1).eval(); }
    if (k == n - 1) { m0 = (m0 * right).eval(); m1 = (m1 * right).eval(); }
    state.tensors[k] = {m0, m1};
  }
  normalize(state);
  return state;
}

}  // namespace

MpsState make_w(int n) {
  if (n < 1) throw std::invalid_argument("make_w: n < 1");
  // Two-state automaton: excitation not yet placed / placed.
  Eigen::Matrix2cd a0 = Eigen::Matrix2cd::Identity();
  Eigen::Matrix2cd a1;
  a1 << 0, 1, 0, 0;
  return chain_automaton_mps(n, a0, a1, {1, 0}, {0, 1});
}

MpsState make_t(int n) {
  if (n < 1) throw std::invalid_argument("make_t: n < 1");
  // Domain-wall automaton: ones, then zeros.
  Eigen::Matrix2cd a0, a1;
  a0 << 0, 1, 0, 1;
  a1 << 1, 0, 0, 0;
  return chain_automaton_mps(n, a0, a1, {1, 0}, {1, 1});
}

// ---------------------------------------------------------------------------
// Product states

Eigen::Vector2cd single_qubit_state(const std::string& label) {
  const double r = 1.0 / std::numbers::sqrt2;
  if (label == "0") return {1.0, 0.0};
  if (label == "1") return {0.0, 1.0};
  if (label == "+") return {r, r};
  if (label == "-") return {r, -r};
  if (label == "+i") return {r, r * kI};
  if (label == "-i") return {r, -r * kI};
  throw std::invalid_argument("single_qubit_state: unknown label " + label);
}

ProductState make_product(const std::vector<std::string>& labels) {
  if (labels.empty()) throw std::invalid_argument("make_product: empty");
  ProductState state;
  state.n = static_cast<int>(labels.size());
  for (const auto& l : labels) state.factors.push_back(single_qubit_state(l));
  return state;
}

double expectation(const ProductState& state, const PauliString& p) {
  if (p.num_qubits() != state.n)
    throw std::invalid_argument("expectation: size mismatch");
  if (!p.is_hermitian())
    throw std::invalid_argument("expectation: observable not Hermitian");
  std::complex<double> val = static_cast<double>(p.sign());
  for (int q = 0; q < state.n; ++q) {
    const Eigen::Vector2cd& v = state.factors[q];
    val *= (v.adjoint() * pauli_letter_matrix(p.letter(q)) * v)(0, 0);
  }
  return val.real();
}

// ---------------------------------------------------------------------------
// Dense representations

double pauli_expectation(const Eigen::VectorXcd& psi, const PauliString& p) {
  const std::uint64_t mask = p.flip_mask();
  std::complex<double> acc(0.0, 0.0);
  const std::uint64_t dim = psi.size();
  for (std::uint64_t b = 0; b < dim; ++b)
    acc += std::conj(psi(b ^ mask)) * p.amplitude_on_basis_state(b) * psi(b);
  return acc.real();
}

double pauli_expectation(const Eigen::MatrixXcd& rho, const PauliString& p) {
  const std::uint64_t mask = p.flip_mask();
  std::complex<double> acc(0.0, 0.0);
  const std::uint64_t dim = rho.rows();
  for (std::uint64_t b = 0; b < dim; ++b)
    acc += p.amplitude_on_basis_state(b ^ mask) * rho(b ^ mask, b);
  return acc.real();
}

double expectation(const DensePureState& state, const PauliString& p) {
  if (p.num_qubits() != state.n)
    throw std::invalid_argument("expectation: size mismatch");
  if (!p.is_hermitian())
    throw std::invalid_argument("expectation: observable not Hermitian");
  return pauli_expectation(state.amplitudes, p);
}

double expectation(const DensityMatrix& state, const PauliString& p) {
  if (p.num_qubits() != state.n)
    throw std::invalid_argument("expectation: size mismatch");
  if (!p.is_hermitian())
    throw std::invalid_argument("expectation: observable not Hermitian");
  return pauli_expectation(state.matrix, p);
}

double expectation(const StateModel& state, const PauliString& p) {
  return std::visit([&](const auto& s) { return expectation(s, p); }, state);
}

namespace {

void check_dense_limit(int n, int dense_limit) {
  if (n > dense_limit)
    throw std::invalid_argument("to_dense: dimension limit exceeded");
}

}  // namespace

DensePureState to_dense(const StabilizerState& state, int dense_limit) {
  check_dense_limit(state.n, dense_limit);
  const std::uint64_t dim = 1ull << state.n;
  Eigen::MatrixXcd proj = Eigen::MatrixXcd::Identity(dim, dim);
  for (const auto& g : state.generators)
    proj = 0.5 * (proj + g.dense(dense_limit) * proj);
  // Any nonzero column of the rank-1 projector is the state.
  int best = 0;
  double best_norm = 0.0;
  for (std::uint64_t c = 0; c < dim; ++c) {
    const double nrm = proj.col(c).norm();
    if (nrm > best_norm) { best_norm = nrm; best = static_cast<int>(c); }
  }
  if (best_norm < 1e-12)
    throw std::logic_error("to_dense: stabilizer projector vanished");
  DensePureState out;
  out.n = state.n;
  out.amplitudes = proj.col(best) / best_norm;
  // Fix global phase: largest amplitude made real positive.
  int imax = 0;
  out.amplitudes.cwiseAbs().maxCoeff(&imax);
  out.amplitudes *= std::abs(out.amplitudes(imax)) / out.amplitudes(imax);
  return out;
}

DensePureState to_dense(const MpsState& state, int dense_limit) {
  check_dense_limit(state.n, dense_limit);
  const std::uint64_t dim = 1ull << state.n;
  DensePureState out;
  out.n = state.n;
  out.amplitudes.resize(dim);
  for (std::uint64_t b = 0; b < dim; ++b) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Ones(1, 1);
    for (int k = 0; k < state.n; ++k) {
      const int s = (b >> (state.n - 1 - k)) & 1u;
      m = (m * state.tensors[k][s]).eval();
    }
    out.amplitudes(b) = m(0, 0);
  }
  if (!state.normalized) out.amplitudes.normalize();
  return out;
}

DensePureState to_dense(const ProductState& state, int dense_limit) {
  check_dense_limit(state.n, dense_limit);
  DensePureState out;
  out.n = state.n;
  out.amplitudes = Eigen::VectorXcd::Ones(1);
  for (int q = 0; q < state.n; ++q) {
    Eigen::VectorXcd next(out.amplitudes.size() * 2);
    for (Eigen::Index i = 0; i < out.amplitudes.size(); ++i) {
      next(2 * i) = out.amplitudes(i) * state.factors[q](0);
      next(2 * i + 1) = out.amplitudes(i) * state.factors[q](1);
    }
    out.amplitudes = std::move(next);
  }
  return out;
}

DensePureState to_dense(const StateModel& state, int dense_limit) {
  return std::visit(
      [&](const auto& s) -> DensePureState {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DensePureState>) {
          check_dense_limit(s.n, dense_limit);
          return s;
        } else if constexpr (std::is_same_v<T, DensityMatrix>) {
          throw std::invalid_argument(
              "to_dense: density matrix is not a pure-state representation");
        } else {
          return to_dense(s, dense_limit);
        }
      },
      state);
}

DensityMatrix to_density(const StateModel& state, int dense_limit) {
  if (const auto* dm = std::get_if<DensityMatrix>(&state)) {
    check_dense_limit(dm->n, dense_limit);
    return *dm;
  }
  const DensePureState psi = to_dense(state, dense_limit);
  DensityMatrix out;
  out.n = psi.n;
  out.matrix = psi.amplitudes * psi.amplitudes.adjoint();
  return out;
}

void validate(const DensityMatrix& rho) {
  if (rho.matrix.rows() != rho.matrix.cols() ||
      rho.matrix.rows() != (1ll << rho.n))
    throw std::invalid_argument("DensityMatrix: bad dimensions");
  if ((rho.matrix - rho.matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("DensityMatrix: not Hermitian");
  if (std::abs(rho.matrix.trace().real() - 1.0) > 1e-10 ||
      std::abs(rho.matrix.trace().imag()) > 1e-10)
    throw std::invalid_argument("DensityMatrix: trace != 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.matrix,
                                                     Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-9)
    throw std::invalid_argument("DensityMatrix: negative eigenvalue");
}

}  // namespace certkit
