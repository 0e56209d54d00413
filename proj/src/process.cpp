#include "certkit/process.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace certkit {

namespace {

const std::complex<double> kI(0.0, 1.0);

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

// Embed a single-qubit operator on qubit q (qubit 0 = most significant).
Eigen::MatrixXcd embed_1q(int n, int q, const Eigen::Matrix2cd& op) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (int j = 0; j < n; ++j)
    out = kron(out, j == q ? Eigen::MatrixXcd(op)
                           : Eigen::MatrixXcd(Eigen::Matrix2cd::Identity()));
  return out;
}

Eigen::MatrixXcd cnot_matrix(int n, int control, int target) {
  const std::int64_t d = 1ll << n;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  const std::uint64_t c_mask = 1ull << (n - 1 - control);
  const std::uint64_t t_mask = 1ull << (n - 1 - target);
  for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(d); ++b) {
    const std::uint64_t out_b = (b & c_mask) ? (b ^ t_mask) : b;
    out(out_b, b) = 1.0;
  }
  return out;
}

// Per-qubit Kraus sets for local noise channels.
std::vector<Eigen::Matrix2cd> local_kraus(const NoiseSpec& noise) {
  const double p = noise.param;
  switch (noise.kind) {
    case NoiseSpec::Kind::kLocalDepolarizing: {
      const double s = std::sqrt(p / 3.0);
      return {std::sqrt(1.0 - p) * Eigen::Matrix2cd::Identity(),
              s * pauli_letter_matrix('X'), s * pauli_letter_matrix('Y'),
              s * pauli_letter_matrix('Z')};
    }
    case NoiseSpec::Kind::kDephasing:
      return {std::sqrt(1.0 - p) * Eigen::Matrix2cd::Identity(),
              std::sqrt(p) * pauli_letter_matrix('Z')};
    case NoiseSpec::Kind::kCoherentOverrotation: {
      Eigen::Matrix2cd u;
      u << std::exp(-kI * (p / 2.0)), 0, 0, std::exp(kI * (p / 2.0));
      return {u};
    }
    default:
      throw std::logic_error("local_kraus: not a local channel");
  }
}

// n-qubit Kraus set of the noise channel.
std::vector<Eigen::MatrixXcd> noise_kraus(int n, const NoiseSpec& noise) {
  const std::int64_t d = 1ll << n;
  switch (noise.kind) {
    case NoiseSpec::Kind::kNone:
      return {Eigen::MatrixXcd::Identity(d, d)};
    case NoiseSpec::Kind::kGlobalDepolarizing: {
      // (1-p) rho + (p/d^2) sum_P P rho P^t over all d^2 Paulis.
      const double p = noise.param;
      std::vector<Eigen::MatrixXcd> ops;
      ops.push_back(std::sqrt(1.0 - p + p / double(d * d)) *
                    Eigen::MatrixXcd::Identity(d, d));
      for (std::uint64_t i = 1; i < static_cast<std::uint64_t>(d) * d; ++i)
        ops.push_back((std::sqrt(p) / double(d)) *
                      PauliString::from_index(n, i).dense());
      return ops;
    }
    default: {
      const auto single = local_kraus(noise);
      std::vector<Eigen::MatrixXcd> ops = {Eigen::MatrixXcd::Identity(1, 1)};
      for (int q = 0; q < n; ++q) {
        std::vector<Eigen::MatrixXcd> next;
        for (const auto& base : ops)
          for (const auto& k : single)
            next.push_back(kron(base, Eigen::MatrixXcd(k)));
        ops = std::move(next);
      }
      return ops;
    }
  }
}

// Single-qubit eigenvector of a Pauli letter; `upper` selects the -1
// eigenvector (or |1> for I, which has eigenvalue +1 either way).
Eigen::Vector2cd letter_eigenvector(char letter, bool upper) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (letter) {
    case 'I':
    case 'Z':
      return upper ? Eigen::Vector2cd(0.0, 1.0) : Eigen::Vector2cd(1.0, 0.0);
    case 'X':
      return upper ? Eigen::Vector2cd(r, -r) : Eigen::Vector2cd(r, r);
    case 'Y':
      return upper ? Eigen::Vector2cd(r, -r * kI)
                   : Eigen::Vector2cd(r, r * kI);
  }
  throw std::logic_error("letter_eigenvector: bad letter");
}

}  // namespace

CliffordCircuit CliffordCircuit::parse(int n, const std::string& text) {
  CliffordCircuit circuit;
  circuit.n = n;
  if (text.empty() || text == "identity" || text == "id") return circuit;
  if (text == "h") return parse(n, "h0");
  if (text == "s") return parse(n, "s0");
  if (text == "cnot") return parse(n, "cnot0,1");
  std::stringstream stream(text);
  std::string tok;
  while (std::getline(stream, tok, ';')) {
    if (tok.empty()) continue;
    CliffordGate gate;
    if (tok.rfind("cnot", 0) == 0) {
      gate.kind = CliffordGate::Kind::kCnot;
      const auto comma = tok.find(',');
      if (comma == std::string::npos)
        throw std::invalid_argument("CliffordCircuit: cnot needs two qubits");
      gate.a = std::stoi(tok.substr(4, comma - 4));
      gate.b = std::stoi(tok.substr(comma + 1));
      if (gate.a == gate.b)
        throw std::invalid_argument("CliffordCircuit: cnot control == target");
    } else if (tok[0] == 'h') {
      gate.kind = CliffordGate::Kind::kH;
      gate.a = std::stoi(tok.substr(1));
    } else if (tok[0] == 's') {
      gate.kind = CliffordGate::Kind::kS;
      gate.a = std::stoi(tok.substr(1));
    } else {
      throw std::invalid_argument("CliffordCircuit: unknown gate " + tok);
    }
    if (gate.a < 0 || gate.a >= n || gate.b < 0 || gate.b >= n)
      throw std::invalid_argument("CliffordCircuit: qubit out of range");
    circuit.gates.push_back(gate);
  }
  return circuit;
}

Eigen::MatrixXcd CliffordCircuit::unitary() const {
  const std::int64_t d = 1ll << n;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(d, d);
  Eigen::Matrix2cd h;
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  Eigen::Matrix2cd s;
  s << 1, 0, 0, kI;
  for (const auto& gate : gates) {
    switch (gate.kind) {
      case CliffordGate::Kind::kH:
        u = embed_1q(n, gate.a, h) * u;
        break;
      case CliffordGate::Kind::kS:
        u = embed_1q(n, gate.a, s) * u;
        break;
      case CliffordGate::Kind::kCnot:
        u = cnot_matrix(n, gate.a, gate.b) * u;
        break;
    }
  }
  return u;
}

PauliString conjugate_through(const CliffordCircuit& circuit,
                              const PauliString& p) {
  if (!p.is_hermitian())
    throw std::invalid_argument("conjugate_through: non-Hermitian input");
  if (p.num_qubits() != circuit.n)
    throw std::invalid_argument("conjugate_through: qubit count mismatch");
  std::uint64_t x = p.x_bits();
  std::uint64_t z = p.z_bits();
  bool minus = p.sign() < 0;
  for (const auto& gate : circuit.gates) {
    const std::uint64_t ma = 1ull << gate.a;
    const std::uint64_t mb = 1ull << gate.b;
    switch (gate.kind) {
      case CliffordGate::Kind::kH: {
        if ((x & ma) && (z & ma)) minus = !minus;
        const bool xa = x & ma;
        const bool za = z & ma;
        if (xa != za) {
          x ^= ma;
          z ^= ma;
        }
        break;
      }
      case CliffordGate::Kind::kS:
        if ((x & ma) && (z & ma)) minus = !minus;
        if (x & ma) z ^= ma;
        break;
      case CliffordGate::Kind::kCnot: {
        const bool xc = x & ma, zc = z & ma;
        const bool xt = x & mb, zt = z & mb;
        if (xc && zt && (xt == zc)) minus = !minus;
        if (xc) x ^= mb;
        if (zt) z ^= ma;
        break;
      }
    }
  }
  std::string text(minus ? "-" : "+");
  for (int q = 0; q < circuit.n; ++q) {
    const int code = ((x >> q) & 1u) | (((z >> q) & 1u) << 1);
    text += "IXZY"[code];
  }
  return PauliString::from_text(text);
}

ChannelModel ChannelModel::from_unitary(int n, Eigen::MatrixXcd u) {
  ChannelModel channel;
  channel.n = n;
  channel.kind = Kind::kUnitary;
  channel.unitary = std::move(u);
  channel.validate();
  return channel;
}

ChannelModel ChannelModel::from_kraus(int n,
                                      std::vector<Eigen::MatrixXcd> ops) {
  ChannelModel channel;
  channel.n = n;
  channel.kind = Kind::kKraus;
  channel.kraus = std::move(ops);
  channel.validate();
  return channel;
}

ChannelModel ChannelModel::from_clifford(CliffordCircuit circuit) {
  ChannelModel channel;
  channel.n = circuit.n;
  channel.kind = Kind::kClifford;
  channel.clifford = std::move(circuit);
  channel.validate();
  return channel;
}

ChannelModel ChannelModel::with_noise(const NoiseSpec& noise) const {
  if (noise.kind == NoiseSpec::Kind::kNone) return *this;
  std::vector<Eigen::MatrixXcd> base;
  switch (kind) {
    case Kind::kUnitary:
      base = {unitary};
      break;
    case Kind::kClifford:
      base = {clifford.unitary()};
      break;
    case Kind::kKraus:
      base = kraus;
      break;
  }
  std::vector<Eigen::MatrixXcd> composed;
  for (const auto& noisy : noise_kraus(n, noise))
    for (const auto& k : base) composed.push_back(noisy * k);
  return from_kraus(n, std::move(composed));
}

void ChannelModel::validate() const {
  if (n < 1 || n > kDenseLimit)
    throw std::invalid_argument("ChannelModel: bad qubit count");
  const std::int64_t d = 1ll << n;
  switch (kind) {
    case Kind::kUnitary: {
      if (unitary.rows() != d || unitary.cols() != d)
        throw std::invalid_argument("ChannelModel: unitary has wrong shape");
      const double err = (unitary.adjoint() * unitary -
                          Eigen::MatrixXcd::Identity(d, d))
                             .cwiseAbs()
                             .maxCoeff();
      if (err > 1e-9)
        throw std::invalid_argument("ChannelModel: matrix is not unitary");
      break;
    }
    case Kind::kKraus: {
      if (kraus.empty())
        throw std::invalid_argument("ChannelModel: empty Kraus set");
      Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(d, d);
      for (const auto& k : kraus) {
        if (k.rows() != d || k.cols() != d)
          throw std::invalid_argument("ChannelModel: Kraus op wrong shape");
        sum.noalias() += k.adjoint() * k;
      }
      if ((sum - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() >
          1e-9)
        throw std::invalid_argument("ChannelModel: Kraus set not trace "
                                    "preserving");
      break;
    }
    case Kind::kClifford:
      for (const auto& g : clifford.gates)
        if (g.a < 0 || g.a >= n || g.b < 0 || g.b >= n)
          throw std::invalid_argument("ChannelModel: gate qubit out of range");
      break;
  }
}

Eigen::MatrixXcd ChannelModel::apply(const Eigen::MatrixXcd& rho) const {
  switch (kind) {
    case Kind::kUnitary:
      return unitary * rho * unitary.adjoint();
    case Kind::kClifford: {
      const auto u = clifford.unitary();
      return u * rho * u.adjoint();
    }
    case Kind::kKraus: {
      Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
      for (const auto& k : kraus) out.noalias() += k * rho * k.adjoint();
      return out;
    }
  }
  throw std::logic_error("ChannelModel: bad kind");
}

void validate(const ChoiState& choi) {
  validate(choi.state);
  const std::int64_t d = 1ll << choi.n;
  // Partial trace over the output half must be I/d.
  Eigen::MatrixXcd reduced = Eigen::MatrixXcd::Zero(d, d);
  for (std::int64_t i = 0; i < d; ++i)
    for (std::int64_t j = 0; j < d; ++j)
      for (std::int64_t k = 0; k < d; ++k)
        reduced(i, j) += choi.state.matrix(i * d + k, j * d + k);
  if ((reduced - Eigen::MatrixXcd::Identity(d, d) / double(d))
          .cwiseAbs()
          .maxCoeff() > 1e-9)
    throw std::invalid_argument("ChoiState: channel not trace preserving");
}

ChoiState choi_state(const ChannelModel& channel) {
  const int n = channel.n;
  if (2 * n > kDenseLimit)
    throw std::invalid_argument("choi_state: dimension limit exceeded");
  const std::int64_t d = 1ll << n;
  ChoiState choi;
  choi.n = n;
  choi.state.n = 2 * n;
  if (channel.is_unitary_like()) {
    const auto psi = choi_vector(channel);
    choi.state.matrix = psi.amplitudes * psi.amplitudes.adjoint();
    return choi;
  }
  // |phi><phi| has entries 1/d at ((i<<n)|i, (j<<n)|j).
  choi.state.matrix = Eigen::MatrixXcd::Zero(d * d, d * d);
  for (const auto& k : channel.kraus) {
    // (1 x K)|phi> has amplitude K(a, i)/sqrt(d) at index (i<<n)|a.
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d * d);
    for (std::int64_t i = 0; i < d; ++i)
      for (std::int64_t a = 0; a < d; ++a)
        v(i * d + a) = k(a, i) / std::sqrt(double(d));
    choi.state.matrix.noalias() += v * v.adjoint();
  }
  return choi;
}

DensePureState choi_vector(const ChannelModel& channel) {
  if (!channel.is_unitary_like())
    throw std::invalid_argument("choi_vector: channel is not unitary");
  const int n = channel.n;
  if (2 * n > kDenseLimit)
    throw std::invalid_argument("choi_vector: dimension limit exceeded");
  const std::int64_t d = 1ll << n;
  const Eigen::MatrixXcd u = channel.kind == ChannelModel::Kind::kClifford
                                 ? channel.clifford.unitary()
                                 : channel.unitary;
  DensePureState psi;
  psi.n = 2 * n;
  psi.amplitudes = Eigen::VectorXcd::Zero(d * d);
  for (std::int64_t i = 0; i < d; ++i)
    for (std::int64_t j = 0; j < d; ++j)
      psi.amplitudes(i * d + j) = u(j, i) / std::sqrt(double(d));
  return psi;
}

StabilizerState choi_stabilizer(const CliffordCircuit& circuit) {
  const int n = circuit.n;
  StabilizerState state;
  state.n = 2 * n;
  for (int j = 0; j < n; ++j) {
    for (char letter : {'X', 'Z'}) {
      const auto p = PauliString::single(n, j, letter);
      state.generators.push_back(
          pauli_tensor(p, conjugate_through(circuit, p)));
    }
  }
  validate(state);
  return state;
}

PauliString pauli_tensor(const PauliString& a, const PauliString& b) {
  if (!a.is_hermitian() || !b.is_hermitian())
    throw std::invalid_argument("pauli_tensor: factors must be Hermitian");
  std::string text((a.sign() * b.sign()) < 0 ? "-" : "+");
  for (int q = 0; q < a.num_qubits(); ++q) text += a.letter(q);
  for (int q = 0; q < b.num_qubits(); ++q) text += b.letter(q);
  return PauliString::from_text(text);
}

double average_fidelity(double f_choi, double d) {
  if (f_choi < -1e-9 || f_choi > 1.0 + 1e-9 || d < 2.0)
    throw std::invalid_argument("average_fidelity: bad arguments");
  return (d * f_choi + 1.0) / (d + 1.0);
}

ProductProtocolBackend::ProductProtocolBackend(ChannelModel actual)
    : actual_(std::move(actual)) {
  actual_.validate();
}

double ProductProtocolBackend::branch_value(const PauliString& input_letters,
                                            const PauliString& output_letters,
                                            std::uint64_t mu) {
  const auto key = std::make_tuple(input_letters.index(), mu,
                                   output_letters.index());
  const auto found = cache_.find(key);
  if (found != cache_.end()) return found->second;
  const int n = actual_.n;
  // Conjugated product eigenstate |mu*>, qubit 0 most significant.
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(1);
  for (int q = 0; q < n; ++q) {
    const Eigen::Vector2cd site =
        letter_eigenvector(input_letters.letter(q), (mu >> q) & 1u)
            .conjugate();
    Eigen::VectorXcd next(v.size() * 2);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      next(2 * i) = v(i) * site(0);
      next(2 * i + 1) = v(i) * site(1);
    }
    v = std::move(next);
  }
  const Eigen::MatrixXcd out = actual_.apply(v * v.adjoint());
  const double t = (out * output_letters.dense()).trace().real();
  cache_.emplace(key, t);
  return t;
}

ShotRecord ProductProtocolBackend::measure(const PauliString& p, long n_shots,
                                           Rng& rng) {
  const int n = actual_.n;
  if (p.num_qubits() != 2 * n)
    throw std::invalid_argument("ProductProtocolBackend: Pauli must act on "
                                "both Choi halves");
  const int overall_sign = p.sign();
  std::string in_text = "+", out_text = "+";
  for (int q = 0; q < n; ++q) in_text += p.letter(q);
  for (int q = n; q < 2 * n; ++q) out_text += p.letter(q);
  const auto input = PauliString::from_text(in_text);
  const auto output = PauliString::from_text(out_text);

  std::uniform_int_distribution<std::uint64_t> pick(0, (1ull << n) - 1);
  ShotRecord record{p, 0, 0};
  for (long m = 0; m < n_shots; ++m) {
    const std::uint64_t mu = pick(rng);
    int lambda = 1;
    for (int q = 0; q < n; ++q)
      if (input.letter(q) != 'I' && ((mu >> q) & 1u)) lambda = -lambda;
    const double t = branch_value(input, output, mu);
    const int outcome = sample_pm_outcome(t, rng);
    if (overall_sign * lambda * outcome > 0)
      ++record.plus_count;
    else
      ++record.minus_count;
  }
  return record;
}

double ProductProtocolBackend::exact_mean(const PauliString& p) {
  const int n = actual_.n;
  if (p.num_qubits() != 2 * n)
    throw std::invalid_argument("ProductProtocolBackend: Pauli must act on "
                                "both Choi halves");
  const int overall_sign = p.sign();
  std::string in_text = "+", out_text = "+";
  for (int q = 0; q < n; ++q) in_text += p.letter(q);
  for (int q = n; q < 2 * n; ++q) out_text += p.letter(q);
  const auto input = PauliString::from_text(in_text);
  const auto output = PauliString::from_text(out_text);
  const std::uint64_t d = 1ull << n;
  double mean = 0.0;
  for (std::uint64_t mu = 0; mu < d; ++mu) {
    int lambda = 1;
    for (int q = 0; q < n; ++q)
      if (input.letter(q) != 'I' && ((mu >> q) & 1u)) lambda = -lambda;
    mean += overall_sign * lambda * branch_value(input, output, mu);
  }
  return mean / static_cast<double>(d);
}

namespace {

StateModel target_choi_model(const ChannelModel& target) {
  if (!target.is_unitary_like())
    throw std::invalid_argument("certify_process: target must be unitary");
  if (target.kind == ChannelModel::Kind::kClifford)
    return StateModel(choi_stabilizer(target.clifford));
  return StateModel(choi_vector(target));
}

}  // namespace

ProcessReport certify_process_direct(const ChannelModel& target,
                                     const ChannelModel& actual,
                                     const ErrorBudget& budget,
                                     const TruncationPolicy& truncation,
                                     std::uint64_t seed) {
  const auto rho = target_choi_model(target);
  const auto choi = choi_state(actual);
  validate(choi);
  DensityMatrixBackend backend(choi.state);
  ProcessReport out;
  out.report = estimate_fidelity(rho, backend, budget, truncation, seed);
  out.choi_fidelity = out.report.estimate;
  out.avg_fidelity =
      average_fidelity(std::clamp(out.report.estimate, 0.0, 1.0),
                       static_cast<double>(1ll << target.n));
  out.product_protocol = false;
  return out;
}

ProcessReport certify_process_product_protocol(
    const ChannelModel& target, const ChannelModel& actual,
    const ErrorBudget& budget, const TruncationPolicy& truncation,
    std::uint64_t seed) {
  const auto rho = target_choi_model(target);
  ProductProtocolBackend backend(actual);
  ProcessReport out;
  out.report = estimate_fidelity(rho, backend, budget, truncation, seed);
  out.choi_fidelity = out.report.estimate;
  out.avg_fidelity =
      average_fidelity(std::clamp(out.report.estimate, 0.0, 1.0),
                       static_cast<double>(1ll << target.n));
  out.product_protocol = true;
  return out;
}

}  // namespace certkit
