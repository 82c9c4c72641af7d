// Copyright 2026 The QSP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QSP_QSIM_HPP_
#define QSP_QSIM_HPP_

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qsp {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Rng = std::mt19937_64;

constexpr int kPureCap = 24;
constexpr int kMixedCap = 12;
constexpr double kTol = 1e-9;

struct QspError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Ordered named registers. Qubit 0 of the first register is the least
/// significant amplitude bit.
struct RegisterLayout {
  std::vector<std::string> names;
  std::vector<int> widths;

  RegisterLayout() = default;
  RegisterLayout(std::vector<std::string> n, std::vector<int> w);

  int total() const;
  int index_of(const std::string& name) const;
  int offset(const std::string& name) const;
  int width(const std::string& name) const;
  bool has(const std::string& name) const;
  /// Global qubit indices of the listed registers, in listed order.
  std::vector<int> qubits(const std::vector<std::string>& labels) const;
  RegisterLayout sub(const std::vector<std::string>& labels) const;
  bool operator==(const RegisterLayout& o) const = default;
};

enum class StateKind { kPure, kMixed };

class QuantumState {
 public:
  QuantumState() = default;
  static QuantumState pure(RegisterLayout layout, Vec amps);
  static QuantumState mixed(RegisterLayout layout, Mat rho);
  static QuantumState basis(RegisterLayout layout, std::uint64_t index);

  const RegisterLayout& layout() const { return layout_; }
  StateKind kind() const { return kind_; }
  bool is_pure() const { return kind_ == StateKind::kPure; }
  int num_qubits() const { return layout_.total(); }
  const Vec& vec() const;
  const Mat& mat() const;
  /// Density matrix (outer product for pure states).
  Mat density() const;
  /// Sqrt of squared amplitude sum for pure states, trace for mixed.
  double norm() const;
  QuantumState to_mixed() const;
  /// Tensor product; `other` occupies the more significant qubits.
  QuantumState tensor(const QuantumState& other) const;

 private:
  RegisterLayout layout_;
  StateKind kind_ = StateKind::kPure;
  Vec vec_;
  Mat mat_;
};

struct UnitaryOp {
  Mat matrix;
  int arity = 0;
  std::string label;

  UnitaryOp() = default;
  UnitaryOp(Mat m, std::string l = "");
  UnitaryOp adjoint() const;
};

struct Projector {
  Mat matrix;
  int arity = 0;

  Projector() = default;
  explicit Projector(Mat m);
};

struct MeasureResult {
  double accept_prob = 0;
  QuantumState accept;
  QuantumState reject;
};

// Register-level operations.
QuantumState apply(const UnitaryOp& u, const QuantumState& s,
                   const std::vector<std::string>& targets);
MeasureResult measure(const Projector& p, const QuantumState& s,
                      const std::vector<std::string>& targets);
QuantumState partial_trace(const QuantumState& s,
                           const std::vector<std::string>& keep);
double trace_distance(const QuantumState& a, const QuantumState& b);
double helstrom_advantage(const QuantumState& r0, const QuantumState& r1);
double fidelity(const QuantumState& a, const QuantumState& b);

/// Same state with registers in `order`, which must list every register.
QuantumState reorder(const QuantumState& s, const std::vector<std::string>& order);
/// Same amplitudes under a layout of equal total width.
QuantumState relabel(const QuantumState& s, RegisterLayout layout);
/// Appends a register in |0...0> as the most significant one.
QuantumState append_zero(const QuantumState& s, const std::string& name, int width);
/// Applies a matrix to the listed registers without a unitarity check.
QuantumState apply_matrix(const Mat& m, const QuantumState& s,
                          const std::vector<std::string>& targets);

UnitaryOp haar_unitary(int dim, std::uint64_t seed);
Mat haar_matrix(int dim, Rng& rng);
std::pair<Projector, Projector> swap_test_projector(int width);

// Qubit-level kernels. `qubits[i]` receives bit i of the gate index.
int num_qubits_of_dim(Eigen::Index dim);
void check_pure_cap(int n);
void check_mixed_cap(int n);
Vec apply_qubits(const Mat& u, const Vec& v, const std::vector<int>& qubits);
Mat apply_qubits_left(const Mat& u, const Mat& m, const std::vector<int>& qubits);
Mat apply_qubits_conj(const Mat& u, const Mat& rho, const std::vector<int>& qubits);
Mat embed(const Mat& u, const std::vector<int>& qubits, int n);
/// New qubit i is old qubit perm[i].
Vec permute_qubits(const Vec& v, const std::vector<int>& perm);
Mat permute_qubits(const Mat& m, const std::vector<int>& perm);
/// Permutation matrix P with P|x> = |x permuted>, same convention.
Mat permutation_matrix(const std::vector<int>& perm);
/// permutation_matrix(perm) * m without the dense product.
Mat permute_rows(const Mat& m, const std::vector<int>& perm);
Mat partial_trace_qubits(const Mat& rho, const std::vector<int>& keep, int n);
Mat partial_trace_qubits(const Vec& psi, const std::vector<int>& keep, int n);
Mat kron(const Mat& a, const Mat& b);
Mat identity(Eigen::Index dim);
Mat zero_projector(int n);

/// Sum of absolute eigenvalues of a Hermitian matrix.
double trace_norm(const Mat& h);
double trace_distance(const Mat& a, const Mat& b);

Vec random_state(int dim, Rng& rng);
Mat random_density(int dim, int rank, Rng& rng);
double uniform01(Rng& rng);

namespace gates {
Mat I();
Mat X();
Mat Y();
Mat Z();
Mat H();
Mat S();
Mat CNOT();
Mat swap(int width);
}  // namespace gates

/// Kraus operators of a map from dimension `din` to `dout`.
struct Channel {
  int din = 1;
  int dout = 1;
  std::vector<Mat> kraus;
};

/// Applies (Phi ⊗ id) to a density matrix whose least significant factor
/// has dimension ch.din.
Mat apply_channel_lsb(const Channel& ch, const Mat& rho);
Channel replacement_channel(int din, const Mat& tau);
Channel compose(const Channel& outer, const Channel& inner);

struct DiamondOptions {
  int restarts = 6;
  int max_iter = 500;
  double tol = 1e-13;
  std::uint64_t seed = 7;
};

struct DiamondResult {
  double value = 0;
  Vec psi;  // input on (in, ref), in least significant
};

/// Lower bound on ||Phi0 - Phi1||_diamond by alternating maximization over
/// pure inputs on in ⊗ ref, exact at the fixed point reached.
DiamondResult diamond_distance(const Channel& a, const Channel& b,
                               const DiamondOptions& opt = {},
                               const std::vector<Vec>& seeds = {});
double channel_output_norm(const Channel& a, const Channel& b, const Vec& psi);

}  // namespace qsp

#endif  // QSP_QSIM_HPP_
