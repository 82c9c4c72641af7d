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

#include "qsp/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace qsp {

RegisterLayout::RegisterLayout(std::vector<std::string> n, std::vector<int> w)
    : names(std::move(n)), widths(std::move(w)) {
  if (names.size() != widths.size()) throw QspError("layout: size mismatch");
  std::set<std::string> seen;
  for (size_t i = 0; i < names.size(); ++i) {
    if (widths[i] < 0) throw QspError("layout: negative width");
    if (!seen.insert(names[i]).second)
      throw QspError("layout: duplicate label " + names[i]);
  }
}

int RegisterLayout::total() const {
  return std::accumulate(widths.begin(), widths.end(), 0);
}

int RegisterLayout::index_of(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  throw QspError("unknown register " + name);
}

bool RegisterLayout::has(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

int RegisterLayout::offset(const std::string& name) const {
  int idx = index_of(name);
  int off = 0;
  for (int i = 0; i < idx; ++i) off += widths[i];
  return off;
}

int RegisterLayout::width(const std::string& name) const {
  return widths[index_of(name)];
}

std::vector<int> RegisterLayout::qubits(
    const std::vector<std::string>& labels) const {
  std::vector<int> out;
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) throw QspError("repeated target " + l);
    int off = offset(l);
    for (int q = 0; q < width(l); ++q) out.push_back(off + q);
  }
  return out;
}

RegisterLayout RegisterLayout::sub(const std::vector<std::string>& labels) const {
  std::vector<int> w;
  for (const auto& l : labels) w.push_back(width(l));
  return RegisterLayout(labels, w);
}

int num_qubits_of_dim(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim) throw QspError("dimension is not a power of two");
  return n;
}

void check_pure_cap(int n) {
  if (n > kPureCap) throw QspError("statevector cap exceeded");
}

void check_mixed_cap(int n) {
  if (n > kMixedCap) throw QspError("density-matrix cap exceeded");
}

QuantumState QuantumState::pure(RegisterLayout layout, Vec amps) {
  int n = layout.total();
  check_pure_cap(n);
  if (amps.size() != (Eigen::Index{1} << n))
    throw QspError("state: amplitude length does not match layout");
  QuantumState s;
  s.layout_ = std::move(layout);
  s.kind_ = StateKind::kPure;
  s.vec_ = std::move(amps);
  return s;
}

QuantumState QuantumState::mixed(RegisterLayout layout, Mat rho) {
  int n = layout.total();
  check_mixed_cap(n);
  if (rho.rows() != (Eigen::Index{1} << n) || rho.cols() != rho.rows())
    throw QspError("state: matrix size does not match layout");
  QuantumState s;
  s.layout_ = std::move(layout);
  s.kind_ = StateKind::kMixed;
  s.mat_ = std::move(rho);
  return s;
}

QuantumState QuantumState::basis(RegisterLayout layout, std::uint64_t index) {
  Vec v = Vec::Zero(Eigen::Index{1} << layout.total());
  v(static_cast<Eigen::Index>(index)) = 1;
  return pure(std::move(layout), std::move(v));
}

const Vec& QuantumState::vec() const {
  if (!is_pure()) throw QspError("state is mixed");
  return vec_;
}

const Mat& QuantumState::mat() const {
  if (is_pure()) throw QspError("state is pure");
  return mat_;
}

Mat QuantumState::density() const {
  if (is_pure()) return vec_ * vec_.adjoint();
  return mat_;
}

double QuantumState::norm() const {
  if (is_pure()) return vec_.norm();
  return mat_.trace().real();
}

QuantumState QuantumState::to_mixed() const {
  if (!is_pure()) return *this;
  return mixed(layout_, density());
}

QuantumState QuantumState::tensor(const QuantumState& other) const {
  std::vector<std::string> names = layout_.names;
  std::vector<int> widths = layout_.widths;
  names.insert(names.end(), other.layout_.names.begin(), other.layout_.names.end());
  widths.insert(widths.end(), other.layout_.widths.begin(), other.layout_.widths.end());
  RegisterLayout l(names, widths);
  if (is_pure() && other.is_pure()) return pure(l, kron(other.vec_, vec_));
  return mixed(l, kron(other.density(), density()));
}

UnitaryOp::UnitaryOp(Mat m, std::string l) : matrix(std::move(m)), label(std::move(l)) {
  if (matrix.rows() != matrix.cols()) throw QspError("unitary: not square");
  arity = num_qubits_of_dim(matrix.rows());
  Mat d = matrix * matrix.adjoint() - identity(matrix.rows());
  if (d.cwiseAbs().maxCoeff() > 1e-9) throw QspError("unitary: U U^dag != I");
}

UnitaryOp UnitaryOp::adjoint() const {
  return UnitaryOp(matrix.adjoint(), label + "^dag");
}

Projector::Projector(Mat m) : matrix(std::move(m)) {
  if (matrix.rows() != matrix.cols()) throw QspError("projector: not square");
  arity = num_qubits_of_dim(matrix.rows());
  if ((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
    throw QspError("projector: not Hermitian");
  if ((matrix * matrix - matrix).cwiseAbs().maxCoeff() > 1e-9)
    throw QspError("projector: not idempotent");
}

namespace {

std::vector<Eigen::Index> gate_offsets(const std::vector<int>& qubits) {
  size_t k = qubits.size();
  std::vector<Eigen::Index> offs(size_t{1} << k, 0);
  for (size_t j = 0; j < offs.size(); ++j)
    for (size_t b = 0; b < k; ++b)
      if ((j >> b) & 1) offs[j] |= Eigen::Index{1} << qubits[b];
  return offs;
}

Eigen::Index mask_of(const std::vector<int>& qubits) {
  Eigen::Index m = 0;
  for (int q : qubits) m |= Eigen::Index{1} << q;
  return m;
}

void check_targets(const Mat& u, const std::vector<int>& qubits, Eigen::Index dim) {
  if (u.rows() != (Eigen::Index{1} << qubits.size()) || u.cols() != u.rows())
    throw QspError("gate width does not match targets");
  std::set<int> s(qubits.begin(), qubits.end());
  if (s.size() != qubits.size()) throw QspError("repeated target qubit");
  for (int q : qubits)
    if (q < 0 || (Eigen::Index{1} << q) >= dim)
      throw QspError("target qubit out of range");
}

// out = (u on qubits) in, column by column; in and out are n x cols, column-major.
void apply_kernel(const Mat& u, const cd* in, cd* out, Eigen::Index n, Eigen::Index cols,
                  const std::vector<int>& qubits) {
  auto offs = gate_offsets(qubits);
  Eigen::Index mask = mask_of(qubits);
  const Eigen::Index k = static_cast<Eigen::Index>(offs.size());
  std::vector<double> ur(k * k), ui(k * k), br(k), bi(k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      ur[i * k + j] = u(i, j).real();
      ui[i * k + j] = u(i, j).imag();
    }
  for (Eigen::Index c = 0; c < cols; ++c) {
    const cd* src = in + c * n;
    cd* dst = out + c * n;
    for (Eigen::Index base = 0; base < n; ++base) {
      if (base & mask) continue;
      for (Eigen::Index j = 0; j < k; ++j) {
        br[j] = src[base | offs[j]].real();
        bi[j] = src[base | offs[j]].imag();
      }
      for (Eigen::Index i = 0; i < k; ++i) {
        double re = 0, im = 0;
        const double* a = &ur[i * k];
        const double* b = &ui[i * k];
        for (Eigen::Index j = 0; j < k; ++j) {
          re += a[j] * br[j] - b[j] * bi[j];
          im += a[j] * bi[j] + b[j] * br[j];
        }
        dst[base | offs[i]] = cd(re, im);
      }
    }
  }
}

}  // namespace

Vec apply_qubits(const Mat& u, const Vec& v, const std::vector<int>& qubits) {
  if (qubits.empty()) return u(0, 0) * v;
  check_targets(u, qubits, v.size());
  Vec out(v.size());
  apply_kernel(u, v.data(), out.data(), v.size(), 1, qubits);
  return out;
}

Mat apply_qubits_left(const Mat& u, const Mat& m, const std::vector<int>& qubits) {
  if (qubits.empty()) return u(0, 0) * m;
  check_targets(u, qubits, m.rows());
  Mat out(m.rows(), m.cols());
  apply_kernel(u, m.data(), out.data(), m.rows(), m.cols(), qubits);
  return out;
}

Mat apply_qubits_conj(const Mat& u, const Mat& rho, const std::vector<int>& qubits) {
  Mat l = apply_qubits_left(u, rho, qubits);
  Mat lt = l.adjoint();
  return apply_qubits_left(u, lt, qubits).adjoint();
}

Mat embed(const Mat& u, const std::vector<int>& qubits, int n) {
  return apply_qubits_left(u, identity(Eigen::Index{1} << n), qubits);
}

namespace {

std::vector<Eigen::Index> permuted_indices(const std::vector<int>& perm) {
  // idx[y] = x such that bit i of y equals bit perm[i] of x.
  size_t n = perm.size();
  std::vector<int> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < n; ++i)
    if (sorted[i] != static_cast<int>(i)) throw QspError("invalid qubit permutation");
  std::vector<Eigen::Index> idx(size_t{1} << n);
  for (size_t y = 0; y < idx.size(); ++y) {
    Eigen::Index x = 0;
    for (size_t i = 0; i < n; ++i)
      if ((y >> i) & 1) x |= Eigen::Index{1} << perm[i];
    idx[y] = x;
  }
  return idx;
}

}  // namespace

Vec permute_qubits(const Vec& v, const std::vector<int>& perm) {
  auto idx = permuted_indices(perm);
  if (static_cast<Eigen::Index>(idx.size()) != v.size())
    throw QspError("permutation size mismatch");
  Vec out(v.size());
  for (size_t y = 0; y < idx.size(); ++y) out(y) = v(idx[y]);
  return out;
}

Mat permute_qubits(const Mat& m, const std::vector<int>& perm) {
  auto idx = permuted_indices(perm);
  if (static_cast<Eigen::Index>(idx.size()) != m.rows())
    throw QspError("permutation size mismatch");
  Mat out(m.rows(), m.cols());
  for (size_t y = 0; y < idx.size(); ++y)
    for (size_t z = 0; z < idx.size(); ++z) out(y, z) = m(idx[y], idx[z]);
  return out;
}

Mat permute_rows(const Mat& m, const std::vector<int>& perm) {
  auto idx = permuted_indices(perm);
  if (static_cast<Eigen::Index>(idx.size()) != m.rows())
    throw QspError("permutation size mismatch");
  Mat out(m.rows(), m.cols());
  for (size_t y = 0; y < idx.size(); ++y) out.row(y) = m.row(idx[y]);
  return out;
}

Mat permutation_matrix(const std::vector<int>& perm) {
  auto idx = permuted_indices(perm);
  Eigen::Index d = static_cast<Eigen::Index>(idx.size());
  Mat p = Mat::Zero(d, d);
  for (Eigen::Index y = 0; y < d; ++y) p(y, idx[y]) = 1;
  return p;
}

namespace {

// Splits qubits into kept (in order) and traced; returns index maps.
void split_indices(const std::vector<int>& keep, int n,
                   std::vector<Eigen::Index>* kept_idx,
                   std::vector<Eigen::Index>* traced_idx) {
  std::vector<int> traced;
  for (int q = 0; q < n; ++q)
    if (std::find(keep.begin(), keep.end(), q) == keep.end()) traced.push_back(q);
  for (int q : keep)
    if (q < 0 || q >= n) throw QspError("kept qubit out of range");
  *kept_idx = gate_offsets(keep);
  *traced_idx = gate_offsets(traced);
}

}  // namespace

Mat partial_trace_qubits(const Mat& rho, const std::vector<int>& keep, int n) {
  std::vector<Eigen::Index> ka, tb;
  split_indices(keep, n, &ka, &tb);
  Eigen::Index dk = static_cast<Eigen::Index>(ka.size());
  Mat out = Mat::Zero(dk, dk);
  for (Eigen::Index t : tb)
    for (Eigen::Index a = 0; a < dk; ++a)
      for (Eigen::Index b = 0; b < dk; ++b) out(a, b) += rho(ka[a] | t, ka[b] | t);
  return out;
}

Mat partial_trace_qubits(const Vec& psi, const std::vector<int>& keep, int n) {
  std::vector<Eigen::Index> ka, tb;
  split_indices(keep, n, &ka, &tb);
  Mat m(ka.size(), tb.size());
  for (size_t t = 0; t < tb.size(); ++t)
    for (size_t a = 0; a < ka.size(); ++a) m(a, t) = psi(ka[a] | tb[t]);
  return m * m.adjoint();
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat identity(Eigen::Index dim) { return Mat::Identity(dim, dim); }

Mat zero_projector(int n) {
  Mat p = Mat::Zero(Eigen::Index{1} << n, Eigen::Index{1} << n);
  p(0, 0) = 1;
  return p;
}

double trace_norm(const Mat& h) {
  Mat s = (h + h.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw QspError("trace_distance: dimension mismatch");
  return 0.5 * trace_norm(a - b);
}

QuantumState apply(const UnitaryOp& u, const QuantumState& s,
                   const std::vector<std::string>& targets) {
  auto qs = s.layout().qubits(targets);
  if (static_cast<int>(qs.size()) != u.arity) throw QspError("apply: width mismatch");
  if (s.is_pure()) return QuantumState::pure(s.layout(), apply_qubits(u.matrix, s.vec(), qs));
  return QuantumState::mixed(s.layout(), apply_qubits_conj(u.matrix, s.mat(), qs));
}

MeasureResult measure(const Projector& p, const QuantumState& s,
                      const std::vector<std::string>& targets) {
  auto qs = s.layout().qubits(targets);
  if (static_cast<int>(qs.size()) != p.arity) throw QspError("measure: width mismatch");
  if ((p.matrix * p.matrix - p.matrix).cwiseAbs().maxCoeff() > 1e-9)
    throw QspError("measure: non-idempotent matrix");
  Mat q = identity(p.matrix.rows()) - p.matrix;
  MeasureResult r;
  if (s.is_pure()) {
    Vec a = apply_qubits(p.matrix, s.vec(), qs);
    Vec b = apply_qubits(q, s.vec(), qs);
    r.accept_prob = a.squaredNorm();
    r.accept = QuantumState::pure(s.layout(), a);
    r.reject = QuantumState::pure(s.layout(), b);
  } else {
    Mat a = apply_qubits_conj(p.matrix, s.mat(), qs);
    Mat b = apply_qubits_conj(q, s.mat(), qs);
    r.accept_prob = a.trace().real();
    r.accept = QuantumState::mixed(s.layout(), a);
    r.reject = QuantumState::mixed(s.layout(), b);
  }
  return r;
}

QuantumState partial_trace(const QuantumState& s, const std::vector<std::string>& keep) {
  auto qs = s.layout().qubits(keep);
  RegisterLayout l = s.layout().sub(keep);
  if (s.is_pure())
    return QuantumState::mixed(l, partial_trace_qubits(s.vec(), qs, s.num_qubits()));
  return QuantumState::mixed(l, partial_trace_qubits(s.mat(), qs, s.num_qubits()));
}

double trace_distance(const QuantumState& a, const QuantumState& b) {
  if (a.num_qubits() != b.num_qubits()) throw QspError("trace_distance: dimension mismatch");
  return trace_distance(a.density(), b.density());
}

double helstrom_advantage(const QuantumState& r0, const QuantumState& r1) {
  return 0.5 * trace_distance(r0, r1);
}

double fidelity(const QuantumState& a, const QuantumState& b) {
  if (a.num_qubits() != b.num_qubits()) throw QspError("fidelity: dimension mismatch");
  if (a.is_pure() && b.is_pure()) return std::norm(a.vec().dot(b.vec()));
  if (a.is_pure()) return (a.vec().adjoint() * b.mat() * a.vec())(0, 0).real();
  if (b.is_pure()) return (b.vec().adjoint() * a.mat() * b.vec())(0, 0).real();
  Eigen::SelfAdjointEigenSolver<Mat> es(a.mat());
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Mat sa = es.eigenvectors() * ev.cast<cd>().asDiagonal() * es.eigenvectors().adjoint();
  Mat m = sa * b.mat() * sa;
  Eigen::SelfAdjointEigenSolver<Mat> es2((m + m.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
  double f = es2.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return f * f;
}

QuantumState reorder(const QuantumState& s, const std::vector<std::string>& order) {
  if (order.size() != s.layout().names.size())
    throw QspError("reorder: order must list every register");
  std::vector<int> perm = s.layout().qubits(order);
  RegisterLayout l = s.layout().sub(order);
  if (s.is_pure()) return QuantumState::pure(l, permute_qubits(s.vec(), perm));
  return QuantumState::mixed(l, permute_qubits(s.mat(), perm));
}

QuantumState relabel(const QuantumState& s, RegisterLayout layout) {
  if (layout.total() != s.num_qubits()) throw QspError("relabel: width mismatch");
  if (s.is_pure()) return QuantumState::pure(std::move(layout), s.vec());
  return QuantumState::mixed(std::move(layout), s.mat());
}

QuantumState append_zero(const QuantumState& s, const std::string& name, int width) {
  RegisterLayout z({name}, {width});
  QuantumState zero = QuantumState::basis(z, 0);
  return s.tensor(s.is_pure() ? zero : zero.to_mixed());
}

QuantumState apply_matrix(const Mat& m, const QuantumState& s,
                          const std::vector<std::string>& targets) {
  auto qs = s.layout().qubits(targets);
  if (s.is_pure()) return QuantumState::pure(s.layout(), apply_qubits(m, s.vec(), qs));
  return QuantumState::mixed(s.layout(), apply_qubits_conj(m, s.mat(), qs));
}

Mat haar_matrix(int dim, Rng& rng) {
  if (dim < 1) throw QspError("haar_unitary: dim < 1");
  std::normal_distribution<double> g(0.0, 1.0);
  Mat z(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) z(i, j) = cd(g(rng), g(rng)) / std::sqrt(2.0);
  Eigen::HouseholderQR<Mat> qr(z);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    cd d = r(j, j);
    double a = std::abs(d);
    q.col(j) *= (a > 0 ? d / a : cd(1, 0));
  }
  return q;
}

UnitaryOp haar_unitary(int dim, std::uint64_t seed) {
  if (dim < 1) throw QspError("haar_unitary: dim < 1");
  Rng rng(seed);
  Mat q = haar_matrix(dim, rng);
  UnitaryOp u;
  u.matrix = q;
  u.arity = (dim & (dim - 1)) == 0 ? num_qubits_of_dim(dim) : -1;
  u.label = "haar";
  return u;
}

std::pair<Projector, Projector> swap_test_projector(int width) {
  if (width < 0) throw QspError("swap_test_projector: negative width");
  Mat sw = gates::swap(width);
  Mat id = identity(sw.rows());
  return {Projector((id + sw) / 2.0), Projector((id - sw) / 2.0)};
}

Vec random_state(int dim, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = cd(g(rng), g(rng));
  return v / v.norm();
}

Mat random_density(int dim, int rank, Rng& rng) {
  Mat rho = Mat::Zero(dim, dim);
  for (int i = 0; i < rank; ++i) {
    Vec v = random_state(dim, rng);
    rho += uniform01(rng) * v * v.adjoint();
  }
  return rho / rho.trace().real();
}

double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

namespace gates {
Mat I() { return identity(2); }
Mat X() {
  Mat m = Mat::Zero(2, 2);
  m(0, 1) = m(1, 0) = 1;
  return m;
}
Mat Y() {
  Mat m = Mat::Zero(2, 2);
  m(0, 1) = cd(0, -1);
  m(1, 0) = cd(0, 1);
  return m;
}
Mat Z() {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = 1;
  m(1, 1) = -1;
  return m;
}
Mat H() {
  Mat m(2, 2);
  m << 1, 1, 1, -1;
  return m / std::sqrt(2.0);
}
Mat S() {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = 1;
  m(1, 1) = cd(0, 1);
  return m;
}
Mat CNOT() {
  // control qubit 0, target qubit 1
  Mat m = Mat::Zero(4, 4);
  m(0, 0) = m(2, 2) = 1;
  m(3, 1) = m(1, 3) = 1;
  return m;
}
Mat swap(int width) {
  std::vector<int> perm(2 * width);
  for (int i = 0; i < width; ++i) {
    perm[i] = width + i;
    perm[width + i] = i;
  }
  return permutation_matrix(perm);
}
}  // namespace gates

Mat apply_channel_lsb(const Channel& ch, const Mat& rho) {
  Eigen::Index dref = rho.rows() / ch.din;
  if (dref * ch.din != rho.rows()) throw QspError("channel: input dimension mismatch");
  Mat out = Mat::Zero(ch.dout * dref, ch.dout * dref);
  Mat id = identity(dref);
  for (const auto& k : ch.kraus) {
    Mat kk = kron(id, k);
    out += kk * rho * kk.adjoint();
  }
  return out;
}

Channel replacement_channel(int din, const Mat& tau) {
  Eigen::SelfAdjointEigenSolver<Mat> es((tau + tau.adjoint()) / 2.0);
  Channel ch;
  ch.din = din;
  ch.dout = static_cast<int>(tau.rows());
  for (Eigen::Index i = 0; i < tau.rows(); ++i) {
    double lam = es.eigenvalues()(i);
    if (lam <= 1e-15) continue;
    Vec v = std::sqrt(lam) * es.eigenvectors().col(i);
    for (int m = 0; m < din; ++m) {
      Mat k = Mat::Zero(ch.dout, din);
      k.col(m) = v;
      ch.kraus.push_back(k);
    }
  }
  return ch;
}

Channel compose(const Channel& outer, const Channel& inner) {
  if (outer.din != inner.dout) throw QspError("compose: dimension mismatch");
  Channel ch;
  ch.din = inner.din;
  ch.dout = outer.dout;
  for (const auto& a : outer.kraus)
    for (const auto& b : inner.kraus) ch.kraus.push_back(a * b);
  return ch;
}

namespace {

Mat output_diff(const Channel& a, const Channel& b, const Vec& psi) {
  Eigen::Index din = a.din;
  Eigen::Index dref = psi.size() / din;
  Eigen::Map<const Mat> p(psi.data(), din, dref);
  Mat x = Mat::Zero(a.dout * dref, a.dout * dref);
  for (const auto& k : a.kraus) {
    Mat o = k * p;
    Eigen::Map<const Vec> v(o.data(), o.size());
    x += v * v.adjoint();
  }
  for (const auto& k : b.kraus) {
    Mat o = k * p;
    Eigen::Map<const Vec> v(o.data(), o.size());
    x -= v * v.adjoint();
  }
  return x;
}

}  // namespace

double channel_output_norm(const Channel& a, const Channel& b, const Vec& psi) {
  return trace_norm(output_diff(a, b, psi));
}

DiamondResult diamond_distance(const Channel& a, const Channel& b,
                               const DiamondOptions& opt,
                               const std::vector<Vec>& seeds) {
  if (a.din != b.din || a.dout != b.dout) throw QspError("diamond: channel shapes differ");
  int din = a.din;
  int dim = din * din;
  Rng rng(opt.seed);
  std::vector<Vec> starts;
  for (const auto& s : seeds) {
    if (s.size() != dim) throw QspError("diamond: seed dimension mismatch");
    starts.push_back(s / s.norm());
  }
  Vec z = Vec::Zero(dim);
  z(0) = 1;
  starts.push_back(z);
  for (int r = 0; r < opt.restarts; ++r) starts.push_back(random_state(dim, rng));
  Vec me = Vec::Zero(dim);
  for (int i = 0; i < din; ++i) me(i + din * i) = 1;
  starts.push_back(me / me.norm());

  Mat id = identity(din);
  std::vector<Mat> ka, kb;
  for (const auto& k : a.kraus) ka.push_back(kron(id, k));
  for (const auto& k : b.kraus) kb.push_back(kron(id, k));

  DiamondResult best;
  best.value = -1;
  for (const auto& s0 : starts) {
    if (best.value >= 2 - opt.tol) break;
    Vec psi = s0;
    double val = channel_output_norm(a, b, psi);
    for (int it = 0; it < opt.max_iter && val < 2 - opt.tol; ++it) {
      Mat x = output_diff(a, b, psi);
      Eigen::SelfAdjointEigenSolver<Mat> es((x + x.adjoint()) / 2.0);
      Eigen::VectorXd sg = es.eigenvalues().unaryExpr(
          [](double l) { return l > 0 ? 1.0 : (l < 0 ? -1.0 : 0.0); });
      Mat sm = es.eigenvectors() * sg.cast<cd>().asDiagonal() * es.eigenvectors().adjoint();
      Mat g = Mat::Zero(dim, dim);
      for (const auto& k : ka) g += k.adjoint() * sm * k;
      for (const auto& k : kb) g -= k.adjoint() * sm * k;
      Eigen::SelfAdjointEigenSolver<Mat> eg((g + g.adjoint()) / 2.0);
      Vec next = eg.eigenvectors().col(dim - 1);
      double nv = channel_output_norm(a, b, next);
      if (nv <= val + opt.tol) {
        if (nv > val) {
          val = nv;
          psi = next;
        }
        break;
      }
      // Drop a start whose steps, if they kept their size, could not catch up.
      bool hopeless = nv + (nv - val) * (opt.max_iter - it) < best.value - opt.tol;
      val = nv;
      psi = next;
      if (hopeless) break;
    }
    if (val > best.value) {
      best.value = val;
      best.psi = psi;
    }
  }
  return best;
}

}  // namespace qsp
