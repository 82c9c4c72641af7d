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

#include "qsp/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>

namespace qsp {

int EncFamily::n() const { return num_qubits_of_dim(dim); }

void EncFamily::validate() const {
  if (unitaries.empty()) throw QspError("family: no keys");
  for (const auto& u : unitaries) {
    if (u.rows() != dim || u.cols() != dim) throw QspError("family: unitary size mismatch");
    if ((u.adjoint() * u - identity(dim)).cwiseAbs().maxCoeff() > 1e-9)
      throw QspError("family: key unitary is not unitary");
  }
}

Mat twirl(const EncFamily& fam, const Mat& rho) {
  Mat out = Mat::Zero(rho.rows(), rho.cols());
  for (const auto& u : fam.unitaries) out += u * rho * u.adjoint();
  return out / static_cast<double>(fam.keys());
}

Mat pauli(int n, std::uint64_t r, std::uint64_t s) {
  Eigen::Index dim = Eigen::Index{1} << n;
  Mat m = Mat::Zero(dim, dim);
  for (Eigen::Index x = 0; x < dim; ++x) {
    // X^r Z^s |x> = (-1)^{s.x} |x xor r>
    int parity = __builtin_popcountll(static_cast<std::uint64_t>(x) & s) & 1;
    m(static_cast<Eigen::Index>(static_cast<std::uint64_t>(x) ^ r), x) = parity ? -1.0 : 1.0;
  }
  return m;
}

EncFamily pauli_pad_family(int n) {
  if (n < 1) throw QspError("pauli_pad_family: n < 1");
  EncFamily fam;
  fam.d = 2 * n;
  fam.dim = 1 << n;
  fam.name = "pauli-pad";
  std::uint64_t mask = (std::uint64_t{1} << n) - 1;
  for (std::uint64_t k = 0; k < (std::uint64_t{1} << (2 * n)); ++k)
    fam.unitaries.push_back(pauli(n, k & mask, k >> n));
  return fam;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

ToyPrg make_toy_prg(int d, int out_bits, std::uint64_t seed) {
  if (d < 0 || d > 16 || out_bits < 1 || out_bits > 62) throw QspError("toy prg: widths out of range");
  ToyPrg g{d, out_bits, seed, {}};
  std::uint64_t mask = (std::uint64_t{1} << out_bits) - 1;
  for (std::uint64_t k = 0; k < (std::uint64_t{1} << d); ++k)
    g.table.push_back(splitmix64(seed ^ splitmix64(k + 1)) & mask);
  return g;
}

ToyPrg identity_prg(int d) {
  ToyPrg g{d, d, 0, {}};
  for (std::uint64_t k = 0; k < (std::uint64_t{1} << d); ++k) g.table.push_back(k);
  return g;
}

EncFamily prg_pad_family(const ToyPrg& prg, int n) {
  if (prg.out_bits != 2 * n) throw QspError("prg_pad_family: PRG output must be 2n bits");
  EncFamily fam;
  fam.d = prg.d;
  fam.dim = 1 << n;
  fam.name = "prg-pad";
  std::uint64_t mask = (std::uint64_t{1} << n) - 1;
  for (auto g : prg.table) fam.unitaries.push_back(pauli(n, g & mask, g >> n));
  return fam;
}

Mat circuit_unitary(int nq, const std::vector<std::pair<Mat, std::vector<int>>>& gates) {
  Mat u = identity(Eigen::Index{1} << nq);
  for (const auto& [g, qs] : gates) u = apply_qubits_left(g, u, qs);
  return u;
}

Mat classical_map(int nq, const std::function<std::uint64_t(std::uint64_t)>& f) {
  Eigen::Index dim = Eigen::Index{1} << nq;
  Mat p = Mat::Zero(dim, dim);
  std::vector<bool> hit(dim, false);
  for (Eigen::Index x = 0; x < dim; ++x) {
    auto y = static_cast<Eigen::Index>(f(static_cast<std::uint64_t>(x)));
    if (y < 0 || y >= dim || hit[y]) throw QspError("classical_map: not a permutation");
    hit[y] = true;
    p(y, x) = 1;
  }
  return p;
}

CommitScheme enc_qsc(const EncFamily& fam) {
  fam.validate();
  int n = fam.n();
  if (fam.keys() != (size_t{1} << fam.d)) throw QspError("enc_qsc: key count must be 2^d");
  if (n + fam.d > kSchemeCap) throw QspError("enc_qsc: cap exceeded");
  Eigen::Index dm = fam.dim;
  Eigen::Index total = dm << fam.d;
  Mat ctrl = Mat::Zero(total, total);
  for (size_t k = 0; k < fam.keys(); ++k) ctrl.block(k * dm, k * dm, dm, dm) = fam.unitaries[k];
  std::vector<std::pair<Mat, std::vector<int>>> hs;
  for (int i = 0; i < fam.d; ++i) hs.push_back({gates::H(), {n + i}});
  Mat u = ctrl * circuit_unitary(n + fam.d, hs);
  std::vector<int> c, d;
  for (int i = 0; i < n; ++i) d.push_back(i);
  for (int i = 0; i < fam.d; ++i) c.push_back(n + i);
  return make_scheme(n, fam.d, u, c, d, "enc(" + fam.name + ")");
}

CommitScheme md_extend(const CommitScheme& base, int k) {
  int m = base.c_width();
  if (base.n != m + 1) throw QspError("md_extend: base must compress by exactly one qubit");
  if (k < 1) throw QspError("md_extend: k < 1");
  int lam_b = base.lam;
  int lam = m + k * lam_b;
  int total = k + lam;
  if (total > kSchemeCap) throw QspError("md_extend: cap exceeded");
  std::vector<int> cur_c;
  for (int j = 0; j < m; ++j) cur_c.push_back(k + j);
  std::vector<int> dw;
  Mat u = identity(Eigen::Index{1} << total);
  for (int i = 0; i < k; ++i) {
    std::vector<int> phys = {i};
    phys.insert(phys.end(), cur_c.begin(), cur_c.end());
    for (int j = 0; j < lam_b; ++j) phys.push_back(k + m + i * lam_b + j);
    u = apply_qubits_left(base.unitary, u, phys);
    std::vector<int> next_c;
    for (int w : base.c_wires) next_c.push_back(phys[w]);
    for (int w : base.d_wires) dw.push_back(phys[w]);
    cur_c = next_c;
  }
  return make_scheme(k, lam, u, cur_c, dw, "md" + std::to_string(k) + "(" + base.name + ")");
}

ToyQbc toy_qbc(int mu, int d, int tau, std::uint64_t seed) {
  if (tau < d) throw QspError("toy_qbc: cannot construct injective tags with tau < d");
  if (mu < 1 || d < 0) throw QspError("toy_qbc: widths out of range");
  if (2 * mu + d + tau > kSchemeCap) throw QspError("toy_qbc: cap exceeded");
  ToyQbc q{mu, d, tau, seed, {}, {}, {}};
  Rng rng(seed);
  std::uniform_int_distribution<std::uint64_t> pd(0, (std::uint64_t{1} << mu) - 1);
  std::vector<std::uint64_t> tags(std::uint64_t{1} << tau);
  std::iota(tags.begin(), tags.end(), 0);
  std::shuffle(tags.begin(), tags.end(), rng);
  for (std::uint64_t k = 0; k < (std::uint64_t{1} << d); ++k) {
    q.pad.push_back(pd(rng));
    q.tag.push_back(tags[k]);
  }
  int nq = 2 * mu + d + tau;
  int k_off = mu, p_off = mu + d, t_off = mu + d + mu;
  std::uint64_t mmask = (std::uint64_t{1} << mu) - 1;
  std::uint64_t kmask = (std::uint64_t{1} << d) - 1;
  std::uint64_t tmask = (std::uint64_t{1} << tau) - 1;
  auto f = [&](std::uint64_t x) {
    std::uint64_t m = x & mmask, k = (x >> k_off) & kmask;
    std::uint64_t p = (x >> p_off) & mmask, t = (x >> t_off) & tmask;
    p ^= m ^ q.pad[k];
    t ^= q.tag[k];
    return m | (k << k_off) | (p << p_off) | (t << t_off);
  };
  std::vector<std::pair<Mat, std::vector<int>>> hs;
  for (int i = 0; i < d; ++i) hs.push_back({gates::H(), {k_off + i}});
  Mat u = classical_map(nq, f) * circuit_unitary(nq, hs);
  std::vector<int> c, dd;
  for (int i = 0; i < mu + d; ++i) dd.push_back(i);
  for (int i = p_off; i < nq; ++i) c.push_back(i);
  q.scheme = make_scheme(mu, d + mu + tau, u, c, dd, "toy-qbc");
  return q;
}

CommitScheme folklore_qsc(const ToyQbc& qbc) {
  if (qbc.mu != 2) throw QspError("folklore_qsc: QBC must commit to 2-bit messages");
  const CommitScheme& b = qbc.scheme;
  // Wires: M = 0, K1 = 1, K2 = 2, M'1 = 3, M'2 = 4, then the QBC ancilla.
  int total = 5 + b.lam;
  if (total > kSchemeCap) throw QspError("folklore_qsc: cap exceeded");
  Mat cz = identity(4);
  cz(3, 3) = -1;
  std::vector<int> qbc_phys = {3, 4};
  for (int j = 0; j < b.lam; ++j) qbc_phys.push_back(5 + j);
  std::vector<std::pair<Mat, std::vector<int>>> g = {
      {gates::H(), {1}}, {gates::CNOT(), {1, 3}}, {gates::H(), {2}}, {gates::CNOT(), {2, 4}},
      {gates::CNOT(), {3, 0}}, {cz, {4, 0}}, {b.unitary, qbc_phys}};
  Mat u = circuit_unitary(total, g);
  std::vector<int> c = {0}, d = {1, 2};
  for (int w : b.c_wires) c.push_back(qbc_phys[w]);
  for (int w : b.d_wires) d.push_back(qbc_phys[w]);
  return make_scheme(1, total - 1, u, c, d, "folklore");
}

Mat symmetric_basis(int p, int ell) {
  if (p < 1 || ell < 0) throw QspError("symmetric_basis: bad arguments");
  double full = std::pow(static_cast<double>(p), ell);
  if (full > 4096) throw QspError("symmetric_basis: cap exceeded");
  Eigen::Index dim = static_cast<Eigen::Index>(full);
  std::map<std::vector<int>, std::vector<Eigen::Index>, std::greater<>> types;
  for (Eigen::Index x = 0; x < dim; ++x) {
    std::vector<int> occ(p, 0);
    Eigen::Index y = x;
    for (int j = 0; j < ell; ++j) {
      occ[y % p]++;
      y /= p;
    }
    types[occ].push_back(x);
  }
  Mat v = Mat::Zero(dim, static_cast<Eigen::Index>(types.size()));
  Eigen::Index col = 0;
  for (const auto& [occ, members] : types) {
    double amp = 1.0 / std::sqrt(static_cast<double>(members.size()));
    for (auto x : members) v(x, col) = amp;
    ++col;
  }
  return v;
}

Mat schur_expand_unitary(const Mat& u, int ell) {
  int p = static_cast<int>(u.rows());
  Mat v = symmetric_basis(p, ell);
  Mat t = identity(1);
  for (int j = 0; j < ell; ++j) t = kron(u, t);
  return v.adjoint() * t * v;
}

EncFamily schur_expand(const EncFamily& fam, int ell) {
  EncFamily out;
  out.d = fam.d;
  out.name = "schur" + std::to_string(ell) + "(" + fam.name + ")";
  for (const auto& u : fam.unitaries) out.unitaries.push_back(schur_expand_unitary(u, ell));
  out.dim = static_cast<int>(out.unitaries.front().rows());
  return out;
}

std::vector<Mat> single_qubit_cliffords() {
  auto canon = [](Mat m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        if (std::abs(m(i, j)) > 1e-9) return Mat(m * (std::conj(m(i, j)) / std::abs(m(i, j))));
    return m;
  };
  std::vector<Mat> found = {identity(2)};
  std::deque<Mat> queue = {identity(2)};
  while (!queue.empty()) {
    Mat c = queue.front();
    queue.pop_front();
    for (const Mat& g : {gates::H(), gates::S()}) {
      Mat next = canon(g * c);
      bool seen = std::any_of(found.begin(), found.end(),
                              [&](const Mat& f) { return (f - next).norm() < 1e-9; });
      if (!seen) {
        found.push_back(next);
        queue.push_back(next);
      }
    }
  }
  return found;
}

}  // namespace qsp
