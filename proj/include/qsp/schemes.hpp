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

#ifndef QSP_SCHEMES_HPP_
#define QSP_SCHEMES_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qsp/qsc.hpp"

namespace qsp {

/// Family {U_k} of message unitaries indexed by key.
struct EncFamily {
  int d = 0;    // key bits
  int dim = 1;  // message dimension
  std::vector<Mat> unitaries;
  std::string name;

  int n() const;  // message qubits; dim must be a power of two
  size_t keys() const { return unitaries.size(); }
  void validate() const;
};

/// avg_k U_k rho U_k^dag
Mat twirl(const EncFamily& fam, const Mat& rho);

EncFamily pauli_pad_family(int n);
/// X^r Z^s on n qubits; bit i of r and s addresses qubit i.
Mat pauli(int n, std::uint64_t r, std::uint64_t s);

struct ToyPrg {
  int d = 0;
  int out_bits = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> table;
};

/// Table filled by a counter-mode mix of a fixed public permutation.
ToyPrg make_toy_prg(int d, int out_bits, std::uint64_t seed);
/// G = identity on d-bit keys.
ToyPrg identity_prg(int d);
/// U_k = X^{G0(k)} Z^{G1(k)}, G0 the low n output bits and G1 the high n.
EncFamily prg_pad_family(const ToyPrg& prg, int n);

/// Com = sum_k (|k><k| H^{⊗d})_W ⊗ (U_k)_M with C = W and D = M.
CommitScheme enc_qsc(const EncFamily& fam);

/// Merkle-Damgard chaining of a base scheme that compresses m + 1 message
/// qubits to m commitment qubits.
CommitScheme md_extend(const CommitScheme& base, int k);

struct ToyQbc {
  int mu = 0;
  int d = 0;
  int tau = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> pad;  // {0,1}^d -> {0,1}^mu
  std::vector<std::uint64_t> tag;  // {0,1}^d -> {0,1}^tau, injective
  CommitScheme scheme;             // wires M, K, P, T; C = (P,T), D = (M,K)
};

ToyQbc toy_qbc(int mu, int d, int tau, std::uint64_t seed);
/// One-qubit QSC from a two-bit QBC by teleportation-style padding.
CommitScheme folklore_qsc(const ToyQbc& qbc);

/// Orthonormal occupation-number basis of the symmetric subspace of
/// (C^p)^{⊗ell}, as the columns of a p^ell x C(ell+p-1, ell) isometry.
Mat symmetric_basis(int p, int ell);
Mat schur_expand_unitary(const Mat& u, int ell);
EncFamily schur_expand(const EncFamily& fam, int ell);
/// The 24 single-qubit Clifford unitaries modulo global phase.
std::vector<Mat> single_qubit_cliffords();

/// Product of gates applied in order to nq qubits.
Mat circuit_unitary(int nq, const std::vector<std::pair<Mat, std::vector<int>>>& gates);
/// Permutation matrix of a reversible map on nq bits.
Mat classical_map(int nq, const std::function<std::uint64_t(std::uint64_t)>& f);

}  // namespace qsp

#endif  // QSP_SCHEMES_HPP_
