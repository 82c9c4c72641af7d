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

#include <gtest/gtest.h>

#include <cmath>
#include <set>

namespace qsp {
namespace {

QuantumState message(int n, Rng& rng) {
  return QuantumState::pure(RegisterLayout({"M"}, {n}), random_state(1 << n, rng));
}

void expect_complete(const CommitScheme& sch, Rng& rng, int trials = 20) {
  for (int i = 0; i < trials; ++i) {
    auto msg = message(sch.n, rng);
    auto r = open_verify(sch, commit(sch, msg));
    EXPECT_NEAR(r.accept_prob, 1.0, 1e-9);
    EXPECT_GE(fidelity(msg, r.message_state), 1 - 1e-9);
  }
}

TEST(PauliPad, ZeroKeyIsIdentity) {
  auto fam = pauli_pad_family(1);
  EXPECT_EQ(fam.keys(), 4u);
  EXPECT_LT((fam.unitaries[0] - identity(2)).norm(), 1e-15);
}

TEST(PauliPad, TwirlIsMaximallyMixed) {
  Rng rng(1);
  for (int n = 1; n <= 3; ++n) {
    auto fam = pauli_pad_family(n);
    fam.validate();
    for (int i = 0; i < 5; ++i) {
      Mat rho = random_density(1 << n, 2, rng);
      EXPECT_LT((twirl(fam, rho) - identity(1 << n) / double(1 << n)).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(PrgPad, IdentityPrgEqualsPauliPad) {
  auto a = prg_pad_family(identity_prg(4), 2);
  auto b = pauli_pad_family(2);
  ASSERT_EQ(a.keys(), b.keys());
  for (size_t k = 0; k < a.keys(); ++k) EXPECT_LT((a.unitaries[k] - b.unitaries[k]).norm(), 1e-15);
}

TEST(PrgPad, WidthMismatchAndDeterminism) {
  EXPECT_THROW(prg_pad_family(make_toy_prg(2, 3, 1), 2), QspError);
  auto g1 = make_toy_prg(3, 4, 99), g2 = make_toy_prg(3, 4, 99);
  EXPECT_EQ(g1.table, g2.table);
  for (auto v : g1.table) EXPECT_LT(v, 16u);
}

TEST(PrgPad, DecryptAfterEncryptIsIdentity) {
  auto fam = prg_pad_family(make_toy_prg(2, 4, 5), 2);
  for (const auto& u : fam.unitaries) EXPECT_LT((u.adjoint() * u - identity(4)).norm(), 1e-12);
}

TEST(EncQsc, HonestCommitmentMatchesKeyedSuperposition) {
  Rng rng(2);
  auto fam = prg_pad_family(make_toy_prg(2, 4, 11), 2);
  auto sch = enc_qsc(fam);
  EXPECT_EQ(sch.c_width(), 2);
  EXPECT_EQ(sch.d_width(), 2);
  EXPECT_FALSE(sch.succinct());
  Vec psi = random_state(4, rng);
  auto c = commit(sch, QuantumState::pure(RegisterLayout({"M"}, {2}), psi));
  // Layout (C, D) with C least significant: index = k + 4 * x.
  Vec expected = Vec::Zero(16);
  for (int k = 0; k < 4; ++k) {
    Vec ukpsi = fam.unitaries[k] * psi;
    for (int x = 0; x < 4; ++x) expected(k + 4 * x) = ukpsi(x) / 2.0;
  }
  EXPECT_LT((c.vec() - expected).norm(), 1e-12);
}

TEST(EncQsc, DecommitmentMarginalIsTwirl) {
  Rng rng(3);
  for (const auto& fam : {pauli_pad_family(1), prg_pad_family(make_toy_prg(2, 4, 3), 2),
                          prg_pad_family(make_toy_prg(1, 4, 8), 2)}) {
    auto sch = enc_qsc(fam);
    Mat rho = random_density(fam.dim, 2, rng);
    auto c = commit(sch, QuantumState::mixed(RegisterLayout({"M"}, {fam.n()}), rho));
    EXPECT_LT((partial_trace(c, {"D"}).mat() - twirl(fam, rho)).norm(), 1e-9);
  }
}

TEST(EncQsc, HalvingFixtureIsSuccinctAndComplete) {
  Rng rng(4);
  auto sch = enc_qsc(prg_pad_family(make_toy_prg(1, 4, 8), 2));
  EXPECT_TRUE(sch.succinct());
  EXPECT_EQ(sch.c_width(), 1);
  expect_complete(sch, rng);
}

TEST(MdExtend, RejectsNonCompressingBase) {
  EXPECT_THROW(md_extend(enc_qsc(pauli_pad_family(1)), 2), QspError);
}

TEST(MdExtend, SingleStepIsBaseWithZeroChain) {
  Rng rng(5);
  auto base = enc_qsc(prg_pad_family(make_toy_prg(1, 4, 8), 2));
  auto md = md_extend(base, 1);
  EXPECT_EQ(md.n, 1);
  EXPECT_EQ(md.c_width(), 1);
  EXPECT_EQ(md.d_width(), base.d_width());
  for (int i = 0; i < 5; ++i) {
    Vec x = random_state(2, rng);
    Vec padded = Vec::Zero(4);
    padded.head(2) = x;  // (M_0, C_0 = 0) with M_0 least significant
    auto a = commit(md, QuantumState::pure(RegisterLayout({"M"}, {1}), x));
    auto b = commit(base, QuantumState::pure(RegisterLayout({"M"}, {2}), padded));
    EXPECT_LT((a.vec() - b.vec()).norm(), 1e-12);
  }
}

TEST(MdExtend, ChainsAreCompleteUpToFourSteps) {
  Rng rng(6);
  auto base = enc_qsc(prg_pad_family(make_toy_prg(1, 4, 8), 2));
  for (int k = 2; k <= 4; ++k) {
    auto md = md_extend(base, k);
    EXPECT_EQ(md.c_width(), 1);
    EXPECT_EQ(md.d_width(), k * (base.lam + 1));
    expect_complete(md, rng, 5);
  }
}

TEST(ToyQbc, TagsInjectiveAndCommitmentDeterminesMessageAndKey) {
  auto q = toy_qbc(1, 3, 3, 17);
  std::set<std::uint64_t> tags(q.tag.begin(), q.tag.end());
  EXPECT_EQ(tags.size(), 8u);
  EXPECT_THROW(toy_qbc(1, 3, 2, 1), QspError);
  // Each (m, k) yields a distinct computational C value.
  Mat iso = commit_isometry(q.scheme);
  int dc = 1 << q.scheme.c_width();
  for (int m = 0; m < 2; ++m) {
    std::set<int> cs;
    for (Eigen::Index row = 0; row < iso.rows(); ++row)
      if (std::abs(iso(row, m)) > 1e-12) cs.insert(static_cast<int>(row % dc));
    EXPECT_EQ(cs.size(), 8u);
  }
}

TEST(ToyQbc, CompleteOnBasisMessages) {
  auto q = toy_qbc(2, 2, 2, 3);
  for (std::uint64_t m = 0; m < 4; ++m) {
    auto r = open_verify(q.scheme, commit(q.scheme, QuantumState::basis(RegisterLayout({"M"}, {2}), m)));
    EXPECT_NEAR(r.accept_prob, 1.0, 1e-12);
    EXPECT_NEAR(r.message_state.mat()(m, m).real(), 1.0, 1e-12);
  }
}

TEST(Folklore, CompleteOnRandomMessages) {
  Rng rng(7);
  auto sch = folklore_qsc(toy_qbc(2, 1, 1, 5));
  EXPECT_EQ(sch.n, 1);
  EXPECT_EQ(sch.c_width(), 1 + 3);
  expect_complete(sch, rng, 10);
  EXPECT_THROW(folklore_qsc(toy_qbc(1, 1, 1, 5)), QspError);
}

TEST(Folklore, HonestCommitmentMatchesPaddedDisplay) {
  Rng rng(8);
  auto q = toy_qbc(2, 1, 1, 5);
  auto sch = folklore_qsc(q);
  Vec psi = random_state(2, rng);
  Vec got = sch.unitary.leftCols(2) * psi;
  Vec expected = Vec::Zero(got.size());
  for (int r = 0; r < 2; ++r)
    for (int s = 0; s < 2; ++s) {
      Vec m = pauli(1, 0, s) * pauli(1, r, 0) * psi;
      Vec qbc = q.scheme.unitary.col(r + 2 * s);
      for (Eigen::Index l = 0; l < qbc.size(); ++l)
        for (int x = 0; x < 2; ++x) expected(x + 2 * r + 4 * s + 8 * l) += 0.5 * m(x) * qbc(l);
    }
  EXPECT_LT((got - expected).norm(), 1e-12);
}

TEST(Schur, DimensionsAndIdentityAtOneCopy) {
  EXPECT_EQ(symmetric_basis(2, 2).cols(), 3);
  EXPECT_EQ(symmetric_basis(2, 3).cols(), 4);
  EXPECT_EQ(symmetric_basis(3, 2).cols(), 6);
  Rng rng(9);
  Mat u = haar_matrix(2, rng);
  EXPECT_LT((schur_expand_unitary(u, 1) - u).norm(), 1e-12);
}

TEST(Schur, BasisOrthonormalAndMultiplicative) {
  Mat v = symmetric_basis(2, 2);
  EXPECT_LT((v.adjoint() * v - identity(3)).norm(), 1e-12);
  Rng rng(10);
  for (int i = 0; i < 20; ++i) {
    Mat a = haar_matrix(2, rng), b = haar_matrix(2, rng);
    Mat lhs = schur_expand_unitary(a, 2) * schur_expand_unitary(b, 2);
    EXPECT_LT((lhs - schur_expand_unitary(a * b, 2)).norm(), 1e-9);
  }
}

TEST(Schur, CliffordTwirlOfSymmetricSubspace) {
  auto cl = single_qubit_cliffords();
  EXPECT_EQ(cl.size(), 24u);
  EncFamily fam{5, 2, cl, "clifford"};
  auto ex = schur_expand(fam, 2);
  EXPECT_EQ(ex.dim, 3);
  Rng rng(11);
  for (int i = 0; i < 10; ++i) {
    Mat rho = random_density(3, 2, rng);
    EXPECT_LT((twirl(ex, rho) - identity(3) / 3.0).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Circuit, ClassicalMapRejectsNonPermutation) {
  EXPECT_THROW(classical_map(2, [](std::uint64_t) { return std::uint64_t{0}; }), QspError);
}

}  // namespace
}  // namespace qsp
