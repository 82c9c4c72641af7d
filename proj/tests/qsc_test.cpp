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

#include "qsp/qsc.hpp"

#include <gtest/gtest.h>

#include <cmath>

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

TEST(Commit, IdentitySchemeBasisMessage) {
  auto sch = identity_scheme(1, 1);
  auto c = commit(sch, QuantumState::basis(RegisterLayout({"M"}, {1}), 1));
  // Layout (C, D): index = c + 2 d.
  EXPECT_NEAR(std::abs(c.vec()(2)), 1.0, 1e-12);
  auto r = open_verify(sch, c);
  EXPECT_NEAR(r.accept_prob, 1.0, 1e-12);
  EXPECT_NEAR(r.message_state.mat()(1, 1).real(), 1.0, 1e-12);
}

TEST(Commit, WidthMismatch) {
  auto sch = identity_scheme(2, 1);
  EXPECT_THROW(commit(sch, QuantumState::basis(RegisterLayout({"M"}, {1}), 0)), QspError);
}

TEST(Commit, CarriesAuxiliaryRegisters) {
  Rng rng(1);
  auto sch = random_scheme(1, 2, 1, rng);
  RegisterLayout l({"M", "E"}, {1, 1});
  auto msg = QuantumState::pure(l, random_state(4, rng));
  auto c = commit(sch, msg);
  EXPECT_EQ(c.layout().names, (std::vector<std::string>{"C", "D", "E"}));
  auto r = open_verify(sch, c);
  EXPECT_NEAR(r.accept_prob, 1.0, 1e-9);
  auto back = reorder(partial_trace(r.post_state, {"M", "E"}), {"M", "E"});
  EXPECT_GE(fidelity(msg, back), 1 - 1e-9);
}

TEST(OpenVerify, RandomSchemesAreComplete) {
  Rng rng(2);
  for (int i = 0; i < 5; ++i) expect_complete(random_scheme(2, 2, 2, rng), rng);
}

TEST(OpenVerify, OrthogonalAndHalfMixture) {
  Rng rng(3);
  auto sch = random_scheme(1, 1, 1, rng);
  Mat cu = committed_unitary(sch);
  // Columns with W = 1 span the invalid subspace.
  Vec bad = cu.col(2);
  auto joint_bad = QuantumState::pure(cd_layout(sch), bad);
  EXPECT_NEAR(open_verify(sch, joint_bad).accept_prob, 0.0, 1e-12);
  Vec good = cu.col(0);
  Mat rho = 0.5 * good * good.adjoint() + 0.5 * bad * bad.adjoint();
  EXPECT_NEAR(open_verify(sch, QuantumState::mixed(cd_layout(sch), rho)).accept_prob, 0.5, 1e-12);
}

TEST(Dual, InvolutionAndWidths) {
  Rng rng(4);
  auto sch = random_scheme(2, 1, 1, rng);
  auto dd = dual(dual(sch));
  EXPECT_EQ(dd.c_wires, sch.c_wires);
  EXPECT_EQ(dd.d_wires, sch.d_wires);
  EXPECT_EQ(dd.name, sch.name);
  EXPECT_EQ(dual(sch).c_width(), sch.d_width());
  auto dr = dual(reveal_scheme(1));
  EXPECT_EQ(dr.c_width(), 1);
  EXPECT_EQ(dr.d_width(), 0);
}

TEST(Parallel, SingleIsIdentityAndEmptyThrows) {
  Rng rng(5);
  auto sch = random_scheme(1, 1, 1, rng);
  auto p = parallel({sch});
  EXPECT_LT((p.unitary - sch.unitary).norm(), 1e-12);
  EXPECT_THROW(parallel({}), QspError);
}

TEST(Parallel, ThreeRandomSchemesAreUnitaryAndComplete) {
  Rng rng(6);
  auto p = parallel({random_scheme(1, 1, 1, rng), random_scheme(1, 2, 2, rng),
                     random_scheme(1, 1, 0, rng)});
  EXPECT_EQ(p.n, 3);
  EXPECT_EQ(p.lam, 4);
  EXPECT_EQ(p.c_width(), 3);
  EXPECT_LT((p.unitary * p.unitary.adjoint() - identity(128)).norm(), 1e-9);
  expect_complete(p, rng, 5);
}

TEST(Parallel, ProductMessageCommitsBlockwise) {
  Rng rng(7);
  auto a = random_scheme(1, 1, 1, rng), b = random_scheme(1, 1, 1, rng);
  auto p = parallel({a, b});
  Vec x = random_state(2, rng), y = random_state(2, rng);
  auto joint = commit(p, QuantumState::pure(RegisterLayout({"M"}, {2}), kron(y, x)));
  // Reduced C of a product commitment is the product of the component C's.
  auto ca = partial_trace(commit(a, QuantumState::pure(RegisterLayout({"M"}, {1}), x)), {"C"});
  auto cb = partial_trace(commit(b, QuantumState::pure(RegisterLayout({"M"}, {1}), y)), {"C"});
  Mat expected = kron(cb.mat(), ca.mat());
  EXPECT_LT((partial_trace(joint, {"C"}).mat() - expected).norm(), 1e-9);
}

TEST(Compile, OneRoundWrapperReproducesScheme) {
  Rng rng(8);
  auto sch = random_scheme(1, 2, 1, rng);
  auto c = compile_interactive(one_round(sch));
  EXPECT_LT((c.unitary - sch.unitary).norm(), 1e-12);
  EXPECT_EQ(c.c_wires, sch.c_wires);
  EXPECT_EQ(c.d_wires, sch.d_wires);
}

InteractiveRounds two_round_toy(Rng& rng) {
  // Wires: M = 0, W = 1, 2, 3. The receiver starts with wire 3.
  InteractiveRounds ir;
  ir.n = 1;
  ir.lam = 3;
  ir.receiver_initial = {3};
  Round r1;
  r1.receiver_op = gates::H();
  r1.receiver_wires = {3};
  r1.to_sender = {3};
  r1.sender_op = haar_matrix(8, rng);
  r1.sender_wires = {0, 1, 3};
  r1.to_receiver = {1};
  Round r2;
  r2.receiver_op = haar_matrix(2, rng);
  r2.receiver_wires = {1};
  r2.to_sender = {};
  r2.sender_op = haar_matrix(8, rng);
  r2.sender_wires = {0, 2, 3};
  r2.to_receiver = {2};
  ir.rounds = {r1, r2};
  return ir;
}

TEST(Compile, TwoRoundToyIsUnitaryAndMatchesReplay) {
  Rng rng(9);
  auto ir = two_round_toy(rng);
  auto sch = compile_interactive(ir);
  EXPECT_LT((sch.unitary * sch.unitary.adjoint() - identity(16)).norm(), 1e-9);
  EXPECT_EQ(sch.c_wires, (std::vector<int>{1, 2}));
  for (int i = 0; i < 5; ++i) {
    auto msg = message(1, rng);
    auto a = commit(sch, msg), b = replay_interactive(ir, msg);
    EXPECT_LT((a.vec() - b.vec()).norm(), 1e-9);
    EXPECT_NEAR(open_verify(sch, b).accept_prob, 1.0, 1e-9);
  }
}

TEST(Compile, OwnershipViolationsRejected) {
  Rng rng(10);
  auto ir = two_round_toy(rng);
  ir.rounds[0].receiver_wires = {0};
  EXPECT_THROW(compile_interactive(ir), QspError);
  auto ir2 = two_round_toy(rng);
  ir2.rounds[1].sender_wires = {0, 1, 3};
  EXPECT_THROW(compile_interactive(ir2), QspError);
}

TEST(Scheme, InvalidPartitionRejected) {
  EXPECT_THROW(make_scheme(1, 1, identity(4), {0}, {0}, "bad"), QspError);
  EXPECT_THROW(make_scheme(1, 1, identity(4), {0}, {}, "bad"), QspError);
}

}  // namespace
}  // namespace qsp
