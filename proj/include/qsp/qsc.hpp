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

#ifndef QSP_QSC_HPP_
#define QSP_QSC_HPP_

#include <string>
#include <vector>

#include "qsp/qsim.hpp"

namespace qsp {

/// Largest n + lam for which a dense commitment unitary is materialized.
constexpr int kSchemeCap = 11;

/// Commitment unitary on wires (M = 0..n-1, W = n..n+lam-1). The same wire
/// indices label the outputs, which are split into C and D.
struct CommitScheme {
  int n = 0;
  int lam = 0;
  Mat unitary;
  std::vector<int> c_wires;
  std::vector<int> d_wires;
  std::string name;

  int total() const { return n + lam; }
  int c_width() const { return static_cast<int>(c_wires.size()); }
  int d_width() const { return static_cast<int>(d_wires.size()); }
  bool succinct() const { return c_width() < n; }
  void validate() const;
};

CommitScheme make_scheme(int n, int lam, Mat unitary, std::vector<int> c_wires,
                         std::vector<int> d_wires, std::string name);

/// Com = I with C = W and D = M.
CommitScheme identity_scheme(int n, int lam);
/// identity_scheme(n, 0): the message itself is the decommitment.
CommitScheme reveal_scheme(int n);
/// Haar-random commitment unitary with a random C/D split of c_width wires.
CommitScheme random_scheme(int n, int lam, int c_width, Rng& rng);

/// P·Com, where P moves C wires to the least significant positions,
/// followed by D wires.
Mat committed_unitary(const CommitScheme& sch);
/// Columns of committed_unitary with W = 0: an isometry from M to (C, D).
Mat commit_isometry(const CommitScheme& sch);

RegisterLayout cd_layout(const CommitScheme& sch);
QuantumState commit(const CommitScheme& sch, const QuantumState& msg);

struct OpeningResult {
  double accept_prob = 0;
  QuantumState message_state;  // on M, normalized given accept
  QuantumState post_state;     // accept branch on (M, W, other registers)
};

/// `joint` must contain registers "C" and "D"; any other registers are
/// carried through untouched.
OpeningResult open_verify(const CommitScheme& sch, const QuantumState& joint);

CommitScheme dual(const CommitScheme& sch);
CommitScheme parallel(const std::vector<CommitScheme>& schemes);

/// One round of an interactive commit phase: the receiver applies
/// receiver_op to receiver_wires and sends to_sender; the sender applies
/// sender_op to sender_wires and sends to_receiver.
struct Round {
  Mat receiver_op;
  std::vector<int> receiver_wires;
  std::vector<int> to_sender;
  Mat sender_op;
  std::vector<int> sender_wires;
  std::vector<int> to_receiver;
};

struct InteractiveRounds {
  int n = 0;
  int lam = 0;
  std::vector<int> receiver_initial;  // ancilla wires the receiver starts with
  std::vector<Round> rounds;
};

struct Ownership {
  std::vector<int> receiver;
  std::vector<int> sender;
};

/// Checks that every operation only touches wires its party holds.
Ownership validate_rounds(const InteractiveRounds& ir);
CommitScheme compile_interactive(const InteractiveRounds& ir, std::string name = "compiled");
/// Runs the rounds party by party on msg ⊗ |0^lam> and returns the joint
/// state on (C = receiver wires, D = sender wires), plus any extra registers
/// of msg beyond "M".
QuantumState replay_interactive(const InteractiveRounds& ir, const QuantumState& msg);
/// A single round wrapping a non-interactive scheme: R_1 = I, S_1 = Com, the
/// sender then hands over C.
InteractiveRounds one_round(const CommitScheme& sch);

}  // namespace qsp

#endif  // QSP_QSC_HPP_
