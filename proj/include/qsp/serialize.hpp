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

#ifndef QSP_SERIALIZE_HPP_
#define QSP_SERIALIZE_HPP_

#include <string>

#include "json.hpp"
#include "qsp/qsim.hpp"

namespace qsp {

using Json = nlohmann::ordered_json;

Json layout_to_json(const RegisterLayout& l);
RegisterLayout layout_from_json(const Json& j);
/// {layout, kind, real[], imag[]}; matrices row-major.
Json state_to_json(const QuantumState& s);
QuantumState state_from_json(const Json& j);
Json matrix_to_json(const Mat& m);
Mat matrix_from_json(const Json& j);
/// Short stable digest of a matrix, rounded to 1e-9.
std::string matrix_hash(const Mat& m);

}  // namespace qsp

#endif  // QSP_SERIALIZE_HPP_
