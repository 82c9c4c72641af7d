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

#include "qsp/serialize.hpp"

#include <cmath>
#include <cstdio>

namespace qsp {

Json layout_to_json(const RegisterLayout& l) {
  return Json{{"names", l.names}, {"widths", l.widths}};
}

RegisterLayout layout_from_json(const Json& j) {
  return RegisterLayout(j.at("names").get<std::vector<std::string>>(),
                        j.at("widths").get<std::vector<int>>());
}

Json matrix_to_json(const Mat& m) {
  std::vector<double> re, im;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      re.push_back(m(i, k).real());
      im.push_back(m(i, k).imag());
    }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"real", re}, {"imag", im}};
}

Mat matrix_from_json(const Json& j) {
  Eigen::Index r = j.at("rows").get<Eigen::Index>(), c = j.at("cols").get<Eigen::Index>();
  auto re = j.at("real").get<std::vector<double>>();
  auto im = j.at("imag").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(re.size()) != r * c || im.size() != re.size())
    throw QspError("matrix: entry count mismatch");
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = cd(re[i * c + k], im[i * c + k]);
  return m;
}

Json state_to_json(const QuantumState& s) {
  Json j;
  j["layout"] = layout_to_json(s.layout());
  j["kind"] = s.is_pure() ? "pure" : "mixed";
  std::vector<double> re, im;
  if (s.is_pure()) {
    for (Eigen::Index i = 0; i < s.vec().size(); ++i) {
      re.push_back(s.vec()(i).real());
      im.push_back(s.vec()(i).imag());
    }
  } else {
    const Mat& m = s.mat();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index k = 0; k < m.cols(); ++k) {
        re.push_back(m(i, k).real());
        im.push_back(m(i, k).imag());
      }
  }
  j["real"] = re;
  j["imag"] = im;
  return j;
}

QuantumState state_from_json(const Json& j) {
  RegisterLayout l = layout_from_json(j.at("layout"));
  auto re = j.at("real").get<std::vector<double>>();
  auto im = j.at("imag").get<std::vector<double>>();
  if (re.size() != im.size()) throw QspError("state: real/imag length mismatch");
  Eigen::Index d = Eigen::Index{1} << l.total();
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "pure") {
    if (static_cast<Eigen::Index>(re.size()) != d) throw QspError("state: length mismatch");
    Vec v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = cd(re[i], im[i]);
    return QuantumState::pure(l, v);
  }
  if (kind != "mixed") throw QspError("state: unknown kind " + kind);
  if (static_cast<Eigen::Index>(re.size()) != d * d) throw QspError("state: length mismatch");
  Mat m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index k = 0; k < d; ++k) m(i, k) = cd(re[i * d + k], im[i * d + k]);
  return QuantumState::mixed(l, m);
}

std::string matrix_hash(const Mat& m) {
  // FNV-1a over entries rounded to 1e-9.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](long long v) {
    for (int b = 0; b < 8; ++b) {
      h ^= static_cast<std::uint64_t>((v >> (8 * b)) & 0xff);
      h *= 1099511628211ULL;
    }
  };
  mix(m.rows());
  mix(m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      mix(std::llround(m(i, k).real() * 1e9));
      mix(std::llround(m(i, k).imag() * 1e9));
    }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qsp
