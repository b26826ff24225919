// Copyright 2026 The sqkd authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "sqkd/common.hpp"

namespace sqkd::gates {

inline Eigen::Matrix2cd I() { return Eigen::Matrix2cd::Identity(); }

inline Eigen::Matrix2cd X() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}

inline Eigen::Matrix2cd Y() {
  Eigen::Matrix2cd m;
  m << cx(0, 0), cx(0, -1), cx(0, 1), cx(0, 0);
  return m;
}

inline Eigen::Matrix2cd Z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

inline Eigen::Matrix2cd H() {
  Eigen::Matrix2cd m;
  const double r = 1.0 / std::sqrt(2.0);
  m << r, r, r, -r;
  return m;
}

// R(theta)|0> = cos|0> + sin|1>, R(theta)|1> = -sin|0> + cos|1>.
inline Eigen::Matrix2cd rotation(double theta) {
  Eigen::Matrix2cd m;
  m << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return m;
}

inline Eigen::Matrix2cd phase(double phi) {
  Eigen::Matrix2cd m;
  m << cx(1, 0), cx(0, 0), cx(0, 0), std::polar(1.0, phi);
  return m;
}

// Two-qubit controlled-U with qubit 0 of the matrix index as the target
// and qubit 1 as the control (index = control<<1 | target).
inline Eigen::Matrix4cd controlled(const Eigen::Matrix2cd& u) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Identity();
  m.block<2, 2>(2, 2) = u;
  return m;
}

}  // namespace sqkd::gates
