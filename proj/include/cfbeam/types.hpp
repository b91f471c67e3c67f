// SPDX-License-Identifier: Apache-2.0
//
// cfbeam: joint analog beam selection and digital precoding for cell-free mm-wave networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef CFBEAM_TYPES_HPP
#define CFBEAM_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cfbeam {

template <typename Real>
using CVec = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using CMat = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

using Complex = std::complex<double>;
using CVector = CVec<double>;
using CMatrix = CMat<double>;

// Beam index per (AP, user): rows are APs, columns are users. A negative
// entry marks a link whose RF chain is switched off.
using IndexMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
using IndexRow = Eigen::Matrix<int, 1, Eigen::Dynamic>;
using ActiveMask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Error hierarchy. Every failure the library reports derives from Error so
// the CLI can catch one type and exit non-zero.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidGeometry : Error {
  using Error::Error;
};
struct ConfigConflict : Error {
  using Error::Error;
};
struct SingularEffectiveChannel : Error {
  using Error::Error;
};
struct OracleBudgetExceeded : Error {
  using Error::Error;
};
struct BCCExhausted : Error {
  using Error::Error;
};
struct InvalidAssignment : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};

}  // namespace cfbeam

#endif  // CFBEAM_TYPES_HPP
