// Copyright 2026 The rmpc Authors
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

#ifndef RMPC_TESTS_SCALAR_TOY_HPP_
#define RMPC_TESTS_SCALAR_TOY_HPP_

#include <Eigen/Core>

#include "rmpc/ocp.hpp"

namespace rmpc::testing {

// Scalar integrator x' = u on [0, T] with one constant control:
//   J(u) = int_0^T q x^2 + p u^2 dt + 1/2 x(T)^2,  x(t) = x0 + u t,
// minimized at u* = -(q x0 T^2 + x0 T) / (2 q T^3 / 3 + 2 p T + T^2).
struct ScalarToy {
  double x0 = 1.0;
  double T = 2.0;
  double q = 0.2;
  double p = 0.4;
  double bound = 10.0;
  bool pin_terminal = false;  // adds x(T) = 0
  bool cap_terminal = false;  // adds x(T) <= 0.3

  int dimension() const { return 1; }
  int num_eq() const { return pin_terminal ? 1 : 0; }
  int num_ineq() const { return cap_terminal ? 1 : 0; }
  Eigen::VectorXd lower() const { return Eigen::VectorXd::Constant(1, -bound); }
  Eigen::VectorXd upper() const { return Eigen::VectorXd::Constant(1, bound); }
  void evaluate(const Eigen::VectorXd& z, NlpEval& out) const {
    const double u = z(0);
    const double xt = x0 + u * T;
    out.f = q * (x0 * x0 * T + x0 * u * T * T + u * u * T * T * T / 3) + p * u * u * T + 0.5 * xt * xt;
    out.grad = Eigen::VectorXd::Constant(1, q * (x0 * T * T + 2 * u * T * T * T / 3) + 2 * p * u * T + xt * T);
    out.c_eq.resize(num_eq());
    out.jac_eq.resize(num_eq(), 1);
    if (pin_terminal) {
      out.c_eq(0) = xt;
      out.jac_eq(0, 0) = T;
    }
    out.c_in.resize(num_ineq());
    out.jac_in.resize(num_ineq(), 1);
    if (cap_terminal) {
      out.c_in(0) = xt - 0.3;
      out.jac_in(0, 0) = T;
    }
  }
  double analytic() const { return -(q * x0 * T * T + x0 * T) / (2 * q * T * T * T / 3 + 2 * p * T + T * T); }
};

}  // namespace rmpc::testing

#endif  // RMPC_TESTS_SCALAR_TOY_HPP_
