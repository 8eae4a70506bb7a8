/*
 * Copyright 2026 The rmpc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RMPC_STATUS_HPP_
#define RMPC_STATUS_HPP_

#include <stdexcept>
#include <string>

namespace rmpc {

// Thrown when a solver or integrator produces non-finite numbers.
class NumericalBreakdown : public std::runtime_error {
 public:
  explicit NumericalBreakdown(const std::string& what) : std::runtime_error(what) {}
};

enum class SolveStatus {
  kConverged,
  kIterationCapReached,  // diagnostic only; the best iterate is still returned
  kStalled,              // violation stopped improving at the largest penalty
};

inline const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kIterationCapReached:
      return "iteration_cap_reached";
    case SolveStatus::kStalled:
      return "stalled";
  }
  return "unknown";
}

}  // namespace rmpc

#endif  // RMPC_STATUS_HPP_
