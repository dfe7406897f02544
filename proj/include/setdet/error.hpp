/* Copyright 2026 The setdet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef SETDET_ERROR_HPP_
#define SETDET_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace setdet {

// Raised for contract violations on inputs (bad shapes, infeasible configs,
// malformed files). Messages are single-line and suitable for CLI output.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace setdet

#endif  // SETDET_ERROR_HPP_
