// Copyright 2026 The Authors.
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

// Deterministic number formatting shared by the writers.

#ifndef VPPFAIR_FORMAT_HPP_
#define VPPFAIR_FORMAT_HPP_

#include <cstdio>
#include <string>

namespace vppfair {

/// %.12g, with negative zero printed as "0".
inline std::string format_double(double v) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace vppfair

#endif  // VPPFAIR_FORMAT_HPP_
