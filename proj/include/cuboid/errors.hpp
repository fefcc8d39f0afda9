// Copyright (c) 2026 The cuboid-detect Authors. All Rights Reserved.
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

#include <stdexcept>
#include <string>

namespace cuboid {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define CUBOID_DEFINE_ERROR(Name)                                 \
  struct Name : Error {                                           \
    explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
  }

CUBOID_DEFINE_ERROR(NonPositiveDepth);
CUBOID_DEFINE_ERROR(DegenerateBox);
CUBOID_DEFINE_ERROR(IdenticalInputs);
CUBOID_DEFINE_ERROR(DegenerateEdge);
CUBOID_DEFINE_ERROR(SingularSystem);
CUBOID_DEFINE_ERROR(LengthMismatch);
CUBOID_DEFINE_ERROR(ShapeMismatch);
CUBOID_DEFINE_ERROR(BadDimensions);
CUBOID_DEFINE_ERROR(EmptyRoi);
CUBOID_DEFINE_ERROR(EmptyDataset);
CUBOID_DEFINE_ERROR(RetryExhausted);
CUBOID_DEFINE_ERROR(ParseError);
CUBOID_DEFINE_ERROR(MissingImageFile);
CUBOID_DEFINE_ERROR(ChecksumError);
CUBOID_DEFINE_ERROR(CountMismatch);

#undef CUBOID_DEFINE_ERROR

}  // namespace cuboid
