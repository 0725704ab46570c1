// Copyright 2026 The Steer Authors.
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

#ifndef STEER_ERRORS_HPP_
#define STEER_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace steer {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define STEER_DEFINE_ERROR(Name)          \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

STEER_DEFINE_ERROR(ShapeError);
STEER_DEFINE_ERROR(ValueError);
STEER_DEFINE_ERROR(DegenerateDistance);
STEER_DEFINE_ERROR(InconsistentInstance);
STEER_DEFINE_ERROR(SingleClassError);
STEER_DEFINE_ERROR(DivergenceError);
STEER_DEFINE_ERROR(InsufficientSamples);
STEER_DEFINE_ERROR(NumericError);
STEER_DEFINE_ERROR(EmptyPoolError);
STEER_DEFINE_ERROR(FeatureUnsupportedError);
STEER_DEFINE_ERROR(NoAdviceAvailable);
STEER_DEFINE_ERROR(DegenerateTest);
STEER_DEFINE_ERROR(NotFound);

#undef STEER_DEFINE_ERROR

}  // namespace steer

#endif  // STEER_ERRORS_HPP_
