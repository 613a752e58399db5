/* Copyright 2026 The CascadeV Authors. All Rights Reserved.

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

#ifndef CASCADEV_ERRORS_HPP_
#define CASCADEV_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace cascadev {

// Broad failure category. The CLI maps these onto process exit codes.
enum class ErrorKind {
  kInvalidArgument,
  kConfig,
  kData,
  kNumerical,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define CASCADEV_DEFINE_ERROR(Name, Kind)                \
  class Name : public Error {                            \
   public:                                               \
    explicit Name(const std::string& what)               \
        : Error(ErrorKind::Kind, what) {}                \
  }

CASCADEV_DEFINE_ERROR(InvalidArgumentError, kInvalidArgument);
CASCADEV_DEFINE_ERROR(InvalidDeltasError, kNumerical);
CASCADEV_DEFINE_ERROR(BehindCameraError, kNumerical);
CASCADEV_DEFINE_ERROR(WrongVariantError, kInvalidArgument);
CASCADEV_DEFINE_ERROR(StageRangeError, kInvalidArgument);
CASCADEV_DEFINE_ERROR(EmptyInputError, kData);
CASCADEV_DEFINE_ERROR(DimensionMismatchError, kData);
CASCADEV_DEFINE_ERROR(MisalignmentError, kData);
CASCADEV_DEFINE_ERROR(PlacementError, kConfig);
CASCADEV_DEFINE_ERROR(PredictorOutputError, kNumerical);
CASCADEV_DEFINE_ERROR(TrainingDivergedError, kNumerical);
CASCADEV_DEFINE_ERROR(ConfigError, kConfig);
CASCADEV_DEFINE_ERROR(DataError, kData);
CASCADEV_DEFINE_ERROR(SchemaVersionError, kData);

#undef CASCADEV_DEFINE_ERROR

}  // namespace cascadev

#endif  // CASCADEV_ERRORS_HPP_
