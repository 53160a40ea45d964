/*
 * Copyright 2026 The monogami Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MONOGAMI_ERRORS_H_
#define MONOGAMI_ERRORS_H_

#include <stdexcept>
#include <string>
#include <utility>

namespace monogami {

// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration, arguments or preconditions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// File system or parse failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// A tree path touches more features than the term store can represent, or a
// model violates its own constraint spec.
class StructureError : public Error {
 public:
  using Error::Error;
};

// A metric that is not defined for the given data (e.g. AUC on one class).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// Failure inside one stage of the fitting pipeline; `stage()` names it
// (filter, tune, parse, purify or evaluate).
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& what)
      : Error("pipeline stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace monogami

#endif  // MONOGAMI_ERRORS_H_
