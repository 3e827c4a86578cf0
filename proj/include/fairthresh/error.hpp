// Copyright 2026 The fairthresh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace fairthresh {

// Base class for every error raised by the engine. The CLI maps the
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (CSV, JSON, dimensions).
class DataError : public Error {
 public:
  using Error::Error;
};

// Unknown metric name or malformed metric specification string.
class MetricSpecError : public Error {
 public:
  using Error::Error;
};

// A grid search would exceed the configured combination budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

// Caller violated an operation precondition (threshold count mismatch,
// predicting before fit, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace fairthresh
