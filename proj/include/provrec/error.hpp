// Copyright 2026 The provrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace provrec {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Input text does not follow the documented format.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied parameter violates an operation precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A pipeline or dataset identifier is not known to the model or matrix.
class UnknownId : public Error {
 public:
  using Error::Error;
};

/// Inputs are individually valid but inconsistent with each other.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A linear system stayed singular after the jitter retry.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace provrec
