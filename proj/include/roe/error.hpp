/*
 * Copyright 2026 The roe-kg Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace roe {

// Base for every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input record (TSV line, JSONL line, config value).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Unknown entity, relation, or question id.
class LookupError : public Error {
 public:
  using Error::Error;
};

// A caller-supplied parameter outside its documented range.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Inputs that are individually valid but disagree with each other.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// The external policy could not be reached after all retries.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace roe
