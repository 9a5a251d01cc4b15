// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace spectra {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// chem
class SyntaxError : public Error {
 public:
  using Error::Error;
};
class ValenceError : public Error {
 public:
  using Error::Error;
};
class SanitizeError : public Error {
 public:
  using Error::Error;
};

// spectral
class ConvergenceError : public Error {
 public:
  using Error::Error;
};
class DegenerateBasis : public Error {
 public:
  using Error::Error;
};

// rarity
class DegenerateLabels : public Error {
 public:
  using Error::Error;
};

// io
class IoError : public Error {
 public:
  using Error::Error;
};
class SchemaError : public Error {
 public:
  using Error::Error;
};

// model
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace spectra
