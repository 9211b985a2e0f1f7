#pragma once

#include <stdexcept>
#include <string>

namespace prosody {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed or unusable caller input (empty audio, bad shapes, bad files).
class InvalidInputError : public Error {
public:
  using Error::Error;
};

// An utterance with zero voiced frames has no pitch statistics to offer.
class NoVoicingError : public Error {
public:
  using Error::Error;
};

// A computation hit a degenerate configuration (e.g. zero-norm vector).
class DegenerateInputError : public Error {
public:
  using Error::Error;
};

// Monte Carlo evaluation could not resolve enough pairs to report.
class EvaluationFailedError : public Error {
public:
  using Error::Error;
};

// Training diverged (non-finite loss).
class TrainingFailedError : public Error {
public:
  using Error::Error;
};

}  // namespace prosody
