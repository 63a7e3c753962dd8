#pragma once

#include <stdexcept>
#include <string>

namespace maskbench {

// Base class for every error the library raises on purpose. Callers that
// want blanket handling catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid geometry: polygon with fewer than 3 vertices or non-finite coords.
class DegeneratePolygonError : public Error {
  public:
    using Error::Error;
};

// RLE payload whose counts do not describe a height*width mask.
class MalformedRleError : public Error {
  public:
    using Error::Error;
};

// Two masks with different dimensions fed to a pairwise operation.
class ShapeError : public Error {
  public:
    using Error::Error;
};

// A metric whose denominator is empty (both masks empty, zero ground truth).
// Callers decide the policy; the metric itself never invents a value.
class UndefinedMetricError : public Error {
  public:
    using Error::Error;
};

// Malformed input file. Carries the file path in the message.
class ParseError : public Error {
  public:
    using Error::Error;
};

// A record referencing an entity that does not exist (annotation -> image).
class ReferentialIntegrityError : public Error {
  public:
    using Error::Error;
};

// Synthetic scene generation could not satisfy the placement constraints.
class GenerationError : public Error {
  public:
    using Error::Error;
};

// A model backend failed while serving a request.
class BackendError : public Error {
  public:
    using Error::Error;
};

// A segmenter returned zero candidates for a prompt.
class EmptyCandidateError : public BackendError {
  public:
    using BackendError::BackendError;
};

// The external-process backend sent a response we cannot parse.
class ProtocolError : public BackendError {
  public:
    using BackendError::BackendError;
};

// Two run records that do not share the same ground truth.
class IncompatibleRunsError : public Error {
  public:
    using Error::Error;
};

// Filesystem trouble: unreadable input, unwritable destination.
class IoError : public Error {
  public:
    using Error::Error;
};

// Bad configuration: unknown key, missing required value, invalid flag combo.
class ConfigError : public Error {
  public:
    using Error::Error;
};

} // namespace maskbench
