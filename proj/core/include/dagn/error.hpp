#pragma once

#include <stdexcept>
#include <string>

namespace dagn {

// Error categories surfaced by the library. The CLI maps these onto a
// machine-readable error object, so the set is fixed and each throw site
// picks the category that names the broken contract.
enum class ErrorKind {
  Dimension,   // tensor shape disagreement
  Argument,    // bad value passed to an operation
  Config,      // invalid experiment configuration
  Vocabulary,  // token id outside the vocabulary
  Ingestion,   // malformed dataset file
  SampleFormat,// malformed QA sample
  EmptyGraph,  // graph construction with zero nodes
  Segment,     // bad segment/span usage
  State,       // object used outside its lifecycle (e.g. consumed tape)
  Oracle,      // verification harness failure (e.g. non-deterministic f)
  Training,    // training contract violation (e.g. unlabeled data)
  Io,          // file read/write failure
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace dagn
