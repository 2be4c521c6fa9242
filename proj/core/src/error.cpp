#include "dagn/error.hpp"

namespace dagn {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Argument: return "argument";
    case ErrorKind::Config: return "config";
    case ErrorKind::Vocabulary: return "vocabulary";
    case ErrorKind::Ingestion: return "ingestion";
    case ErrorKind::SampleFormat: return "sample_format";
    case ErrorKind::EmptyGraph: return "empty_graph";
    case ErrorKind::Segment: return "segment";
    case ErrorKind::State: return "state";
    case ErrorKind::Oracle: return "oracle";
    case ErrorKind::Training: return "training";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace dagn
