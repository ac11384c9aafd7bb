#include "bioqa/error.h"

namespace bioqa {

const char* KindName(Error::Kind kind) {
  switch (kind) {
    case Error::Kind::kParse:
      return "parse";
    case Error::Kind::kSchema:
      return "schema";
    case Error::Kind::kInvalidArgument:
      return "invalid_argument";
    case Error::Kind::kIo:
      return "io";
    case Error::Kind::kDataMismatch:
      return "data_mismatch";
  }
  return "unknown";
}

}  // namespace bioqa
