#pragma once

#include <stdexcept>
#include <string>

namespace rolle {

// Root of every error the stack raises. Callers that only need to report a
// failure catch this; callers that recover catch the concrete type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ROLLE_DEFINE_ERROR(Name) \
  class Name : public Error {    \
   public:                       \
    using Error::Error;          \
  }

ROLLE_DEFINE_ERROR(InvalidSpecError);
ROLLE_DEFINE_ERROR(InvalidWorldError);
ROLLE_DEFINE_ERROR(NumericInputError);
ROLLE_DEFINE_ERROR(ProtocolError);
ROLLE_DEFINE_ERROR(PayloadError);
ROLLE_DEFINE_ERROR(StreamCorruptError);
ROLLE_DEFINE_ERROR(TruncatedStreamError);
ROLLE_DEFINE_ERROR(SocketError);
ROLLE_DEFINE_ERROR(InvalidCropError);
ROLLE_DEFINE_ERROR(ImageError);
ROLLE_DEFINE_ERROR(LoadError);
ROLLE_DEFINE_ERROR(ValidationError);
ROLLE_DEFINE_ERROR(RecordError);
ROLLE_DEFINE_ERROR(ShapeError);
ROLLE_DEFINE_ERROR(IncompatibleModelError);
ROLLE_DEFINE_ERROR(CorruptModelError);
ROLLE_DEFINE_ERROR(EmptyDatasetError);
ROLLE_DEFINE_ERROR(InvalidEpsilonError);
ROLLE_DEFINE_ERROR(ConfigError);

#undef ROLLE_DEFINE_ERROR

// Loss became NaN/inf. epoch/batch are -1 when the failure happened outside
// the training loop.
class NumericDivergenceError : public Error {
 public:
  NumericDivergenceError(const std::string& what, int epoch, int batch)
      : Error(what), epoch_(epoch), batch_(batch) {}
  int epoch() const noexcept { return epoch_; }
  int batch() const noexcept { return batch_; }

 private:
  int epoch_;
  int batch_;
};

}  // namespace rolle
