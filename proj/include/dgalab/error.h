#ifndef DGALAB_ERROR_H_
#define DGALAB_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace dgalab {

enum class ErrorCode {
  kMalformedDomain,
  kIo,
  kEmptyDataset,
  kInvalidDate,
  kSourceTooShort,
  kExhaustedAttempts,
  kOracleUnavailable,
  kInvalidParameters,
  kInvalidConfig,
  kEmptyString,
  kStringTooShort,
  kFeatureExtraction,
  kDegenerateData,
  kSingleClassData,
  kSchemaMismatch,
  kVersionMismatch,
  kCorruptModel,
  kUnachievable,
  kInfeasiblePlan,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures surface as this exception; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dgalab

#endif  // DGALAB_ERROR_H_
