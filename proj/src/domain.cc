#include "dgalab/domain.h"

#include <algorithm>
#include <cctype>

#include "dgalab/error.h"

namespace dgalab {

namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

}  // namespace

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedDomain: return "MalformedDomain";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kInvalidDate: return "InvalidDate";
    case ErrorCode::kSourceTooShort: return "SourceTooShort";
    case ErrorCode::kExhaustedAttempts: return "ExhaustedAttempts";
    case ErrorCode::kOracleUnavailable: return "OracleUnavailable";
    case ErrorCode::kInvalidParameters: return "InvalidParameters";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kEmptyString: return "EmptyString";
    case ErrorCode::kStringTooShort: return "StringTooShort";
    case ErrorCode::kFeatureExtraction: return "FeatureExtractionError";
    case ErrorCode::kDegenerateData: return "DegenerateData";
    case ErrorCode::kSingleClassData: return "SingleClassData";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kCorruptModel: return "CorruptModel";
    case ErrorCode::kUnachievable: return "Unachievable";
    case ErrorCode::kInfeasiblePlan: return "InfeasiblePlan";
  }
  return "Unknown";
}

bool IsDnsChar(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
}

bool IsValidSld(std::string_view sld) {
  if (sld.empty() || sld.front() == '-' || sld.back() == '-') return false;
  return std::all_of(sld.begin(), sld.end(), IsDnsChar);
}

bool IsValidTld(std::string_view tld) {
  if (tld.empty() || tld.front() == '.' || tld.back() == '.') return false;
  if (tld.find("..") != std::string_view::npos) return false;
  return std::all_of(tld.begin(), tld.end(),
                     [](char c) { return IsDnsChar(c) || c == '.'; });
}

Domain::Domain(std::string_view sld, std::string_view tld)
    : sld_(Lower(sld)), tld_(Lower(tld)) {
  if (!IsValidSld(sld_)) {
    throw Error(ErrorCode::kMalformedDomain, "invalid sld '" + sld_ + "'");
  }
  if (!IsValidTld(tld_)) {
    throw Error(ErrorCode::kMalformedDomain, "invalid tld '" + tld_ + "'");
  }
}

Domain ParseDomain(std::string_view raw) {
  const auto dot = raw.find('.');
  if (dot == std::string_view::npos) {
    throw Error(ErrorCode::kMalformedDomain,
                "no dot in '" + std::string(raw) + "'");
  }
  return Domain(raw.substr(0, dot), raw.substr(dot + 1));
}

}  // namespace dgalab
