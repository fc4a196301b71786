#pragma once

#include <stdexcept>
#include <string>

namespace tpm {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define TPM_DEFINE_ERROR(Name)                                     \
  struct Name final : Error {                                      \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

TPM_DEFINE_ERROR(ShapeTooLarge);
TPM_DEFINE_ERROR(NonconformingEpsilon);
TPM_DEFINE_ERROR(ObstacleTouchesBoundary);
TPM_DEFINE_ERROR(NonconformingSpacing);
TPM_DEFINE_ERROR(InconsistentTags);
TPM_DEFINE_ERROR(SingularSystem);
TPM_DEFINE_ERROR(FactorizationFailure);
TPM_DEFINE_ERROR(NonconformingUnfold);
TPM_DEFINE_ERROR(EmptyRegion);
TPM_DEFINE_ERROR(UnknownTag);
TPM_DEFINE_ERROR(MissingPermeability);
TPM_DEFINE_ERROR(ZeroMu1);
TPM_DEFINE_ERROR(AsymmetryExceedsTolerance);
TPM_DEFINE_ERROR(ConfigError);

#undef TPM_DEFINE_ERROR

}  // namespace tpm
