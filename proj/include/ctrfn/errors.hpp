#pragma once

#include <stdexcept>
#include <string>

namespace ctrfn {

// Common base so callers can catch everything the workbench throws.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define CTRFN_DEFINE_ERROR(Name)                                  \
  struct Name : Error {                                           \
    explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
  }

CTRFN_DEFINE_ERROR(NotHermitian);
CTRFN_DEFINE_ERROR(NegativeEigenvalue);
CTRFN_DEFINE_ERROR(DimensionMismatch);
CTRFN_DEFINE_ERROR(RankDeficient);
CTRFN_DEFINE_ERROR(NotContraction);
CTRFN_DEFINE_ERROR(RadiusTooSmall);
CTRFN_DEFINE_ERROR(NotPureContraction);
CTRFN_DEFINE_ERROR(NotRealizable);
CTRFN_DEFINE_ERROR(Inconclusive);
CTRFN_DEFINE_ERROR(OutsideDisk);
CTRFN_DEFINE_ERROR(BudgetExceeded);
CTRFN_DEFINE_ERROR(DegreeMismatch);
CTRFN_DEFINE_ERROR(DegreeUndetected);
CTRFN_DEFINE_ERROR(ExactnessTooShallow);
CTRFN_DEFINE_ERROR(NotNilpotent);
CTRFN_DEFINE_ERROR(ConfigError);

#undef CTRFN_DEFINE_ERROR

// Carries the dimension of the offending intersection so reports can name it.
struct HypothesisViolated : Error {
  int offending_dim;
  HypothesisViolated(const std::string& msg, int dim)
      : Error("HypothesisViolated: " + msg + " (dim " + std::to_string(dim) + ")"),
        offending_dim(dim) {}
};

}  // namespace ctrfn
