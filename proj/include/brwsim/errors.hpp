#pragma once
#include <stdexcept>
#include <string>

namespace brwsim {

// Domain error types. Each maps to one named failure mode of the public
// operations; catching brwsim::Error catches all of them.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define BRWSIM_ERROR(Name)                                          \
    struct Name : Error {                                           \
        explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
    }

BRWSIM_ERROR(AsymmetricKernel);
BRWSIM_ERROR(NotIrreducible);
BRWSIM_ERROR(ZeroOffsetPresent);
BRWSIM_ERROR(SingularQ);
BRWSIM_ERROR(ToleranceNotReached);
BRWSIM_ERROR(RecurrentCase);
BRWSIM_ERROR(DivergentIntegral);
BRWSIM_ERROR(DomainError);
BRWSIM_ERROR(GridMismatch);
BRWSIM_ERROR(RateOverflow);
BRWSIM_ERROR(MissingSigmaCurve);
BRWSIM_ERROR(NotPSD);
BRWSIM_ERROR(TooFewReplicates);
BRWSIM_ERROR(TooFewEffective);
BRWSIM_ERROR(NonpositiveInput);
BRWSIM_ERROR(UnsupportedDimension);
BRWSIM_ERROR(ConfigError);
BRWSIM_ERROR(DataIntegrityError);

#undef BRWSIM_ERROR

} // namespace brwsim
