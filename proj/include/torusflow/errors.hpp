#pragma once

#include <stdexcept>
#include <string>

namespace torusflow {

/// Base of every error raised by the library. Subclasses name the failure
/// condition; the message carries the numbers that triggered it.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define TORUSFLOW_DEFINE_ERROR(Name)        \
    class Name : public Error {             \
    public:                                 \
        using Error::Error;                 \
    }

TORUSFLOW_DEFINE_ERROR(PreconditionViolated);
TORUSFLOW_DEFINE_ERROR(NonConvergence);
TORUSFLOW_DEFINE_ERROR(DegenerateZero);
TORUSFLOW_DEFINE_ERROR(WrongSaddleCount);
TORUSFLOW_DEFINE_ERROR(KindMismatch);
TORUSFLOW_DEFINE_ERROR(StepBudgetExhausted);
TORUSFLOW_DEFINE_ERROR(SingularityEncountered);
TORUSFLOW_DEFINE_ERROR(SeparatrixHit);
TORUSFLOW_DEFINE_ERROR(NearCriticalPoint);
TORUSFLOW_DEFINE_ERROR(NoSignChange);
TORUSFLOW_DEFINE_ERROR(NotMonotone);
TORUSFLOW_DEFINE_ERROR(DegenerateSpacing);
TORUSFLOW_DEFINE_ERROR(NonPositiveSample);

#undef TORUSFLOW_DEFINE_ERROR

}  // namespace torusflow
