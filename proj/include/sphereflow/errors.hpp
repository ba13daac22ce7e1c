#pragma once

#include <stdexcept>
#include <string>

namespace sphereflow {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define SPHEREFLOW_ERROR(Name)          \
  struct Name : Error {                 \
    using Error::Error;                 \
    Name() : Error(#Name) {}            \
  };

SPHEREFLOW_ERROR(DegreeMismatch)
SPHEREFLOW_ERROR(NotTangent)
SPHEREFLOW_ERROR(NotDegreeTwo)
SPHEREFLOW_ERROR(NotInNormalForm)
SPHEREFLOW_ERROR(NotOrthogonal)
SPHEREFLOW_ERROR(NotASingularity)
SPHEREFLOW_ERROR(NotInvariant)
SPHEREFLOW_ERROR(BranchCoordinateZero)
SPHEREFLOW_ERROR(OutOfDomain)
SPHEREFLOW_ERROR(PreconditionViolated)
SPHEREFLOW_ERROR(NonRotationLinearPart)
SPHEREFLOW_ERROR(NotNilpotent)
SPHEREFLOW_ERROR(NotSemiHyperbolic)
SPHEREFLOW_ERROR(NotInScope)
SPHEREFLOW_ERROR(StepFailure)
SPHEREFLOW_ERROR(NoReturn)
SPHEREFLOW_ERROR(BracketInvalid)
SPHEREFLOW_ERROR(ParseError)

#undef SPHEREFLOW_ERROR

}  // namespace sphereflow
