#ifndef PSTX_ERRORS_HPP
#define PSTX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pstx {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PSTX_DEFINE_ERROR(Name)                 \
  class Name : public Error {                   \
   public:                                      \
    explicit Name(const std::string& what)      \
        : Error(std::string(#Name ": ") + what) {} \
  };

PSTX_DEFINE_ERROR(InvalidNetwork)
PSTX_DEFINE_ERROR(ParseError)
PSTX_DEFINE_ERROR(SymmetryDetectionAmbiguous)
PSTX_DEFINE_ERROR(DegenerateSupport)
PSTX_DEFINE_ERROR(DimensionTooSmall)
PSTX_DEFINE_ERROR(PoleAt)
PSTX_DEFINE_ERROR(ComplexRoots)
PSTX_DEFINE_ERROR(CoincidentRoots)
PSTX_DEFINE_ERROR(NoParityRepresentative)
PSTX_DEFINE_ERROR(EpsilonTooLarge)
PSTX_DEFINE_ERROR(TargetsNotPst)
PSTX_DEFINE_ERROR(SingularSystem)
PSTX_DEFINE_ERROR(NegativeJSquared)
PSTX_DEFINE_ERROR(PoleTarget)
PSTX_DEFINE_ERROR(ParityMismatch)
PSTX_DEFINE_ERROR(NonPositiveWeight)
PSTX_DEFINE_ERROR(BreakdownAtStep)
PSTX_DEFINE_ERROR(EmptyNullSpace)
PSTX_DEFINE_ERROR(SharedSpectraFatal)
PSTX_DEFINE_ERROR(ShrinkFloorReached)

#undef PSTX_DEFINE_ERROR

}  // namespace pstx

#endif  // PSTX_ERRORS_HPP
