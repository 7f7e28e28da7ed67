#ifndef SPDC_ERRORS_HPP
#define SPDC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace spdc {

// Exit-code classes used by the CLI (see tools/): 2 config, 3 preflight,
// 4 numerical, 5 I/O.
enum class ErrorClass { Config = 2, Preflight = 3, Numerical = 4, Io = 5 };

class SpdcError : public std::runtime_error {
public:
  SpdcError(ErrorClass cls, const std::string& what)
      : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const { return cls_; }

private:
  ErrorClass cls_;
};

#define SPDC_DEFINE_ERROR(Name, Class)                        \
  class Name : public SpdcError {                             \
  public:                                                     \
    explicit Name(const std::string& what)                    \
        : SpdcError(ErrorClass::Class, std::string(#Name ": ") + what) {} \
  }

SPDC_DEFINE_ERROR(SchemaError, Config);
SPDC_DEFINE_ERROR(UnitError, Config);
SPDC_DEFINE_ERROR(UnknownKey, Config);
SPDC_DEFINE_ERROR(MetadataMismatch, Config);
SPDC_DEFINE_ERROR(InvalidArgument, Config);

SPDC_DEFINE_ERROR(WindowTooSmall, Preflight);
SPDC_DEFINE_ERROR(PreflightError, Preflight);

SPDC_DEFINE_ERROR(AllZeroPump, Numerical);
SPDC_DEFINE_ERROR(NonFiniteField, Numerical);
SPDC_DEFINE_ERROR(DegenerateP, Numerical);
SPDC_DEFINE_ERROR(ShapeMismatch, Numerical);
SPDC_DEFINE_ERROR(ModeNotInBasis, Numerical);

SPDC_DEFINE_ERROR(IoError, Io);

#undef SPDC_DEFINE_ERROR

}  // namespace spdc

#endif  // SPDC_ERRORS_HPP
