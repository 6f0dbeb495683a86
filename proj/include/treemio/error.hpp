#pragma once

#include <stdexcept>
#include <string>

namespace treemio {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TREEMIO_DEFINE_ERROR(Name)           \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

// Ensemble input.
TREEMIO_DEFINE_ERROR(SchemaError);
TREEMIO_DEFINE_ERROR(DomainError);
TREEMIO_DEFINE_ERROR(StructureError);
TREEMIO_DEFINE_ERROR(OutOfDomain);
TREEMIO_DEFINE_ERROR(UnknownFixture);

// Models and formulations.
TREEMIO_DEFINE_ERROR(NameError);
TREEMIO_DEFINE_ERROR(MismatchError);
TREEMIO_DEFINE_ERROR(UnboundedDomain);
TREEMIO_DEFINE_ERROR(UnsupportedFormulation);
TREEMIO_DEFINE_ERROR(ParseError);

// Solver and analysis.
TREEMIO_DEFINE_ERROR(DimensionMismatch);
TREEMIO_DEFINE_ERROR(CellLimit);
TREEMIO_DEFINE_ERROR(RoleMismatch);
TREEMIO_DEFINE_ERROR(EntryRange);
TREEMIO_DEFINE_ERROR(SizeLimit);
TREEMIO_DEFINE_ERROR(NotNested);
TREEMIO_DEFINE_ERROR(DimensionError);

#undef TREEMIO_DEFINE_ERROR

}  // namespace treemio
