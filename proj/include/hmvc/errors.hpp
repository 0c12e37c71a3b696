#pragma once

#include <stdexcept>
#include <string>

namespace hmvc {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define HMVC_DEFINE_ERROR(name)                  \
  struct name : Error {                          \
    using Error::Error;                          \
  }

// I/O and dataset validation.
HMVC_DEFINE_ERROR(RowCountMismatch);
HMVC_DEFINE_ERROR(NonNumericEntry);
HMVC_DEFINE_ERROR(EmptyView);
HMVC_DEFINE_ERROR(NodeIdOutOfRange);
HMVC_DEFINE_ERROR(AsymmetricWeights);
HMVC_DEFINE_ERROR(LengthMismatch);

// Graph construction and filtering.
HMVC_DEFINE_ERROR(IsolatedNode);
HMVC_DEFINE_ERROR(DimensionMismatch);
HMVC_DEFINE_ERROR(ZeroSignal);
HMVC_DEFINE_ERROR(NoUnitEigenvalue);

// Optimization.
HMVC_DEFINE_ERROR(SolveFailure);
HMVC_DEFINE_ERROR(QpIterationLimit);

// Anchor selection and clustering.
HMVC_DEFINE_ERROR(MTooLarge);
HMVC_DEFINE_ERROR(DegenerateEigenbasis);

// Precondition violations that have no more specific class.
HMVC_DEFINE_ERROR(InvalidArgument);

#undef HMVC_DEFINE_ERROR

}  // namespace hmvc
