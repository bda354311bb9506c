#pragma once

#include <stdexcept>
#include <string>

namespace cftv {

/// Base of every error raised by the toolkit. `kind()` is the stable
/// machine-readable name used in CLI diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define CFTV_DECLARE_ERROR(Name)                                  \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

// Model loading and analysis.
CFTV_DECLARE_ERROR(SchemaError);
CFTV_DECLARE_ERROR(DanglingReference);
CFTV_DECLARE_ERROR(DuplicateId);
CFTV_DECLARE_ERROR(PropagationCycle);
CFTV_DECLARE_ERROR(UnknownTop);
CFTV_DECLARE_ERROR(UnknownComponent);
CFTV_DECLARE_ERROR(UnsupportedGate);
CFTV_DECLARE_ERROR(MissingRate);

// Simulation kernel.
CFTV_DECLARE_ERROR(UnknownEntityType);
CFTV_DECLARE_ERROR(BadParameter);
CFTV_DECLARE_ERROR(UnboundPort);
CFTV_DECLARE_ERROR(UnknownInjectable);
CFTV_DECLARE_ERROR(TypeMismatch);
CFTV_DECLARE_ERROR(UnknownSignal);

// Behavioral threat models.
CFTV_DECLARE_ERROR(ExprSyntaxError);
CFTV_DECLARE_ERROR(ExprTypeError);
CFTV_DECLARE_ERROR(ActionError);

// Monitors.
CFTV_DECLARE_ERROR(UnknownSignalInQuery);

// Test generation.
CFTV_DECLARE_ERROR(MissingBinding);
CFTV_DECLARE_ERROR(EmptyScope);
CFTV_DECLARE_ERROR(UnknownTemplate);
CFTV_DECLARE_ERROR(UnboundPlaceholder);

#undef CFTV_DECLARE_ERROR

}  // namespace cftv
