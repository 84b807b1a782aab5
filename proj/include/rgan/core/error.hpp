#pragma once

#include <stdexcept>
#include <string>

namespace rgan {

/// Coarse error families; the CLI maps them onto process exit codes.
enum class ErrorCategory { config, data, numeric, contract };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

// Precondition violated by the caller.
struct ContractError : Error {
  explicit ContractError(const std::string& w) : Error(ErrorCategory::contract, w) {}
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& w) : Error(ErrorCategory::contract, w) {}
};

// Second-order differentiation requested through a primitive without a rule.
struct CapabilityError : Error {
  explicit CapabilityError(const std::string& w) : Error(ErrorCategory::contract, w) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorCategory::config, w) {}
};

struct SchemaError : Error {
  explicit SchemaError(const std::string& w) : Error(ErrorCategory::data, w) {}
};

struct ParseError : Error {
  ParseError(const std::string& w, std::size_t row, std::size_t col)
      : Error(ErrorCategory::data, w), row(row), col(col) {}
  std::size_t row;
  std::size_t col;
};

struct BudgetError : Error {
  explicit BudgetError(const std::string& w) : Error(ErrorCategory::data, w) {}
};

struct CatalogError : Error {
  explicit CatalogError(const std::string& w) : Error(ErrorCategory::config, w) {}
};

struct DegeneracyError : Error {
  explicit DegeneracyError(const std::string& w) : Error(ErrorCategory::data, w) {}
};

struct ConditioningError : Error {
  explicit ConditioningError(const std::string& w) : Error(ErrorCategory::numeric, w) {}
};

/// Non-finite loss or gradient during optimisation.
struct DivergenceError : Error {
  DivergenceError(const std::string& w, std::size_t iteration)
      : Error(ErrorCategory::numeric, w), iteration(iteration) {}
  std::size_t iteration;
};

}  // namespace rgan
