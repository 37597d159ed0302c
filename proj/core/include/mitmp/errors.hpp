#ifndef MITMP_ERRORS_HPP
#define MITMP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mitmp
{

// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Invalid input: bad dimensions, non-positive physical quantities, malformed
// geometry, etc.
class ValidationError : public Error
{
public:
  using Error::Error;
};

// A numerical step failed (factorization, convergence, residual check). Carries
// the module and the matrix involved so front ends can report them.
class NumericalError : public Error
{
public:
  NumericalError(std::string module, std::string matrix, const std::string &what)
    : Error(module + ": " + matrix + ": " + what), module_(std::move(module)),
      matrix_(std::move(matrix)), detail_(what)
  {
  }

  const std::string &Module() const noexcept { return module_; }
  const std::string &Matrix() const noexcept { return matrix_; }
  // The message without the module/matrix prefix.
  const std::string &Detail() const noexcept { return detail_; }

private:
  std::string module_;
  std::string matrix_;
  std::string detail_;
};

// Signal processing could not find an admissible decay.
class ExtractionError : public NumericalError
{
public:
  explicit ExtractionError(const std::string &what)
    : NumericalError("signal-extraction", "pencil", what)
  {
  }
};

// The sampled record is too short (or rank deficient) for the requested order.
class SignalTooShortError : public ExtractionError
{
public:
  using ExtractionError::ExtractionError;
};

// An imaging test had nothing to compare.
class InconclusiveError : public Error
{
public:
  using Error::Error;
};

}  // namespace mitmp

#endif  // MITMP_ERRORS_HPP
