#ifndef SPDC_ERROR_HPP_
#define SPDC_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spdc {

// Base of every error the library throws. The CLI maps the subclasses onto
// exit codes (config 2, schedule 3, numerical 4).
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class parse_error : public error {
 public:
  parse_error(const std::string& what, std::size_t line)
      : error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class validation_error : public error {
 public:
  using error::error;
};

class parameter_error : public error {
 public:
  using error::error;
};

// A schedule or sampling precondition (probability cap, batch limit,
// norm cap) does not hold.
class schedule_error : public error {
 public:
  using error::error;
};

class numerical_error : public error {
 public:
  using error::error;
};

}  // namespace spdc

#endif  // SPDC_ERROR_HPP_
