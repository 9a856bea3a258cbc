#ifndef DAVRG_ERRORS_HPP
#define DAVRG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace davrg {

// Iterate went non-finite; carries the global iteration where it happened.
class divergence_error : public std::runtime_error {
 public:
  divergence_error(long iteration, const std::string& what)
      : std::runtime_error(what), iteration_(iteration) {}
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

// Text input could not be parsed; carries the 1-based line number.
class parse_error : public std::runtime_error {
 public:
  parse_error(long line, const std::string& what)
      : std::runtime_error(what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// Iterative solver hit its cap; carries the residual it reached.
class convergence_failure : public std::runtime_error {
 public:
  convergence_failure(double residual, const std::string& what)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// A state-machine contract was violated (e.g. epoch not rolled over).
class invalid_state : public std::runtime_error {
 public:
  explicit invalid_state(const std::string& what) : std::runtime_error(what) {}
};

class insufficient_data : public std::runtime_error {
 public:
  explicit insufficient_data(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace davrg

#endif
