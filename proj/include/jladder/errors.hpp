#pragma once

#include <stdexcept>
#include <string>

namespace jladder {

// Caller broke a documented precondition (bad segment bounds, missing base primes, ...).
class contract_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Not enough crossings/gaps/points for the requested statistic.
class insufficient_data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Query outside the walked or sieved region.
class range_error : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// A structural property of the ladder did not hold (parity, |dy| = 1, ...).
class invariant_violation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class incompatible_checkpoint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace jladder
