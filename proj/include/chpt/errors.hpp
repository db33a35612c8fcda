#pragma once

#include <stdexcept>
#include <string>

namespace chpt {

enum class ErrorKind {
  Io,        // unreadable/unwritable files
  Schema,    // malformed headers, columns, file layouts
  Domain,    // values outside their stated domain
  Config,    // inconsistent configuration (priors, sampler settings)
  Sampling,  // the sampler could not produce usable draws
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

}  // namespace chpt
