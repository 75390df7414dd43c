#ifndef LKA_ERRORS_HPP
#define LKA_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace lka {

// Typed runtime error. `kind` is a stable machine-readable tag
// (SpaceMismatch, ZeroBlockMass, InvalidTree, ...); the message is for humans.
class error : public std::runtime_error {
public:
  error(std::string kind, const std::string& msg)
      : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

private:
  std::string kind_;
};

[[noreturn]] inline void fail(const std::string& kind, const std::string& msg) {
  throw error(kind, msg);
}

inline void require(bool cond, const std::string& kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

}  // namespace lka

#endif
