#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace stochmetric {

/// Base of every error raised by the library. `kind()` is a stable
/// machine-readable tag used in CLI error records.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// Validation failure; `issues` lists every problem found, each prefixed by
/// its "section.key" path.
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error("config", w), issues{w} {}
  explicit ConfigError(std::vector<std::string> all)
      : Error("config", join(all)), issues(std::move(all)) {}
  std::vector<std::string> issues;

 private:
  static std::string join(const std::vector<std::string>& all) {
    std::string out;
    for (const auto& s : all) out += (out.empty() ? "" : "; ") + s;
    return out;
  }
};
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error("domain", w) {}
};
struct PrecisionError : Error {
  explicit PrecisionError(const std::string& w) : Error("precision", w) {}
};
struct NumericalError : Error {
  explicit NumericalError(const std::string& w) : Error("numerical", w) {}
};
struct NormalizationError : Error {
  NormalizationError(const std::string& w, double re, double im)
      : Error("normalization", w), real_part(re), imag_part(im) {}
  double real_part;
  double imag_part;
};
struct DecompositionError : Error {
  explicit DecompositionError(const std::string& w) : Error("decomposition", w) {}
};
struct LinearizationError : Error {
  explicit LinearizationError(const std::string& w) : Error("linearization", w) {}
};
struct InputError : Error {
  explicit InputError(const std::string& w) : Error("input", w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error("io", w) {}
};

}  // namespace stochmetric
