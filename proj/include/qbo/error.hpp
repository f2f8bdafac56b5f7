#ifndef QBO_ERROR_HPP
#define QBO_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace qbo {

enum class Errc {
  invalid_input,
  schedule_overflow,
  insufficient_samples,
  registry,
  gradient_undefined,
  configuration,
  integration,
  solver,
  normalization,
  comparison,
  summary,
  io,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_input: return "invalid-input";
    case Errc::schedule_overflow: return "schedule-overflow";
    case Errc::insufficient_samples: return "insufficient-samples";
    case Errc::registry: return "registry";
    case Errc::gradient_undefined: return "gradient-undefined";
    case Errc::configuration: return "configuration";
    case Errc::integration: return "integration";
    case Errc::solver: return "solver";
    case Errc::normalization: return "normalization";
    case Errc::comparison: return "comparison";
    case Errc::summary: return "summary";
    case Errc::io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the Errc categories.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + " error: " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

namespace detail {
// Takes a view so that passing a literal costs nothing on the success path.
inline void require(bool cond, Errc code, std::string_view what) {
  if (!cond) throw Error(code, std::string(what));
}
}  // namespace detail

}  // namespace qbo

#endif  // QBO_ERROR_HPP
