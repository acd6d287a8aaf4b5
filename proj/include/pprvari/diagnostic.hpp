#ifndef PPRVARI_DIAGNOSTIC_HPP
#define PPRVARI_DIAGNOSTIC_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace pprvari {

enum class Severity { Error, Warning };

/// A located finding produced by a parser or validator. Line and column are
/// 1-based; zero means "not tied to a source position".
struct Diagnostic {
  Severity severity = Severity::Error;
  int line = 0;
  int column = 0;
  std::string unit_id;
  std::string rule;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

[[nodiscard]] inline const char* to_string(Severity s) { return s == Severity::Error ? "error" : "warning"; }

[[nodiscard]] inline std::string format(const Diagnostic& d) {
  std::string out;
  if (d.line > 0) out += std::to_string(d.line) + ":" + std::to_string(d.column) + ": ";
  out += to_string(d.severity);
  if (!d.rule.empty()) out += " [" + d.rule + "]";
  if (!d.unit_id.empty()) out += " " + d.unit_id + ":";
  out += " " + d.message;
  return out;
}

[[nodiscard]] inline bool has_errors(const std::vector<Diagnostic>& ds) {
  for (const auto& d : ds)
    if (d.severity == Severity::Error) return true;
  return false;
}

/// Thrown by text readers when input is malformed.
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(int line, int column, const std::string& message)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column),
        detail_(message) {}

  [[nodiscard]] int line() const { return line_; }
  [[nodiscard]] int column() const { return column_; }
  [[nodiscard]] const std::string& detail() const { return detail_; }

 private:
  int line_;
  int column_;
  std::string detail_;
};

}  // namespace pprvari

#endif  // PPRVARI_DIAGNOSTIC_HPP
