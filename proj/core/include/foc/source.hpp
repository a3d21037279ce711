#pragma once

#include <cstdint>
#include <exception>
#include <string>
#include <vector>

namespace foc {

/// Location of a token or node in the original source text.
struct SourceSpan {
  std::int32_t line = 0;    // 1-based; 0 means "no location"
  std::int32_t column = 0;  // 1-based
  std::int32_t length = 0;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  SourceSpan span;
  std::string code;
  std::string message;
};

/// "file:line:col: code: message", the line-oriented interchange form.
std::string formatDiagnostic(const Diagnostic& d, const std::string& file);

struct DiagnosticSink {
  std::vector<Diagnostic> items;

  void error(SourceSpan span, std::string code, std::string message) {
    items.push_back({Severity::Error, span, std::move(code), std::move(message)});
  }
  void warning(SourceSpan span, std::string code, std::string message) {
    items.push_back({Severity::Warning, span, std::move(code), std::move(message)});
  }
  bool hasErrors() const {
    for (const auto& d : items)
      if (d.severity == Severity::Error) return true;
    return false;
  }
};

/// Engine-level failures that are not user-input diagnostics.
class FocError : public std::exception {
 public:
  FocError(std::string code, std::string message)
      : code_(std::move(code)), message_(std::move(message)),
        what_(code_ + ": " + message_) {}
  const char* what() const noexcept override { return what_.c_str(); }
  const std::string& code() const { return code_; }
  const std::string& message() const { return message_; }

 private:
  std::string code_, message_, what_;
};

}  // namespace foc
