#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "foc/kernel.hpp"

namespace foc {

/// A parsed .foc file: at most one vocabulary, then theory/structure blocks
/// over it. Structures and theories reference the vocabulary by name.
struct SourceFile {
  std::string name;
  bool hasVocabulary = false;
  Vocabulary vocabulary;
  std::vector<Theory> theories;
  std::vector<StructureDecl> structures;
  std::vector<Diagnostic> diagnostics;

  bool ok() const {
    for (const auto& d : diagnostics)
      if (d.severity == Severity::Error) return false;
    return true;
  }
};

/// Parse a whole file. Recovers at block/statement boundaries so several
/// errors can be reported in one run.
SourceFile parse(std::string_view text, std::string filename = "<input>");

/// Parse a single expression against an existing vocabulary (CLI queries,
/// tests). Variables must be bound inside the expression itself.
std::optional<Expr> parseExpression(Vocabulary& voc, std::string_view text,
                                    DiagnosticSink& diags);

}  // namespace foc
