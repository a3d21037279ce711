#pragma once

#include <string>

#include "foc/kernel.hpp"
#include "foc/parser.hpp"

namespace foc {

/// Deterministic rendering with a fixed precedence table (~ > & > | > => > <=>).
/// Output re-parses to a structurally identical AST.
std::string prettyPrint(const Vocabulary& voc, const Expr& e);
std::string prettyPrint(const Vocabulary& voc, const Theory& th);
std::string prettyPrint(const Vocabulary& voc);
std::string prettyPrint(const SourceFile& file);

}  // namespace foc
