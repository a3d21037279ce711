#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "foc/parser.hpp"

namespace foc::test {

inline std::string corpusPath(const std::string& name) {
  return std::string(FOC_CORPUS_DIR) + "/" + name;
}

inline std::string readFile(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline SourceFile parseCorpus(const std::string& name) {
  return parse(readFile(corpusPath(name)), name);
}

inline std::string diagText(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) out += formatDiagnostic(d, "t") + "\n";
  return out;
}

}  // namespace foc::test
