#include "foc/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "foc/evaluator.hpp"
#include "foc/grounder.hpp"
#include "foc/parser.hpp"
#include "foc/printer.hpp"
#include "foc/solver.hpp"

namespace foc {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitUnsat = 2;
constexpr int kExitCapped = 3;
constexpr int kExitUsage = 64;

bool colorEnabled() {
  const char* v = std::getenv("FOC_COLOR");
  return v && std::string(v) == "1";
}

void printDiagnostics(const std::vector<Diagnostic>& diags, const std::string& file,
                      const std::string& format, std::ostream& out) {
  if (format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& d : diags) {
      arr.push_back({{"file", file},
                     {"line", d.span.line},
                     {"col", d.span.column},
                     {"len", d.span.length},
                     {"severity", d.severity == Severity::Error ? "error" : "warning"},
                     {"code", d.code},
                     {"message", d.message}});
    }
    out << arr.dump(2) << "\n";
    return;
  }
  bool color = colorEnabled();
  for (const auto& d : diags) {
    if (color) out << (d.severity == Severity::Error ? "\033[31m" : "\033[33m");
    out << formatDiagnostic(d, file);
    if (color) out << "\033[0m";
    out << "\n";
  }
}

struct LoadedFile {
  SourceFile file;
  bool ok = false;
};

LoadedFile loadFile(const std::string& path, const std::string& format, std::ostream& out,
                    std::ostream& err) {
  LoadedFile lf;
  std::ifstream in(path);
  if (!in) {
    err << "cannot open '" << path << "'\n";
    return lf;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  lf.file = parse(buf.str(), path);
  if (!lf.file.diagnostics.empty())
    printDiagnostics(lf.file.diagnostics, path, format, out);
  lf.ok = lf.file.ok();
  return lf;
}

const Theory* pickTheory(const SourceFile& sf, const std::string& name, std::ostream& err) {
  if (sf.theories.empty()) {
    err << "no theory block in '" << sf.name << "'\n";
    return nullptr;
  }
  if (name.empty()) return &sf.theories.front();
  for (const auto& th : sf.theories)
    if (th.name == name) return &th;
  err << "no theory named '" << name << "'\n";
  return nullptr;
}

// The selected structure block resolved against the vocabulary, or an empty
// partial structure when the file has none.
std::optional<Structure> pickStructure(SourceFile& sf, const std::string& name,
                                       const std::string& format, std::ostream& out,
                                       std::ostream& err) {
  const StructureDecl* decl = nullptr;
  if (!name.empty()) {
    for (const auto& st : sf.structures)
      if (st.name == name) decl = &st;
    if (!decl) {
      err << "no structure named '" << name << "'\n";
      return std::nullopt;
    }
  } else if (!sf.structures.empty()) {
    decl = &sf.structures.front();
  }
  DiagnosticSink sink;
  Structure s =
      decl ? resolveStructure(sf.vocabulary, *decl, sink) : makeStructure(sf.vocabulary);
  if (!sink.items.empty()) printDiagnostics(sink.items, sf.name, format, out);
  if (sink.hasErrors()) return std::nullopt;
  return s;
}

std::string statusName(SolveStatus st) {
  switch (st) {
    case SolveStatus::Sat: return "sat";
    case SolveStatus::Unsat: return "unsat";
    case SolveStatus::Capped: return "capped";
    case SolveStatus::Timeout: return "timeout";
  }
  return "?";
}

nlohmann::json structureJson(const Structure& s) {
  return nlohmann::json::parse(structureToJson(s));
}

int cmdCheck(const std::string& path, const std::string& format, std::ostream& out,
             std::ostream& err) {
  LoadedFile lf = loadFile(path, format, out, err);
  if (!lf.ok) return kExitInputError;
  bool anyError = false;
  std::vector<Diagnostic> diags;
  for (const auto& th : lf.file.theories) {
    CheckReport r = checkTheory(lf.file.vocabulary, th);
    for (auto& d : r.diagnostics) diags.push_back(std::move(d));
    anyError = anyError || !r.ok;
  }
  if (!diags.empty()) printDiagnostics(diags, path, format, out);
  if (anyError) return kExitInputError;
  if (format != "json") out << "ok\n";
  return kExitOk;
}

int cmdEval(const std::string& path, const std::string& theoryName,
            const std::string& structName, const std::vector<std::string>& queries,
            const std::string& format, std::ostream& out, std::ostream& err) {
  LoadedFile lf = loadFile(path, format, out, err);
  if (!lf.ok) return kExitInputError;
  const Theory* th = pickTheory(lf.file, theoryName, err);
  if (!th) return kExitInputError;
  CheckReport check = checkTheory(lf.file.vocabulary, *th);
  if (!check.ok) {
    printDiagnostics(check.diagnostics, path, format, out);
    return kExitInputError;
  }

  // parse queries first: they may intern new conceptual subtypes, which must
  // exist before the universe is built
  std::vector<Expr> queryExprs;
  for (const auto& q : queries) {
    DiagnosticSink qsink;
    auto expr = parseExpression(lf.file.vocabulary, q, qsink);
    if (!expr || qsink.hasErrors()) {
      printDiagnostics(qsink.items, "<query>", format, out);
      return kExitInputError;
    }
    CheckReport qr = checkExpression(lf.file.vocabulary, *expr);
    if (!qr.ok) {
      printDiagnostics(qr.diagnostics, "<query>", format, out);
      return kExitInputError;
    }
    queryExprs.push_back(std::move(*expr));
  }

  auto partial = pickStructure(lf.file, structName, format, out, err);
  if (!partial) return kExitInputError;

  DiagnosticSink sink;
  mergeAssignments(*partial, th->assignments, sink);
  if (sink.hasErrors()) {
    printDiagnostics(sink.items, path, format, out);
    return kExitInputError;
  }
  // every non-defined symbol must be interpreted before the fixpoints run
  std::vector<Definition> missing;
  std::set<std::int32_t> definedSyms;
  for (const auto& d : th->definitions) {
    definedSyms.insert(d.symbol.v);
    if (!partial->interp.has(d.symbol)) missing.push_back(d);
  }
  for (std::int32_t i = 0;
       i < static_cast<std::int32_t>(lf.file.vocabulary.symbols().size()); ++i) {
    if (!definedSyms.count(i) && !partial->interp.has(SymId{i})) {
      err << "eval needs a total structure; '"
          << lf.file.vocabulary.symbol(SymId{i}).name << "' is uninterpreted\n";
      return kExitInputError;
    }
  }
  if (!missing.empty()) {
    try {
      Interp delta = evalDefinitions(*partial, missing);
      for (const auto& d : missing) partial->interp.set(d.symbol, delta.table(d.symbol));
    } catch (const FocError& e) {
      err << e.what() << "\n";
      return kExitInputError;
    }
  }

  Evaluator ev(*partial);
  bool allTrue = true;
  for (std::size_t i = 0; i < th->axioms.size(); ++i) {
    Value v = ev.evalClosed(th->axioms[i]);
    std::string shown = !v.defined()           ? "undefined"
                        : v.isTrue()           ? "true"
                        : v.isFalse()          ? "false"
                                               : elemName(lf.file.vocabulary, *v.v);
    out << "axiom " << (i + 1) << ": " << shown << "\n";
    if (!v.isTrue()) allTrue = false;
  }
  for (std::size_t i = 0; i < queries.size(); ++i) {
    Value v = ev.evalClosed(queryExprs[i]);
    out << queries[i] << " = "
        << (v.defined() ? elemName(lf.file.vocabulary, *v.v) : "undefined") << "\n";
  }
  return allTrue ? kExitOk : kExitInputError;
}

int cmdGround(const std::string& path, const std::string& theoryName,
              const std::string& structName, const std::string& emit, std::ostream& out,
              std::ostream& err) {
  LoadedFile lf = loadFile(path, "text", out, err);
  if (!lf.ok) return kExitInputError;
  const Theory* th = pickTheory(lf.file, theoryName, err);
  if (!th) return kExitInputError;
  CheckReport check = checkTheory(lf.file.vocabulary, *th);
  if (!check.ok) {
    printDiagnostics(check.diagnostics, path, "text", out);
    return kExitInputError;
  }
  auto partial = pickStructure(lf.file, structName, "text", out, err);
  if (!partial) return kExitInputError;
  DiagnosticSink sink;
  mergeAssignments(*partial, th->assignments, sink);
  if (sink.hasErrors()) {
    printDiagnostics(sink.items, path, "text", out);
    return kExitInputError;
  }
  try {
    Theory desugared = desugarGuards(lf.file.vocabulary, *th);
    GroundProblem gp = ground(lf.file.vocabulary, desugared, *partial);
    if (emit == "smt2")
      out << emitSmt2(gp);
    else
      out << printProblem(gp);
  } catch (const FocError& e) {
    err << e.what() << "\n";
    return e.code() == "CombinatorialLimit" ? kExitCapped : kExitInputError;
  }
  return kExitOk;
}

int cmdMx(const std::string& path, const std::string& theoryName,
          const std::string& structName, SolveConfig cfg, bool expectSat,
          const std::string& format, std::ostream& out, std::ostream& err) {
  LoadedFile lf = loadFile(path, format, out, err);
  if (!lf.ok) return kExitInputError;
  const Theory* th = pickTheory(lf.file, theoryName, err);
  if (!th) return kExitInputError;
  CheckReport check = checkTheory(lf.file.vocabulary, *th);
  if (!check.ok) {
    printDiagnostics(check.diagnostics, path, format, out);
    return kExitInputError;
  }
  auto partial = pickStructure(lf.file, structName, format, out, err);
  if (!partial) return kExitInputError;

  SolveResult res;
  try {
    if (format == "json") {
      res = modelExpand(lf.file.vocabulary, *th, *partial, cfg);
    } else {
      res = modelExpand(lf.file.vocabulary, *th, *partial, cfg,
                        [&](const Structure& m, int i) {
                          out << "model " << i << ":\n" << saveStructure(m);
                        });
    }
  } catch (const FocError& e) {
    err << e.what() << "\n";
    return kExitInputError;
  }

  if (format == "json") {
    nlohmann::json j;
    j["status"] = statusName(res.status);
    nlohmann::json models = nlohmann::json::array();
    for (const auto& m : res.models) models.push_back(structureJson(m));
    j["models"] = std::move(models);
    j["statistics"] = {{"decisions", res.stats.decisions},
                       {"propagations", res.stats.propagations},
                       {"elapsedSeconds", res.stats.elapsedSeconds},
                       {"models", res.models.size()}};
    out << j.dump(2) << "\n";
  } else {
    out << "status " << statusName(res.status) << ", " << res.models.size()
        << " model(s)\n";
    if (!res.note.empty()) out << res.note << "\n";
  }

  if (res.status == SolveStatus::Capped || res.status == SolveStatus::Timeout)
    return kExitCapped;
  if (res.status == SolveStatus::Unsat && expectSat) return kExitUnsat;
  return kExitOk;
}

}  // namespace

int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"foc: reasoning over first-order logic with concepts"};
  app.require_subcommand(1);

  std::string file, theoryName, structName, format = "text", emit;
  std::vector<std::string> queries;
  SolveConfig cfg;
  bool all = false, expectSat = false;
  double timeLimit = 0;

  auto addCommon = [&](CLI::App* sub) {
    sub->add_option("file", file, "input .foc file")->required();
    sub->add_option("--theory", theoryName, "theory block to use");
    sub->add_option("--structure", structName, "structure block to use");
  };

  CLI::App* check = app.add_subcommand("check", "parse and verify well-formedness");
  check->add_option("file", file, "input .foc file")->required();
  check->add_option("--format", format, "text|json");

  CLI::App* eval = app.add_subcommand("eval", "evaluate axioms over a total structure");
  addCommon(eval);
  eval->add_option("--query", queries, "expression to evaluate (repeatable)");

  CLI::App* groundCmd = app.add_subcommand("ground", "print the ground constraint set");
  addCommon(groundCmd);
  groundCmd->add_option("--emit", emit, "smt2 for the debug SMT-LIB rendering");

  CLI::App* mx = app.add_subcommand("mx", "model expansion");
  addCommon(mx);
  mx->add_option("--models", cfg.maxModels, "number of models to find (default 1)");
  mx->add_flag("--all", all, "enumerate all models");
  mx->add_option("--cap", cfg.expansionCap, "expansion/grounding cap");
  mx->add_option("--time", timeLimit, "time limit in seconds");
  mx->add_option("--format", format, "text|json");
  mx->add_flag("--expect-sat", expectSat, "exit 2 when unsatisfiable");

  std::vector<std::string> argv = args;
  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << e.what() << "\n";
    return kExitUsage;
  }

  if (format != "text" && format != "json") {
    err << "unknown --format '" << format << "'\n";
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(check)) return cmdCheck(file, format, out, err);
    if (app.got_subcommand(eval))
      return cmdEval(file, theoryName, structName, queries, format, out, err);
    if (app.got_subcommand(groundCmd))
      return cmdGround(file, theoryName, structName, emit, out, err);
    if (app.got_subcommand(mx)) {
      if (all) cfg.maxModels = 0;
      if (timeLimit > 0) cfg.timeLimitSeconds = timeLimit;
      return cmdMx(file, theoryName, structName, cfg, expectSat, format, out, err);
    }
  } catch (const FocError& e) {
    err << e.what() << "\n";
    return kExitInputError;
  }
  return kExitUsage;
}

}  // namespace foc
