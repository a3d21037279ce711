#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "foc/grounder.hpp"

namespace foc {

struct SolveConfig {
  int maxModels = 1;  // 0 = enumerate all
  std::int64_t expansionCap = 10'000'000;
  std::optional<double> timeLimitSeconds;
  bool simplify = true;  // cross-checked by tests; leave on
};

enum class SolveStatus { Sat, Unsat, Capped, Timeout };

struct SolveStats {
  long long decisions = 0;
  long long propagations = 0;
  double elapsedSeconds = 0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Unsat;
  std::vector<Structure> models;
  SolveStats stats;
  std::string note;  // cap/timeout detail
};

using ModelCallback = std::function<void(const Structure&, int)>;

/// Model expansion: every total structure extending `partial` (with the
/// theory's assignments merged in) that satisfies the theory, deduplicated,
/// in the order induced by lexicographic expansion. Defined symbols are
/// computed by fixpoint, not searched. Every emitted model is re-checked
/// against the original theory with the evaluator.
SolveResult modelExpand(const Vocabulary& voc, const Theory& theory,
                        const Structure& partial, const SolveConfig& cfg = {},
                        const ModelCallback& cb = {});

struct AxiomReport {
  std::size_t index = 0;
  bool holds = false;
  bool undefined = false;
};

struct CheckModelReport {
  bool ok = false;
  std::vector<AxiomReport> axioms;
  bool definitionsMatch = true;
  std::string note;
};

/// Evaluator-backed oracle: all axioms true and every definition's fixpoint
/// equal to the candidate's tables.
CheckModelReport checkModel(const Vocabulary& voc, const Theory& theory,
                            const Structure& candidate);

}  // namespace foc
