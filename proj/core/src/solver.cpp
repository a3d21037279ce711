#include "foc/solver.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "foc/typecheck.hpp"

namespace foc {

namespace {

using GK = GroundExpr::Kind;
using Clock = std::chrono::steady_clock;

enum class Tri : std::int8_t { False = 0, True = 1, Unknown = 2 };

Tri triNot(Tri t) {
  if (t == Tri::Unknown) return Tri::Unknown;
  return t == Tri::True ? Tri::False : Tri::True;
}

class Search {
 public:
  explicit Search(GroundProblem& gp) : gp_(gp) {
    std::size_t n = gp.cells.size();
    value_.assign(n, -1);
    excluded_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      excluded_[i].assign(gp.cells[i].domainSize, false);
    excludedCount_.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      if (!gp.cells[i].defined && gp.cells[i].sym.valid())
        branchCells_.push_back(static_cast<std::int32_t>(i));
  }

  GroundProblem& gp_;
  std::vector<std::int32_t> value_;
  std::vector<std::vector<bool>> excluded_;
  std::vector<int> excludedCount_;
  std::vector<std::int32_t> branchCells_;

  // trail entries: (cell, previous assignment marker or excluded ordinal)
  struct TrailEntry {
    std::int32_t cell;
    std::int32_t excludedValue;  // -1 when the entry records an assignment
  };
  std::vector<TrailEntry> trail_;

  SolveStats stats_;
  bool timedOut_ = false;

  bool conflict_ = false;

  std::size_t mark() const { return trail_.size(); }

  void undoTo(std::size_t m) {
    while (trail_.size() > m) {
      TrailEntry e = trail_.back();
      trail_.pop_back();
      if (e.excludedValue < 0) {
        value_[e.cell] = -1;
      } else {
        excluded_[e.cell][e.excludedValue] = false;
        --excludedCount_[e.cell];
      }
    }
    conflict_ = false;
  }

  void assign(std::int32_t cell, std::int32_t v) {
    if (conflict_) return;
    if (value_[cell] >= 0) {
      if (value_[cell] != v) conflict_ = true;
      return;
    }
    if (excluded_[cell][v]) {
      conflict_ = true;
      return;
    }
    value_[cell] = v;
    trail_.push_back({cell, -1});
    ++stats_.propagations;
  }

  void exclude(std::int32_t cell, std::int32_t v) {
    if (conflict_) return;
    if (value_[cell] >= 0) {
      if (value_[cell] == v) conflict_ = true;
      return;
    }
    if (excluded_[cell][v]) return;
    excluded_[cell][v] = true;
    ++excludedCount_[cell];
    trail_.push_back({cell, v});
    ++stats_.propagations;
    int remaining = gp_.cells[cell].domainSize - excludedCount_[cell];
    if (remaining == 0) {
      conflict_ = true;
    } else if (remaining == 1) {
      for (std::int32_t w = 0; w < gp_.cells[cell].domainSize; ++w)
        if (!excluded_[cell][w]) {
          assign(cell, w);
          break;
        }
    }
  }

  Tri litState(const GLit& l) const {
    if (value_[l.cell] >= 0) {
      bool eq = value_[l.cell] == l.value;
      return (eq == l.positive) ? Tri::True : Tri::False;
    }
    if (excluded_[l.cell][l.value]) return l.positive ? Tri::False : Tri::True;
    return Tri::Unknown;
  }

  Tri evalTri(const GroundExpr& e) const {
    switch (e.kind) {
      case GK::True: return Tri::True;
      case GK::False: return Tri::False;
      case GK::Lit: return litState(e.lit);
      case GK::Not: return triNot(evalTri(e.kids[0]));
      case GK::And: {
        bool unknown = false;
        for (const auto& k : e.kids) {
          Tri t = evalTri(k);
          if (t == Tri::False) return Tri::False;
          if (t == Tri::Unknown) unknown = true;
        }
        return unknown ? Tri::Unknown : Tri::True;
      }
      case GK::Or: {
        bool unknown = false;
        for (const auto& k : e.kids) {
          Tri t = evalTri(k);
          if (t == Tri::True) return Tri::True;
          if (t == Tri::Unknown) unknown = true;
        }
        return unknown ? Tri::Unknown : Tri::False;
      }
      case GK::Implies: {
        Tri a = evalTri(e.kids[0]), b = evalTri(e.kids[1]);
        if (a == Tri::False || b == Tri::True) return Tri::True;
        if (a == Tri::True && b == Tri::False) return Tri::False;
        return Tri::Unknown;
      }
      case GK::Equiv: {
        Tri a = evalTri(e.kids[0]), b = evalTri(e.kids[1]);
        if (a == Tri::Unknown || b == Tri::Unknown) return Tri::Unknown;
        return a == b ? Tri::True : Tri::False;
      }
      case GK::Card: {
        std::int64_t t = 0, u = 0;
        for (const auto& l : e.lits) {
          Tri s = litState(l);
          if (s == Tri::True) ++t;
          if (s == Tri::Unknown) ++u;
        }
        bool mayViolateLo = t + u < e.lo;
        bool mustViolateHi = e.hi >= 0 && t > e.hi;
        if (mayViolateLo || mustViolateHi) return Tri::False;
        if (t >= e.lo && (e.hi < 0 || t + u <= e.hi)) return Tri::True;
        return Tri::Unknown;
      }
      case GK::ExactlyOne:
        return Tri::True;  // enforced by the cell representation
    }
    return Tri::Unknown;
  }

  void forceTrue(const GroundExpr& e) {
    if (conflict_) return;
    switch (e.kind) {
      case GK::True: return;
      case GK::False: conflict_ = true; return;
      case GK::Lit:
        if (e.lit.positive)
          assign(e.lit.cell, e.lit.value);
        else
          exclude(e.lit.cell, e.lit.value);
        return;
      case GK::Not:
        forceFalse(e.kids[0]);
        return;
      case GK::And:
        for (const auto& k : e.kids) forceTrue(k);
        return;
      case GK::Or: {
        const GroundExpr* open = nullptr;
        for (const auto& k : e.kids) {
          Tri t = evalTri(k);
          if (t == Tri::True) return;
          if (t == Tri::Unknown) {
            if (open) return;  // two open branches: nothing forced
            open = &k;
          }
        }
        if (!open) {
          conflict_ = true;
          return;
        }
        forceTrue(*open);
        return;
      }
      case GK::Implies: {
        Tri a = evalTri(e.kids[0]);
        Tri b = evalTri(e.kids[1]);
        if (a == Tri::True) forceTrue(e.kids[1]);
        else if (b == Tri::False) forceFalse(e.kids[0]);
        return;
      }
      case GK::Equiv: {
        Tri a = evalTri(e.kids[0]);
        Tri b = evalTri(e.kids[1]);
        if (a != Tri::Unknown) {
          if (a == Tri::True) forceTrue(e.kids[1]);
          else forceFalse(e.kids[1]);
        } else if (b != Tri::Unknown) {
          if (b == Tri::True) forceTrue(e.kids[0]);
          else forceFalse(e.kids[0]);
        }
        return;
      }
      case GK::Card: {
        std::int64_t t = 0, u = 0;
        for (const auto& l : e.lits) {
          Tri s = litState(l);
          if (s == Tri::True) ++t;
          if (s == Tri::Unknown) ++u;
        }
        if (t + u < e.lo || (e.hi >= 0 && t > e.hi)) {
          conflict_ = true;
          return;
        }
        if (e.hi >= 0 && t == e.hi) {
          // no further literal may become true
          for (const auto& l : e.lits)
            if (litState(l) == Tri::Unknown) forceFalseLit(l);
        } else if (t + u == e.lo) {
          for (const auto& l : e.lits)
            if (litState(l) == Tri::Unknown) forceTrueLit(l);
        }
        return;
      }
      case GK::ExactlyOne:
        return;
    }
  }

  void forceFalse(const GroundExpr& e) {
    if (conflict_) return;
    switch (e.kind) {
      case GK::True: conflict_ = true; return;
      case GK::False: return;
      case GK::Lit:
        forceFalseLit(e.lit);
        return;
      case GK::Not:
        forceTrue(e.kids[0]);
        return;
      case GK::Or:
        for (const auto& k : e.kids) forceFalse(k);
        return;
      case GK::And: {
        const GroundExpr* open = nullptr;
        for (const auto& k : e.kids) {
          Tri t = evalTri(k);
          if (t == Tri::False) return;
          if (t == Tri::Unknown) {
            if (open) return;
            open = &k;
          }
        }
        if (!open) {
          conflict_ = true;
          return;
        }
        forceFalse(*open);
        return;
      }
      case GK::Implies: {
        forceTrue(e.kids[0]);
        forceFalse(e.kids[1]);
        return;
      }
      case GK::Equiv: {
        Tri a = evalTri(e.kids[0]);
        Tri b = evalTri(e.kids[1]);
        if (a != Tri::Unknown) {
          if (a == Tri::True) forceFalse(e.kids[1]);
          else forceTrue(e.kids[1]);
        } else if (b != Tri::Unknown) {
          if (b == Tri::True) forceFalse(e.kids[0]);
          else forceTrue(e.kids[0]);
        }
        return;
      }
      case GK::Card: {
        Tri t = evalTri(e);
        if (t == Tri::True) conflict_ = true;
        return;  // no stronger propagation for a negated range
      }
      case GK::ExactlyOne:
        conflict_ = true;
        return;
    }
  }

  void forceTrueLit(const GLit& l) {
    if (l.positive) assign(l.cell, l.value);
    else exclude(l.cell, l.value);
  }
  void forceFalseLit(const GLit& l) {
    if (l.positive) exclude(l.cell, l.value);
    else assign(l.cell, l.value);
  }

  // Re-evaluate and force every constraint until a fixpoint or a conflict.
  bool propagate() {
    bool changed = true;
    while (changed && !conflict_) {
      std::size_t before = trail_.size();
      for (const auto& c : gp_.constraints) {
        Tri t = evalTri(c);
        if (t == Tri::False) {
          conflict_ = true;
          break;
        }
        if (t == Tri::Unknown) forceTrue(c);
        if (conflict_) break;
      }
      changed = trail_.size() != before;
    }
    return !conflict_;
  }
};

Structure buildCandidate(const GroundProblem& gp, const std::vector<std::int32_t>& value,
                         int modelIndex) {
  Structure out = gp.partial;
  out.name = "M" + std::to_string(modelIndex);
  const Vocabulary& voc = *gp.voc;
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(voc.symbols().size()); ++i) {
    SymId sym{i};
    if (out.interp.has(sym)) continue;
    const Signature& sig = voc.symbol(sym).sig;
    TupleSpace ts(out.universe, sig);
    const auto& dom = out.universe.domain(sig.out);
    Table t;
    t.out.reserve(ts.count());
    for (std::int64_t r = 0; r < ts.count(); ++r) {
      std::int32_t cell = gp.cellOf(sym, r);
      std::int32_t v = cell >= 0 ? value[cell] : -1;
      t.out.push_back(dom[v < 0 ? 0 : v]);
    }
    out.interp.set(sym, std::move(t));
  }
  return out;
}

}  // namespace

CheckModelReport checkModel(const Vocabulary& voc, const Theory& theory,
                            const Structure& candidate) {
  CheckModelReport report;
  report.ok = true;
  for (std::size_t i = 0; i < theory.axioms.size(); ++i) {
    AxiomReport ar;
    ar.index = i;
    try {
      ar.holds = evalSentence(candidate, theory.axioms[i]);
    } catch (const FocError& e) {
      ar.undefined = true;
      ar.holds = false;
      report.note = e.what();
    }
    if (!ar.holds) report.ok = false;
    report.axioms.push_back(ar);
  }
  if (!theory.definitions.empty()) {
    Structure stripped = candidate;
    for (const auto& d : theory.definitions) stripped.interp.clear(d.symbol);
    try {
      Interp delta = evalDefinitions(stripped, theory.definitions);
      for (const auto& d : theory.definitions) {
        if (!(delta.table(d.symbol) == candidate.interp.table(d.symbol))) {
          report.definitionsMatch = false;
          report.note = "table of '" + voc.symbol(d.symbol).name +
                        "' differs from its definition's fixpoint";
        }
      }
    } catch (const FocError& e) {
      report.definitionsMatch = false;
      report.note = e.what();
    }
    if (!report.definitionsMatch) report.ok = false;
  }
  return report;
}

SolveResult modelExpand(const Vocabulary& voc, const Theory& theory,
                        const Structure& partial, const SolveConfig& cfg,
                        const ModelCallback& cb) {
  SolveResult res;
  auto start = Clock::now();
  auto finish = [&](SolveStatus st) {
    res.status = st;
    res.stats.elapsedSeconds =
        std::chrono::duration<double>(Clock::now() - start).count();
    return res;
  };

  CheckReport check = checkTheory(voc, theory);
  if (!check.ok) {
    std::string msg = "theory fails checking";
    for (const auto& d : check.diagnostics)
      if (d.severity == Severity::Error) {
        msg = d.code + ": " + d.message;
        break;
      }
    throw FocError("CheckFailed", msg);
  }

  Structure merged = partial;
  DiagnosticSink sink;
  mergeAssignments(merged, theory.assignments, sink);
  if (sink.hasErrors())
    throw FocError("ConflictError", sink.items.front().message);

  Theory desugared = desugarGuards(voc, theory);

  GroundProblem gp;
  try {
    GroundOptions gopts;
    gopts.cap = cfg.expansionCap;
    gopts.simplify = cfg.simplify;
    gp = ground(voc, desugared, merged, gopts);
  } catch (const FocError& e) {
    if (e.code() == "CombinatorialLimit") {
      res.note = e.message();
      return finish(SolveStatus::Capped);
    }
    throw;
  }

  Search search(gp);

  // search-space guard
  long double space = 1;
  for (std::int32_t c : search.branchCells_) {
    space *= gp.cells[c].domainSize;
    if (space > static_cast<long double>(cfg.expansionCap)) {
      res.note = "search space exceeds the expansion cap of " +
                 std::to_string(cfg.expansionCap);
      return finish(SolveStatus::Capped);
    }
  }

  std::set<std::string> seen;

  // recursive DPLL over cells in declaration/tuple order, domain order values
  std::function<bool(std::size_t)> dive = [&](std::size_t idx) -> bool {
    if (cfg.timeLimitSeconds &&
        std::chrono::duration<double>(Clock::now() - start).count() >
            *cfg.timeLimitSeconds) {
      search.timedOut_ = true;
      return false;
    }
    if (!search.propagate()) return true;  // conflict: keep searching siblings

    // find next unassigned branch cell
    while (idx < search.branchCells_.size() &&
           search.value_[search.branchCells_[idx]] >= 0)
      ++idx;

    if (idx == search.branchCells_.size()) {
      // leaf: resolve deferred definitions, verify, emit
      Structure candidate = buildCandidate(gp, search.value_, 1);
      if (!gp.deferredDefs.empty()) {
        Structure base = candidate;
        for (const auto& d : gp.deferredDefs) base.interp.clear(d.symbol);
        Interp delta;
        try {
          delta = evalDefinitions(base, gp.deferredDefs);
        } catch (const FocError&) {
          return true;  // no consistent completion on this branch
        }
        std::size_t m = search.mark();
        for (const auto& d : gp.deferredDefs) {
          const Table& t = delta.table(d.symbol);
          TupleSpace ts(base.universe, voc.symbol(d.symbol).sig);
          for (std::int64_t r = 0; r < ts.count(); ++r) {
            std::int32_t cell = gp.cellOf(d.symbol, r);
            if (cell < 0) continue;
            int ord = base.universe.indexOf(voc.symbol(d.symbol).sig.out, t.out[r]);
            search.assign(cell, ord);
          }
          base.interp.set(d.symbol, t);
        }
        bool ok = search.propagate();
        if (ok)
          for (const auto& c : gp.constraints)
            if (search.evalTri(c) != Tri::True) ok = false;
        if (!ok) {
          search.undoTo(m);
          return true;
        }
        candidate = base;
        search.undoTo(m);
      } else {
        for (const auto& c : gp.constraints)
          if (search.evalTri(c) != Tri::True) return true;
      }

      CheckModelReport recheck = checkModel(voc, theory, candidate);
      if (!recheck.ok)
        throw FocError("InternalError",
                       "a solver model failed the evaluator recheck: " + recheck.note);
      std::string key = saveStructure(candidate);
      if (!seen.insert(key).second) return true;
      candidate.name = "M" + std::to_string(res.models.size() + 1);
      if (cb) cb(candidate, static_cast<int>(res.models.size() + 1));
      res.models.push_back(std::move(candidate));
      if (cfg.maxModels > 0 &&
          static_cast<int>(res.models.size()) >= cfg.maxModels)
        return false;  // enough models
      return true;
    }

    std::int32_t cell = search.branchCells_[idx];
    for (std::int32_t v = 0; v < gp.cells[cell].domainSize; ++v) {
      if (search.excluded_[cell][v]) continue;
      ++search.stats_.decisions;
      std::size_t m = search.mark();
      search.assign(cell, v);
      bool keepGoing = dive(idx + 1);
      search.undoTo(m);
      if (!keepGoing) return false;
    }
    return true;
  };

  dive(0);
  res.stats = search.stats_;
  if (search.timedOut_) {
    res.note = "time limit reached";
    return finish(SolveStatus::Timeout);
  }
  return finish(res.models.empty() ? SolveStatus::Unsat : SolveStatus::Sat);
}

}  // namespace foc
