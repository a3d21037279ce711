#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "foc/evaluator.hpp"

namespace foc {

/// One searchable (or deferred-defined) ground location: a symbol applied to
/// one argument tuple. Its value ranges over the symbol's output domain.
/// Auxiliary cells introduced for aggregate conditions are boolean.
struct CellInfo {
  SymId sym;               // invalid for auxiliary cells
  std::int64_t tuple = 0;  // rank within the symbol's argument tuple space
  TypeId outType = kBoolType;
  std::int32_t domainSize = 2;
  bool defined = false;  // belongs to a deferred definition, not searched
  std::string name;      // stable display form
};

/// Literal: cell's value equals (or differs from) the value at `value`
/// ordinal in the cell's output domain.
struct GLit {
  std::int32_t cell = -1;
  std::int32_t value = 0;
  bool positive = true;
};

/// Variable-free constraint over ground atoms: no quantifiers, concepts,
/// value applications or introspection remain.
struct GroundExpr {
  enum class Kind : std::uint8_t {
    True, False, Lit, Not, And, Or, Implies, Equiv, Card, ExactlyOne
  };
  Kind kind = Kind::True;
  std::vector<GroundExpr> kids;  // Not/And/Or/Implies/Equiv
  GLit lit;                      // Lit
  // Card: lo <= base + #true(lits) <= hi (hi < 0 means unbounded above)
  std::int64_t lo = 0;
  std::int64_t hi = -1;
  std::vector<GLit> lits;
  std::int32_t cell = -1;  // ExactlyOne group over this cell's values

  static GroundExpr constant(bool b) {
    GroundExpr g;
    g.kind = b ? Kind::True : Kind::False;
    return g;
  }
  bool isConst() const { return kind == Kind::True || kind == Kind::False; }
};

struct GroundProblem {
  const Vocabulary* voc = nullptr;
  Structure partial;  // merged input plus any definition tables folded in
  std::vector<CellInfo> cells;
  std::vector<GroundExpr> constraints;
  std::vector<Definition> deferredDefs;  // fixpoint at search leaves
  long long size = 0;                    // total constraint nodes

  std::int32_t cellOf(SymId sym, std::int64_t tuple) const {
    auto it = cellIndex_.find({sym.v, tuple});
    return it == cellIndex_.end() ? -1 : it->second;
  }

  std::map<std::pair<std::int32_t, std::int64_t>, std::int32_t> cellIndex_;
};

struct GroundOptions {
  std::int64_t cap = 10'000'000;  // node/expansion guard
  bool simplify = true;
};

/// Grounds the axioms of a checked, desugared theory against a partial
/// structure (theory assignments already merged in). Definitions whose
/// dependencies are all interpreted are computed and folded here; the rest
/// are deferred to the solver. Quantifiers are instantiated outermost-first;
/// atoms over interpreted symbols are evaluated away.
GroundProblem ground(const Vocabulary& voc, const Theory& theory,
                     const Structure& partial, const GroundOptions& opts = {});

/// Model-set-preserving cleanup: constant folding, flattening, cardinality
/// residue folding and unit subsumption across the constraint list.
void simplify(GroundProblem& gp);

std::string printConstraint(const GroundProblem& gp, const GroundExpr& g);
std::string printProblem(const GroundProblem& gp);
std::string emitSmt2(const GroundProblem& gp);

}  // namespace foc
