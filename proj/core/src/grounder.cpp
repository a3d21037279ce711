#include "foc/grounder.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace foc {

namespace {

using GK = GroundExpr::Kind;

GroundExpr mkLit(GLit l) {
  GroundExpr g;
  g.kind = GK::Lit;
  g.lit = l;
  return g;
}

GroundExpr mkNary(GK kind, std::vector<GroundExpr> kids) {
  // fold constants and flatten on construction
  bool isAnd = kind == GK::And;
  std::vector<GroundExpr> out;
  for (auto& k : kids) {
    if (k.kind == (isAnd ? GK::True : GK::False)) continue;
    if (k.kind == (isAnd ? GK::False : GK::True)) return GroundExpr::constant(!isAnd);
    if (k.kind == kind) {
      for (auto& kk : k.kids) out.push_back(std::move(kk));
    } else {
      out.push_back(std::move(k));
    }
  }
  if (out.empty()) return GroundExpr::constant(isAnd);
  if (out.size() == 1) return std::move(out[0]);
  GroundExpr g;
  g.kind = kind;
  g.kids = std::move(out);
  return g;
}

GroundExpr mkNot(GroundExpr a) {
  if (a.kind == GK::True) return GroundExpr::constant(false);
  if (a.kind == GK::False) return GroundExpr::constant(true);
  if (a.kind == GK::Not) return std::move(a.kids[0]);
  if (a.kind == GK::Lit) {
    a.lit.positive = !a.lit.positive;
    return a;
  }
  GroundExpr g;
  g.kind = GK::Not;
  g.kids.push_back(std::move(a));
  return g;
}

GroundExpr mkImplies(GroundExpr a, GroundExpr b) {
  if (a.kind == GK::True) return b;
  if (a.kind == GK::False) return GroundExpr::constant(true);
  if (b.kind == GK::True) return GroundExpr::constant(true);
  if (b.kind == GK::False) return mkNot(std::move(a));
  GroundExpr g;
  g.kind = GK::Implies;
  g.kids.push_back(std::move(a));
  g.kids.push_back(std::move(b));
  return g;
}

GroundExpr mkEquiv(GroundExpr a, GroundExpr b) {
  if (a.kind == GK::True) return b;
  if (b.kind == GK::True) return a;
  if (a.kind == GK::False) return mkNot(std::move(b));
  if (b.kind == GK::False) return mkNot(std::move(a));
  GroundExpr g;
  g.kind = GK::Equiv;
  g.kids.push_back(std::move(a));
  g.kids.push_back(std::move(b));
  return g;
}

// Clamp a cardinality node to a constant where possible.
GroundExpr mkCard(std::int64_t lo, std::int64_t hi, std::vector<GLit> lits) {
  std::int64_t n = static_cast<std::int64_t>(lits.size());
  if (lo < 0) lo = 0;
  if (hi >= n) hi = -1;
  if (lo > n) return GroundExpr::constant(false);
  if (hi >= 0 && hi < lo) return GroundExpr::constant(false);
  if (lo == 0 && hi < 0) return GroundExpr::constant(true);
  GroundExpr g;
  g.kind = GK::Card;
  g.lo = lo;
  g.hi = hi;
  g.lits = std::move(lits);
  return g;
}

// A ground term is a constant, an open function cell, or a cardinality term.
struct GTerm {
  enum class Kind : std::uint8_t { Const, Cell, Count } kind = Kind::Const;
  DomainElem value = DomainElem::boolean(false);  // Const
  std::int32_t cell = -1;                         // Cell
  std::int64_t base = 0;                          // Count
  std::vector<GLit> lits;                         // Count
};

class Grounder {
 public:
  Grounder(const Vocabulary& voc, GroundProblem& gp, const GroundOptions& opts)
      : voc_(voc), gp_(gp), opts_(opts), ev_(gp.partial) {}

  const Vocabulary& voc_;
  GroundProblem& gp_;
  const GroundOptions& opts_;
  Evaluator ev_;
  Assignment env_;
  long long budget_ = 0;
  int auxCounter_ = 0;

  void charge(long long n = 1) {
    budget_ += n;
    if (budget_ > opts_.cap)
      throw FocError("CombinatorialLimit",
                     "grounding exceeds the configured cap of " +
                         std::to_string(opts_.cap) + " nodes");
  }

  const Structure& partial() const { return gp_.partial; }

  std::int32_t cellFor(SymId sym, std::int64_t tuple) {
    std::int32_t c = gp_.cellOf(sym, tuple);
    if (c < 0)
      throw FocError("InternalError",
                     "no cell for an open atom of '" + voc_.symbol(sym).name + "'");
    return c;
  }

  std::int32_t freshAuxCell() {
    CellInfo info;
    info.outType = kBoolType;
    info.domainSize = 2;
    info.name = "#aux" + std::to_string(auxCounter_++);
    gp_.cells.push_back(info);
    return static_cast<std::int32_t>(gp_.cells.size() - 1);
  }

  int valueOrdinal(TypeId t, const DomainElem& v) const {
    return partial().universe.indexOf(t, v);
  }

  // ---- terms ----

  GTerm constTerm(DomainElem v) {
    GTerm t;
    t.value = v;
    return t;
  }

  bool guardSelects(const Expr& e) const {
    const DomainElem* x = env_.lookup(e.var);
    if (!x || x->kind() != DomainElem::Kind::Concept) return false;
    ConceptRef c = x->asConcept();
    return c.isSymbol() && conceptSignature(voc_, c) == e.guardSig;
  }

  SymId conceptOfFn(const Expr& fn) {
    DomainElem v = DomainElem::boolean(false);
    if (fn.kind == ExprKind::IntensionLit) {
      v = DomainElem::intension(fn.intension);
    } else if (fn.kind == ExprKind::Var) {
      const DomainElem* b = env_.lookup(fn.var);
      if (!b)
        throw FocError("InternalError", "unbound concept variable '" + fn.var + "'");
      v = *b;
    } else {
      throw FocError("InternalError",
                     "value application on a composite expression survived desugaring");
    }
    if (v.kind() != DomainElem::Kind::Concept || !v.asConcept().isSymbol())
      throw FocError("InternalError", "value application on a non-concept at ground time");
    return SymId{v.asConcept().index};
  }

  GTerm groundTerm(const Expr& e) {
    charge();
    switch (e.kind) {
      case ExprKind::Num:
        return constTerm(DomainElem::integer(e.num));
      case ExprKind::BoolLit:
        return constTerm(DomainElem::boolean(e.boolValue));
      case ExprKind::ElemLit:
        return constTerm(e.elem);
      case ExprKind::IntensionLit:
        return constTerm(DomainElem::intension(e.intension));
      case ExprKind::Var: {
        const DomainElem* v = env_.lookup(e.var);
        if (!v) throw FocError("InternalError", "unbound variable '" + e.var + "'");
        return constTerm(*v);
      }
      case ExprKind::SymApp:
        return groundApp(e.symbol, e.kids, 0);
      case ExprKind::ValueApp:
        return groundApp(conceptOfFn(e.kids[0]), e.kids, 1);
      case ExprKind::Introspect: {
        GTerm c = groundTerm(e.kids[0]);
        if (c.kind != GTerm::Kind::Const ||
            c.value.kind() != DomainElem::Kind::Concept)
          throw FocError("InternalError", "introspection on a non-concept at ground time");
        Signature sig = conceptSignature(voc_, c.value.asConcept());
        switch (e.query) {
          case IntrospectQuery::Arity:
            return constTerm(DomainElem::integer(sig.arity()));
          case IntrospectQuery::Input:
            if (e.num < 1 || e.num > sig.arity())
              throw FocError("InternalError", "input index out of range at ground time");
            return constTerm(
                DomainElem::intension(ConceptRef::type(sig.args[e.num - 1])));
          case IntrospectQuery::Output:
            return constTerm(DomainElem::intension(ConceptRef::type(sig.out)));
        }
        throw FocError("InternalError", "introspection fell through");
      }
      case ExprKind::Count: {
        GTerm t;
        t.kind = GTerm::Kind::Count;
        groundCount(e, 0, t);
        return t;
      }
      case ExprKind::Sum: {
        std::int64_t total = 0;
        for (const auto& d : partial().universe.domain(e.range)) {
          env_.push(e.var, d);
          GTerm inst = groundTerm(e.kids[0]);
          env_.pop();
          if (inst.kind != GTerm::Kind::Const ||
              inst.value.kind() != DomainElem::Kind::Int)
            throw FocError("UnsupportedGrounding",
                           "sum instances must evaluate to integers when grounding");
          total += inst.value.asInt();
        }
        return constTerm(DomainElem::integer(total));
      }
      case ExprKind::IfGuard:
        return groundTerm(e.kids[guardSelects(e) ? 0 : 1]);
      default:
        throw FocError("UnsupportedGrounding",
                       "formula used in a term position during grounding");
    }
  }

  // Symbol application (possibly via a concept's value): fold if interpreted,
  // otherwise an open cell.
  GTerm groundApp(SymId sym, const std::vector<Expr>& kids, std::size_t from) {
    const SymbolDecl& decl = voc_.symbol(sym);
    if (static_cast<int>(kids.size() - from) != decl.sig.arity())
      throw FocError("InternalError",
                     "arity mismatch at ground time for '" + decl.name + "'");
    std::vector<DomainElem> args;
    for (std::size_t i = from; i < kids.size(); ++i) {
      GTerm a = groundTerm(kids[i]);
      if (a.kind != GTerm::Kind::Const)
        throw FocError("UnsupportedGrounding",
                       "an open function term feeds an argument of '" + decl.name +
                           "'; interpret it in the input structure");
      args.push_back(a.value);
    }
    std::int64_t r = ev_.space(sym).rank(args);
    if (r < 0)
      throw FocError("InternalError", "argument outside its domain at ground time");
    if (partial().interp.has(sym))
      return constTerm(partial().interp.table(sym).out[r]);
    GTerm t;
    t.kind = GTerm::Kind::Cell;
    t.cell = cellFor(sym, r);
    return t;
  }

  void groundCount(const Expr& e, std::size_t i, GTerm& acc) {
    if (i == e.binders.size()) {
      GroundExpr inst = groundFormula(e.kids[0]);
      if (inst.kind == GK::True) {
        ++acc.base;
      } else if (inst.kind == GK::False) {
        // contributes nothing
      } else if (inst.kind == GK::Lit) {
        acc.lits.push_back(inst.lit);
      } else {
        // name the compound condition with an auxiliary atom
        std::int32_t aux = freshAuxCell();
        GLit al{aux, 1, true};
        gp_.constraints.push_back(mkEquiv(mkLit(al), std::move(inst)));
        acc.lits.push_back(al);
      }
      return;
    }
    for (const auto& d : partial().universe.domain(e.binders[i].range)) {
      env_.push(e.binders[i].var, d);
      groundCount(e, i + 1, acc);
      env_.pop();
    }
  }

  // ---- formulas ----

  GroundExpr truthify(const GTerm& t) {
    if (t.kind == GTerm::Kind::Const) {
      if (t.value.kind() != DomainElem::Kind::Bool)
        throw FocError("InternalError", "non-boolean constant in formula position");
      return GroundExpr::constant(t.value.asBool());
    }
    if (t.kind == GTerm::Kind::Cell) {
      if (gp_.cells[t.cell].outType != kBoolType)
        throw FocError("InternalError", "non-boolean cell in formula position");
      return mkLit({t.cell, 1, true});
    }
    throw FocError("InternalError", "aggregate in formula position");
  }

  GroundExpr groundFormula(const Expr& e) {
    charge();
    switch (e.kind) {
      case ExprKind::BoolLit:
        return GroundExpr::constant(e.boolValue);
      case ExprKind::IfGuard:
        return groundFormula(e.kids[guardSelects(e) ? 0 : 1]);
      case ExprKind::Var:
      case ExprKind::SymApp:
      case ExprKind::ValueApp:
        return truthify(groundTerm(e));
      case ExprKind::Not:
        return mkNot(groundFormula(e.kids[0]));
      case ExprKind::And: {
        GroundExpr a = groundFormula(e.kids[0]);
        if (a.kind == GK::False) return GroundExpr::constant(false);
        std::vector<GroundExpr> kids;
        kids.push_back(std::move(a));
        kids.push_back(groundFormula(e.kids[1]));
        return mkNary(GK::And, std::move(kids));
      }
      case ExprKind::Or: {
        GroundExpr a = groundFormula(e.kids[0]);
        if (a.kind == GK::True) return GroundExpr::constant(true);
        std::vector<GroundExpr> kids;
        kids.push_back(std::move(a));
        kids.push_back(groundFormula(e.kids[1]));
        return mkNary(GK::Or, std::move(kids));
      }
      case ExprKind::Implies:
        return mkImplies(groundFormula(e.kids[0]), groundFormula(e.kids[1]));
      case ExprKind::Equiv:
        return mkEquiv(groundFormula(e.kids[0]), groundFormula(e.kids[1]));
      case ExprKind::Eq:
      case ExprKind::Neq:
        if (isFormulaShaped(e.kids[0]) || isFormulaShaped(e.kids[1])) {
          GroundExpr eq = mkEquiv(groundFormula(e.kids[0]), groundFormula(e.kids[1]));
          return e.kind == ExprKind::Eq ? eq : mkNot(std::move(eq));
        }
        return groundCompare(e);
      case ExprKind::Leq:
      case ExprKind::Lt:
      case ExprKind::Geq:
      case ExprKind::Gt:
        return groundCompare(e);
      case ExprKind::Quant: {
        std::vector<GroundExpr> kids;
        bool isAll = e.quant == QuantKind::Forall;
        for (const auto& d : partial().universe.domain(e.range)) {
          env_.push(e.var, d);
          GroundExpr inst = groundFormula(e.kids[0]);
          env_.pop();
          if (isAll && inst.kind == GK::False) return GroundExpr::constant(false);
          if (!isAll && inst.kind == GK::True) return GroundExpr::constant(true);
          kids.push_back(std::move(inst));
        }
        return mkNary(isAll ? GK::And : GK::Or, std::move(kids));
      }
      default:
        throw FocError("InternalError", "term in formula position during grounding");
    }
  }

  static bool isFormulaShaped(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Not:
      case ExprKind::And:
      case ExprKind::Or:
      case ExprKind::Implies:
      case ExprKind::Equiv:
      case ExprKind::Quant:
      case ExprKind::Eq:
      case ExprKind::Neq:
      case ExprKind::Leq:
      case ExprKind::Lt:
      case ExprKind::Geq:
      case ExprKind::Gt:
        return true;
      case ExprKind::BoolLit:
        return true;
      default:
        return false;
    }
  }

  enum class Cmp { Eq, Leq, Lt };

  static bool cmpConst(const DomainElem& x, const DomainElem& y, Cmp op) {
    switch (op) {
      case Cmp::Eq: return x == y;
      case Cmp::Leq: return x.asInt() <= y.asInt();
      case Cmp::Lt: return x.asInt() < y.asInt();
    }
    return false;
  }

  const std::vector<DomainElem>& cellDomain(std::int32_t cell) const {
    return partial().universe.domain(gp_.cells[cell].outType);
  }

  GroundExpr groundCompare(const Expr& e) {
    GTerm a = groundTerm(e.kids[0]);
    GTerm b = groundTerm(e.kids[1]);
    switch (e.kind) {
      case ExprKind::Eq: return cmp(a, b, Cmp::Eq);
      case ExprKind::Neq: return mkNot(cmp(a, b, Cmp::Eq));
      case ExprKind::Leq: return cmp(a, b, Cmp::Leq);
      case ExprKind::Lt: return cmp(a, b, Cmp::Lt);
      case ExprKind::Geq: return cmp(b, a, Cmp::Leq);
      case ExprKind::Gt: return cmp(b, a, Cmp::Lt);
      default: throw FocError("InternalError", "not a comparison");
    }
  }

  GroundExpr cmp(const GTerm& a, const GTerm& b, Cmp op) {
    using K = GTerm::Kind;
    if (a.kind == K::Const && b.kind == K::Const)
      return GroundExpr::constant(cmpConst(a.value, b.value, op));

    if (a.kind == K::Cell && b.kind == K::Const) return cellVsConst(a, b.value, op, true);
    if (a.kind == K::Const && b.kind == K::Cell) return cellVsConst(b, a.value, op, false);

    if (a.kind == K::Cell && b.kind == K::Cell) {
      const auto& da = cellDomain(a.cell);
      const auto& db = cellDomain(b.cell);
      charge(static_cast<long long>(da.size()) * static_cast<long long>(db.size()));
      std::vector<GroundExpr> alts;
      for (int i = 0; i < static_cast<int>(da.size()); ++i)
        for (int j = 0; j < static_cast<int>(db.size()); ++j)
          if (cmpConst(da[i], db[j], op))
            alts.push_back(
                mkNary(GK::And, {mkLit({a.cell, i, true}), mkLit({b.cell, j, true})}));
      return mkNary(GK::Or, std::move(alts));
    }

    if (a.kind == K::Count && b.kind == K::Const)
      return cardVsConst(a, b.value.asInt(), op, true);
    if (a.kind == K::Const && b.kind == K::Count)
      return cardVsConst(b, a.value.asInt(), op, false);
    if (a.kind == K::Count && b.kind == K::Cell) return cardVsCell(a, b, op, true);
    if (a.kind == K::Cell && b.kind == K::Count) return cardVsCell(b, a, op, false);

    throw FocError("UnsupportedGrounding",
                   "comparison between two aggregates is not supported when grounding");
  }

  // cell on the `left` side of the operator when leftIsCell
  GroundExpr cellVsConst(const GTerm& cellT, const DomainElem& k, Cmp op, bool leftIsCell) {
    const auto& dom = cellDomain(cellT.cell);
    if (op == Cmp::Eq) {
      int ord = valueOrdinal(gp_.cells[cellT.cell].outType, k);
      return ord < 0 ? GroundExpr::constant(false) : mkLit({cellT.cell, ord, true});
    }
    std::vector<GroundExpr> alts;
    for (int i = 0; i < static_cast<int>(dom.size()); ++i) {
      bool ok = leftIsCell ? cmpConst(dom[i], k, op) : cmpConst(k, dom[i], op);
      if (ok) alts.push_back(mkLit({cellT.cell, i, true}));
    }
    return mkNary(GK::Or, std::move(alts));
  }

  // count `op` k when countOnLeft, else k `op` count
  GroundExpr cardVsConst(const GTerm& c, std::int64_t k, Cmp op, bool countOnLeft) {
    std::int64_t t = k - c.base;
    switch (op) {
      case Cmp::Eq:
        if (t < 0) return GroundExpr::constant(false);
        return mkCard(t, t, c.lits);
      case Cmp::Leq:
        return countOnLeft ? mkCard(0, t, c.lits) : mkCard(t, -1, c.lits);
      case Cmp::Lt:
        return countOnLeft ? mkCard(0, t - 1, c.lits) : mkCard(t + 1, -1, c.lits);
    }
    return GroundExpr::constant(false);
  }

  GroundExpr cardVsCell(const GTerm& c, const GTerm& cellT, Cmp op, bool countOnLeft) {
    const auto& dom = cellDomain(cellT.cell);
    std::vector<GroundExpr> alts;
    for (int i = 0; i < static_cast<int>(dom.size()); ++i) {
      if (dom[i].kind() != DomainElem::Kind::Int)
        throw FocError("InternalError", "integer comparison with a non-integer cell");
      GroundExpr side = cardVsConst(c, dom[i].asInt(), op, countOnLeft);
      alts.push_back(mkNary(GK::And, {mkLit({cellT.cell, i, true}), std::move(side)}));
    }
    return mkNary(GK::Or, std::move(alts));
  }
};

}  // namespace

GroundProblem ground(const Vocabulary& voc, const Theory& theory,
                     const Structure& partial, const GroundOptions& opts) {
  GroundProblem gp;
  gp.voc = &voc;
  gp.partial = partial;

  // Fold definitions whose dependencies (outside the definition group itself)
  // are all interpreted; iterate because one definition may feed another.
  std::vector<Definition> pending = theory.definitions;
  bool progress = true;
  while (progress && !pending.empty()) {
    progress = false;
    std::vector<Definition> ready;
    for (auto it = pending.begin(); it != pending.end();) {
      bool ok = true;
      for (SymId dep : definitionUses(voc, *it)) {
        if (dep == it->symbol) continue;  // recursion within the definition
        bool isPendingDef = false;
        for (const auto& p : pending)
          if (p.symbol == dep && !(p.symbol == it->symbol)) isPendingDef = true;
        if (isPendingDef || !gp.partial.interp.has(dep)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        ready.push_back(*it);
        it = pending.erase(it);
        progress = true;
      } else {
        ++it;
      }
    }
    if (!ready.empty()) {
      Interp delta = evalDefinitions(gp.partial, ready);
      for (const auto& d : ready) gp.partial.interp.set(d.symbol, delta.table(d.symbol));
    }
  }
  gp.deferredDefs = std::move(pending);

  // Cells for every open symbol; deferred-defined ones are marked, not searched.
  std::set<std::int32_t> deferred;
  for (const auto& d : gp.deferredDefs) deferred.insert(d.symbol.v);
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(voc.symbols().size()); ++i) {
    SymId sym{i};
    if (gp.partial.interp.has(sym)) continue;
    const Signature& sig = voc.symbol(sym).sig;
    if (!gp.partial.universe.hasDomain(sig.out))
      throw FocError("UnboundedInt",
                     "open symbol '" + voc.symbol(sym).name +
                         "' has an unbounded output type; interpret it in the input "
                         "structure or declare bounds");
    TupleSpace ts(gp.partial.universe, sig);
    const auto& outDom = gp.partial.universe.domain(sig.out);
    for (std::int64_t r = 0; r < ts.count(); ++r) {
      CellInfo info;
      info.sym = sym;
      info.tuple = r;
      info.outType = sig.out;
      info.domainSize = static_cast<std::int32_t>(outDom.size());
      info.defined = deferred.count(i) > 0;
      std::ostringstream name;
      name << voc.symbol(sym).name;
      if (sig.arity() > 0) {
        name << "(";
        auto tup = ts.tuple(r);
        for (std::size_t k = 0; k < tup.size(); ++k)
          name << (k ? "," : "") << elemName(voc, tup[k]);
        name << ")";
      }
      info.name = name.str();
      gp.cellIndex_[{i, r}] = static_cast<std::int32_t>(gp.cells.size());
      gp.cells.push_back(std::move(info));
    }
  }

  Grounder g(voc, gp, opts);
  for (const auto& ax : theory.axioms) {
    GroundExpr c = g.groundFormula(ax);
    // a universally quantified axiom is one constraint per instantiation
    if (c.kind == GK::And) {
      for (auto& k : c.kids) gp.constraints.push_back(std::move(k));
    } else {
      gp.constraints.push_back(std::move(c));
    }
  }

  // exactly-one groups for every open function cell mentioned anywhere
  std::set<std::int32_t> funcCells;
  std::function<void(const GroundExpr&)> scan = [&](const GroundExpr& e) {
    if (e.kind == GK::Lit && gp.cells[e.lit.cell].outType != kBoolType)
      funcCells.insert(e.lit.cell);
    for (const auto& l : e.lits)
      if (gp.cells[l.cell].outType != kBoolType) funcCells.insert(l.cell);
    for (const auto& k : e.kids) scan(k);
  };
  for (const auto& c : gp.constraints) scan(c);
  for (std::int32_t cell : funcCells) {
    GroundExpr one;
    one.kind = GK::ExactlyOne;
    one.cell = cell;
    gp.constraints.push_back(std::move(one));
  }

  gp.size = g.budget_;
  if (opts.simplify) simplify(gp);
  return gp;
}

// ---------------------------------------------------------------------------
// Simplification
// ---------------------------------------------------------------------------

namespace {

// Known-value bookkeeping per cell during unit subsumption.
struct Known {
  std::vector<std::int32_t> fixed;               // -1 unknown, else ordinal
  std::vector<std::set<std::int32_t>> excluded;  // ruled-out ordinals

  explicit Known(std::size_t n) : fixed(n, -1), excluded(n) {}

  // 1 = true, 0 = false, -1 = unknown
  int litState(const GLit& l) const {
    if (fixed[l.cell] >= 0) {
      bool eq = fixed[l.cell] == l.value;
      return (eq == l.positive) ? 1 : 0;
    }
    if (excluded[l.cell].count(l.value)) return l.positive ? 0 : 1;
    return -1;
  }
};

GroundExpr substitute(const GroundExpr& e, const Known& known) {
  switch (e.kind) {
    case GK::True:
    case GK::False:
      return e;
    case GK::Lit: {
      int st = known.litState(e.lit);
      if (st < 0) return e;
      return GroundExpr::constant(st == 1);
    }
    case GK::Not:
      return mkNot(substitute(e.kids[0], known));
    case GK::And:
    case GK::Or: {
      std::vector<GroundExpr> kids;
      kids.reserve(e.kids.size());
      for (const auto& k : e.kids) kids.push_back(substitute(k, known));
      return mkNary(e.kind, std::move(kids));
    }
    case GK::Implies:
      return mkImplies(substitute(e.kids[0], known), substitute(e.kids[1], known));
    case GK::Equiv:
      return mkEquiv(substitute(e.kids[0], known), substitute(e.kids[1], known));
    case GK::Card: {
      std::int64_t lo = e.lo, hi = e.hi;
      std::vector<GLit> lits;
      for (const auto& l : e.lits) {
        int st = known.litState(l);
        if (st == 1) {
          --lo;
          if (hi >= 0) --hi;
        } else if (st < 0) {
          lits.push_back(l);
        }
      }
      return mkCard(lo, hi, std::move(lits));
    }
    case GK::ExactlyOne:
      if (known.fixed[e.cell] >= 0) return GroundExpr::constant(true);
      return e;
  }
  return e;
}

}  // namespace

void simplify(GroundProblem& gp) {
  Known known(gp.cells.size());
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& c : gp.constraints) {
      GroundExpr s = substitute(c, known);
      if (s.kind == GK::Lit) {
        if (s.lit.positive) {
          if (known.fixed[s.lit.cell] < 0) {
            known.fixed[s.lit.cell] = s.lit.value;
            changed = true;
          }
        } else if (!known.excluded[s.lit.cell].count(s.lit.value)) {
          known.excluded[s.lit.cell].insert(s.lit.value);
          changed = true;
        }
      }
      c = std::move(s);
    }
  }
  std::vector<GroundExpr> kept;
  for (auto& c : gp.constraints) {
    if (c.kind == GK::True) continue;
    if (c.kind == GK::Lit) continue;  // re-asserted below from the unit pool
    kept.push_back(std::move(c));
  }
  gp.constraints = std::move(kept);
  for (std::size_t i = 0; i < known.fixed.size(); ++i) {
    if (known.fixed[i] >= 0)
      gp.constraints.push_back(
          mkLit({static_cast<std::int32_t>(i), known.fixed[i], true}));
    else
      for (std::int32_t v : known.excluded[i])
        gp.constraints.push_back(mkLit({static_cast<std::int32_t>(i), v, false}));
  }
}

// ---------------------------------------------------------------------------
// Printing and SMT-LIB emission
// ---------------------------------------------------------------------------

namespace {

std::string litName(const GroundProblem& gp, const GLit& l) {
  const CellInfo& c = gp.cells[l.cell];
  if (c.outType == kBoolType) {
    bool pos = l.positive == (l.value == 1);
    return (pos ? "" : "~") + c.name;
  }
  const auto& dom = gp.partial.universe.domain(c.outType);
  return c.name + (l.positive ? "=" : "~=") + elemName(*gp.voc, dom[l.value]);
}

void printRec(const GroundProblem& gp, const GroundExpr& e, std::ostringstream& os) {
  switch (e.kind) {
    case GK::True: os << "true"; return;
    case GK::False: os << "false"; return;
    case GK::Lit: os << litName(gp, e.lit); return;
    case GK::Not:
      os << "~(";
      printRec(gp, e.kids[0], os);
      os << ")";
      return;
    case GK::And:
    case GK::Or:
      os << "(";
      for (std::size_t i = 0; i < e.kids.size(); ++i) {
        if (i) os << (e.kind == GK::And ? " & " : " | ");
        printRec(gp, e.kids[i], os);
      }
      os << ")";
      return;
    case GK::Implies:
    case GK::Equiv:
      os << "(";
      printRec(gp, e.kids[0], os);
      os << (e.kind == GK::Implies ? " => " : " <=> ");
      printRec(gp, e.kids[1], os);
      os << ")";
      return;
    case GK::Card:
      if (e.lo > 0) os << e.lo << " =< ";
      os << "#(";
      for (std::size_t i = 0; i < e.lits.size(); ++i) {
        if (i) os << ", ";
        os << litName(gp, e.lits[i]);
      }
      os << ")";
      if (e.hi >= 0) os << " =< " << e.hi;
      return;
    case GK::ExactlyOne:
      os << "exactly-one{" << gp.cells[e.cell].name << "}";
      return;
  }
}

}  // namespace

std::string printConstraint(const GroundProblem& gp, const GroundExpr& g) {
  std::ostringstream os;
  printRec(gp, g, os);
  return os.str();
}

std::string printProblem(const GroundProblem& gp) {
  std::ostringstream os;
  os << "cells " << gp.cells.size() << ", constraints " << gp.constraints.size() << "\n";
  for (const auto& c : gp.constraints) os << printConstraint(gp, c) << "\n";
  return os.str();
}

std::string emitSmt2(const GroundProblem& gp) {
  std::ostringstream os;
  os << "; debug rendering of the ground constraint set\n(set-logic ALL)\n";
  auto litVar = [&](std::int32_t cell, std::int32_t value) {
    const CellInfo& c = gp.cells[cell];
    if (c.outType == kBoolType) return "|" + c.name + "|";
    const auto& dom = gp.partial.universe.domain(c.outType);
    return "|" + c.name + "=" + elemName(*gp.voc, dom[value]) + "|";
  };
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(gp.cells.size()); ++i) {
    const CellInfo& c = gp.cells[i];
    if (c.outType == kBoolType) {
      os << "(declare-const " << litVar(i, 1) << " Bool)\n";
    } else {
      for (std::int32_t v = 0; v < c.domainSize; ++v)
        os << "(declare-const " << litVar(i, v) << " Bool)\n";
      os << "(assert (= 1 (+";
      for (std::int32_t v = 0; v < c.domainSize; ++v)
        os << " (ite " << litVar(i, v) << " 1 0)";
      os << ")))\n";
    }
  }
  std::function<void(const GroundExpr&)> emit = [&](const GroundExpr& e) {
    switch (e.kind) {
      case GK::True: os << "true"; return;
      case GK::False: os << "false"; return;
      case GK::Lit: {
        std::string v = litVar(e.lit.cell, e.lit.value);
        bool pos = e.lit.positive;
        if (gp.cells[e.lit.cell].outType == kBoolType && e.lit.value == 0) pos = !pos;
        if (pos)
          os << v;
        else
          os << "(not " << v << ")";
        return;
      }
      case GK::Not:
        os << "(not ";
        emit(e.kids[0]);
        os << ")";
        return;
      case GK::And:
      case GK::Or:
        os << (e.kind == GK::And ? "(and" : "(or");
        for (const auto& k : e.kids) {
          os << " ";
          emit(k);
        }
        os << ")";
        return;
      case GK::Implies:
      case GK::Equiv:
        os << (e.kind == GK::Implies ? "(=> " : "(= ");
        emit(e.kids[0]);
        os << " ";
        emit(e.kids[1]);
        os << ")";
        return;
      case GK::Card: {
        os << "(let ((n (+ 0";
        for (const auto& l : e.lits) {
          os << " (ite ";
          GroundExpr le;
          le.kind = GK::Lit;
          le.lit = l;
          emit(le);
          os << " 1 0)";
        }
        os << "))) (and true";
        if (e.lo > 0) os << " (<= " << e.lo << " n)";
        if (e.hi >= 0) os << " (<= n " << e.hi << ")";
        os << "))";
        return;
      }
      case GK::ExactlyOne:
        os << "true";  // asserted with the declarations
        return;
    }
  };
  for (const auto& c : gp.constraints) {
    os << "(assert ";
    emit(c);
    os << ")\n";
  }
  os << "(check-sat)\n";
  return os.str();
}

}  // namespace foc
