#include "foc/evaluator.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace foc {

Evaluator::Evaluator(const Structure& s)
    : s_(&s), spaces_(s.voc->symbols().size()) {}

const TupleSpace& Evaluator::space(SymId sym) const {
  auto& slot = spaces_[sym.v];
  if (!slot) slot.emplace(s_->universe, s_->voc->symbol(sym).sig);
  return *slot;
}

Value Evaluator::apply(SymId sym, std::span<const DomainElem> args) const {
  std::int64_t r = space(sym).rank(args);
  if (r < 0) return Value::undef();
  if (overlay && (*overlay)[sym.v]) {
    const auto& entry = (*(*overlay)[sym.v])[r];
    return entry ? Value::of(*entry) : Value::undef();
  }
  if (!s_->interp.has(sym)) return Value::undef();
  return Value::of(s_->interp.table(sym).out[r]);
}

Value Evaluator::evalClosed(const Expr& e) const {
  Assignment nu;
  return eval(e, nu);
}

Value Evaluator::eval(const Expr& e, Assignment& nu) const {
  const Vocabulary& voc = *s_->voc;
  switch (e.kind) {
    case ExprKind::BoolLit:
      return Value::boolean(e.boolValue);
    case ExprKind::Num:
      return Value::of(DomainElem::integer(e.num));
    case ExprKind::ElemLit:
      return Value::of(e.elem);
    case ExprKind::Var: {
      const DomainElem* v = nu.lookup(e.var);
      return v ? Value::of(*v) : Value::undef();
    }
    case ExprKind::IntensionLit:
      return Value::of(DomainElem::intension(e.intension));
    case ExprKind::SymApp: {
      std::vector<DomainElem> args;
      args.reserve(e.kids.size());
      for (const auto& k : e.kids) {
        Value v = eval(k, nu);
        if (!v.defined()) return Value::undef();
        args.push_back(*v.v);
      }
      return apply(e.symbol, args);
    }
    case ExprKind::ValueApp: {
      Value fn = eval(e.kids[0], nu);
      if (!fn.defined() || fn.v->kind() != DomainElem::Kind::Concept)
        return Value::undef();
      ConceptRef c = fn.v->asConcept();
      if (!c.isSymbol()) return Value::undef();  // type intensions have no table
      SymId sym{c.index};
      if (static_cast<int>(e.kids.size()) - 1 != voc.symbol(sym).sig.arity())
        return Value::undef();
      std::vector<DomainElem> args;
      for (std::size_t i = 1; i < e.kids.size(); ++i) {
        Value v = eval(e.kids[i], nu);
        if (!v.defined()) return Value::undef();
        args.push_back(*v.v);
      }
      return apply(sym, args);
    }
    case ExprKind::Introspect: {
      Value c = eval(e.kids[0], nu);
      if (!c.defined() || c.v->kind() != DomainElem::Kind::Concept)
        return Value::undef();
      ConceptRef ref = c.v->asConcept();
      Signature sig = conceptSignature(voc, ref);
      switch (e.query) {
        case IntrospectQuery::Arity:
          return Value::of(DomainElem::integer(sig.arity()));
        case IntrospectQuery::Input:
          if (e.num < 1 || e.num > sig.arity()) return Value::undef();
          return Value::of(
              DomainElem::intension(ConceptRef::type(sig.args[e.num - 1])));
        case IntrospectQuery::Output:
          return Value::of(DomainElem::intension(ConceptRef::type(sig.out)));
      }
      return Value::undef();
    }
    case ExprKind::Not: {
      Value a = eval(e.kids[0], nu);
      if (!a.defined() || a.v->kind() != DomainElem::Kind::Bool) return Value::undef();
      return Value::boolean(!a.v->asBool());
    }
    case ExprKind::And:
    case ExprKind::Or:
    case ExprKind::Implies:
    case ExprKind::Equiv: {
      Value a = eval(e.kids[0], nu);
      Value b = eval(e.kids[1], nu);
      if (!a.defined() || !b.defined()) return Value::undef();
      if (a.v->kind() != DomainElem::Kind::Bool || b.v->kind() != DomainElem::Kind::Bool)
        return Value::undef();
      bool x = a.v->asBool(), y = b.v->asBool();
      switch (e.kind) {
        case ExprKind::And: return Value::boolean(x && y);
        case ExprKind::Or: return Value::boolean(x || y);
        case ExprKind::Implies: return Value::boolean(!x || y);
        default: return Value::boolean(x == y);
      }
    }
    case ExprKind::Eq:
    case ExprKind::Neq: {
      Value a = eval(e.kids[0], nu);
      Value b = eval(e.kids[1], nu);
      if (!a.defined() || !b.defined()) return Value::undef();
      bool eq = *a.v == *b.v;
      return Value::boolean(e.kind == ExprKind::Eq ? eq : !eq);
    }
    case ExprKind::Leq:
    case ExprKind::Lt:
    case ExprKind::Geq:
    case ExprKind::Gt: {
      Value a = eval(e.kids[0], nu);
      Value b = eval(e.kids[1], nu);
      if (!a.defined() || !b.defined()) return Value::undef();
      if (a.v->kind() != DomainElem::Kind::Int || b.v->kind() != DomainElem::Kind::Int)
        return Value::undef();
      std::int64_t x = a.v->asInt(), y = b.v->asInt();
      switch (e.kind) {
        case ExprKind::Leq: return Value::boolean(x <= y);
        case ExprKind::Lt: return Value::boolean(x < y);
        case ExprKind::Geq: return Value::boolean(x >= y);
        default: return Value::boolean(x > y);
      }
    }
    case ExprKind::Quant: {
      const auto& dom = s_->universe.domain(e.range);
      bool anyTrue = false, allTrue = true, anyUndef = false;
      for (const auto& d : dom) {
        nu.push(e.var, d);
        Value b = eval(e.kids[0], nu);
        nu.pop();
        if (!b.defined() || b.v->kind() != DomainElem::Kind::Bool) {
          anyUndef = true;
          continue;  // strict: every instance must be defined
        }
        anyTrue = anyTrue || b.v->asBool();
        allTrue = allTrue && b.v->asBool();
      }
      if (anyUndef) return Value::undef();
      return Value::boolean(e.quant == QuantKind::Forall ? allTrue : anyTrue);
    }
    case ExprKind::Count: {
      std::int64_t n = 0;
      bool undef = false;
      countRec(e, 0, nu, n, undef);
      if (undef) return Value::undef();
      return Value::of(DomainElem::integer(n));
    }
    case ExprKind::Sum: {
      const auto& dom = s_->universe.domain(e.range);
      std::int64_t total = 0;
      for (const auto& d : dom) {
        nu.push(e.var, d);
        Value t = eval(e.kids[0], nu);
        nu.pop();
        if (!t.defined() || t.v->kind() != DomainElem::Kind::Int) return Value::undef();
        total += t.v->asInt();
      }
      return Value::of(DomainElem::integer(total));
    }
    case ExprKind::IfGuard: {
      const DomainElem* x = nu.lookup(e.var);
      bool matches = false;
      if (x && x->kind() == DomainElem::Kind::Concept) {
        ConceptRef c = x->asConcept();
        matches = c.isSymbol() && conceptSignature(voc, c) == e.guardSig;
      }
      return eval(e.kids[matches ? 0 : 1], nu);
    }
  }
  return Value::undef();
}

void Evaluator::countRec(const Expr& e, std::size_t i, Assignment& nu, std::int64_t& n,
                         bool& undef) const {
  if (i == e.binders.size()) {
    Value b = eval(e.kids[0], nu);
    if (!b.defined() || b.v->kind() != DomainElem::Kind::Bool)
      undef = true;
    else if (b.v->asBool())
      ++n;
    return;
  }
  for (const auto& d : s_->universe.domain(e.binders[i].range)) {
    nu.push(e.binders[i].var, d);
    countRec(e, i + 1, nu, n, undef);
    nu.pop();
  }
}

Value eval(const Structure& s, Assignment& nu, const Expr& e) {
  return Evaluator(s).eval(e, nu);
}

bool evalSentence(const Structure& s, const Expr& sentence) {
  Value v = Evaluator(s).evalClosed(sentence);
  if (!v.defined() || v.v->kind() != DomainElem::Kind::Bool)
    throw FocError("UndefinedResult",
                   "sentence evaluated to an undefined value over a total structure");
  return v.v->asBool();
}

// ---------------------------------------------------------------------------
// Definitions
// ---------------------------------------------------------------------------

namespace {

// Dependency walk with polarity: +1 positive, -1 negative, 0 both.
// Occurrences в aggregates, comparisons and equivalences count as both.
struct DepWalker {
  const Vocabulary& voc;
  std::map<std::int32_t, int> deps;  // symbol -> polarity (+1, -1, 0)

  void add(SymId s, int pol) {
    auto [it, inserted] = deps.emplace(s.v, pol);
    if (!inserted && it->second != pol) it->second = 0;
  }

  void addBySignature(const Signature& sig, int pol) {
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(voc.symbols().size()); ++i)
      if (voc.symbol(SymId{i}).sig == sig) add(SymId{i}, pol);
  }

  // kinds of bound variables, for resolving value applications
  std::vector<std::pair<std::string, std::optional<Signature>>> binds;

  std::optional<Signature> kindOf(const std::string& var) const {
    for (auto it = binds.rbegin(); it != binds.rend(); ++it)
      if (it->first == var) return it->second;
    return std::nullopt;
  }

  std::optional<Signature> bindSigOf(TypeId range) const {
    const TypeSymbol& t = voc.type(range);
    if (t.isSubtype()) return std::get<SubtypeInterp>(t.interp).sig;
    return std::nullopt;
  }

  void walk(const Expr& e, int pol) {
    switch (e.kind) {
      case ExprKind::SymApp:
        add(e.symbol, pol);
        for (const auto& k : e.kids) walk(k, 0);
        return;
      case ExprKind::ValueApp: {
        const Expr& fn = e.kids[0];
        if (fn.kind == ExprKind::IntensionLit && fn.intension.isSymbol()) {
          add(SymId{fn.intension.index}, pol);
        } else if (fn.kind == ExprKind::Var) {
          if (auto sig = kindOf(fn.var)) addBySignature(*sig, pol);
        } else {
          // composite fn: its own symbols plus everything its type may denote
          walk(fn, 0);
        }
        for (std::size_t i = 1; i < e.kids.size(); ++i) walk(e.kids[i], 0);
        return;
      }
      case ExprKind::Not:
        walk(e.kids[0], -pol);
        return;
      case ExprKind::Implies:
        walk(e.kids[0], -pol);
        walk(e.kids[1], pol);
        return;
      case ExprKind::Equiv:
      case ExprKind::Eq:
      case ExprKind::Neq:
      case ExprKind::Leq:
      case ExprKind::Lt:
      case ExprKind::Geq:
      case ExprKind::Gt:
        for (const auto& k : e.kids) walk(k, 0);
        return;
      case ExprKind::Quant:
        binds.emplace_back(e.var, bindSigOf(e.range));
        walk(e.kids[0], pol);
        binds.pop_back();
        return;
      case ExprKind::Count: {
        for (const auto& b : e.binders) binds.emplace_back(b.var, bindSigOf(b.range));
        walk(e.kids[0], 0);
        for (std::size_t i = 0; i < e.binders.size(); ++i) binds.pop_back();
        return;
      }
      case ExprKind::Sum:
        binds.emplace_back(e.var, bindSigOf(e.range));
        walk(e.kids[0], 0);
        binds.pop_back();
        return;
      case ExprKind::IfGuard:
        binds.emplace_back(e.var, e.guardSig);
        walk(e.kids[0], pol);
        binds.pop_back();
        walk(e.kids[1], pol);
        return;
      default:
        for (const auto& k : e.kids) walk(k, pol);
        return;
    }
  }
};

}  // namespace

std::vector<SymId> definitionUses(const Vocabulary& voc, const Definition& def) {
  DepWalker w{voc, {}, {}};
  for (const auto& rule : def.rules) {
    for (const auto& b : rule.headVars) w.binds.emplace_back(b.var, w.bindSigOf(b.range));
    w.walk(rule.body, 1);
    if (rule.outTerm) w.walk(*rule.outTerm, 0);
    for (std::size_t i = 0; i < rule.headVars.size(); ++i) w.binds.pop_back();
  }
  std::vector<SymId> out;
  for (const auto& [sym, pol] : w.deps) out.push_back(SymId{sym});
  return out;
}

namespace {

struct DepEdge {
  int to;
  bool negative;
};

// Strata of definition indices, bottom-up. Throws NonStratified.
std::vector<std::vector<int>> stratify(const Vocabulary& voc,
                                       std::span<const Definition> defs) {
  int n = static_cast<int>(defs.size());
  std::map<std::int32_t, int> bySymbol;
  for (int i = 0; i < n; ++i) bySymbol[defs[i].symbol.v] = i;

  std::vector<std::vector<DepEdge>> edges(n);
  for (int i = 0; i < n; ++i) {
    DepWalker w{voc, {}, {}};
    for (const auto& rule : defs[i].rules) {
      for (const auto& b : rule.headVars) w.binds.emplace_back(b.var, w.bindSigOf(b.range));
      w.walk(rule.body, 1);
      if (rule.outTerm) w.walk(*rule.outTerm, 0);
      for (std::size_t k = 0; k < rule.headVars.size(); ++k) w.binds.pop_back();
    }
    for (const auto& [sym, pol] : w.deps) {
      auto it = bySymbol.find(sym);
      if (it != bySymbol.end()) edges[i].push_back({it->second, pol != 1});
    }
  }

  // reachability closure (desk scale)
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i)
    for (const auto& e : edges[i]) reach[i][e.to] = true;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      if (reach[i][k])
        for (int j = 0; j < n; ++j)
          if (reach[k][j]) reach[i][j] = true;

  auto sameScc = [&](int a, int b) {
    return a == b || (reach[a][b] && reach[b][a]);
  };
  for (int i = 0; i < n; ++i)
    for (const auto& e : edges[i])
      if (e.negative && sameScc(i, e.to))
        throw FocError("NonStratified",
                       "'" + voc.symbol(defs[i].symbol).name +
                           "' depends negatively on its own stratum");

  // group into strata: repeatedly take definitions all of whose dependencies
  // are already placed or inside the same SCC
  std::vector<int> stratum(n, -1);
  std::vector<std::vector<int>> out;
  int placed = 0;
  while (placed < n) {
    std::vector<int> layer;
    for (int i = 0; i < n; ++i) {
      if (stratum[i] >= 0) continue;
      bool ready = true;
      for (const auto& e : edges[i])
        if (stratum[e.to] < 0 && !sameScc(i, e.to)) ready = false;
      if (ready) layer.push_back(i);
    }
    // split the layer into SCC groups, declaration order first
    std::vector<bool> used(layer.size(), false);
    for (std::size_t a = 0; a < layer.size(); ++a) {
      if (used[a]) continue;
      std::vector<int> group{layer[a]};
      used[a] = true;
      for (std::size_t b = a + 1; b < layer.size(); ++b)
        if (!used[b] && sameScc(layer[a], layer[b])) {
          group.push_back(layer[b]);
          used[b] = true;
        }
      for (int i : group) stratum[i] = static_cast<int>(out.size());
      out.push_back(std::move(group));
      placed += static_cast<int>(out.back().size());
    }
  }
  return out;
}

void forEachBinding(const Structure& s, const std::vector<Binder>& binders, std::size_t i,
                    Assignment& nu, const std::function<void()>& fn) {
  if (i == binders.size()) {
    fn();
    return;
  }
  for (const auto& d : s.universe.domain(binders[i].range)) {
    nu.push(binders[i].var, d);
    forEachBinding(s, binders, i + 1, nu, fn);
    nu.pop();
  }
}

}  // namespace

Interp evalDefinitions(const Structure& s, std::span<const Definition> defs) {
  const Vocabulary& voc = *s.voc;
  for (const auto& d : defs)
    if (s.interp.has(d.symbol))
      throw FocError("DefinedSymbolInterpreted",
                     "defined symbol '" + voc.symbol(d.symbol).name +
                         "' is already interpreted in the structure");

  auto strata = stratify(voc, defs);

  Evaluator ev(s);
  Evaluator::Overlay overlay(voc.symbols().size());
  ev.overlay = &overlay;

  for (const auto& group : strata) {
    // initialize: predicates all false, functions underived
    for (int di : group) {
      const Definition& def = defs[di];
      const Signature& sig = voc.symbol(def.symbol).sig;
      TupleSpace ts(s.universe, sig);
      Evaluator::PartialTable t(ts.count());
      if (sig.out == kBoolType)
        for (auto& cell : t) cell = DomainElem::boolean(false);
      overlay[def.symbol.v] = std::move(t);
    }
    bool changed = true;
    while (changed) {
      changed = false;
      for (int di : group) {
        const Definition& def = defs[di];
        const SymbolDecl& decl = voc.symbol(def.symbol);
        TupleSpace ts(s.universe, decl.sig);
        auto& table = *overlay[def.symbol.v];
        for (const auto& rule : def.rules) {
          Assignment nu;
          forEachBinding(s, rule.headVars, 0, nu, [&]() {
            Value body = ev.eval(rule.body, nu);
            if (!body.isTrue()) return;
            std::vector<DomainElem> args;
            for (const auto& b : rule.headVars) args.push_back(*nu.lookup(b.var));
            std::int64_t r = ts.rank(args);
            if (decl.sig.out == kBoolType) {
              if (!table[r]->asBool()) {
                table[r] = DomainElem::boolean(true);
                changed = true;
              }
            } else {
              Value out = ev.eval(*rule.outTerm, nu);
              if (!out.defined()) return;  // may become derivable later
              if (s.universe.indexOf(decl.sig.out, *out.v) < 0 &&
                  !(voc.type(decl.sig.out).isIntLike() &&
                    !std::get<IntInterp>(voc.type(decl.sig.out).interp).bounds &&
                    out.v->kind() == DomainElem::Kind::Int))
                throw FocError("DerivedValueOutOfDomain",
                               "rule for '" + decl.name + "' derives " +
                                   elemName(voc, *out.v) +
                                   ", outside the declared output domain");
              if (table[r] && !(*table[r] == *out.v))
                throw FocError("MultipleValues",
                               "rules derive two values for one tuple of '" +
                                   decl.name + "'");
              if (!table[r]) {
                table[r] = *out.v;
                changed = true;
              }
            }
          });
        }
      }
    }
    // totality of function heads
    for (int di : group) {
      const Definition& def = defs[di];
      const SymbolDecl& decl = voc.symbol(def.symbol);
      if (decl.sig.out == kBoolType) continue;
      for (const auto& cell : *overlay[def.symbol.v])
        if (!cell)
          throw FocError("NoValue", "the definition of '" + decl.name +
                                        "' derives no value for some tuple");
    }
  }

  Interp delta(voc.symbols().size());
  for (const auto& d : defs) {
    Table t;
    for (const auto& cell : *overlay[d.symbol.v]) t.out.push_back(*cell);
    delta.set(d.symbol, std::move(t));
  }
  return delta;
}

}  // namespace foc
