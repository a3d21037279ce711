#include "foc/typecheck.hpp"

#include <algorithm>
#include <set>

namespace foc {

namespace {

std::optional<std::int64_t> domainSizeStatic(const Vocabulary& voc, TypeId t) {
  const TypeSymbol& ts = voc.type(t);
  if (ts.isBool()) return 2;
  if (ts.isIntLike()) {
    const auto& b = std::get<IntInterp>(ts.interp).bounds;
    if (!b) return std::nullopt;
    return b->size();
  }
  if (ts.isCustom()) return std::get<CustomInterp>(ts.interp).ctors.size();
  if (ts.isConcept()) return static_cast<std::int64_t>(voc.symbols().size());
  const Signature& sig = std::get<SubtypeInterp>(ts.interp).sig;
  std::int64_t n = 0;
  for (const auto& s : voc.symbols())
    if (s.sig == sig) ++n;
  return n;
}

class Checker {
 public:
  explicit Checker(const Vocabulary& voc) : voc_(voc) {}

  struct Ty {
    std::optional<StaticKind> kind;
    std::optional<IntBounds> bounds;
    bool mayBeTypeIntension = false;

    bool bad() const { return !kind.has_value(); }
  };

  const Vocabulary& voc_;
  std::vector<Diagnostic> diags_;
  long long steps_ = 0;
  long long nodes_ = 0;
  bool quiet_ = false;

  void report(SourceSpan sp, std::string code, std::string msg) {
    if (!quiet_) diags_.push_back({Severity::Error, sp, std::move(code), std::move(msg)});
  }
  void warn(SourceSpan sp, std::string code, std::string msg) {
    if (!quiet_) diags_.push_back({Severity::Warning, sp, std::move(code), std::move(msg)});
  }

  bool hasErrors() const {
    for (const auto& d : diags_)
      if (d.severity == Severity::Error) return true;
    return false;
  }

  static Ty bad() { return {}; }
  Ty ofType(TypeId t) {
    Ty ty;
    const TypeSymbol& ts = voc_.type(t);
    if (ts.isSubtype()) {
      ty.kind = StaticKind::conceptOf(std::get<SubtypeInterp>(ts.interp).sig);
    } else {
      ty.kind = StaticKind::baseType(t);
      if (ts.isIntLike()) ty.bounds = std::get<IntInterp>(ts.interp).bounds;
    }
    return ty;
  }

  bool isIntLike(const Ty& t) const {
    return t.kind && t.kind->tag == StaticKind::Tag::Base && t.kind->base.valid() &&
           voc_.type(t.kind->base).isIntLike();
  }
  bool isBool(const Ty& t) const {
    return t.kind && t.kind->tag == StaticKind::Tag::Base && t.kind->base == kBoolType;
  }
  bool isConceptLike(const Ty& t) const {
    if (!t.kind) return false;
    if (t.kind->isConceptOf()) return true;
    return t.kind->tag == StaticKind::Tag::Base && t.kind->base == kConceptType;
  }

  // Equality/comparability of operand types.
  bool typesComparable(const Ty& a, const Ty& b) const {
    if (!a.kind || !b.kind) return true;  // don't cascade
    if (isIntLike(a) && isIntLike(b)) return true;
    if (isConceptLike(a) && isConceptLike(b)) return true;
    return *a.kind == *b.kind;
  }

  // Whether a value of type `have` can flow into a table position of type
  // `want` (argument positions): membership in want's domain must be certain.
  bool argFits(const Ty& have, TypeId want, SourceSpan sp, const std::string& what) {
    if (have.bad()) return true;  // already reported
    const TypeSymbol& w = voc_.type(want);
    if (w.isSubtype()) {
      const Signature& wsig = std::get<SubtypeInterp>(w.interp).sig;
      if (!have.kind->isConceptOf() || !(have.kind->sig == wsig)) {
        report(sp, "TypeMismatch",
               what + " must be a concept of signature " + voc_.signatureName(wsig));
        return false;
      }
      if (have.mayBeTypeIntension) {
        report(sp, "TypeMismatch", what + " may be a type intension, which is outside '" +
                                       w.name + "'");
        return false;
      }
      return true;
    }
    if (w.isConcept()) {
      if (!isConceptLike(have)) {
        report(sp, "TypeMismatch", what + " must be a concept");
        return false;
      }
      if (have.mayBeTypeIntension) {
        report(sp, "TypeMismatch",
               what + " may be a type intension, which is outside the Concept domain");
        return false;
      }
      return true;
    }
    if (w.isIntLike()) {
      if (!isIntLike(have)) {
        report(sp, "TypeMismatch", what + " must be an integer of type '" + w.name + "'");
        return false;
      }
      const auto& wb = std::get<IntInterp>(w.interp).bounds;
      if (wb) {
        if (!have.bounds || have.bounds->lo < wb->lo || have.bounds->hi > wb->hi) {
          report(sp, "TypeMismatch", what + " is not statically within " + w.name + "[" +
                                         std::to_string(wb->lo) + ".." +
                                         std::to_string(wb->hi) + "]");
          return false;
        }
      }
      return true;
    }
    // Bool or custom: exact type.
    if (!(have.kind->tag == StaticKind::Tag::Base && have.kind->base.valid() &&
          voc_.type(have.kind->base).name == w.name)) {
      report(sp, "TypeMismatch", what + " must have type '" + w.name + "'");
      return false;
    }
    return true;
  }

  void requireBool(const Ty& t, const Expr& e, const char* what) {
    if (t.bad()) return;
    if (!isBool(t)) report(e.span, "TypeMismatch", std::string(what) + " must be Bool");
  }

  bool rangeEnumerable(TypeId t, SourceSpan sp) {
    if (!domainSizeStatic(voc_, t)) {
      report(sp, "UnboundedInt",
             "cannot quantify over '" + voc_.typeName(t) + "' without finite bounds");
      return false;
    }
    return true;
  }

  StaticKind binderKind(TypeId range) {
    const TypeSymbol& ts = voc_.type(range);
    if (ts.isSubtype()) return StaticKind::conceptOf(std::get<SubtypeInterp>(ts.interp).sig);
    return StaticKind::baseType(range);
  }

  Ty check(const Expr& e, TypingContext& ctx) {
    ++steps_;
    ++nodes_;
    switch (e.kind) {
      case ExprKind::BoolLit:
        return ofType(kBoolType);
      case ExprKind::Num: {
        Ty t = ofType(kIntType);
        t.bounds = IntBounds{e.num, e.num};
        return t;
      }
      case ExprKind::ElemLit:
        return ofType(e.elem.namedOwner());
      case ExprKind::Var: {
        const StaticKind* k = ctx.lookup(e.var);
        if (!k) {
          report(e.span, "FreeVariableInSentence",
                 "variable '" + e.var + "' is not bound");
          return bad();
        }
        Ty t;
        t.kind = *k;
        if (k->tag == StaticKind::Tag::Base && voc_.type(k->base).isIntLike())
          t.bounds = std::get<IntInterp>(voc_.type(k->base).interp).bounds;
        return t;
      }
      case ExprKind::SymApp: {
        const SymbolDecl& d = voc_.symbol(e.symbol);
        if (static_cast<int>(e.kids.size()) != d.sig.arity()) {
          report(e.span, "ArityMismatch",
                 "'" + d.name + "' takes " + std::to_string(d.sig.arity()) +
                     " argument(s), got " + std::to_string(e.kids.size()));
          for (const auto& k : e.kids) check(k, ctx);
          return bad();
        }
        for (std::size_t i = 0; i < e.kids.size(); ++i) {
          Ty a = check(e.kids[i], ctx);
          argFits(a, d.sig.args[i], e.kids[i].span,
                  "argument " + std::to_string(i + 1) + " of '" + d.name + "'");
        }
        return ofType(d.sig.out);
      }
      case ExprKind::IntensionLit: {
        if (e.intension.isSymbol()) {
          Ty t;
          t.kind = StaticKind::conceptOf(conceptSignature(voc_, e.intension));
          return t;
        }
        Ty t = ofType(kConceptType);
        t.mayBeTypeIntension = true;
        return t;
      }
      case ExprKind::ValueApp: {
        Ty fn = check(e.kids[0], ctx);
        if (fn.bad()) {
          for (std::size_t i = 1; i < e.kids.size(); ++i) check(e.kids[i], ctx);
          return bad();
        }
        if (!fn.kind->isConceptOf()) {
          report(e.span, "UnguardedValueApp",
                 "value application on a term whose concept signature is unknown; "
                 "guard it with 'if x::[..] then .. else ..' or quantify over "
                 "Concept[..]");
          for (std::size_t i = 1; i < e.kids.size(); ++i) check(e.kids[i], ctx);
          return bad();
        }
        const Signature& sig = fn.kind->sig;
        if (static_cast<int>(e.kids.size()) - 1 != sig.arity()) {
          report(e.span, "ArityMismatch",
                 "value application supplies " + std::to_string(e.kids.size() - 1) +
                     " argument(s) to a concept of arity " + std::to_string(sig.arity()));
          for (std::size_t i = 1; i < e.kids.size(); ++i) check(e.kids[i], ctx);
          return bad();
        }
        for (std::size_t i = 1; i < e.kids.size(); ++i) {
          Ty a = check(e.kids[i], ctx);
          argFits(a, sig.args[i - 1], e.kids[i].span,
                  "argument " + std::to_string(i) + " of the value application");
        }
        return ofType(sig.out);
      }
      case ExprKind::Introspect: {
        Ty c = check(e.kids[0], ctx);
        if (!c.bad() && !isConceptLike(c)) {
          report(e.span, "TypeMismatch", "introspection applies to concepts");
          return bad();
        }
        if (e.query == IntrospectQuery::Arity) {
          Ty t = ofType(kIntType);
          return t;
        }
        if (e.query == IntrospectQuery::Input) {
          if (!c.bad() && !c.kind->isConceptOf()) {
            report(e.span, "UnguardedIntrospect",
                   "input(..) needs a concept of statically known signature");
            return bad();
          }
          if (!c.bad()) {
            int arity = c.kind->sig.arity();
            if (e.num < 1 || e.num > arity) {
              report(e.span, "IndexOutOfRange",
                     "input(" + std::to_string(e.num) + ") on a concept of arity " +
                         std::to_string(arity));
              return bad();
            }
          }
        }
        Ty t = ofType(kConceptType);
        t.mayBeTypeIntension = true;
        return t;
      }
      case ExprKind::Not: {
        Ty a = check(e.kids[0], ctx);
        requireBool(a, e.kids[0], "operand of '~'");
        return ofType(kBoolType);
      }
      case ExprKind::And:
      case ExprKind::Or:
      case ExprKind::Implies:
      case ExprKind::Equiv: {
        // connective chains nest arbitrarily deep; walk the left spine
        // iteratively so stack depth tracks formula nesting, not length
        std::vector<const Expr*> spine;
        const Expr* cur = &e;
        while (cur->kind == ExprKind::And || cur->kind == ExprKind::Or ||
               cur->kind == ExprKind::Implies || cur->kind == ExprKind::Equiv) {
          spine.push_back(cur);
          cur = &cur->kids[0];
        }
        Ty left = check(*cur, ctx);
        requireBool(left, *cur, "connective operand");
        for (auto it = spine.rbegin(); it != spine.rend(); ++it) {
          if (it != spine.rbegin()) {
            ++steps_;  // one judgment step per connective node
            ++nodes_;
          }
          Ty rhs = check((*it)->kids[1], ctx);
          requireBool(rhs, (*it)->kids[1], "connective operand");
        }
        return ofType(kBoolType);
      }
      case ExprKind::Eq:
      case ExprKind::Neq: {
        Ty a = check(e.kids[0], ctx);
        Ty b = check(e.kids[1], ctx);
        if (!a.bad() && !b.bad() && !typesComparable(a, b))
          report(e.span, "TypeMismatch", "equality between incompatible types");
        return ofType(kBoolType);
      }
      case ExprKind::Leq:
      case ExprKind::Lt:
      case ExprKind::Geq:
      case ExprKind::Gt: {
        Ty a = check(e.kids[0], ctx);
        Ty b = check(e.kids[1], ctx);
        if (!a.bad() && !isIntLike(a))
          report(e.kids[0].span, "TypeMismatch", "order comparison needs integer operands");
        if (!b.bad() && !isIntLike(b))
          report(e.kids[1].span, "TypeMismatch", "order comparison needs integer operands");
        return ofType(kBoolType);
      }
      case ExprKind::Quant: {
        rangeEnumerable(e.range, e.span);
        if (ctx.lookup(e.var))
          warn(e.span, "ShadowedVariable", "'" + e.var + "' shadows an outer binding");
        ctx.push(e.var, binderKind(e.range));
        Ty body = check(e.kids[0], ctx);
        ctx.pop();
        requireBool(body, e.kids[0], "quantified body");
        return ofType(kBoolType);
      }
      case ExprKind::Count: {
        std::int64_t product = 1;
        bool bounded = true;
        for (const auto& b : e.binders) {
          rangeEnumerable(b.range, e.span);
          if (ctx.lookup(b.var))
            warn(e.span, "ShadowedVariable", "'" + b.var + "' shadows an outer binding");
          ctx.push(b.var, binderKind(b.range));
          auto n = domainSizeStatic(voc_, b.range);
          if (n)
            product *= *n;
          else
            bounded = false;
        }
        Ty cond = check(e.kids[0], ctx);
        for (std::size_t i = 0; i < e.binders.size(); ++i) ctx.pop();
        requireBool(cond, e.kids[0], "aggregate condition");
        Ty t = ofType(kIntType);
        if (bounded) t.bounds = IntBounds{0, product};
        return t;
      }
      case ExprKind::Sum: {
        rangeEnumerable(e.range, e.span);
        if (ctx.lookup(e.var))
          warn(e.span, "ShadowedVariable", "'" + e.var + "' shadows an outer binding");
        ctx.push(e.var, binderKind(e.range));
        Ty term = check(e.kids[0], ctx);
        ctx.pop();
        if (!term.bad() && !isIntLike(term))
          report(e.kids[0].span, "TypeMismatch", "sum needs an integer term");
        Ty t = ofType(kIntType);
        auto n = domainSizeStatic(voc_, e.range);
        if (n && term.bounds)
          t.bounds = IntBounds{std::min<std::int64_t>(0, *n * term.bounds->lo),
                               std::max<std::int64_t>(0, *n * term.bounds->hi)};
        return t;
      }
      case ExprKind::IfGuard: {
        const StaticKind* k = ctx.lookup(e.var);
        if (!k) {
          report(e.span, "UnboundVariable",
                 "guard variable '" + e.var + "' is not bound by an enclosing quantifier");
        }
        ctx.push(e.var, StaticKind::conceptOf(e.guardSig));
        Ty thenT = check(e.kids[0], ctx);
        ctx.pop();
        Ty elseT = check(e.kids[1], ctx);
        if (!thenT.bad() && !elseT.bad() && !typesComparable(thenT, elseT))
          report(e.span, "TypeMismatch", "guard branches have incompatible types");
        if (isBool(thenT) || isBool(elseT)) return ofType(kBoolType);
        // term-level guard: propagate the merged type
        Ty t = thenT.bad() ? elseT : thenT;
        if (t.bounds && elseT.bounds) {
          t.bounds->lo = std::min(t.bounds->lo, elseT.bounds->lo);
          t.bounds->hi = std::max(t.bounds->hi, elseT.bounds->hi);
        } else {
          t.bounds.reset();
        }
        t.mayBeTypeIntension = thenT.mayBeTypeIntension || elseT.mayBeTypeIntension;
        return t;
      }
    }
    return bad();
  }
};

}  // namespace

namespace {

CheckReport finishReport(Checker& c) {
  CheckReport r;
  r.diagnostics = std::move(c.diags_);
  r.nodeCount = c.nodes_;
  r.judgmentSteps = c.steps_;
  r.ok = true;
  for (const auto& d : r.diagnostics)
    if (d.severity == Severity::Error) r.ok = false;
  return r;
}

}  // namespace

CheckReport checkSentence(const Vocabulary& voc, const Expr& sentence) {
  Checker c(voc);
  TypingContext ctx;
  Checker::Ty t = c.check(sentence, ctx);
  if (!t.bad() && !c.isBool(t))
    c.report(sentence.span, "TypeMismatch", "a sentence must be Bool-valued");
  return finishReport(c);
}

CheckReport checkExpression(const Vocabulary& voc, const Expr& e) {
  Checker c(voc);
  TypingContext ctx;
  c.check(e, ctx);
  return finishReport(c);
}

CheckReport checkTheory(const Vocabulary& voc, const Theory& th) {
  CheckReport all;
  all.ok = true;
  auto fold = [&](CheckReport r) {
    all.ok = all.ok && r.ok;
    all.nodeCount += r.nodeCount;
    all.judgmentSteps += r.judgmentSteps;
    for (auto& d : r.diagnostics) all.diagnostics.push_back(std::move(d));
  };

  for (const auto& ax : th.axioms) fold(checkSentence(voc, ax));

  std::set<std::int32_t> defined;
  for (const auto& def : th.definitions) {
    defined.insert(def.symbol.v);
    for (const auto& rule : def.rules) {
      Checker c(voc);
      TypingContext ctx;
      const SymbolDecl& d = voc.symbol(rule.symbol);
      if (static_cast<int>(rule.headVars.size()) != d.sig.arity())
        c.report(rule.span, "ArityMismatch",
                 "definition head of '" + d.name + "' has " +
                     std::to_string(rule.headVars.size()) + " variable(s), arity is " +
                     std::to_string(d.sig.arity()));
      for (std::size_t i = 0; i < rule.headVars.size(); ++i) {
        const Binder& b = rule.headVars[i];
        c.rangeEnumerable(b.range, rule.span);
        if (i < static_cast<std::size_t>(d.sig.arity()) && b.range != d.sig.args[i])
          c.report(rule.span, "TypeMismatch",
                   "head variable '" + b.var + "' ranges over '" + voc.typeName(b.range) +
                       "' but '" + d.name + "' expects '" + voc.typeName(d.sig.args[i]) +
                       "'");
        ctx.push(b.var, c.binderKind(b.range));
      }
      bool isFunc = d.sig.out != kBoolType;
      if (isFunc && !rule.outTerm)
        c.report(rule.span, "TypeMismatch",
                 "'" + d.name + "' is a function; rules need the form " + d.name +
                     "(..) = t <- ..");
      if (!isFunc && rule.outTerm)
        c.report(rule.span, "TypeMismatch",
                 "'" + d.name + "' is a predicate; rules cannot carry '= t'");
      if (rule.outTerm) {
        Checker::Ty t = c.check(*rule.outTerm, ctx);
        if (!t.bad()) {
          bool outInt = voc.type(d.sig.out).isIntLike();
          Checker::Ty want = c.ofType(d.sig.out);
          if (outInt && !c.isIntLike(t))
            c.report(rule.outTerm->span, "TypeMismatch", "rule value must be an integer");
          else if (!outInt && !c.typesComparable(t, want))
            c.report(rule.outTerm->span, "TypeMismatch",
                     "rule value does not match the output type of '" + d.name + "'");
        }
      }
      Checker::Ty body = c.check(rule.body, ctx);
      c.requireBool(body, rule.body, "rule body");
      CheckReport r;
      r.diagnostics = std::move(c.diags_);
      r.nodeCount = c.nodes_;
      r.judgmentSteps = c.steps_;
      r.ok = true;
      for (const auto& dd : r.diagnostics)
        if (dd.severity == Severity::Error) r.ok = false;
      fold(std::move(r));
    }
  }

  for (const auto& a : th.assignments) {
    if (defined.count(a.symbol.v)) {
      all.ok = false;
      all.diagnostics.push_back({Severity::Error, a.span, "ConflictError",
                                 "'" + voc.symbol(a.symbol).name +
                                     "' is defined by rules and cannot also be assigned"});
    }
  }
  return all;
}

std::pair<long long, long long> countJudgmentSteps(const Vocabulary& voc, const Expr& e) {
  CheckReport r = checkSentence(voc, e);
  return {r.nodeCount, r.judgmentSteps};
}

std::optional<StaticKind> staticKindOf(const Vocabulary& voc, const TypingContext& ctx,
                                       const Expr& e) {
  Checker c(voc);
  c.quiet_ = true;
  TypingContext local = ctx;
  Checker::Ty t = c.check(e, local);
  return t.kind;
}

// ---------------------------------------------------------------------------
// Guard desugaring
// ---------------------------------------------------------------------------

namespace {

void collectVarNames(const Expr& e, std::set<std::string>& out) {
  if (e.kind == ExprKind::Var || e.kind == ExprKind::Quant || e.kind == ExprKind::Sum ||
      e.kind == ExprKind::IfGuard)
    if (!e.var.empty()) out.insert(e.var);
  for (const auto& b : e.binders) out.insert(b.var);
  for (const auto& k : e.kids) collectVarNames(k, out);
}

class Desugarer {
 public:
  Desugarer(const Vocabulary& voc, std::set<std::string> used)
      : voc_(voc), used_(std::move(used)) {}

  const Vocabulary& voc_;
  std::set<std::string> used_;
  int freshCounter_ = 0;

  std::string fresh() {
    std::string name;
    do {
      name = "g" + std::to_string(freshCounter_++);
    } while (used_.count(name));
    used_.insert(name);
    return name;
  }

  bool isSubtype(TypeId t) const { return voc_.type(t).isSubtype(); }
  const Signature& subtypeSig(TypeId t) const {
    return std::get<SubtypeInterp>(voc_.type(t).interp).sig;
  }

  // A value application whose fn is neither a variable nor a symbol intension
  // literal must be lifted around its enclosing atom.
  static bool needsLift(const Expr& e) {
    return e.kind == ExprKind::ValueApp && e.kids[0].kind != ExprKind::Var &&
           e.kids[0].kind != ExprKind::IntensionLit;
  }

  static bool bindsScope(const Expr& e) {
    return e.kind == ExprKind::Quant || e.kind == ExprKind::Count ||
           e.kind == ExprKind::Sum || e.kind == ExprKind::IfGuard;
  }

  // Innermost liftable value application, without crossing binder scopes
  // (their contents were handled when those scopes were transformed).
  const Expr* findLiftable(const Expr& e) const {
    if (bindsScope(e)) return nullptr;
    for (const auto& k : e.kids)
      if (const Expr* r = findLiftable(k)) return r;
    if (needsLift(e)) return &e;
    return nullptr;
  }

  Expr replaceNode(const Expr& e, const Expr* target, const Expr& with) {
    if (&e == target) return with;
    Expr out = e;
    for (std::size_t i = 0; i < out.kids.size(); ++i)
      out.kids[i] = replaceNode(e.kids[i], target, with);
    return out;
  }

  // $(e)(..) on a composite e inside an atom A becomes
  //   ?y in Concept: if y::[sig(e)] then y = e & A[$(y)(..)] else false
  // which is equivalent because e's value is the unique such concept.
  Expr liftAtom(Expr atom, TypingContext& ctx) {
    const Expr* va = findLiftable(atom);
    if (!va) return atom;
    Expr fn = va->kids[0];
    auto kind = staticKindOf(voc_, ctx, fn);
    if (!kind || !kind->isConceptOf()) return atom;  // checker already rejected this
    Signature sig = kind->sig;
    std::string y = fresh();

    Expr replacement = *va;
    replacement.kids[0] = mkVar(y);
    Expr newAtom = replaceNode(atom, va, replacement);
    ctx.push(y, StaticKind::conceptOf(sig));
    newAtom = liftAtom(std::move(newAtom), ctx);  // remaining liftables, if any
    ctx.pop();

    Expr cond =
        mkBinary(ExprKind::And, mkBinary(ExprKind::Eq, mkVar(y), std::move(fn)),
                 std::move(newAtom));
    Expr guarded = mkIfGuard(y, std::move(sig), std::move(cond), mkBool(false));
    return mkQuant(QuantKind::Exists, y, kConceptType, std::move(guarded));
  }

  static bool isAtom(const Expr& e) {
    switch (e.kind) {
      case ExprKind::SymApp:
      case ExprKind::ValueApp:
      case ExprKind::Eq:
      case ExprKind::Neq:
      case ExprKind::Leq:
      case ExprKind::Lt:
      case ExprKind::Geq:
      case ExprKind::Gt:
        return true;
      default:
        return false;
    }
  }

  Expr transform(const Expr& e, TypingContext& ctx, bool formulaPos) {
    switch (e.kind) {
      case ExprKind::Quant: {
        Expr body;
        TypeId range = e.range;
        if (isSubtype(range)) {
          Signature sig = subtypeSig(range);
          ctx.push(e.var, StaticKind::conceptOf(sig));
          body = transform(e.kids[0], ctx, true);
          ctx.pop();
          Expr neutral = mkBool(e.quant == QuantKind::Forall);
          body = mkIfGuard(e.var, sig, std::move(body), std::move(neutral));
          range = kConceptType;
        } else {
          ctx.push(e.var, StaticKind::baseType(range));
          body = transform(e.kids[0], ctx, true);
          ctx.pop();
        }
        Expr out = mkQuant(e.quant, e.var, range, std::move(body));
        out.span = e.span;
        return out;
      }
      case ExprKind::Count: {
        std::vector<Binder> binders = e.binders;
        std::vector<std::optional<Signature>> guards(binders.size());
        for (std::size_t i = 0; i < binders.size(); ++i) {
          if (isSubtype(binders[i].range)) {
            guards[i] = subtypeSig(binders[i].range);
            ctx.push(binders[i].var, StaticKind::conceptOf(*guards[i]));
            binders[i].range = kConceptType;
          } else {
            ctx.push(binders[i].var, StaticKind::baseType(binders[i].range));
          }
        }
        Expr cond = transform(e.kids[0], ctx, true);
        for (std::size_t i = binders.size(); i-- > 0;) {
          ctx.pop();
          if (guards[i])
            cond = mkIfGuard(binders[i].var, *guards[i], std::move(cond), mkBool(false));
        }
        Expr out = mkCount(std::move(binders), std::move(cond));
        out.span = e.span;
        return out;
      }
      case ExprKind::Sum: {
        TypeId range = e.range;
        Expr term;
        if (isSubtype(range)) {
          Signature sig = subtypeSig(range);
          ctx.push(e.var, StaticKind::conceptOf(sig));
          term = transform(e.kids[0], ctx, false);
          ctx.pop();
          term = mkIfGuard(e.var, sig, std::move(term), mkNum(0));
          range = kConceptType;
        } else {
          ctx.push(e.var, StaticKind::baseType(range));
          term = transform(e.kids[0], ctx, false);
          ctx.pop();
        }
        Expr out;
        out.kind = ExprKind::Sum;
        out.var = e.var;
        out.range = range;
        out.kids.push_back(std::move(term));
        out.span = e.span;
        return out;
      }
      case ExprKind::IfGuard: {
        ctx.push(e.var, StaticKind::conceptOf(e.guardSig));
        Expr thenE = transform(e.kids[0], ctx, formulaPos);
        ctx.pop();
        Expr elseE = transform(e.kids[1], ctx, formulaPos);
        Expr out = mkIfGuard(e.var, e.guardSig, std::move(thenE), std::move(elseE));
        out.span = e.span;
        return out;
      }
      case ExprKind::Not:
      case ExprKind::And:
      case ExprKind::Or:
      case ExprKind::Implies:
      case ExprKind::Equiv: {
        Expr out = e;
        for (std::size_t i = 0; i < out.kids.size(); ++i)
          out.kids[i] = transform(e.kids[i], ctx, true);
        return out;
      }
      default: {
        Expr out = e;
        for (std::size_t i = 0; i < out.kids.size(); ++i)
          out.kids[i] = transform(e.kids[i], ctx, false);
        if (formulaPos && isAtom(out)) return liftAtom(std::move(out), ctx);
        return out;
      }
    }
  }
};

}  // namespace

Expr desugarGuards(const Vocabulary& voc, const Expr& sentence) {
  std::set<std::string> used;
  collectVarNames(sentence, used);
  Desugarer d(voc, std::move(used));
  TypingContext ctx;
  return d.transform(sentence, ctx, true);
}

Theory desugarGuards(const Vocabulary& voc, const Theory& th) {
  Theory out = th;
  for (auto& ax : out.axioms) ax = desugarGuards(voc, ax);
  for (auto& def : out.definitions)
    for (auto& rule : def.rules) {
      std::set<std::string> used;
      collectVarNames(rule.body, used);
      if (rule.outTerm) collectVarNames(*rule.outTerm, used);
      for (const auto& b : rule.headVars) used.insert(b.var);
      Desugarer d(voc, std::move(used));
      TypingContext ctx;
      for (const auto& b : rule.headVars)
        ctx.push(b.var,
                 d.voc_.type(b.range).isSubtype()
                     ? StaticKind::conceptOf(
                           std::get<SubtypeInterp>(d.voc_.type(b.range).interp).sig)
                     : StaticKind::baseType(b.range));
      rule.body = d.transform(rule.body, ctx, true);
    }
  return out;
}

}  // namespace foc
