#include "foc/kernel.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace foc {

std::string formatDiagnostic(const Diagnostic& d, const std::string& file) {
  std::ostringstream os;
  os << file << ":" << d.span.line << ":" << d.span.column << ": "
     << (d.severity == Severity::Warning ? "warning: " : "") << d.code << ": "
     << d.message;
  return os.str();
}

Vocabulary::Vocabulary() {
  addType({"Bool", BoolInterp{}, {}});
  addType({"Int", IntInterp{}, {}});
  addType({"Concept", ConceptInterp{}, {}});
}

TypeId Vocabulary::addType(TypeSymbol t) {
  TypeId id{static_cast<std::int32_t>(types_.size())};
  typeByName_.emplace(t.name, id.v);
  if (auto* c = std::get_if<CustomInterp>(&t.interp)) {
    for (int i = 0; i < static_cast<int>(c->ctors.size()); ++i)
      ctorByName_.emplace(c->ctors[i], std::make_pair(id.v, i));
  }
  types_.push_back(std::move(t));
  return id;
}

SymId Vocabulary::addSymbol(SymbolDecl s) {
  SymId id{static_cast<std::int32_t>(symbols_.size())};
  symByName_.emplace(s.name, id.v);
  symbols_.push_back(std::move(s));
  return id;
}

TypeId Vocabulary::subtypeOf(const Signature& sig) {
  for (std::size_t i = 0; i < types_.size(); ++i) {
    if (auto* s = std::get_if<SubtypeInterp>(&types_[i].interp))
      if (s->sig == sig) return TypeId{static_cast<std::int32_t>(i)};
  }
  TypeSymbol t;
  t.interp = SubtypeInterp{sig};
  t.name = "Concept[" + signatureName(sig) + "]";
  return addType(std::move(t));
}

std::optional<TypeId> Vocabulary::findType(const std::string& name) const {
  auto it = typeByName_.find(name);
  if (it == typeByName_.end()) return std::nullopt;
  return TypeId{it->second};
}

std::optional<SymId> Vocabulary::findSymbol(const std::string& name) const {
  auto it = symByName_.find(name);
  if (it == symByName_.end()) return std::nullopt;
  return SymId{it->second};
}

std::optional<std::pair<TypeId, int>> Vocabulary::findCtor(const std::string& name) const {
  auto it = ctorByName_.find(name);
  if (it == ctorByName_.end()) return std::nullopt;
  return std::make_pair(TypeId{it->second.first}, it->second.second);
}

std::string Vocabulary::typeName(TypeId t) const { return types_[t.v].name; }

std::string Vocabulary::signatureName(const Signature& sig) const {
  std::ostringstream os;
  if (sig.args.empty()) {
    os << "()";
  } else {
    for (std::size_t i = 0; i < sig.args.size(); ++i) {
      if (i) os << "**";
      os << typeName(sig.args[i]);
    }
  }
  os << "->" << typeName(sig.out);
  return os.str();
}

std::vector<Diagnostic> Vocabulary::validate() const {
  std::vector<Diagnostic> diags;
  auto err = [&](SourceSpan sp, std::string code, std::string msg) {
    diags.push_back({Severity::Error, sp, std::move(code), std::move(msg)});
  };

  const std::set<std::string> reserved = {"arity", "input", "output"};
  std::set<std::string> typeNames, symNames, ctorNames;
  for (const auto& t : types_) {
    if (!typeNames.insert(t.name).second)
      err(t.span, "DuplicateName", "type '" + t.name + "' declared twice");
    if (reserved.count(t.name))
      err(t.span, "DuplicateName", "'" + t.name + "' is a built-in introspection function");
    if (auto* c = std::get_if<CustomInterp>(&t.interp)) {
      if (c->ctors.empty())
        err(t.span, "EmptyEnumeration", "type '" + t.name + "' has an empty enumeration");
      std::set<std::string> local;
      for (const auto& name : c->ctors) {
        if (!local.insert(name).second)
          err(t.span, "DuplicateName",
              "constructor '" + name + "' repeated in type '" + t.name + "'");
        else if (!ctorNames.insert(name).second)
          err(t.span, "DuplicateName",
              "constructor '" + name + "' already used by another type");
        if (reserved.count(name))
          err(t.span, "DuplicateName",
              "'" + name + "' is a built-in introspection function");
      }
    }
    if (auto* s = std::get_if<SubtypeInterp>(&t.interp)) {
      for (TypeId a : s->sig.args)
        if (!a.valid() || a.v >= static_cast<std::int32_t>(types_.size()))
          err(t.span, "UnknownType", "subtype signature references an undeclared type");
      if (!s->sig.out.valid() || s->sig.out.v >= static_cast<std::int32_t>(types_.size()))
        err(t.span, "UnknownType", "subtype signature references an undeclared type");
    }
    if (auto* i = std::get_if<IntInterp>(&t.interp)) {
      if (i->bounds && i->bounds->lo > i->bounds->hi)
        err(t.span, "BadBounds", "empty integer range for type '" + t.name + "'");
    }
  }

  auto checkTypeRef = [&](TypeId t, SourceSpan sp, const std::string& who) {
    if (!t.valid() || t.v >= static_cast<std::int32_t>(types_.size()))
      err(sp, "UnknownType", who + " references an undeclared type");
  };

  for (const auto& s : symbols_) {
    if (!symNames.insert(s.name).second)
      err(s.span, "DuplicateName", "symbol '" + s.name + "' declared twice");
    if (typeNames.count(s.name))
      err(s.span, "DuplicateName", "symbol '" + s.name + "' collides with a type name");
    if (ctorNames.count(s.name))
      err(s.span, "DuplicateName", "symbol '" + s.name + "' collides with a constructor");
    for (TypeId a : s.sig.args) {
      checkTypeRef(a, s.span, "symbol '" + s.name + "'");
      if (a == kIntType)
        err(s.span, "UnboundedInt",
            "symbol '" + s.name + "' uses unbounded Int as an argument type; "
            "declare a bounded range, e.g. type T := Int[0..9]");
    }
    checkTypeRef(s.sig.out, s.span, "symbol '" + s.name + "'");
  }
  return diags;
}

std::vector<ConceptRef> conceptDomain(const Vocabulary& voc,
                                      const std::optional<Signature>& filter) {
  std::vector<ConceptRef> out;
  const auto& syms = voc.symbols();
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(syms.size()); ++i) {
    if (filter && !(syms[i].sig == *filter)) continue;
    out.push_back(ConceptRef::symbol(SymId{i}));
  }
  return out;
}

Signature conceptSignature(const Vocabulary& voc, ConceptRef c) {
  if (c.isSymbol()) return voc.symbol(SymId{c.index}).sig;
  // A type acts as the unary predicate of membership in itself.
  return Signature{{TypeId{c.index}}, kBoolType};
}

IntrospectResult introspect(const Vocabulary& voc, ConceptRef c, IntrospectQuery q,
                            int inputIndex) {
  Signature sig = conceptSignature(voc, c);
  IntrospectResult r;
  switch (q) {
    case IntrospectQuery::Arity:
      r.arity = sig.arity();
      break;
    case IntrospectQuery::Input:
      if (inputIndex < 1 || inputIndex > sig.arity())
        throw FocError("IndexOutOfRange",
                       "input(" + std::to_string(inputIndex) + ") on a concept of arity " +
                           std::to_string(sig.arity()));
      r.intension = ConceptRef::type(sig.args[inputIndex - 1]);
      break;
    case IntrospectQuery::Output:
      r.intension = ConceptRef::type(sig.out);
      break;
  }
  return r;
}

std::string elemName(const Vocabulary& voc, const DomainElem& e) {
  switch (e.kind()) {
    case DomainElem::Kind::Bool:
      return e.asBool() ? "true" : "false";
    case DomainElem::Kind::Int:
      return std::to_string(e.asInt());
    case DomainElem::Kind::Named: {
      const auto& t = voc.type(e.namedOwner());
      return std::get<CustomInterp>(t.interp).ctors[e.namedOrdinal()];
    }
    case DomainElem::Kind::Concept: {
      ConceptRef c = e.asConcept();
      if (c.isSymbol()) return "`" + voc.symbol(SymId{c.index}).name;
      return "`" + voc.type(TypeId{c.index}).name;
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------

bool exprEquals(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::BoolLit:
      if (a.boolValue != b.boolValue) return false;
      break;
    case ExprKind::Num:
      if (a.num != b.num) return false;
      break;
    case ExprKind::ElemLit:
      if (a.elem != b.elem) return false;
      break;
    case ExprKind::Var:
      if (a.var != b.var) return false;
      break;
    case ExprKind::SymApp:
      if (a.symbol != b.symbol) return false;
      break;
    case ExprKind::IntensionLit:
      if (a.intension != b.intension) return false;
      break;
    case ExprKind::Introspect:
      if (a.query != b.query || a.num != b.num) return false;
      break;
    case ExprKind::Quant:
      if (a.quant != b.quant || a.var != b.var || a.range != b.range) return false;
      break;
    case ExprKind::Sum:
      if (a.var != b.var || a.range != b.range) return false;
      break;
    case ExprKind::Count:
      if (a.binders != b.binders) return false;
      break;
    case ExprKind::IfGuard:
      if (a.var != b.var || !(a.guardSig == b.guardSig)) return false;
      break;
    default:
      break;
  }
  if (a.kids.size() != b.kids.size()) return false;
  for (std::size_t i = 0; i < a.kids.size(); ++i)
    if (!exprEquals(a.kids[i], b.kids[i])) return false;
  return true;
}

long long exprSize(const Expr& e) {
  long long n = 1;
  for (const auto& k : e.kids) n += exprSize(k);
  return n;
}

Expr mkBool(bool b) {
  Expr e;
  e.kind = ExprKind::BoolLit;
  e.boolValue = b;
  return e;
}

Expr mkNum(std::int64_t n) {
  Expr e;
  e.kind = ExprKind::Num;
  e.num = n;
  return e;
}

Expr mkVar(std::string name) {
  Expr e;
  e.kind = ExprKind::Var;
  e.var = std::move(name);
  return e;
}

Expr mkSymApp(SymId s, std::vector<Expr> args) {
  Expr e;
  e.kind = ExprKind::SymApp;
  e.symbol = s;
  e.kids = std::move(args);
  return e;
}

Expr mkIntension(ConceptRef c) {
  Expr e;
  e.kind = ExprKind::IntensionLit;
  e.intension = c;
  return e;
}

Expr mkValueApp(Expr fn, std::vector<Expr> args) {
  Expr e;
  e.kind = ExprKind::ValueApp;
  e.kids.push_back(std::move(fn));
  for (auto& a : args) e.kids.push_back(std::move(a));
  return e;
}

Expr mkUnary(ExprKind k, Expr a) {
  Expr e;
  e.kind = k;
  e.kids.push_back(std::move(a));
  return e;
}

Expr mkBinary(ExprKind k, Expr a, Expr b) {
  Expr e;
  e.kind = k;
  e.kids.push_back(std::move(a));
  e.kids.push_back(std::move(b));
  return e;
}

Expr mkQuant(QuantKind q, std::string var, TypeId range, Expr body) {
  Expr e;
  e.kind = ExprKind::Quant;
  e.quant = q;
  e.var = std::move(var);
  e.range = range;
  e.kids.push_back(std::move(body));
  return e;
}

Expr mkCount(std::vector<Binder> binders, Expr condition) {
  Expr e;
  e.kind = ExprKind::Count;
  e.binders = std::move(binders);
  e.kids.push_back(std::move(condition));
  return e;
}

Expr mkIfGuard(std::string var, Signature sig, Expr thenE, Expr elseE) {
  Expr e;
  e.kind = ExprKind::IfGuard;
  e.var = std::move(var);
  e.guardSig = std::move(sig);
  e.kids.push_back(std::move(thenE));
  e.kids.push_back(std::move(elseE));
  return e;
}

}  // namespace foc
