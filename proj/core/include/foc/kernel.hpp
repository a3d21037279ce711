#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "foc/source.hpp"

namespace foc {

// ---------------------------------------------------------------------------
// Identifiers into a vocabulary. Plain indices wrapped for type safety.
// ---------------------------------------------------------------------------

struct TypeId {
  std::int32_t v = -1;
  bool valid() const { return v >= 0; }
  friend auto operator<=>(const TypeId&, const TypeId&) = default;
};

struct SymId {
  std::int32_t v = -1;
  bool valid() const { return v >= 0; }
  friend auto operator<=>(const SymId&, const SymId&) = default;
};

// Builtins occupy fixed slots in every vocabulary.
inline constexpr TypeId kBoolType{0};
inline constexpr TypeId kIntType{1};
inline constexpr TypeId kConceptType{2};
inline constexpr std::int32_t kNumBuiltinTypes = 3;

/// Argument types (arity many) plus the output type. Predicates are exactly
/// the signatures with output Bool.
struct Signature {
  std::vector<TypeId> args;
  TypeId out;

  int arity() const { return static_cast<int>(args.size()); }
  friend bool operator==(const Signature&, const Signature&) = default;
};

struct IntBounds {
  std::int64_t lo = 0;
  std::int64_t hi = -1;
  std::int64_t size() const { return hi - lo + 1; }
  friend bool operator==(const IntBounds&, const IntBounds&) = default;
};

struct BoolInterp {
  friend bool operator==(const BoolInterp&, const BoolInterp&) = default;
};
struct IntInterp {
  std::optional<IntBounds> bounds;
  friend bool operator==(const IntInterp&, const IntInterp&) = default;
};
struct ConceptInterp {
  friend bool operator==(const ConceptInterp&, const ConceptInterp&) = default;
};
struct CustomInterp {
  std::vector<std::string> ctors;
  friend bool operator==(const CustomInterp&, const CustomInterp&) = default;
};
struct SubtypeInterp {
  Signature sig;
  friend bool operator==(const SubtypeInterp&, const SubtypeInterp&) = default;
};

using TypeInterp =
    std::variant<BoolInterp, IntInterp, ConceptInterp, CustomInterp, SubtypeInterp>;

struct TypeSymbol {
  std::string name;
  TypeInterp interp;
  SourceSpan span;

  bool isBool() const { return std::holds_alternative<BoolInterp>(interp); }
  bool isIntLike() const { return std::holds_alternative<IntInterp>(interp); }
  bool isConcept() const { return std::holds_alternative<ConceptInterp>(interp); }
  bool isCustom() const { return std::holds_alternative<CustomInterp>(interp); }
  bool isSubtype() const { return std::holds_alternative<SubtypeInterp>(interp); }
  const std::optional<IntBounds>* intBounds() const {
    auto* i = std::get_if<IntInterp>(&interp);
    return i ? &i->bounds : nullptr;
  }
};

struct SymbolDecl {
  std::string name;
  Signature sig;
  SourceSpan span;
};

// ---------------------------------------------------------------------------
// Concepts: one intensional object per vocabulary symbol, plus the intensions
// of types themselves (introspection results only; they are outside the
// Concept type's domain).
// ---------------------------------------------------------------------------

struct ConceptRef {
  enum class Of : std::uint8_t { Symbol, Type };
  Of of = Of::Symbol;
  std::int32_t index = -1;

  static ConceptRef symbol(SymId s) { return {Of::Symbol, s.v}; }
  static ConceptRef type(TypeId t) { return {Of::Type, t.v}; }
  bool isSymbol() const { return of == Of::Symbol; }
  friend auto operator<=>(const ConceptRef&, const ConceptRef&) = default;
};

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

class Vocabulary {
 public:
  Vocabulary();

  std::string name;

  const std::vector<TypeSymbol>& types() const { return types_; }
  const std::vector<SymbolDecl>& symbols() const { return symbols_; }
  const TypeSymbol& type(TypeId t) const { return types_[t.v]; }
  const SymbolDecl& symbol(SymId s) const { return symbols_[s.v]; }

  TypeId addType(TypeSymbol t);
  SymId addSymbol(SymbolDecl s);

  /// The conceptual subtype Concept[sig]; interned on first use.
  TypeId subtypeOf(const Signature& sig);

  std::optional<TypeId> findType(const std::string& name) const;
  std::optional<SymId> findSymbol(const std::string& name) const;
  /// Custom-type constructor lookup: owning type and ordinal within it.
  std::optional<std::pair<TypeId, int>> findCtor(const std::string& name) const;

  /// Structural checks on the declarations themselves. Returns accumulated
  /// diagnostics; the vocabulary is usable iff none is an error.
  std::vector<Diagnostic> validate() const;

  /// Surface rendering of a type name (subtypes print as Concept[..->..]).
  std::string typeName(TypeId t) const;
  std::string signatureName(const Signature& sig) const;

 private:
  std::vector<TypeSymbol> types_;
  std::vector<SymbolDecl> symbols_;
  std::unordered_map<std::string, std::int32_t> typeByName_;
  std::unordered_map<std::string, std::int32_t> symByName_;
  std::unordered_map<std::string, std::pair<std::int32_t, int>> ctorByName_;
};

/// All concepts of non-builtin symbols in declaration order; with a filter,
/// only those whose signature equals it componentwise.
std::vector<ConceptRef> conceptDomain(const Vocabulary& voc,
                                      const std::optional<Signature>& filter = {});

/// Signature carried by a concept for introspection. Type intensions act as
/// unary predicates over their own type.
Signature conceptSignature(const Vocabulary& voc, ConceptRef c);

enum class IntrospectQuery { Arity, Input, Output };

struct IntrospectResult {
  std::optional<std::int64_t> arity;   // set for Arity
  std::optional<ConceptRef> intension; // set for Input/Output
};

/// arity | input(i) | output on a concept. Throws FocError("IndexOutOfRange")
/// when input's index is outside 1..arity.
IntrospectResult introspect(const Vocabulary& voc, ConceptRef c, IntrospectQuery q,
                            int inputIndex = 0);

// ---------------------------------------------------------------------------
// Domain elements (used by structures, and for literals in expressions)
// ---------------------------------------------------------------------------

class DomainElem {
 public:
  enum class Kind : std::uint8_t { Bool, Int, Named, Concept };

  static DomainElem boolean(bool b) {
    DomainElem e;
    e.kind_ = Kind::Bool;
    e.num_ = b ? 1 : 0;
    return e;
  }
  static DomainElem integer(std::int64_t v) {
    DomainElem e;
    e.kind_ = Kind::Int;
    e.num_ = v;
    return e;
  }
  static DomainElem named(TypeId owner, int ordinal) {
    DomainElem e;
    e.kind_ = Kind::Named;
    e.num_ = ordinal;
    e.aux_ = owner.v;
    return e;
  }
  static DomainElem intension(ConceptRef c) {
    DomainElem e;
    e.kind_ = Kind::Concept;
    e.num_ = c.index;
    e.aux_ = c.of == ConceptRef::Of::Symbol ? 0 : 1;
    return e;
  }

  Kind kind() const { return kind_; }
  bool asBool() const { return num_ != 0; }
  std::int64_t asInt() const { return num_; }
  TypeId namedOwner() const { return TypeId{aux_}; }
  int namedOrdinal() const { return static_cast<int>(num_); }
  ConceptRef asConcept() const {
    return {aux_ == 0 ? ConceptRef::Of::Symbol : ConceptRef::Of::Type,
            static_cast<std::int32_t>(num_)};
  }

  friend auto operator<=>(const DomainElem&, const DomainElem&) = default;

 private:
  Kind kind_ = Kind::Bool;
  std::int64_t num_ = 0;
  std::int32_t aux_ = 0;
};

/// Element rendering: "bob", "7", "true", "`hasFever".
std::string elemName(const Vocabulary& voc, const DomainElem& e);

// ---------------------------------------------------------------------------
// Expressions: unified term/formula AST
// ---------------------------------------------------------------------------

enum class ExprKind : std::uint8_t {
  BoolLit,
  Num,
  ElemLit,  // custom-type constructor literal
  Var,
  SymApp,
  IntensionLit,
  ValueApp,   // kids[0] = fn, kids[1..] = args
  Introspect, // kids[0] = concept expr
  Not,
  And,
  Or,
  Implies,
  Equiv,
  Eq,
  Neq,
  Lt,
  Leq,
  Gt,
  Geq,
  Quant,   // kids[0] = body
  Count,   // kids[0] = condition, multiple binders
  Sum,     // kids[0] = term
  IfGuard, // kids[0] = then, kids[1] = else
};

enum class QuantKind : std::uint8_t { Forall, Exists };

struct Binder {
  std::string var;
  TypeId range;
  friend bool operator==(const Binder&, const Binder&) = default;
};

struct Expr {
  ExprKind kind = ExprKind::BoolLit;
  SourceSpan span;
  std::vector<Expr> kids;

  bool boolValue = false;            // BoolLit
  std::int64_t num = 0;              // Num; Introspect input index
  std::string var;                   // Var / Quant / Sum / IfGuard variable
  SymId symbol;                      // SymApp
  ConceptRef intension;              // IntensionLit
  DomainElem elem;                   // ElemLit
  QuantKind quant = QuantKind::Forall;
  TypeId range;                      // Quant / Sum range
  std::vector<Binder> binders;       // Count
  Signature guardSig;                // IfGuard
  IntrospectQuery query = IntrospectQuery::Arity;  // Introspect
};

/// Structural equality ignoring source spans.
bool exprEquals(const Expr& a, const Expr& b);

/// Number of AST nodes (binders not counted).
long long exprSize(const Expr& e);

// Convenience constructors used by tests and desugaring.
Expr mkBool(bool b);
Expr mkNum(std::int64_t n);
Expr mkVar(std::string name);
Expr mkSymApp(SymId s, std::vector<Expr> args);
Expr mkIntension(ConceptRef c);
Expr mkValueApp(Expr fn, std::vector<Expr> args);
Expr mkUnary(ExprKind k, Expr a);
Expr mkBinary(ExprKind k, Expr a, Expr b);
Expr mkQuant(QuantKind q, std::string var, TypeId range, Expr body);
Expr mkCount(std::vector<Binder> binders, Expr condition);
Expr mkIfGuard(std::string var, Signature sig, Expr thenE, Expr elseE);

// ---------------------------------------------------------------------------
// Theories
// ---------------------------------------------------------------------------

/// One rule of an inductive definition, normalized: distinct head variables
/// with ranges; for functions an output term.
struct DefRule {
  SymId symbol;
  std::vector<Binder> headVars;
  std::optional<Expr> outTerm;  // absent for predicate heads
  Expr body;                    // mkBool(true) when no <- part was written
  SourceSpan span;
};

/// All rules of one Definition define the same symbol.
struct Definition {
  SymId symbol;
  std::vector<DefRule> rules;
};

/// A literal element in an enumerated assignment, before domain resolution.
struct RawElem {
  enum class Kind : std::uint8_t { Int, Name, Backtick, Bool };
  Kind kind = Kind::Int;
  std::int64_t num = 0;
  bool b = false;
  std::string name;
  SourceSpan span;
};

struct TableLiteral {
  enum class Form : std::uint8_t { Unknown, Set, Map, Value };
  Form form = Form::Unknown;
  std::vector<std::pair<std::vector<RawElem>, std::optional<RawElem>>> entries;
  std::optional<RawElem> elseValue;
  std::optional<RawElem> value;  // nullary `f := v`
  SourceSpan span;
};

struct AssignmentStmt {
  SymId symbol;
  TableLiteral table;
  SourceSpan span;
};

struct Theory {
  std::string name;
  std::string vocName;
  std::vector<Expr> axioms;
  std::vector<Definition> definitions;
  std::vector<AssignmentStmt> assignments;

  std::vector<SymId> definedSymbols() const {
    std::vector<SymId> out;
    for (const auto& d : definitions) out.push_back(d.symbol);
    return out;
  }
};

struct StructureDecl {
  std::string name;
  std::string vocName;
  std::vector<AssignmentStmt> assignments;
};

}  // namespace foc
