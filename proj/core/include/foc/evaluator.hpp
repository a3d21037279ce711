#pragma once

#include <optional>
#include <span>
#include <vector>

#include "foc/structures.hpp"
#include "foc/typecheck.hpp"

namespace foc {

/// Partial valuation result: a domain element, or undefined.
struct Value {
  std::optional<DomainElem> v;

  static Value undef() { return {}; }
  static Value of(DomainElem e) { return {e}; }
  static Value boolean(bool b) { return {DomainElem::boolean(b)}; }
  bool defined() const { return v.has_value(); }
  bool isTrue() const { return v && v->kind() == DomainElem::Kind::Bool && v->asBool(); }
  bool isFalse() const { return v && v->kind() == DomainElem::Kind::Bool && !v->asBool(); }
  friend bool operator==(const Value&, const Value&) = default;
};

/// Recursive-descent valuation over a structure. Strict connectives and
/// quantifiers; the guard is the only non-strict construct. Caches tuple
/// spaces per symbol. An optional overlay supplies in-progress tables during
/// fixpoint computation (entries absent there evaluate as undefined).
class Evaluator {
 public:
  using PartialTable = std::vector<std::optional<DomainElem>>;
  using Overlay = std::vector<std::optional<PartialTable>>;

  explicit Evaluator(const Structure& s);

  Value eval(const Expr& e, Assignment& nu) const;
  Value evalClosed(const Expr& e) const;

  const Structure& structure() const { return *s_; }
  const TupleSpace& space(SymId sym) const;

  const Overlay* overlay = nullptr;

 private:
  const Structure* s_;
  mutable std::vector<std::optional<TupleSpace>> spaces_;

  Value apply(SymId sym, std::span<const DomainElem> args) const;
  void countRec(const Expr& e, std::size_t i, Assignment& nu, std::int64_t& n,
                bool& undef) const;
};

Value eval(const Structure& s, Assignment& nu, const Expr& e);

/// Strict entry point: a checker-accepted sentence over a total structure
/// must be defined; undefined here signals a checker bug.
/// Throws FocError("UndefinedResult").
bool evalSentence(const Structure& s, const Expr& sentence);

/// Symbols a definition's rules read (for stratification and for deciding
/// when a fixpoint can run). Value applications contribute every symbol
/// whose signature matches the applied concept's signature.
std::vector<SymId> definitionUses(const Vocabulary& voc, const Definition& def);

/// Stratified least-fixpoint evaluation of definitions. Defined symbols must
/// be uninterpreted in s. Throws FocError with code NonStratified,
/// MultipleValues, NoValue or DerivedValueOutOfDomain.
Interp evalDefinitions(const Structure& s, std::span<const Definition> defs);

}  // namespace foc
