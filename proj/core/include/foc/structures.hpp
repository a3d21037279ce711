#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "foc/kernel.hpp"

namespace foc {

/// Per-type ordered domains. Deterministic: declaration order drives element
/// order; the Concept domain is exactly conceptDomain(voc); subtype domains
/// are the filtered subsets. Types whose domain is not finitely enumerable
/// (unbounded Int) have no domain here.
class Universe {
 public:
  static Universe build(const Vocabulary& voc);

  bool hasDomain(TypeId t) const;
  const std::vector<DomainElem>& domain(TypeId t) const;  // throws UnboundedInt
  std::int64_t size(TypeId t) const;
  /// Ordinal of an element within a type's domain, or -1 if absent.
  int indexOf(TypeId t, const DomainElem& e) const;

 private:
  std::vector<std::optional<std::vector<DomainElem>>> domains_;
  std::vector<std::map<DomainElem, int>> index_;
  const Vocabulary* voc_ = nullptr;
};

/// Dense total table for one symbol: output per argument tuple, tuples ranked
/// lexicographically over the argument domains.
struct Table {
  std::vector<DomainElem> out;
  friend bool operator==(const Table&, const Table&) = default;
};

/// Per-symbol optional tables; absent = uninterpreted.
class Interp {
 public:
  explicit Interp(std::size_t numSymbols) : tables_(numSymbols) {}
  Interp() = default;

  bool has(SymId s) const { return tables_[s.v].has_value(); }
  const Table& table(SymId s) const { return *tables_[s.v]; }
  void set(SymId s, Table t) { tables_[s.v] = std::move(t); }
  void clear(SymId s) { tables_[s.v] = std::nullopt; }
  std::size_t size() const { return tables_.size(); }

  friend bool operator==(const Interp&, const Interp&) = default;

 private:
  std::vector<std::optional<Table>> tables_;
};

/// Structures (and everything derived from them, including solver models)
/// borrow the vocabulary: it must stay alive and in place.
struct Structure {
  const Vocabulary* voc = nullptr;
  std::string name;
  Universe universe;
  Interp interp;
};

/// Tuple ranking for a symbol's argument domains: dense tables are indexed by
/// the lexicographic rank of the argument tuple.
class TupleSpace {
 public:
  TupleSpace(const Universe& u, const Signature& sig);

  std::int64_t count() const { return count_; }
  std::vector<DomainElem> tuple(std::int64_t rank) const;
  /// -1 when some element is outside its argument domain.
  std::int64_t rank(std::span<const DomainElem> tuple) const;

 private:
  const Universe* u_ = nullptr;
  std::vector<TypeId> args_;
  std::int64_t count_ = 1;
};

Structure makeStructure(const Vocabulary& voc, std::string name = "S");

bool isTotal(const Structure& s);

/// Variable assignments during evaluation: innermost binding wins.
class Assignment {
 public:
  void push(const std::string& name, DomainElem v) { stack_.emplace_back(name, v); }
  void pop() { stack_.pop_back(); }
  const DomainElem* lookup(const std::string& name) const {
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it)
      if (it->first == name) return &it->second;
    return nullptr;
  }

 private:
  std::vector<std::pair<std::string, DomainElem>> stack_;
};

/// Number of total structures extending s: product over uninterpreted symbols
/// of |outDomain|^|argDomain|. Throws CombinatorialLimit past the cap and
/// UnboundedInt when an open symbol has no finite domain.
std::int64_t expansionCount(const Structure& s, std::int64_t cap = 10'000'000);

/// Enumerates every total structure extending the base exactly once, in
/// lexicographic order over (symbol declaration order, tuple order, output
/// domain order).
class ExpansionStream {
 public:
  explicit ExpansionStream(const Structure& base, std::int64_t cap = 10'000'000);
  /// Returns the next expansion, or nullopt when exhausted.
  std::optional<Structure> next();

 private:
  const Structure* base_;
  std::vector<SymId> open_;
  std::vector<std::int64_t> outSize_;
  std::vector<Table> current_;
  bool first_ = true, done_ = false;
};

/// Resolve a parsed structure block against a vocabulary. Table literals are
/// checked for domain membership and totality (set form is closed-world;
/// map form needs every tuple or an `else` default).
Structure resolveStructure(const Vocabulary& voc, const StructureDecl& decl,
                           DiagnosticSink& diags);

/// Merge assignment statements (theory-level `:=`) into a structure.
/// Disagreement on an already-interpreted symbol is a ConflictError.
void mergeAssignments(Structure& s, std::span<const AssignmentStmt> assigns,
                      DiagnosticSink& diags);

/// Canonical text form: a `structure` block, tuples in lexicographic order,
/// `<unknown>` for absent tables. save . load = identity on canonical form.
std::string saveStructure(const Structure& s);
Structure loadStructure(Vocabulary& voc, const std::string& text,
                        DiagnosticSink& diags);

std::string structureToJson(const Structure& s);

}  // namespace foc
