#pragma once

#include <optional>
#include <string>
#include <vector>

#include "foc/kernel.hpp"

namespace foc {

/// Static kind of a bound variable or expression: a base type, or "a concept
/// with this signature" (introduced by quantifying over a conceptual subtype
/// or by a guard).
struct StaticKind {
  enum class Tag : std::uint8_t { Base, ConceptOf };
  Tag tag = Tag::Base;
  TypeId base;
  Signature sig;

  static StaticKind baseType(TypeId t) { return {Tag::Base, t, {}}; }
  static StaticKind conceptOf(Signature s) { return {Tag::ConceptOf, {}, std::move(s)}; }
  bool isConceptOf() const { return tag == Tag::ConceptOf; }
  friend bool operator==(const StaticKind&, const StaticKind&) = default;
};

/// The typing function: variable name -> static kind, innermost binding wins.
class TypingContext {
 public:
  void push(const std::string& name, StaticKind k) { stack_.emplace_back(name, std::move(k)); }
  void pop() { stack_.pop_back(); }
  const StaticKind* lookup(const std::string& name) const {
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it)
      if (it->first == name) return &it->second;
    return nullptr;
  }
  bool shadows(const std::string& name) const {
    int n = 0;
    for (const auto& [k, v] : stack_)
      if (k == name) ++n;
    return n > 1;
  }

 private:
  std::vector<std::pair<std::string, StaticKind>> stack_;
};

struct CheckReport {
  bool ok = false;
  std::vector<Diagnostic> diagnostics;
  long long nodeCount = 0;
  long long judgmentSteps = 0;
};

/// Well-formedness of a sentence over the vocabulary: arity and argument
/// types, guard discipline for value applications, definedness of
/// introspection, no free variables. Single pass, one judgment step per node.
CheckReport checkSentence(const Vocabulary& voc, const Expr& sentence);

/// Same checks without requiring a Bool result (CLI queries over terms).
CheckReport checkExpression(const Vocabulary& voc, const Expr& e);

/// Whole theory: every axiom, every rule (head and body), every assignment's
/// symbol. Also checks definition shape (one symbol per definition,
/// function/predicate head consistency).
CheckReport checkTheory(const Vocabulary& voc, const Theory& th);

/// Instrumentation hook: (nodeCount, judgmentSteps) of a checkSentence run.
std::pair<long long, long long> countJudgmentSteps(const Vocabulary& voc, const Expr& e);

/// Rewrites concept-level sugar into the kernel forms:
///  - quantification/aggregation over Concept[sig] becomes quantification over
///    Concept with an IfGuard whose else-branch is the quantifier's neutral
///    element (false for exists/count, true for forall, 0 for sum);
///  - a value application on a composite expression e becomes
///    ?y in Concept: if y::[sig(e)] then y = e & $(y)(..) else false,
///    lifted around the enclosing atom.
/// Identity on guard-free FO sentences.
Expr desugarGuards(const Vocabulary& voc, const Expr& sentence);
Theory desugarGuards(const Vocabulary& voc, const Theory& th);

/// Static type of a checked expression (used by the evaluator tests and the
/// grounder); nullopt for formulas whose kind is plain Bool.
std::optional<StaticKind> staticKindOf(const Vocabulary& voc, const TypingContext& ctx,
                                       const Expr& e);

}  // namespace foc
