#include "doctest.h"
#include "foc/parser.hpp"
#include "foc/printer.hpp"
#include "foc/typecheck.hpp"
#include "helpers.hpp"

using namespace foc;

namespace {

const char* kVoc = R"(
vocabulary V {
  type Patient := {ann, bob}
  type Temp := Int[0..100]
  p : Patient -> Bool
  q : Patient -> Bool
  sev : Patient -> Temp
  f : Patient -> Patient
  reading : Patient ** Patient -> Temp
}
)";

SourceFile parseSentence(const std::string& s) {
  return parse(std::string(kVoc) + "theory T : V { " + s + " }", "t.foc");
}

CheckReport checkOne(const std::string& s) {
  SourceFile sf = parseSentence(s);
  REQUIRE_MESSAGE(sf.ok(), test::diagText(sf.diagnostics));
  REQUIRE(sf.theories[0].axioms.size() == 1);
  return checkSentence(sf.vocabulary, sf.theories[0].axioms[0]);
}

bool hasCode(const CheckReport& r, const std::string& code) {
  for (const auto& d : r.diagnostics)
    if (d.code == code) return true;
  return false;
}

}  // namespace

TEST_CASE("value applications are well-formed under subtype quantification") {
  CHECK(checkOne("!x in Concept[Patient->Bool]: $(x)(bob).").ok);
  CHECK(checkOne("!x in Concept[Patient->Bool]: !y in Patient: $(x)(y).").ok);
}

TEST_CASE("the three ill-formed $(x)() shapes are rejected") {
  // x ranges over domain elements
  CheckReport r1 = checkOne("?x in Patient: $(x)().");
  CHECK(!r1.ok);
  CHECK(hasCode(r1, "UnguardedValueApp"));
  // x is the concept of a unary predicate, applied with no arguments
  CheckReport r2 = checkOne("?x in Concept[Patient->Bool]: $(x)().");
  CHECK(!r2.ok);
  CHECK(hasCode(r2, "ArityMismatch"));
  // x is the concept of a unary function, applied with no arguments
  CheckReport r3 = checkOne("?x in Concept[Patient->Patient]: $(x)().");
  CHECK(!r3.ok);
  CHECK(hasCode(r3, "ArityMismatch"));
}

TEST_CASE("arity mismatch against a binary concept") {
  CheckReport r =
      checkOne("!s in Concept[Patient**Patient->Temp]: !t in Patient: 0 =< $(s)(t).");
  CHECK(!r.ok);
  CHECK(hasCode(r, "ArityMismatch"));
}

TEST_CASE("quantifying over plain Concept leaves value application unguarded") {
  CheckReport r = checkOne("?x in Concept: $(x)(bob).");
  CHECK(!r.ok);
  CHECK(hasCode(r, "UnguardedValueApp"));
  // ... unless a guard refines it
  CHECK(checkOne("?x in Concept: if x::[Patient->Bool] then $(x)(bob) else false.").ok);
}

TEST_CASE("aggregates over a predicate whose argument type is a subtype") {
  SourceFile sf = test::parseCorpus("symptoms.foc");
  REQUIRE(sf.ok());
  CheckReport r = checkTheory(sf.vocabulary, sf.theories[0]);
  CHECK_MESSAGE(r.ok, test::diagText(r.diagnostics));
}

TEST_CASE("all corpus theories pass checking") {
  for (const char* name : {"symptoms.foc", "intl_law.foc", "disambiguation.foc",
                           "transclos.foc", "setgame.foc", "temperatures.foc"}) {
    SourceFile sf = test::parseCorpus(name);
    REQUIRE_MESSAGE(sf.ok(), name);
    for (const auto& th : sf.theories) {
      CheckReport r = checkTheory(sf.vocabulary, th);
      CHECK_MESSAGE(r.ok, name << ": " << test::diagText(r.diagnostics));
    }
  }
}

TEST_CASE("comparisons demand matching operand types") {
  CHECK(!checkOne("?x in Patient: x = 3.").ok);
  CHECK(!checkOne("?x in Patient: ?s in Concept[Patient->Bool]: x = s.").ok);
  CHECK(checkOne("?s in Concept[Patient->Bool]: ?t in Concept[Patient->Bool]: s = t.").ok);
  CHECK(checkOne("!x in Patient: sev(x) =< 40.").ok);
  CHECK(!checkOne("!x in Patient: x =< x.").ok);
}

TEST_CASE("integer arguments must stay within declared bounds") {
  SourceFile sf = parse(R"(
vocabulary W {
  type Small := Int[0..3]
  h : Small -> Bool
}
theory T : W {
  h(2).
  h(7).
}
)", "t.foc");
  REQUIRE(sf.ok());
  CHECK(checkSentence(sf.vocabulary, sf.theories[0].axioms[0]).ok);
  CheckReport bad = checkSentence(sf.vocabulary, sf.theories[0].axioms[1]);
  CHECK(!bad.ok);
  CHECK(hasCode(bad, "TypeMismatch"));
}

TEST_CASE("shadowing is a warning, not an error") {
  CheckReport r = checkOne("!x in Patient: !x in Patient: p(x).");
  CHECK(r.ok);
  bool warned = false;
  for (const auto& d : r.diagnostics)
    if (d.code == "ShadowedVariable" && d.severity == Severity::Warning) warned = true;
  CHECK(warned);
}

TEST_CASE("free variables are reported") {
  SourceFile sf = parseSentence("p(ann).");
  REQUIRE(sf.ok());
  Expr freeVar = mkSymApp(*sf.vocabulary.findSymbol("p"), {mkVar("z")});
  CheckReport r = checkSentence(sf.vocabulary, freeVar);
  CHECK(!r.ok);
  CHECK(hasCode(r, "FreeVariableInSentence"));
}

TEST_CASE("introspection typing") {
  CHECK(checkOne("!x in Concept: arity(x) =< 2.").ok);
  CHECK(checkOne("!x in Concept[Patient->Bool]: output(x) = `Bool.").ok);
  CHECK(checkOne("!x in Concept[Patient->Bool]: input(x, 1) = `Patient.").ok);
  CheckReport badIndex = checkOne("!x in Concept[Patient->Bool]: input(x, 2) = `Patient.");
  CHECK(!badIndex.ok);
  CHECK(hasCode(badIndex, "IndexOutOfRange"));
  CheckReport unguarded = checkOne("!x in Concept: input(x, 1) = `Patient.");
  CHECK(!unguarded.ok);
  CHECK(hasCode(unguarded, "UnguardedIntrospect"));
  // introspection results may be type intensions, outside every symbol domain
  CHECK(!checkOne("!x in Concept[Patient->Bool]: $(output(x))(bob).").ok);
}

TEST_CASE("desugaring rewrites subtype quantification to guards") {
  SourceFile sf = parse(R"(
vocabulary V { p, q : () -> Bool }
theory T : V { ?x in Concept[()->Bool]: $(x)(). }
)", "t.foc");
  REQUIRE(sf.ok());
  Expr out = desugarGuards(sf.vocabulary, sf.theories[0].axioms[0]);
  CHECK(prettyPrint(sf.vocabulary, out) ==
        "?x in Concept: if x::[()->Bool] then $(x)() else false");
  CHECK(checkSentence(sf.vocabulary, out).ok);
}

TEST_CASE("desugaring uses the forall neutral element for universal guards") {
  SourceFile sf = parse(R"(
vocabulary V { p, q : () -> Bool }
theory T : V { !x in Concept[()->Bool]: $(x)(). }
)", "t.foc");
  REQUIRE(sf.ok());
  Expr out = desugarGuards(sf.vocabulary, sf.theories[0].axioms[0]);
  CHECK(prettyPrint(sf.vocabulary, out) ==
        "!x in Concept: if x::[()->Bool] then $(x)() else true");
}

TEST_CASE("desugaring lifts value applications on composite expressions") {
  SourceFile sf = test::parseCorpus("intl_law.foc");
  REQUIRE(sf.ok());
  Theory out = desugarGuards(sf.vocabulary, sf.theories[0]);
  std::string printed = prettyPrint(sf.vocabulary, out.axioms[0]);
  CHECK(printed.find("g0 = mapping(o)") != std::string::npos);
  CHECK(printed.find("$(g0)()") != std::string::npos);
  CHECK(checkSentence(sf.vocabulary, out.axioms[0]).ok);
}

TEST_CASE("desugaring is the identity on guard-free sentences") {
  SourceFile sf = parseSentence("!x in Patient: p(x) => q(f(x)).");
  REQUIRE(sf.ok());
  Expr out = desugarGuards(sf.vocabulary, sf.theories[0].axioms[0]);
  CHECK(exprEquals(out, sf.theories[0].axioms[0]));
}

TEST_CASE("judgment steps stay linear in the number of subformulas") {
  auto conjuncts = [](int n) {
    std::string s = "p(ann)";
    for (int i = 1; i < n; ++i) s += " & p(ann)";
    return s + ".";
  };
  for (int n : {10, 100, 1000}) {
    SourceFile sf = parseSentence(conjuncts(n));
    REQUIRE(sf.ok());
    auto [nodes, steps] = countJudgmentSteps(sf.vocabulary, sf.theories[0].axioms[0]);
    CHECK(nodes >= n);
    CHECK(steps <= 3 * nodes);
  }
  // nested quantifier depth: affine growth
  long long prevSteps = 0, delta = 0;
  for (int d = 1; d <= 50; ++d) {
    std::string s;
    for (int i = 0; i < d; ++i) s += "!x" + std::to_string(i) + " in Patient: ";
    s += "p(ann).";
    SourceFile sf = parseSentence(s);
    REQUIRE(sf.ok());
    auto [nodes, steps] = countJudgmentSteps(sf.vocabulary, sf.theories[0].axioms[0]);
    CHECK(steps <= 3 * nodes);
    if (d > 2) CHECK(steps - prevSteps == delta);
    delta = steps - prevSteps;
    prevSteps = steps;
  }
}

TEST_CASE("a single atom costs a small fixed amount") {
  SourceFile sf = parse(R"(
vocabulary V { p : () -> Bool }
theory T : V { p(). }
)", "t.foc");
  REQUIRE(sf.ok());
  auto [nodes, steps] = countJudgmentSteps(sf.vocabulary, sf.theories[0].axioms[0]);
  CHECK(nodes == 1);
  CHECK(steps >= 1);
  CHECK(steps <= 3);
}

TEST_CASE("linearity holds across the corpus") {
  for (const char* name : {"symptoms.foc", "intl_law.foc", "disambiguation.foc",
                           "transclos.foc", "setgame.foc", "temperatures.foc"}) {
    SourceFile sf = test::parseCorpus(name);
    REQUIRE(sf.ok());
    for (const auto& th : sf.theories)
      for (const auto& ax : th.axioms) {
        auto [nodes, steps] = countJudgmentSteps(sf.vocabulary, ax);
        CHECK(steps <= 3 * nodes);
      }
  }
}

TEST_CASE("definition rules are checked head and body") {
  SourceFile sf = parse(R"(
vocabulary V {
  type T := {a, b}
  d : T -> Bool
  e : T -> T
}
theory Bad : V {
  { !x in T: e(x) <- d(x). }
}
)", "t.foc");
  REQUIRE(sf.ok());
  CHECK(!checkTheory(sf.vocabulary, sf.theories[0]).ok);  // function head without '= t'
}

TEST_CASE("a defined symbol cannot also be assigned") {
  SourceFile sf = parse(R"(
vocabulary V {
  type T := {a}
  d : T -> Bool
}
theory Bad : V {
  d := {a}.
  { !x in T: d(x). }
}
)", "t.foc");
  REQUIRE(sf.ok());
  CheckReport r = checkTheory(sf.vocabulary, sf.theories[0]);
  CHECK(!r.ok);
  CHECK(hasCode(r, "ConflictError"));
}
