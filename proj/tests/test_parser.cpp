#include "doctest.h"
#include "foc/parser.hpp"
#include "foc/printer.hpp"
#include "helpers.hpp"

using namespace foc;

namespace {

const char* kMiniVoc = R"(
vocabulary V {
  type Patient := {ann, bob}
  hasFever : Patient -> Bool
  severity : Patient -> Int
  test : Patient -> Bool
  riskFactor : Concept[Patient->Bool] -> Bool
}
)";

SourceFile parseWithTheory(const std::string& body) {
  std::string text = std::string(kMiniVoc) + "theory T : V {\n" + body + "\n}\n";
  return parse(text, "t.foc");
}

}  // namespace

TEST_CASE("the symptoms test axiom parses to the documented shape") {
  SourceFile sf = parseWithTheory("!x in Patient: test(x) <=> 3 =< severity(x).");
  REQUIRE(sf.ok());
  REQUIRE(sf.theories.size() == 1);
  REQUIRE(sf.theories[0].axioms.size() == 1);
  const Expr& ax = sf.theories[0].axioms[0];
  REQUIRE(ax.kind == ExprKind::Quant);
  CHECK(ax.quant == QuantKind::Forall);
  CHECK(ax.var == "x");
  CHECK(sf.vocabulary.typeName(ax.range) == "Patient");
  const Expr& body = ax.kids[0];
  REQUIRE(body.kind == ExprKind::Equiv);
  CHECK(body.kids[0].kind == ExprKind::SymApp);
  CHECK(sf.vocabulary.symbol(body.kids[0].symbol).name == "test");
  REQUIRE(body.kids[1].kind == ExprKind::Leq);
  CHECK(body.kids[1].kids[0].kind == ExprKind::Num);
  CHECK(body.kids[1].kids[0].num == 3);
  CHECK(body.kids[1].kids[1].kind == ExprKind::SymApp);
}

TEST_CASE("enumerated assignments parse as intension literals") {
  SourceFile sf = parseWithTheory("riskFactor := {`hasFever, `test}.");
  REQUIRE(sf.ok());
  const auto& assigns = sf.theories[0].assignments;
  REQUIRE(assigns.size() == 1);
  CHECK(sf.vocabulary.symbol(assigns[0].symbol).name == "riskFactor");
  REQUIRE(assigns[0].table.entries.size() == 2);
  CHECK(assigns[0].table.entries[0].first[0].kind == RawElem::Kind::Backtick);
  CHECK(assigns[0].table.entries[0].first[0].name == "hasFever");
}

TEST_CASE("empty input gives a file with zero blocks") {
  SourceFile sf = parse("", "empty.foc");
  CHECK(sf.ok());
  CHECK(!sf.hasVocabulary);
  CHECK(sf.theories.empty());
  CHECK(sf.structures.empty());
}

TEST_CASE("value application on an expression keeps the composite fn") {
  SourceFile sf = parse(R"(
vocabulary V {
  type Country := {be}
  mapping : Concept[Country->Int] -> Concept[()->Int]
  threshold : Country -> Int
  thresholdEU : () -> Int
}
theory T : V {
  !o in Concept[Country->Int]: !c in Country: $(o)(c) =< $(mapping(o))().
}
)", "t.foc");
  REQUIRE(sf.ok());
  // dig out the inner comparison's right-hand side
  const Expr* e = &sf.theories[0].axioms[0];
  while (e->kind == ExprKind::Quant) e = &e->kids[0];
  REQUIRE(e->kind == ExprKind::Leq);
  const Expr& rhs = e->kids[1];
  REQUIRE(rhs.kind == ExprKind::ValueApp);
  CHECK(rhs.kids.size() == 1);  // nullary application
  REQUIRE(rhs.kids[0].kind == ExprKind::SymApp);
  CHECK(sf.vocabulary.symbol(rhs.kids[0].symbol).name == "mapping");
}

TEST_CASE("precedence: ~ binds over &, & over |, quantifier bodies extend right") {
  SourceFile sf = parse(R"(
vocabulary V { a, b, c : () -> Bool }
theory T : V { ~a & b | c. }
)", "t.foc");
  REQUIRE(sf.ok());
  const Expr& ax = sf.theories[0].axioms[0];
  REQUIRE(ax.kind == ExprKind::Or);
  REQUIRE(ax.kids[0].kind == ExprKind::And);
  CHECK(ax.kids[0].kids[0].kind == ExprKind::Not);
  CHECK(ax.kids[1].kind == ExprKind::SymApp);

  SourceFile sf2 = parse(R"(
vocabulary V { type T := {e} p : T -> Bool q : () -> Bool }
theory X : V { !x in T: p(x) | q. }
)", "t.foc");
  REQUIRE(sf2.ok());
  const Expr& ax2 = sf2.theories[0].axioms[0];
  REQUIRE(ax2.kind == ExprKind::Quant);
  CHECK(ax2.kids[0].kind == ExprKind::Or);
}

TEST_CASE("binary quantification desugars to guarded quantification") {
  SourceFile sf = parseWithTheory("!x in hasFever: test(x).");
  REQUIRE(sf.ok());
  const Expr& ax = sf.theories[0].axioms[0];
  REQUIRE(ax.kind == ExprKind::Quant);
  CHECK(sf.vocabulary.typeName(ax.range) == "Patient");
  REQUIRE(ax.kids[0].kind == ExprKind::Implies);
  CHECK(sf.vocabulary.symbol(ax.kids[0].kids[0].symbol).name == "hasFever");

  SourceFile sf2 = parseWithTheory("?x in hasFever: test(x).");
  REQUIRE(sf2.ok());
  CHECK(sf2.theories[0].axioms[0].kids[0].kind == ExprKind::And);
}

TEST_CASE("membership sugar becomes a disjunction of equalities") {
  SourceFile sf = parse(R"(
vocabulary V {
  type T := {e}
  f, g : T -> Bool
  c : () -> Concept[T->Bool]
}
theory X : V { c() in {`f, `g}. }
)", "t.foc");
  REQUIRE(sf.ok());
  const Expr& ax = sf.theories[0].axioms[0];
  REQUIRE(ax.kind == ExprKind::Or);
  CHECK(ax.kids[0].kind == ExprKind::Eq);
  CHECK(ax.kids[1].kind == ExprKind::Eq);
  CHECK(ax.kids[1].kids[1].kind == ExprKind::IntensionLit);
}

TEST_CASE("error recovery: one bad block still yields the good one") {
  SourceFile sf = parse(R"(
vocabulary V {
  type T := {e}
  p : T -> Bool
}
theory Bad : V {
  p(.
  p(e).
}
theory Good : V {
  p(e).
}
)", "t.foc");
  CHECK(!sf.ok());
  CHECK(!sf.diagnostics.empty());
  bool haveGood = false;
  for (const auto& th : sf.theories)
    if (th.name == "Good" && th.axioms.size() == 1) haveGood = true;
  CHECK(haveGood);
}

TEST_CASE("comments and backslash-in are accepted") {
  SourceFile sf = parseWithTheory("// a comment\n!x\\inPatient: test(x). // trailing");
  CHECK(sf.ok());
}

TEST_CASE("round-trip: print then re-parse is structurally identical") {
  auto roundTrip = [](const std::string& name) {
    SourceFile a = test::parseCorpus(name);
    REQUIRE(a.ok());
    std::string printed = prettyPrint(a);
    SourceFile b = parse(printed, name + ".printed");
    if (!b.ok()) FAIL(name << " reprint failed:\n" << printed << test::diagText(b.diagnostics));
    REQUIRE(a.theories.size() == b.theories.size());
    for (std::size_t t = 0; t < a.theories.size(); ++t) {
      REQUIRE(a.theories[t].axioms.size() == b.theories[t].axioms.size());
      for (std::size_t i = 0; i < a.theories[t].axioms.size(); ++i)
        CHECK(exprEquals(a.theories[t].axioms[i], b.theories[t].axioms[i]));
      REQUIRE(a.theories[t].definitions.size() == b.theories[t].definitions.size());
      for (std::size_t d = 0; d < a.theories[t].definitions.size(); ++d) {
        const auto& da = a.theories[t].definitions[d];
        const auto& db = b.theories[t].definitions[d];
        REQUIRE(da.rules.size() == db.rules.size());
        for (std::size_t r = 0; r < da.rules.size(); ++r) {
          CHECK(exprEquals(da.rules[r].body, db.rules[r].body));
          CHECK(da.rules[r].headVars == db.rules[r].headVars);
        }
      }
    }
    // printing is deterministic and stable under one more trip
    CHECK(prettyPrint(b) == printed);
  };
  roundTrip("symptoms.foc");
  roundTrip("intl_law.foc");
  roundTrip("disambiguation.foc");
  roundTrip("transclos.foc");
  roundTrip("setgame.foc");
  roundTrip("temperatures.foc");
}

TEST_CASE("prettyPrint renders subtype ranges and literals as written") {
  SourceFile sf = parse(R"(
vocabulary V {
  type Patient := {bob}
  p : Patient -> Bool
}
theory T : V { ?x in Concept[Patient->Bool]: $(x)(bob). }
)", "t.foc");
  REQUIRE(sf.ok());
  std::string s = prettyPrint(sf.vocabulary, sf.theories[0].axioms[0]);
  CHECK(s == "?x in Concept[Patient->Bool]: $(x)(bob)");
  CHECK(prettyPrint(sf.vocabulary, mkNum(3)) == "3");
}

TEST_CASE("unknown names produce diagnostics with spans") {
  SourceFile sf = parseWithTheory("!x in Patient: nosuch(x).");
  CHECK(!sf.ok());
  REQUIRE(!sf.diagnostics.empty());
  CHECK(sf.diagnostics[0].span.line > 0);
  CHECK(sf.diagnostics[0].code == "SyntaxError");
}
