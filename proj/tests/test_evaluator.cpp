#include <functional>
#include <random>
#include <set>

#include "doctest.h"
#include "foc/evaluator.hpp"
#include "foc/parser.hpp"
#include "foc/typecheck.hpp"
#include "helpers.hpp"

using namespace foc;

namespace {

// randomize every uninterpreted symbol's table
void randomizeOpen(Structure& s, std::mt19937& rng) {
  const Vocabulary& voc = *s.voc;
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(voc.symbols().size()); ++i) {
    SymId sym{i};
    if (s.interp.has(sym)) continue;
    const Signature& sig = voc.symbol(sym).sig;
    TupleSpace ts(s.universe, sig);
    const auto& dom = s.universe.domain(sig.out);
    Table t;
    for (std::int64_t r = 0; r < ts.count(); ++r)
      t.out.push_back(dom[rng() % dom.size()]);
    s.interp.set(sym, std::move(t));
  }
}

Value evalText(Vocabulary& voc, const Structure& s, const std::string& text) {
  DiagnosticSink sink;
  auto e = parseExpression(voc, text, sink);
  REQUIRE_MESSAGE(e.has_value(), text);
  REQUIRE(!sink.hasErrors());
  return Evaluator(s).evalClosed(*e);
}

}  // namespace

TEST_CASE("concepts with identical extensions are counted separately") {
  SourceFile sf = test::parseCorpus("symptoms.foc");
  REQUIRE(sf.ok());
  DiagnosticSink sink;
  Structure s = loadStructure(sf.vocabulary, R"(
structure W : V {
  hasFever := {bob}.
  coughs := {bob}.
  sneezes := {bob}.
  highRisk := {}.
  severity := {ann -> 0, bob -> 3, carl -> 0}.
  test := {bob}.
}
)", sink);
  mergeAssignments(s, sf.theories[0].assignments, sink);
  REQUIRE(!sink.hasErrors());

  Value count = evalText(sf.vocabulary, s, "#{x in riskFactor: $(x)(bob)}");
  CHECK(count == Value::of(DomainElem::integer(3)));
  // a threshold of 2 must hold for bob despite the identical extensions
  CHECK(evalText(sf.vocabulary, s, "2 =< #{x in riskFactor: $(x)(bob)}").isTrue());
}

TEST_CASE("coherence: applying an intension equals applying its symbol") {
  SourceFile sf = test::parseCorpus("symptoms.foc");
  REQUIRE(sf.ok());
  Vocabulary& voc = sf.vocabulary;
  std::mt19937 rng(7);
  for (int round = 0; round < 10; ++round) {
    Structure s = makeStructure(voc);
    randomizeOpen(s, rng);
    for (const char* patient : {"ann", "bob", "carl"}) {
      Value a = evalText(voc, s, std::string("$(`hasFever)(") + patient + ")");
      Value b = evalText(voc, s, std::string("hasFever(") + patient + ")");
      CHECK(a == b);
      Value c = evalText(voc, s, std::string("$(`severity)(") + patient + ")");
      Value d = evalText(voc, s, std::string("severity(") + patient + ")");
      CHECK(c == d);
    }
  }
}

TEST_CASE("guards select the else branch on non-concept values") {
  SourceFile sf = parse(R"(
vocabulary V {
  type Patient := {bob}
  p : Patient -> Bool
  q : Patient -> Bool
}
theory T : V {
  !x in Patient: if x::[Patient->Bool] then p(x) else q(x).
}
structure S : V {
  p := {}.
  q := {bob}.
}
)", "t.foc");
  REQUIRE(sf.ok());
  DiagnosticSink sink;
  Structure s = resolveStructure(sf.vocabulary, sf.structures[0], sink);
  REQUIRE(!sink.hasErrors());
  CHECK(evalSentence(s, sf.theories[0].axioms[0]));  // q holds everywhere
}

TEST_CASE("the international-law axiom holds in the listing structure") {
  SourceFile sf = test::parseCorpus("intl_law.foc");
  REQUIRE(sf.ok());
  DiagnosticSink sink;
  Structure s = resolveStructure(sf.vocabulary, sf.structures[0], sink);
  mergeAssignments(s, sf.theories[0].assignments, sink);
  REQUIRE(!sink.hasErrors());
  CHECK(evalSentence(s, sf.theories[0].axioms[0]));
}

TEST_CASE("transitive closure definition matches a direct closure") {
  SourceFile sf = test::parseCorpus("transclos.foc");
  REQUIRE(sf.ok());
  DiagnosticSink sink;
  Structure s = resolveStructure(sf.vocabulary, sf.structures[0], sink);
  REQUIRE(!sink.hasErrors());
  Interp delta = evalDefinitions(s, sf.theories[0].definitions);
  SymId tc = *sf.vocabulary.findSymbol("TransClos");
  s.interp.set(tc, delta.table(tc));

  // graph1 = {(1,2),(2,3)}: closure adds (1,3)
  CHECK(evalText(sf.vocabulary, s, "TransClos(`graph1, 1, 2)").isTrue());
  CHECK(evalText(sf.vocabulary, s, "TransClos(`graph1, 2, 3)").isTrue());
  CHECK(evalText(sf.vocabulary, s, "TransClos(`graph1, 1, 3)").isTrue());
  CHECK(evalText(sf.vocabulary, s, "TransClos(`graph1, 3, 1)").isFalse());
  CHECK(evalText(sf.vocabulary, s, "TransClos(`graph1, 1, 1)").isFalse());
  // graph2 = {(3,1)} is already closed
  CHECK(evalText(sf.vocabulary, s, "TransClos(`graph2, 3, 1)").isTrue());
  CHECK(evalText(sf.vocabulary, s, "TransClos(`graph2, 1, 3)").isFalse());
}

TEST_CASE("the closure of an empty graph is empty") {
  SourceFile sf = parse(R"(
vocabulary V {
  type Node := {1..3}
  graph1 : Node ** Node -> Bool
  TransClos : Concept[Node**Node->Bool] ** Node ** Node -> Bool
}
theory T : V {
  {
    !r in Concept[Node**Node->Bool]: !x, y in Node:
      TransClos(r, x, y) <- $(r)(x, y).
    !r in Concept[Node**Node->Bool]: !x, z in Node:
      TransClos(r, x, z) <- (?y in Node: TransClos(r, x, y) & TransClos(r, y, z)).
  }
}
structure S : V {
  graph1 := {}.
}
)", "t.foc");
  REQUIRE(sf.ok());
  DiagnosticSink sink;
  Structure s = resolveStructure(sf.vocabulary, sf.structures[0], sink);
  REQUIRE(!sink.hasErrors());
  Interp delta = evalDefinitions(s, sf.theories[0].definitions);
  SymId tc = *sf.vocabulary.findSymbol("TransClos");
  for (const auto& v : delta.table(tc).out) CHECK(v == DomainElem::boolean(false));
}

TEST_CASE("severity as a definition matches direct aggregate evaluation") {
  SourceFile sf = test::parseCorpus("symptoms.foc");
  REQUIRE(sf.ok());
  Vocabulary& voc = sf.vocabulary;
  std::mt19937 rng(21);
  SymId severity = *voc.findSymbol("severity");
  for (int round = 0; round < 20; ++round) {
    Structure s = makeStructure(voc);
    DiagnosticSink sink;
    mergeAssignments(s, sf.theories[0].assignments, sink);
    REQUIRE(!sink.hasErrors());
    // randomize the risk predicates and test (the count's value application
    // ranges over every Patient->Bool concept, test included); severity stays
    // open for the fixpoint
    for (const char* name : {"hasFever", "coughs", "sneezes", "highRisk", "test"}) {
      SymId sym = *voc.findSymbol(name);
      Table t;
      for (int p = 0; p < 3; ++p)
        t.out.push_back(DomainElem::boolean(rng() % 2 == 0));
      s.interp.set(sym, std::move(t));
    }
    Structure withDefs = s;
    Interp delta = evalDefinitions(s, sf.theories[0].definitions);
    withDefs.interp.set(severity, delta.table(severity));
    for (const char* patient : {"ann", "bob", "carl"}) {
      Value direct = evalText(
          voc, withDefs, std::string("#{rf in riskFactor: $(rf)(") + patient + ")}");
      Value defined =
          evalText(voc, withDefs, std::string("severity(") + patient + ")");
      CHECK(direct == defined);
    }
  }
}

TEST_CASE("non-stratified definitions are rejected") {
  SourceFile sf = parse(R"(
vocabulary V {
  p : () -> Bool
  q : () -> Bool
}
theory T : V {
  {
    p() <- ~q().
    q() <- ~p().
  }
}
)", "t.foc");
  REQUIRE(sf.ok());
  Structure s = makeStructure(sf.vocabulary);
  CHECK_THROWS_WITH_AS(evalDefinitions(s, sf.theories[0].definitions),
                       doctest::Contains("NonStratified"), FocError);
}

TEST_CASE("function definitions must derive exactly one value") {
  const char* voc = R"(
vocabulary V {
  type T := {a}
  type U := Int[0..5]
  f : T -> U
}
)";
  SourceFile multi = parse(std::string(voc) + R"(
theory T : V {
  { !x in T: f(x) = 1.
    !x in T: f(x) = 2. }
}
)", "t.foc");
  REQUIRE(multi.ok());
  Structure s1 = makeStructure(multi.vocabulary);
  CHECK_THROWS_WITH_AS(evalDefinitions(s1, multi.theories[0].definitions),
                       doctest::Contains("MultipleValues"), FocError);

  SourceFile none = parse(std::string(voc) + R"(
theory T : V {
  { !x in T: f(x) = 1 <- false. }
}
)", "t.foc");
  REQUIRE(none.ok());
  Structure s2 = makeStructure(none.vocabulary);
  CHECK_THROWS_WITH_AS(evalDefinitions(s2, none.theories[0].definitions),
                       doctest::Contains("NoValue"), FocError);
}

TEST_CASE("fixpoint minimality: removing any true atom breaks some rule") {
  SourceFile sf = test::parseCorpus("transclos.foc");
  REQUIRE(sf.ok());
  Vocabulary& voc = sf.vocabulary;
  std::mt19937 rng(5);
  SymId tc = *voc.findSymbol("TransClos");
  for (int round = 0; round < 5; ++round) {
    Structure s = makeStructure(voc);
    randomizeOpen(s, rng);
    s.interp.clear(tc);
    Interp delta = evalDefinitions(s, sf.theories[0].definitions);
    Table fix = delta.table(tc);

    // rule satisfaction: TransClos(r,x,y) <- $(r)(x,y) and the recursive step
    auto satisfiesRules = [&](const Table& t) {
      Structure w = s;
      w.interp.set(tc, t);
      Evaluator ev(w);
      Assignment nu;
      for (const auto& def : sf.theories[0].definitions)
        for (const auto& rule : def.rules) {
          TupleSpace ts(w.universe, voc.symbol(tc).sig);
          for (std::int64_t r = 0; r < ts.count(); ++r) {
            auto args = ts.tuple(r);
            for (std::size_t i = 0; i < args.size(); ++i)
              nu.push(rule.headVars[i].var, args[i]);
            Value body = ev.eval(rule.body, nu);
            for (std::size_t i = 0; i < args.size(); ++i) nu.pop();
            if (body.isTrue() && !t.out[r].asBool()) return false;
          }
        }
      return true;
    };

    CHECK(satisfiesRules(fix));
    for (std::size_t i = 0; i < fix.out.size(); ++i) {
      if (!fix.out[i].asBool()) continue;
      Table smaller = fix;
      smaller.out[i] = DomainElem::boolean(false);
      CHECK(!satisfiesRules(smaller));
    }
  }
}

TEST_CASE("count results stay within 0..|range|") {
  SourceFile sf = test::parseCorpus("symptoms.foc");
  REQUIRE(sf.ok());
  std::mt19937 rng(11);
  for (int round = 0; round < 20; ++round) {
    Structure s = makeStructure(sf.vocabulary);
    randomizeOpen(s, rng);
    Value v = evalText(sf.vocabulary, s, "#{x in Patient: hasFever(x)}");
    REQUIRE(v.defined());
    CHECK(v.v->asInt() >= 0);
    CHECK(v.v->asInt() <= 3);
  }
}

TEST_CASE("sum aggregates add term values over the range") {
  SourceFile sf = parse(R"(
vocabulary V {
  type T := {a, b, c}
  w : T -> Int
}
structure S : V {
  w := {a -> 2, b -> 3, c -> 5}.
}
)", "t.foc");
  REQUIRE(sf.ok());
  DiagnosticSink sink;
  Structure s = resolveStructure(sf.vocabulary, sf.structures[0], sink);
  REQUIRE(!sink.hasErrors());
  Value v = evalText(sf.vocabulary, s, "sum(lambda x in T: w(x))");
  CHECK(v == Value::of(DomainElem::integer(10)));
}

TEST_CASE("strict connectives: undefined operands poison the result") {
  SourceFile sf = parse(R"(
vocabulary V { p : () -> Bool }
structure S : V { p := true. }
)", "t.foc");
  REQUIRE(sf.ok());
  DiagnosticSink sink;
  Structure s = resolveStructure(sf.vocabulary, sf.structures[0], sink);
  REQUIRE(!sink.hasErrors());
  // bypass the checker: an unbound variable evaluates to undefined
  Expr undef = mkValueApp(mkVar("z"), {});
  Expr disj = mkBinary(ExprKind::Or, mkBool(true), undef);
  Assignment nu;
  CHECK(!eval(s, nu, disj).defined());
  Expr conj = mkBinary(ExprKind::And, mkBool(false), std::move(undef));
  CHECK(!eval(s, nu, conj).defined());
}

TEST_CASE("evalSentence raises on undefined sentence values") {
  SourceFile sf = parse(R"(
vocabulary V { p : () -> Bool }
structure S : V { p := true. }
)", "t.foc");
  REQUIRE(sf.ok());
  DiagnosticSink sink;
  Structure s = resolveStructure(sf.vocabulary, sf.structures[0], sink);
  Expr bad = mkValueApp(mkVar("z"), {});
  CHECK_THROWS_WITH_AS(evalSentence(s, bad), doctest::Contains("UndefinedResult"),
                       FocError);
}

TEST_CASE("definedness fuzz: checker-accepted sentences evaluate over total structures") {
  SourceFile sf = test::parseCorpus("symptoms.foc");
  REQUIRE(sf.ok());
  Vocabulary& voc = sf.vocabulary;
  std::mt19937 rng(2026);

  // formula grammar sampled at a modest depth; every production is accepted
  // by the checker by construction
  std::function<std::string(int)> formula = [&](int depth) -> std::string {
    auto patient = [&]() {
      const char* names[] = {"ann", "bob", "carl"};
      return std::string(names[rng() % 3]);
    };
    int pick = depth <= 0 ? static_cast<int>(rng() % 4) : static_cast<int>(rng() % 10);
    switch (pick) {
      case 0: return "hasFever(" + patient() + ")";
      case 1: return "test(" + patient() + ")";
      case 2: return "3 =< severity(" + patient() + ")";
      case 3: return rng() % 2 ? "true" : "false";
      case 4: return "~(" + formula(depth - 1) + ")";
      case 5: return "(" + formula(depth - 1) + ") & (" + formula(depth - 1) + ")";
      case 6: return "(" + formula(depth - 1) + ") | (" + formula(depth - 1) + ")";
      case 7: {
        std::string v = "v" + std::to_string(rng() % 100);
        return "!" + v + " in Patient: hasFever(" + v + ") => (" + formula(depth - 1) +
               ")";
      }
      case 8: {
        std::string v = "c" + std::to_string(rng() % 100);
        return "?" + v + " in Concept[Patient->Bool]: riskFactor(" + v + ") & $(" + v +
               ")(" + patient() + ")";
      }
      default: {
        std::string v = "r" + std::to_string(rng() % 100);
        return "#{" + v + " in riskFactor: $(" + v + ")(" + patient() + ")} =< " +
               std::to_string(rng() % 5);
      }
    }
  };

  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    std::string text = formula(3) + ".";
    SourceFile one = parse(std::string("vocabulary V {\n  type Patient := {ann, bob, carl}\n  type Score := Int[0..4]\n  hasFever : Patient -> Bool\n  coughs : Patient -> Bool\n  sneezes : Patient -> Bool\n  highRisk : Patient -> Bool\n  riskFactor : Concept[Patient->Bool] -> Bool\n  severity : Patient -> Score\n  test : Patient -> Bool\n}\ntheory T : V { ") + text + " }", "fuzz.foc");
    REQUIRE_MESSAGE(one.ok(), text);
    const Expr& e = one.theories[0].axioms[0];
    CheckReport r = checkSentence(one.vocabulary, e);
    REQUIRE_MESSAGE(r.ok, text);
    Structure s = makeStructure(one.vocabulary);
    randomizeOpen(s, rng);
    CHECK_NOTHROW(evalSentence(s, e));
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("type membership: well-typed terms evaluate into their type's domain") {
  SourceFile sf = test::parseCorpus("symptoms.foc");
  REQUIRE(sf.ok());
  Vocabulary& voc = sf.vocabulary;
  std::mt19937 rng(31);
  struct Probe {
    const char* text;
    const char* type;
  };
  const Probe probes[] = {
      {"severity(bob)", "Score"},
      {"hasFever(ann)", "Bool"},
      {"$(`coughs)(carl)", "Bool"},
      {"#{x in Patient: sneezes(x)}", "Int"},
      {"`hasFever", "Concept"},
  };
  for (int round = 0; round < 10; ++round) {
    Structure s = makeStructure(voc);
    randomizeOpen(s, rng);
    for (const Probe& p : probes) {
      Value v = evalText(voc, s, p.text);
      REQUIRE_MESSAGE(v.defined(), p.text);
      TypeId t = *voc.findType(p.type);
      if (s.universe.hasDomain(t))
        CHECK_MESSAGE(s.universe.indexOf(t, *v.v) >= 0, p.text);
      else
        CHECK(v.v->kind() == DomainElem::Kind::Int);  // unbounded Int
    }
  }
}

TEST_CASE("sum over a conceptual subtype desugars to a guarded term") {
  SourceFile sf = parse(R"(
vocabulary V {
  type T := {a, b}
  p, q : T -> Bool
  total : () -> Int
}
theory X : V {
  total() = sum(lambda s in Concept[T->Bool]: arity(s)).
}
structure S : V {
  p := {a}.
  q := {}.
  total := 2.
}
)", "t.foc");
  REQUIRE(sf.ok());
  REQUIRE(checkTheory(sf.vocabulary, sf.theories[0]).ok);
  Expr desugared = desugarGuards(sf.vocabulary, sf.theories[0].axioms[0]);
  REQUIRE(checkSentence(sf.vocabulary, desugared).ok);
  DiagnosticSink sink;
  Structure s = resolveStructure(sf.vocabulary, sf.structures[0], sink);
  REQUIRE(!sink.hasErrors());
  // two unary concepts of the matching signature, arity 1 each; the third
  // concept (total itself) takes the guard's else branch worth 0
  CHECK(evalSentence(s, sf.theories[0].axioms[0]));
  CHECK(evalSentence(s, desugared));
}
