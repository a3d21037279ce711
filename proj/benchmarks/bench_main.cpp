#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "foc/evaluator.hpp"
#include "foc/grounder.hpp"
#include "foc/parser.hpp"
#include "foc/solver.hpp"

namespace {

std::string readCorpus(const std::string& name) {
  std::ifstream in(std::string(FOC_CORPUS_DIR) + "/" + name);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void BM_ParseSetGame(benchmark::State& state) {
  std::string text = readCorpus("setgame.foc");
  for (auto _ : state) {
    auto sf = foc::parse(text, "setgame.foc");
    benchmark::DoNotOptimize(sf);
  }
}
BENCHMARK(BM_ParseSetGame);

void BM_CheckWideConjunction(benchmark::State& state) {
  std::string text = "vocabulary V { p : () -> Bool }\ntheory T : V { p()";
  for (int i = 0; i < state.range(0); ++i) text += " & p()";
  text += ".\n}\n";
  auto sf = foc::parse(text, "bench.foc");
  for (auto _ : state) {
    auto report = foc::checkSentence(sf.vocabulary, sf.theories[0].axioms[0]);
    benchmark::DoNotOptimize(report);
  }
}
BENCHMARK(BM_CheckWideConjunction)->Arg(100)->Arg(1000);

void BM_EvalTemperatures(benchmark::State& state) {
  auto sf = foc::parse(readCorpus("temperatures.foc"), "temperatures.foc");
  foc::DiagnosticSink sink;
  foc::Structure s = foc::resolveStructure(sf.vocabulary, sf.structures[0], sink);
  foc::mergeAssignments(s, sf.theories[0].assignments, sink);
  foc::Evaluator ev(s);
  for (auto _ : state) {
    auto v = ev.evalClosed(sf.theories[0].axioms[0]);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_EvalTemperatures);

void BM_SolveSetGame(benchmark::State& state) {
  std::string text = readCorpus("setgame.foc");
  for (auto _ : state) {
    auto sf = foc::parse(text, "setgame.foc");
    foc::DiagnosticSink sink;
    foc::Structure s = foc::resolveStructure(sf.vocabulary, sf.structures[0], sink);
    foc::SolveConfig cfg;
    cfg.maxModels = 0;
    auto res = foc::modelExpand(sf.vocabulary, sf.theories[0], s, cfg);
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(BM_SolveSetGame);

}  // namespace

BENCHMARK_MAIN();
