#pragma once

#include <map>
#include <memory>
#include <string>

#include "gadgetforge/host_api.h"
#include "gadgetforge/interpreter.h"
#include "gadgetforge/parser.h"
#include "gadgetforge/taint.h"

namespace gadgetforge::testing {

// One package held in memory plus everything needed to run a file of it.
struct Sandbox {
  PackageFiles files;
  std::vector<SpecialRow> table = default_special_table();

  explicit Sandbox(std::map<std::string, std::string> sources) : files(std::move(sources)) {}
  Sandbox(std::initializer_list<std::pair<const std::string, std::string>> sources)
      : files(std::map<std::string, std::string>(sources)) {}

  RunOutcome run_plain(const std::string& main, std::uint64_t budget = kDefaultStepBudget) {
    HostEnvironment host(files, table);
    Hooks hooks;
    Interpreter interp(host, hooks, budget);
    return interp.run_module(main);
  }

  RunOutcome run_with(Hooks& hooks, const std::string& main,
                      std::uint64_t budget = kDefaultStepBudget) {
    HostEnvironment host(files, table);
    Interpreter interp(host, hooks, budget);
    return interp.run_module(main);
  }

  // Keeps the interpreter (and with it every taint) alive for inspection.
  struct Analyzed {
    std::unique_ptr<GadgetAnalysis> analysis;
    std::unique_ptr<HostEnvironment> host;
    std::unique_ptr<Interpreter> interp;
    RunOutcome outcome;

    TaintValue* injected(const std::string& property) const {
      for (TaintValue* t : analysis->injected())
        if (t->source.property == property) return t;
      return nullptr;
    }
  };

  Analyzed run_analyzed(const std::string& main, TaintConfig config = {}) {
    Analyzed out;
    out.analysis = std::make_unique<GadgetAnalysis>(std::move(config));
    out.host = std::make_unique<HostEnvironment>(files, table, out.analysis.get());
    out.interp = std::make_unique<Interpreter>(*out.host, *out.analysis);
    out.outcome = out.interp->run_module(main);
    return out;
  }
};

// A live interpreter with the taint hooks installed, for calling hooks directly.
struct Rig {
  PackageFiles files{std::map<std::string, std::string>{}};
  GadgetAnalysis analysis;
  HostEnvironment host;
  Interpreter interp;
  std::unique_ptr<AstNode> program;

  explicit Rig(TaintConfig config = {},
               const std::string& src = "a + b;\n!a;\nif (a) {}\nx.substring;\n")
      : analysis(std::move(config)),
        host(files, default_special_table(), &analysis),
        interp(host, analysis),
        program(parse_source(src, "rig.mjs.txt")) {}

  const AstNode& stmt(std::size_t i) const {
    const AstNode& s = program->child(i);
    return s.kind == NodeKind::ExpressionStmt ? s.child(0) : s;
  }

  TaintValue* source(const std::string& property, Value underlying = Undefined{},
                     TypeTag type = TypeTag::Unknown) {
    TaintValue* t = interp.heap().make_taint();
    t->underlying = std::move(underlying);
    t->type = type;
    t->source = SourceRecord{property, program->loc, true, InjectionMode::Immediate};
    t->sources = {t->source};
    t->flow.push_back(FlowStep{FlowKind::Read, property, program->loc});
    return t;
  }
};

inline RunOutcome run_source(const std::string& src, std::uint64_t budget = kDefaultStepBudget) {
  Sandbox box({{"main.mjs.txt", src}});
  return box.run_plain("main.mjs.txt", budget);
}

// The running example, translated.
inline const char* kGadgetIndex = R"(function run(options) {
  let opts = options || {};
  let bin = opts.bin || './default.exe';
  let newProcess = opts.newProcess;
  let cmd = bin + ' --flag';
  if (newProcess)
    std.child_process.execSync(cmd);
}
export {run: run};
)";

inline const char* kGadgetTest = R"(let lib = require("../index.mjs.txt");
let run = lib.run;

run();                      // test 1
run({newProcess: true});    // test 2
)";

}  // namespace gadgetforge::testing
