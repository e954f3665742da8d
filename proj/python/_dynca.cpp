// Python bindings over text inputs: programs, states and values travel as
// strings in the same syntax the CLI reads.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dynca/harness.hpp"
#include "dynca/ruleset_io.hpp"

namespace py = pybind11;
using namespace dynca;

namespace {

py::dict state_dict(const State& s) {
  py::dict terms, locs;
  for (const auto& [name, v] : s.terms) terms[py::str(name)] = hf::to_string(v);
  for (const auto& [loc, v] : s.locations) {
    std::string key = loc.function + "(";
    for (std::size_t i = 0; i < loc.args.size(); ++i) key += (i ? ", " : "") + hf::to_string(loc.args[i]);
    locs[py::str(key + ")")] = hf::to_string(v);
  }
  py::dict d;
  d["terms"] = terms;
  d["locations"] = locs;
  return d;
}

State initial(const asml::Program& p, const std::string& state_text) {
  return complete_state(p, parse_state(state_text, p.atoms));
}

}  // namespace

PYBIND11_MODULE(_dynca, m) {
  m.doc() = "Dynamic cellular automata compiled from ASM-lite programs";

  // Translators are tried newest first, so the subclass goes last.
  py::register_exception<Error>(m, "DyncaError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  m.def(
      "parse_value",
      [](const std::string& text, const std::vector<std::string>& atoms) {
        return hf::to_string(hf::parse_value(text, atoms));
      },
      py::arg("text"), py::arg("atoms") = std::vector<std::string>{},
      "Canonical form of a value literal.");

  m.def(
      "interpret",
      [](const std::string& program, const std::string& state, std::uint64_t seed, std::uint64_t max_steps) {
        asml::Program p = asml::parse(program);
        Interpreter interp(p);
        SeededChoice choice(seed);
        InterpRun r = interp.run(initial(p, state), choice, max_steps);
        py::dict d;
        d["outcome"] = outcome_name(r.outcome);
        d["steps"] = r.steps;
        d["state"] = state_dict(r.state);
        d["message"] = r.message;
        return d;
      },
      py::arg("program"), py::arg("state") = "", py::arg("seed") = 0, py::arg("max_steps") = 10'000);

  m.def(
      "compile",
      [](const std::string& program, bool negative_edges) {
        CompileOptions co;
        co.negative_edges = negative_edges;
        return serialize_ruleset(compile(asml::parse(program), co).ruleset);
      },
      py::arg("program"), py::arg("negative_edges") = false, "Serialized rule set.");

  m.def(
      "simulate",
      [](const std::string& program, const std::string& state, std::uint64_t seed, bool random,
         std::uint64_t max_ticks) {
        asml::Program p = asml::parse(program);
        CompilationUnit cu = compile(p);
        SimOptions so{random ? TieBreak::random : TieBreak::deterministic, seed, max_ticks, false};
        SimRun r = simulate(cu, initial(p, state), so);
        py::dict d;
        d["outcome"] = outcome_name(r.outcome);
        d["steps"] = r.steps;
        d["ticks"] = r.stats.total;
        d["state"] = state_dict(r.state);
        d["message"] = r.message;
        return d;
      },
      py::arg("program"), py::arg("state") = "", py::arg("seed") = 0, py::arg("random") = false,
      py::arg("max_ticks") = 1'000'000);

  m.def(
      "difftest",
      [](const std::string& program, const std::string& state, std::uint64_t seed) {
        asml::Program p = asml::parse(program);
        DiffResult d = difftest(compile(p), initial(p, state), {TieBreak::random, seed, 1'000'000, true});
        return py::make_tuple(d.agree, d.detail);
      },
      py::arg("program"), py::arg("state") = "", py::arg("seed") = 0,
      "(agree, detail) for one randomized automaton run against the interpreter.");
}
