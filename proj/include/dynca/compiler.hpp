#pragma once

// Lowers an ASM-lite program to automaton rules.
//
// One ASM step runs as a sequence of phases driven by the color of the
// Criticals node: every term is evaluated into an internal register
// (a Criticals out-edge labeled '@...'), guards steer between program
// counter colors, assignment values are snapshotted, and only then are the
// critical edges and function tuples retargeted. Singleton and union run
// multi-tick protocols under dedicated lock colors.

#include <map>
#include <string>
#include <vector>

#include "dynca/asmlang.hpp"
#include "dynca/pattern.hpp"

namespace dynca {

namespace pc {
/// Idle color: the start of an ASM step.
inline constexpr const char* idle = "crit";
inline constexpr const char* decide = "crit.decide";
inline constexpr const char* clean = "crit.clean";
inline constexpr const char* halting = "crit.halting";
/// Quiescent colors.
inline constexpr const char* halt = "crit.halt";
inline constexpr const char* error = "crit.error";
inline constexpr const char* clash = "crit.clash";
}  // namespace pc

struct CompileOptions {
  /// Use negative-edge patterns for union candidate checks and copying.
  bool negative_edges = false;
};

struct CompilationUnit {
  asml::Program program;
  RuleSet ruleset;
  /// Program names and internal marks to edge labels.
  std::map<std::string, std::string> label_map;
  /// Rule-name prefixes in order of first appearance.
  std::vector<std::string> phase_tags;
  /// Fires exactly once per completed ASM step.
  std::string end_rule;
};

/// Throws Error when the program does not validate.
CompilationUnit compile(const asml::Program& p, const CompileOptions& options = {});

/// A rule before alias expansion: cells listed in `alias` may be bound to
/// the same node, except pairs listed in `distinct`.
struct RuleTemplate {
  Rule rule;
  std::vector<std::string> alias;
  std::vector<std::pair<std::string, std::string>> distinct;
};

/// One rule per admissible identification of alias cells, named
/// `<template name>:<k>`. Identifications that put a loop or a directed
/// cycle into the pattern, or contradict a negative edge, are dropped since
/// they can never match a well-formed tangle.
std::vector<Rule> expand_aliases(const RuleTemplate& t);

}  // namespace dynca
