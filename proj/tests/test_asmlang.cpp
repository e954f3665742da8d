#include <doctest.h>

#include "dynca/asmlang.hpp"
#include "support.hpp"

using namespace dynca;
using namespace dynca::asml;

namespace {

const char* header = "atoms: a, b;\nfunctions: f/2;\ncritical: t, p;\n";

Program body(const std::string& stmt) { return parse(std::string(header) + "do " + stmt + "\n"); }

}  // namespace

TEST_CASE("comparison guard with a function update") {
  Program p = body("if t != p then t := f(t, p)");
  REQUIRE(p.body->kind == StmtKind::if_);
  CHECK(p.body->cond->kind == CondKind::neq);
  CHECK(p.body->cond->lhs->name == "t");
  const Stmt& a = *p.body->body.at(0);
  CHECK(a.kind == StmtKind::assign);
  CHECK(a.lhs->name == "t");
  CHECK(a.term->kind == TermKind::apply);
  CHECK(a.term->name == "f");
  CHECK(a.term->args.size() == 2);
  CHECK(validate(p).empty());
}

TEST_CASE("membership guard") {
  Program p = body("if t in p then t := p");
  CHECK(p.body->cond->kind == CondKind::member);
  CHECK(p.body->body.size() == 1);
  CHECK(validate(p).empty());
}

TEST_CASE("singleton assignment") {
  Program p = body("p := {t}");
  CHECK(p.body->kind == StmtKind::assign);
  CHECK(p.body->term->kind == TermKind::singleton);
}

TEST_CASE("set literals desugar to unions") {
  CHECK(equal(*body("p := {t, p}").body, *body("p := {t} U {p}").body));
}

TEST_CASE("validate") {
  Program p = body("par { t := {} ; t := {p} }");
  auto errs = validate(p);
  REQUIRE(errs.size() == 1);
  CHECK(errs[0] == "conflicting parallel assignment to t");
  CHECK(validate(body("let x = choose({}) in t := x")).empty());
  CHECK(validate(body("if t in p then t := {} else t := p")).empty());

  Program dup = body("skip");
  dup.criticals.push_back("t");
  CHECK_FALSE(validate(dup).empty());
}

TEST_CASE("parse errors carry positions") {
  try {
    body("t := {t)");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
    CHECK(e.column() == 11);
  }
  CHECK_THROWS_AS(body("t := q"), ParseError);          // undeclared
  CHECK_THROWS_AS(body("t := f(t)"), ParseError);       // arity
  CHECK_THROWS_AS(body("t := a"), ParseError);          // atom literal
  CHECK_THROWS_AS(body("let t = p in skip"), ParseError);
  CHECK_THROWS_AS(body("let x = p in x := t"), ParseError);
}

TEST_CASE("comments and whitespace") {
  Program p = parse("# header\natoms: a; // trailing\nfunctions: ;\ncritical: t;\ndo\n  t := {t}  # done\n");
  CHECK(p.atoms == std::vector<std::string>{"a"});
}

TEST_CASE("pretty print round trips the worked examples") {
  for (const char* s : {"if t != p then t := f(t, p)", "if t in p then t := p", "p := {t}",
                        "par { t := p ; p := t }", "if t = p then (if t in p then skip) else t := {}",
                        "let x = choose(t U p) in p := <x, f(x, {})>",
                        "if not (t in p) and (t = p or t != {}) then t := {{t}} U (p U t)"}) {
    Program p = body(s);
    std::string text = pretty_print(p);
    Program q = parse(text);
    CHECK_MESSAGE(equal(p, q), text);
    CHECK(pretty_print(q) == text);
  }
}

TEST_CASE("property: parse(pretty_print(ast)) == ast on random ASTs") {
  std::mt19937_64 rng(99);
  int failures = 0;
  for (int i = 0; i < 500; ++i) {
    testing::AstGen gen(rng);
    Program p = gen.program(4);
    std::string text = pretty_print(p);
    Program q;
    try {
      q = parse(text);
    } catch (const ParseError& e) {
      FAIL_CHECK(e.what() << "\n" << text);
      ++failures;
      continue;
    }
    if (!equal(p, q) || pretty_print(q) != text) {
      FAIL_CHECK(text);
      ++failures;
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("uses_choice") {
  CHECK(uses_choice(body("if t = p then let x = choose(t) in skip")));
  CHECK_FALSE(uses_choice(body("let x = t in skip")));
}
