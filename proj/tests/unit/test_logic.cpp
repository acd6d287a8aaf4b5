#include <gtest/gtest.h>

#include <random>

#include "generators.hpp"
#include "oracle.hpp"
#include "pprvari/diagnostic.hpp"
#include "pprvari/logic.hpp"

using namespace pprvari;
using namespace pprvari::logic;

TEST(LogicParse, DialectsAgree) {
  auto dm = parse_expr("Lock1 => Pipe2 || Pipe3", Dialect::Dm);
  auto pp = parse_expr("Lock1 implies Pipe2 OR Pipe3", Dialect::Ppr);
  EXPECT_EQ(dm, pp);
  EXPECT_EQ(to_string(dm, Dialect::Dm), "Lock1 => Pipe2 || Pipe3");
}

TEST(LogicParse, PrecedenceAndNegation) {
  auto f = parse_expr("!A && B || C => D", Dialect::Dm);
  ASSERT_EQ(f.kind(), Kind::Implies);
  EXPECT_EQ(f.lhs().kind(), Kind::Or);
  EXPECT_EQ(f.lhs().children()[0].kind(), Kind::And);
  EXPECT_EQ(f.lhs().children()[0].children()[0].kind(), Kind::Not);
}

TEST(LogicParse, ImplicationIsRightAssociative) {
  auto f = parse_expr("A => B => C", Dialect::Dm);
  ASSERT_EQ(f.kind(), Kind::Implies);
  EXPECT_EQ(f.rhs().kind(), Kind::Implies);
}

TEST(LogicParse, QualifiedRefsInCdcDialect) {
  auto f = parse_expr("shiftfork_process#WeldLock => shiftfork_resource#WeldingRobots", Dialect::Cdc);
  EXPECT_EQ(f.lhs().name(), "shiftfork_process#WeldLock");
  auto r = split_ref(f.rhs().name());
  EXPECT_EQ(r.model, "shiftfork_resource");
  EXPECT_EQ(r.element, "WeldingRobots");
  EXPECT_EQ(join_ref(r.model, r.element), f.rhs().name());
  EXPECT_EQ(split_ref("Plain").model, "");
}

TEST(LogicParse, EnumerationTest) {
  auto f = parse_expr("Pipe == Pipe2", Dialect::Dm);
  ASSERT_EQ(f.kind(), Kind::VarEq);
  EXPECT_EQ(f.name(), "Pipe");
  EXPECT_EQ(f.option(), "Pipe2");
  EXPECT_TRUE(eval(f, {{option_key("Pipe", "Pipe2"), true}}));
  EXPECT_FALSE(eval(f, {{option_key("Pipe", "Pipe2"), false}}));
  EXPECT_EQ(to_string(f), "Pipe == Pipe2");
}

TEST(LogicParse, ConstantsRoundTrip) {
  EXPECT_EQ(parse_expr("true", Dialect::Dm).kind(), Kind::True);
  EXPECT_EQ(parse_expr("false", Dialect::Dm).kind(), Kind::False);
  auto f = parse_expr("(A || B) && !(C => D)", Dialect::Dm);
  EXPECT_EQ(parse_expr(to_string(f), Dialect::Dm), f);
}

TEST(LogicParse, SyntaxErrorsCarryPositions) {
  try {
    (void)parse_expr("A && (B || ", Dialect::Dm);
    FAIL() << "no exception";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 1);
    EXPECT_GT(e.column(), 1);
  }
  EXPECT_THROW((void)parse_expr("A B", Dialect::Dm), SyntaxError);
  EXPECT_THROW((void)parse_expr("", Dialect::Dm), SyntaxError);
}

TEST(LogicEval, UnassignedVariableThrows) {
  EXPECT_THROW((void)eval(Formula::var("A"), {}), std::invalid_argument);
}

TEST(LogicEval, PartialEvaluation) {
  auto f = parse_expr("A && B", Dialect::Dm);
  EXPECT_EQ(eval_partial(f, {{"A", false}}), Tri::False);
  EXPECT_EQ(eval_partial(f, {{"A", true}}), Tri::Unknown);
  EXPECT_EQ(eval_partial(f, {{"A", true}, {"B", true}}), Tri::True);
  auto g = parse_expr("A => B", Dialect::Dm);
  EXPECT_EQ(eval_partial(g, {{"B", true}}), Tri::True);
}

TEST(LogicEval, FactoriesSimplifyTrivialArity) {
  EXPECT_EQ(Formula::conj({}).kind(), Kind::True);
  EXPECT_EQ(Formula::disj({}).kind(), Kind::False);
  EXPECT_EQ(Formula::conj({Formula::var("A")}), Formula::var("A"));
}

TEST(LogicEval, VariablesAndNames) {
  auto f = parse_expr("B && Pipe == Pipe2 || A && B", Dialect::Dm);
  EXPECT_EQ(variables(f), (std::vector<std::string>{"B", option_key("Pipe", "Pipe2"), "A"}));
  EXPECT_EQ(names(f), (std::vector<std::string>{"B", "Pipe", "A"}));
  auto r = rename(f, [](const std::string& n) { return "m#" + n; });
  EXPECT_EQ(names(r), (std::vector<std::string>{"m#B", "m#Pipe", "m#A"}));
}

TEST(Solver, SmallKnownCases) {
  auto unsat = parse_expr("A && !A", Dialect::Dm);
  EXPECT_FALSE(sat(to_cnf(unsat)).satisfiable);
  auto f = parse_expr("(A || B) && (!A || C) && !C", Dialect::Dm);
  auto r = sat(to_cnf(f));
  ASSERT_TRUE(r.satisfiable);
  EXPECT_TRUE(eval(f, r.witness));
  EXPECT_FALSE(r.witness.at("A"));
}

TEST(Solver, AssumptionsAndUnknownVariables) {
  auto cnf = to_cnf(parse_expr("A => B", Dialect::Dm));
  EXPECT_FALSE(sat(cnf, {{"A", true}, {"B", false}}).satisfiable);
  EXPECT_TRUE(sat(cnf, {{"A", true}}).satisfiable);
  EXPECT_THROW((void)sat(cnf, {{"Z", true}}), std::invalid_argument);
}

TEST(Solver, AddFormulaConjoins) {
  auto cnf = to_cnf(parse_expr("A || B", Dialect::Dm));
  add_formula(cnf, parse_expr("!A", Dialect::Dm));
  add_formula(cnf, parse_expr("!B", Dialect::Dm));
  EXPECT_FALSE(sat(cnf).satisfiable);
}

TEST(Solver, EnumerationOrderAndLimit) {
  auto cnf = to_cnf(parse_expr("A || B", Dialect::Dm));
  auto all = enumerate_models(cnf, {"A", "B"}, 100);
  ASSERT_EQ(all.models.size(), 3U);
  EXPECT_FALSE(all.truncated);
  EXPECT_EQ(all.models[0], (Assignment{{"A", false}, {"B", true}}));
  EXPECT_EQ(all.models[2], (Assignment{{"A", true}, {"B", true}}));
  auto some = enumerate_models(cnf, {"A", "B"}, 2);
  EXPECT_EQ(some.models.size(), 2U);
  EXPECT_TRUE(some.truncated);
  auto free = enumerate_models(cnf, {"A", "Z"}, 100);
  EXPECT_EQ(free.models.size(), 4U);
}

TEST(Solver, AgreesWithBruteForceOnRandomFormulas) {
  gen::Rng rng(7);
  for (int i = 0; i < 300; ++i) {
    auto vars = gen::var_names(2 + i % 9);
    auto f = gen::random_formula(rng, vars, 4);
    auto cnf = to_cnf(f);
    auto r = sat(cnf);
    ASSERT_EQ(r.satisfiable, oracle::brute_sat(f)) << to_string(f);
    if (r.satisfiable) {
      Assignment a = r.witness;
      for (const auto& v : variables(f)) a.emplace(v, false);
      EXPECT_TRUE(eval(f, a)) << to_string(f);
    }
    std::vector<std::string> proj(vars.begin(), vars.begin() + static_cast<long>(1 + i % vars.size()));
    auto e = enumerate_models(cnf, proj, 1U << 12);
    ASSERT_EQ(e.models.size(), oracle::brute_count(f, proj)) << to_string(f);
  }
}
