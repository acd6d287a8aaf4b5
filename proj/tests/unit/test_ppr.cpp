#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "pprvari/ppr.hpp"

using namespace pprvari;
using namespace pprvari::ppr;

namespace {

std::vector<std::string> rules_of(const std::vector<Diagnostic>& ds) {
  std::vector<std::string> out;
  for (const auto& d : ds) out.push_back(d.rule);
  return out;
}

PprModel parse_ok(const std::string& text) {
  auto r = parse_ppr(text);
  EXPECT_TRUE(r.model.has_value());
  EXPECT_FALSE(has_errors(r.diagnostics));
  return r.model.value_or(PprModel{});
}

}  // namespace

TEST(PprParse, SampleModelCounts) {
  auto m = fx::load_model(fx::shiftfork_dir() / "shiftfork.ppr");
  EXPECT_EQ(m.name, "shiftfork");
  EXPECT_EQ(m.products.size(), 24U);
  EXPECT_EQ(m.processes.size(), 36U);
  EXPECT_EQ(m.resources.size(), 16U);
  EXPECT_EQ(m.constraints.size(), 4U);
  ASSERT_TRUE(m.attribute_defs.contains("deltaFile"));
  EXPECT_TRUE(validate_model(m).empty());
}

TEST(PprParse, UnitFields) {
  auto m = fx::load_model(fx::shiftfork_dir() / "shiftfork.ppr");
  const auto& weld = m.processes.at("WeldLock");
  EXPECT_TRUE(weld.is_abstract);
  EXPECT_EQ(weld.inputs, (std::vector<std::string>{"Lock", "Pipe"}));
  ASSERT_EQ(weld.outputs.size(), 1U);
  EXPECT_EQ(weld.outputs[0].label, "OP2");
  EXPECT_EQ(weld.outputs[0].product, "ForkProduct");
  EXPECT_EQ(weld.resources, (std::vector<std::string>{"WeldingRobots"}));
  const auto& wl1 = m.processes.at("WeldLock1");
  EXPECT_EQ(wl1.implements, (std::vector<std::string>{"WeldLock"}));
  ASSERT_NE(wl1.attributes.find("deltaFile"), nullptr);
  EXPECT_EQ(*wl1.attributes.find("deltaFile"), "!DLock1");
  EXPECT_TRUE(m.products.at("Barrel1_2").is_optional);
  EXPECT_EQ(m.products.at("Pipe2").excluded, (std::vector<std::string>{"Pipe3", "Pipe8"}));
}

TEST(PprParse, ExcerptParsesButLeavesReferencesOpen) {
  auto r = parse_ppr(fx::slurp(fx::data_dir() / "fork_excerpt.ppr"));
  ASSERT_TRUE(r.model.has_value());
  EXPECT_FALSE(has_errors(r.diagnostics));
  auto ds = validate_model(*r.model);
  EXPECT_EQ(ds.size(), 9U);
  for (const auto& d : ds) EXPECT_EQ(d.rule, "unresolved-reference") << format(d);
  EXPECT_EQ(r.model->products.at("Lock1").name, "Lock 3");
}

TEST(PprParse, ClosedExcerptValidates) {
  auto m = fx::load_model(fx::data_dir() / "fork_excerpt_closed.ppr");
  EXPECT_TRUE(validate_model(m).empty());
}

TEST(PprParse, SyntaxErrorPosition) {
  auto r = parse_ppr(fx::slurp(fx::data_dir() / "syntax_error.ppr"));
  EXPECT_FALSE(r.model.has_value());
  ASSERT_FALSE(r.diagnostics.empty());
  EXPECT_EQ(r.diagnostics[0].rule, "syntax");
  EXPECT_EQ(r.diagnostics[0].line, 3);
}

TEST(PprParse, CommentsAndTrailingCommas) {
  auto m = parse_ok("// header\nProduct \"A\": { name: \"A\", }\nProduct \"B\": { name: \"B\" } // tail\n");
  EXPECT_EQ(m.products.size(), 2U);
}

TEST(PprParse, DuplicateIdIsReported) {
  auto r = parse_ppr("Product \"A\": { name: \"A\" }\nProduct \"A\": { name: \"B\" }\n");
  auto rules = rules_of(r.diagnostics);
  EXPECT_NE(std::find(rules.begin(), rules.end(), "duplicate-id"), rules.end());
}

TEST(PprValidate, ComponentAndProcessIdsMustDiffer) {
  auto m = parse_ok("Product \"A\": { name: \"A\" }\nProcess \"A\": { name: \"A\" }\n");
  auto rules = rules_of(validate_model(m));
  EXPECT_NE(std::find(rules.begin(), rules.end(), "dm-id-collision"), rules.end());
}

TEST(PprParse, DuplicatePropertyIsReported) {
  auto r = parse_ppr("Product \"A\": { name: \"A\", name: \"B\" }\n");
  auto rules = rules_of(r.diagnostics);
  EXPECT_NE(std::find(rules.begin(), rules.end(), "duplicate-property"), rules.end());
}

TEST(PprParse, UnknownPropertyWarnsAndBecomesAttribute) {
  auto r = parse_ppr("Product \"A\": { name: \"A\", colour: \"red\" }\n");
  ASSERT_TRUE(r.model.has_value());
  EXPECT_FALSE(has_errors(r.diagnostics));
  auto rules = rules_of(r.diagnostics);
  EXPECT_NE(std::find(rules.begin(), rules.end(), "unknown-property"), rules.end());
}

TEST(PprValidate, UnresolvedFixture) {
  auto r = parse_ppr(fx::slurp(fx::data_dir() / "unresolved.ppr"));
  ASSERT_TRUE(r.model.has_value());
  auto ds = validate_model(*r.model);
  ASSERT_EQ(ds.size(), 2U);
  EXPECT_EQ(ds[0].unit_id, "MountFrame");
  EXPECT_NE(ds[0].message.find("InsertFrame"), std::string::npos);
  EXPECT_NE(ds[1].message.find("Crane"), std::string::npos);
}

TEST(PprValidate, CategoryMismatch) {
  auto m = parse_ok("Product \"A\": { name: \"A\" }\nProcess \"P\": { name: \"P\", inputs: [\"A\"], requires: [\"A\"] }\n");
  auto rules = rules_of(validate_model(m));
  EXPECT_NE(std::find(rules.begin(), rules.end(), "category-mismatch"), rules.end());
}

TEST(PprValidate, ImplementsCycle) {
  auto m = parse_ok(
      "Product \"A\": { name: \"A\", isAbstract: true, implements: [\"B\"] }\n"
      "Product \"B\": { name: \"B\", isAbstract: true, implements: [\"A\"] }\n");
  auto rules = rules_of(validate_model(m));
  EXPECT_NE(std::find(rules.begin(), rules.end(), "cycle"), rules.end());
}

TEST(PprValidate, MisplacedProperty) {
  auto m = parse_ok("Resource \"R\": { name: \"R\", inputs: [\"X\"] }\nProduct \"X\": { name: \"X\" }\n");
  auto rules = rules_of(validate_model(m));
  EXPECT_NE(std::find(rules.begin(), rules.end(), "misplaced-property"), rules.end());
}

TEST(PprValidate, ConstraintScopeMustCoverExpression) {
  auto m = parse_ok(
      "Product \"A\": { name: \"A\" }\nProduct \"B\": { name: \"B\" }\n"
      "Constraint \"C\": { definition: \"A -> A implies B\" }\n");
  auto rules = rules_of(validate_model(m));
  EXPECT_NE(std::find(rules.begin(), rules.end(), "constraint-scope"), rules.end());
}

TEST(PprWrite, RoundTripsTheSample) {
  auto m = fx::load_model(fx::shiftfork_dir() / "shiftfork.ppr");
  auto text = write_ppr(m);
  auto again = parse_ppr(text, m.name);
  ASSERT_TRUE(again.model.has_value());
  EXPECT_EQ(*again.model, m);
  EXPECT_EQ(write_ppr(*again.model), text);
}

TEST(PprModelOps, NormalizeMakesExcludesSymmetric) {
  auto m = parse_ok(
      "Product \"A\": { name: \"A\", excludes: [\"B\"] }\nProduct \"B\": { name: \"B\" }\n");
  auto n = normalize_model(m);
  EXPECT_EQ(n.products.at("B").excluded, (std::vector<std::string>{"A"}));
  EXPECT_EQ(normalize_model(n), n);
}

TEST(PprModelOps, ConcreteMembersAndIntermediates) {
  auto m = fx::load_model(fx::shiftfork_dir() / "shiftfork.ppr");
  EXPECT_EQ(concrete_members(m, "Pipe"), (std::vector<std::string>{"Pipe8", "Pipe3", "Pipe2"}));
  EXPECT_EQ(concrete_members(m, "WeldingRobots"),
            (std::vector<std::string>{"LaserWeldingRobot_01", "UltrasonicWeldingRobot_16"}));
  EXPECT_THROW((void)concrete_members(m, "Pipe2"), std::invalid_argument);
  EXPECT_THROW((void)concrete_members(m, "Nope"), std::invalid_argument);
  EXPECT_TRUE(is_intermediate(m, "ForkProduct"));
  EXPECT_FALSE(is_intermediate(m, "Pipe2"));
  EXPECT_EQ(component_ids(m).size(), 19U);
  EXPECT_EQ(category_of(m, "LF_4"), Category::Resource);
  EXPECT_FALSE(category_of(m, "Nope").has_value());
}

TEST(PprModelOps, EvalConstraint) {
  auto m = fx::load_model(fx::shiftfork_dir() / "shiftfork.ppr");
  const auto& c1 = m.constraints.at("C1");
  EXPECT_EQ(c1.scope, (std::vector<std::string>{"Lock1", "Pipe2", "Pipe3"}));
  EXPECT_TRUE(eval_constraint(c1, {{"Lock1", true}, {"Pipe2", true}, {"Pipe3", false}}));
  EXPECT_FALSE(eval_constraint(c1, {{"Lock1", true}, {"Pipe2", false}, {"Pipe3", false}}));
  EXPECT_THROW((void)eval_constraint(c1, {{"Lock1", true}}), std::invalid_argument);
}
