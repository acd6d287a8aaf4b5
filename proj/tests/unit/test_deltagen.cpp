#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "pprvari/deltagen.hpp"

using namespace pprvari;
using namespace pprvari::delta;

namespace {

FbNetwork base() { return parse_fbn(fx::slurp(fx::shiftfork_dir() / "base.fbn")); }
DeltaModel dlock1() { return parse_delta(fx::slurp(fx::shiftfork_dir() / "deltas" / "DLock1.delta")); }

bool has(const std::vector<std::string>& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

engine::StagedSession done_session() {
  engine::StagedSession s(fx::shiftfork_workspace());
  fx::run_walkthrough(s);
  return s;
}

}  // namespace

TEST(Fbn, ParseWriteRoundTrip) {
  auto net = base();
  EXPECT_EQ(net.app_name, "ShiftForkCaseStudyApp");
  EXPECT_EQ(net.blocks.size(), 40U);
  EXPECT_EQ(net.connections.size(), 43U);
  EXPECT_EQ(net.blocks.at("WeldLock1"), "WeldingStep");
  EXPECT_EQ(parse_fbn(write_fbn(net)), net);
}

TEST(Fbn, Errors) {
  EXPECT_THROW((void)parse_fbn("application A {\n  fb X : T;\n  fb X : U;\n}\n"), DeltaError);
  EXPECT_THROW((void)parse_fbn("application A {\n  event a.p -> b.q;\n}\n"), DeltaError);
  EXPECT_THROW((void)parse_fbn("application A {\n  fb X T;\n}\n"), SyntaxError);
}

TEST(Delta, ParsesListedDelta) {
  auto d = dlock1();
  EXPECT_EQ(d.name, "DLock1");
  EXPECT_EQ(d.uses, "ShiftForkCaseStudyApp");
  ASSERT_EQ(d.ops.size(), 5U);
  EXPECT_EQ(d.ops[0].kind, OpKind::RemoveElement);
  EXPECT_EQ(d.ops[0].name, "InsertLock1");
  EXPECT_EQ(d.ops[3].kind, OpKind::AddBlock);
  EXPECT_EQ(d.ops[3].name, "UltrasonicWeldingRobot16");
  EXPECT_EQ(d.ops[3].type, "UltrasonicWeldingRobot_16");
  EXPECT_EQ(d.ops[4].kind, OpKind::AddEventConnection);
  EXPECT_EQ(d.ops[4].connection, (EventConnection{"UltrasonicWeldingRobot16", "CNF", "PopulatedPipe", "REQ"}));
  EXPECT_EQ(parse_delta(write_delta(d)), d);
}

TEST(Delta, ApplyDLock1) {
  auto net = base();
  std::vector<std::string> warnings;
  auto out = apply_delta(net, dlock1(), &warnings);
  EXPECT_FALSE(out.blocks.count("InsertLock1"));
  EXPECT_FALSE(out.blocks.count("WeldLock1"));
  EXPECT_FALSE(out.blocks.count("E_REND_WeldLock1"));
  ASSERT_TRUE(out.blocks.count("UltrasonicWeldingRobot16"));
  EXPECT_EQ(out.blocks.at("UltrasonicWeldingRobot16"), "UltrasonicWeldingRobot_16");
  EXPECT_TRUE(out.connections.count({"UltrasonicWeldingRobot16", "CNF", "PopulatedPipe", "REQ"}));
  EXPECT_EQ(out.blocks.size(), net.blocks.size() - 2);
  for (const auto& c : out.connections) {
    EXPECT_TRUE(out.blocks.count(c.src)) << to_string(c);
    EXPECT_TRUE(out.blocks.count(c.dst)) << to_string(c);
  }
  EXPECT_FALSE(warnings.empty());
  for (const auto& w : warnings) EXPECT_EQ(w.rfind("delta DLock1: dropped connection", 0), 0U) << w;
}

TEST(Delta, ApplyErrors) {
  auto net = base();
  auto wrong_app = dlock1();
  wrong_app.uses = "OtherApp";
  EXPECT_THROW((void)apply_delta(net, wrong_app), DeltaError);
  DeltaModel missing{"DX", net.app_name, {{OpKind::RemoveElement, "Nope", "", {}}}};
  try {
    (void)apply_delta(net, missing);
    FAIL() << "no exception";
  } catch (const DeltaError& e) {
    EXPECT_EQ(e.delta(), "DX");
  }
  DeltaModel dup{"DY", net.app_name, {{OpKind::AddBlock, "WeldLock2", "T", {}}}};
  EXPECT_THROW((void)apply_delta(net, dup), DeltaError);
  DeltaModel dangling{"DZ", net.app_name, {{OpKind::AddEventConnection, "", "", {"Nope", "CNF", "WeldLock2", "REQ"}}}};
  EXPECT_THROW((void)apply_delta(net, dangling), DeltaError);
  DeltaModel absent{"DW", net.app_name, {{OpKind::RemoveEventConnection, "", "", {"WeldLock2", "X", "WeldLock3", "Y"}}}};
  EXPECT_THROW((void)apply_delta(net, absent), DeltaError);
}

TEST(Delta, SyntaxErrors) {
  EXPECT_THROW((void)parse_delta("delta D;\n{\n  <Remove> NetworkElement name=X;\n}\n"), SyntaxError);
  EXPECT_THROW((void)parse_delta("delta D;\nuses A;\n{\n  <Frobnicate> X;\n}\n"), SyntaxError);
}

TEST(Bindings, ParseValues) {
  logic::QualifiedRef ref{"m", "X"};
  EXPECT_EQ(parse_binding(ref, "!DLock1"), (DeltaBinding{ref, "DLock1", true}));
  EXPECT_EQ(parse_binding(ref, "deltas/DPR04.delta"), (DeltaBinding{ref, "DPR04", false}));
}

TEST(Bindings, CollectedFromWorkspace) {
  auto bs = bindings(*fx::shiftfork_workspace());
  auto it = std::find_if(bs.begin(), bs.end(), [](const DeltaBinding& b) { return b.element.element == "WeldLock1"; });
  ASSERT_NE(it, bs.end());
  EXPECT_EQ(it->element.model, "shiftfork_process");
  EXPECT_TRUE(it->negated);
  EXPECT_EQ(it->delta_name, "DLock1");
  auto r = std::find_if(bs.begin(), bs.end(), [](const DeltaBinding& b) { return b.element.element == "LF_3"; });
  ASSERT_NE(r, bs.end());
  EXPECT_EQ(r->element.model, "shiftfork_resource");
  EXPECT_FALSE(r->negated);
}

TEST(Loader, DirectoryLoaderChecksNames) {
  auto load = directory_loader(fx::shiftfork_dir() / "deltas");
  EXPECT_EQ(load("DLock1"), dlock1());
  EXPECT_THROW((void)load("DMissing"), DeltaError);
  fx::TempDir d;
  engine::write_file(d.path() / "DA.delta", "delta DB;\nuses X;\n{\n}\n");
  EXPECT_THROW((void)directory_loader(d.path())("DA"), DeltaError);
}

TEST(Collect, RequiresCompletedSession) {
  engine::StagedSession s(fx::shiftfork_workspace());
  auto load = directory_loader(fx::shiftfork_dir() / "deltas");
  EXPECT_THROW((void)collect_deltas(s, load, "ShiftForkCaseStudyApp"), DeltaError);
}

TEST(Collect, WalkthroughSelection) {
  auto s = done_session();
  auto got = collect_deltas(s, directory_loader(fx::shiftfork_dir() / "deltas"), "ShiftForkCaseStudyApp");
  std::vector<std::string> names;
  for (const auto& c : got) names.push_back(c.binding.delta_name);
  EXPECT_TRUE(has(names, "DLock2"));
  EXPECT_TRUE(has(names, "DLock3"));
  EXPECT_TRUE(has(names, "DInsertPipe8"));
  EXPECT_TRUE(has(names, "DUltrasonicWeldingRobot16"));
  EXPECT_TRUE(has(names, "DPR04"));
  EXPECT_FALSE(has(names, "DLock1"));
  EXPECT_FALSE(has(names, "DInsertPipe2"));
  EXPECT_FALSE(has(names, "DLF3"));
  EXPECT_FALSE(has(names, "DPR12"));
  std::set<std::string> unique(names.begin(), names.end());
  EXPECT_EQ(unique.size(), names.size());
}

TEST(Generate, WalkthroughPasses) {
  auto s = done_session();
  auto g = generate_artifact(s, base(), directory_loader(fx::shiftfork_dir() / "deltas"));
  EXPECT_TRUE(g.report.pass) << report_text(g.report);
  EXPECT_TRUE(g.report.missing.empty());
  EXPECT_TRUE(g.report.leftover.empty());
  EXPECT_TRUE(g.network.blocks.count("WeldLock1"));
  EXPECT_TRUE(g.network.blocks.count("InsertPipe2"));
  EXPECT_FALSE(g.network.blocks.count("WeldLock2"));
  EXPECT_FALSE(g.network.blocks.count("InsertPipe8"));
  EXPECT_TRUE(g.network.blocks.count("UltrasonicWeldingRobot16_1"));
  EXPECT_EQ(g.report.present.at("WeldLock1"), "WeldLock1");
  auto text = report_text(g.report);
  EXPECT_EQ(text.rfind("consistency PASS\n", 0), 0U);
  EXPECT_NE(text.find("applied DPR04\n"), std::string::npos);
}

TEST(Generate, MissingBlockFails) {
  auto s = done_session();
  auto net = base();
  net.blocks.erase("MountO_Ring");
  std::erase_if(net.connections, [](const EventConnection& c) { return c.src == "MountO_Ring" || c.dst == "MountO_Ring"; });
  auto g = generate_artifact(s, net, directory_loader(fx::shiftfork_dir() / "deltas"));
  EXPECT_FALSE(g.report.pass);
  EXPECT_TRUE(has(g.report.missing, "MountO_Ring"));
  EXPECT_EQ(report_text(g.report).rfind("consistency FAIL\n", 0), 0U);
}

TEST(Generate, LeftoverBlockFails) {
  auto s = done_session();
  fx::TempDir d;
  for (const auto& e : std::filesystem::directory_iterator(fx::shiftfork_dir() / "deltas"))
    std::filesystem::copy_file(e.path(), d.path() / e.path().filename());
  engine::write_file(d.path() / "DLock2.delta", "delta DLock2;\nuses ShiftForkCaseStudyApp;\n{\n}\n");
  auto g = generate_artifact(s, base(), directory_loader(d.path()));
  EXPECT_FALSE(g.report.pass);
  EXPECT_TRUE(has(g.report.leftover, "WeldLock2 (WeldLock2)"));
}
