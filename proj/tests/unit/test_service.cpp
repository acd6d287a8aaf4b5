#include <gtest/gtest.h>

#include <thread>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "httplib.h"
#include "pprvari/service.hpp"

using nlohmann::json;
using namespace pprvari;

namespace {

void prepare(const fx::fs::path& dir) {
  engine::write_workspace(*fx::shiftfork_workspace(), dir);
  fx::fs::copy_file(fx::shiftfork_dir() / "base.fbn", dir / "base.fbn");
  fx::fs::copy(fx::shiftfork_dir() / "deltas", dir / "deltas");
}

class Running {
 public:
  explicit Running(service::Options opts) : server_(std::move(opts)) {
    port_ = server_.bind("127.0.0.1", 0);
    if (port_ > 0) {
      thread_ = std::thread([this] { server_.listen(); });
      server_.wait_until_ready();
    }
  }
  ~Running() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }
  [[nodiscard]] int port() const { return port_; }
  service::Server& server() { return server_; }

 private:
  service::Server server_;
  std::thread thread_;
  int port_ = -1;
};

struct Reply {
  int status = 0;
  json body;
  httplib::Headers headers;
};

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    prepare(dir_.path());
    run_ = std::make_unique<Running>(service::Options{dir_.path(), false});
    ASSERT_GT(run_->port(), 0);
    client_ = std::make_unique<httplib::Client>("127.0.0.1", run_->port());
  }

  Reply get(const std::string& path) { return wrap(client_->Get(path)); }
  Reply post(const std::string& path, const json& body) {
    return wrap(client_->Post(path, body.dump(), "application/json"));
  }
  Reply post_raw(const std::string& path, const std::string& body) {
    return wrap(client_->Post(path, body, "application/json"));
  }

  std::string create() {
    auto r = post("/v1/sessions", json::object());
    EXPECT_EQ(r.status, 201);
    return r.body.value("id", "");
  }

  std::string completed() {
    auto id = create();
    auto base = "/v1/sessions/" + id;
    EXPECT_EQ(post(base + "/product", {{"selected", fx::walkthrough_product()}}).status, 200);
    for (const auto& d : fx::walkthrough_decisions())
      EXPECT_EQ(post(base + "/process/decisions", {{"decision", d}, {"value", true}}).status, 200) << d;
    EXPECT_EQ(post(base + "/process/finish", json::object()).status, 200);
    EXPECT_EQ(post(base + "/resource", {{"selected", fx::walkthrough_resources()}}).status, 200);
    return id;
  }

  fx::TempDir dir_;
  std::unique_ptr<Running> run_;
  std::unique_ptr<httplib::Client> client_;

 private:
  static Reply wrap(const httplib::Result& res) {
    Reply r;
    if (!res) return r;
    r.status = res->status;
    r.headers = res->headers;
    if (!res->body.empty()) r.body = json::parse(res->body, nullptr, false);
    return r;
  }
};

}  // namespace

TEST_F(ServiceTest, Health) {
  auto r = get("/v1/health");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["status"], "ok");
}

TEST_F(ServiceTest, CreateAndFetch) {
  auto r = post("/v1/sessions", json::object());
  ASSERT_EQ(r.status, 201);
  EXPECT_EQ(r.body["stage"], "product");
  EXPECT_EQ(r.body["models"]["decisions"], 55);
  std::string id = r.body["id"];
  EXPECT_EQ(id.size(), 16U);
  auto g = get("/v1/sessions/" + id);
  EXPECT_EQ(g.status, 200);
  EXPECT_EQ(g.body["id"], id);
  EXPECT_EQ(run_->server().session_count(), 1U);
  EXPECT_EQ(get("/v1/sessions/0123456789abcdef").status, 404);
}

TEST_F(ServiceTest, BrokenWorkspaceIs422) {
  fx::TempDir broken;
  engine::write_workspace(*fx::shiftfork_workspace(), broken.path());
  engine::write_file(broken.path() / engine::kLinksFile, "shiftfork_product#Nope => shiftfork_process#Pipe2;\n");
  auto r = post("/v1/sessions", {{"workspace", broken.path().string()}});
  EXPECT_EQ(r.status, 422);
  EXPECT_TRUE(r.body.contains("error"));
  EXPECT_EQ(post("/v1/sessions", {{"workspace", "/nonexistent/ws"}}).status, 422);
}

TEST_F(ServiceTest, BodyValidation) {
  EXPECT_EQ(post("/v1/sessions", {{"colour", "red"}}).status, 422);
  EXPECT_EQ(post_raw("/v1/sessions", "{not json").status, 422);
  auto id = create();
  auto base = "/v1/sessions/" + id;
  EXPECT_EQ(post(base + "/product", {{"selected", "Pipe2"}}).status, 422);
  EXPECT_EQ(post(base + "/product", json::object()).status, 422);
  EXPECT_EQ(post(base + "/process/rollback", {{"count", -1}}).status, 422);
}

TEST_F(ServiceTest, StageAndRuleErrors) {
  auto id = create();
  auto base = "/v1/sessions/" + id;
  EXPECT_EQ(post(base + "/process/decisions", {{"decision", "InsertPipe2"}, {"value", true}}).status, 409);
  auto bad = post(base + "/product", {{"selected", {"Pipe2", "Pipe3"}}});
  EXPECT_EQ(bad.status, 409);
  EXPECT_FALSE(bad.body["details"].empty());
  ASSERT_EQ(post(base + "/product", {{"selected", fx::walkthrough_product()}}).status, 200);
  EXPECT_EQ(post(base + "/process/decisions", {{"decision", "Nope"}, {"value", true}}).status, 422);
  EXPECT_EQ(post(base + "/process/decisions", {{"decision", "InsertPipe2"}, {"value", "maybe"}}).status, 422);
  EXPECT_EQ(post(base + "/process/decisions", {{"decision", "WeldLock1"}, {"value", true}}).status, 409);
  EXPECT_EQ(post(base + "/process/decisions", {{"decision", "InsertPipe2"}, {"value", 3}}).status, 422);
  EXPECT_EQ(post(base + "/process/finish", json::object()).status, 409);
  EXPECT_EQ(get(base + "/metrics").status, 200);
  EXPECT_EQ(post(base + "/generate", json::object()).status, 409);
}

TEST_F(ServiceTest, DecisionsAndRollback) {
  auto id = create();
  auto base = "/v1/sessions/" + id;
  auto p = post(base + "/product", {{"selected", fx::walkthrough_product()}});
  ASSERT_EQ(p.status, 200);
  EXPECT_EQ(p.body["process"]["visible"].size(), 11U);
  auto t = post(base + "/process/decisions", {{"decision", "InsertPipe2"}, {"value", "true"}});
  ASSERT_EQ(t.status, 200);
  ASSERT_EQ(t.body["propagated"].size(), 1U);
  EXPECT_EQ(t.body["propagated"][0]["decision"], "InsertPipe");
  auto r = post(base + "/process/rollback", {{"count", 1}});
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["process"]["queue"], p.body["process"]["queue"]);
  EXPECT_EQ(r.body["process"]["visible"], p.body["process"]["visible"]);
}

TEST_F(ServiceTest, FullSessionAndGenerate) {
  auto id = completed();
  auto base = "/v1/sessions/" + id;
  auto s = get(base);
  EXPECT_EQ(s.body["stage"], "done");
  auto m = get(base + "/metrics");
  ASSERT_EQ(m.status, 200);
  EXPECT_EQ(m.body["full_space"], "620448401733239439360000");
  EXPECT_EQ(m.body["reduced_space"], "39917547");
  EXPECT_EQ(m.body["stage_sizes"], json({11, 4, 6, 2, 1}));
  auto g = post(base + "/generate", json::object());
  ASSERT_EQ(g.status, 200);
  EXPECT_TRUE(g.body["report"]["pass"].get<bool>());
  EXPECT_NE(g.body["artifact"].get<std::string>().find("UltrasonicWeldingRobot16_1"), std::string::npos);
}

TEST_F(ServiceTest, GenerateReportsBrokenDelta) {
  auto id = completed();
  fx::fs::create_directories(dir_.path() / "bad");
  for (const auto& e : fx::fs::directory_iterator(dir_.path() / "deltas"))
    fx::fs::copy_file(e.path(), dir_.path() / "bad" / e.path().filename());
  engine::write_file(dir_.path() / "bad" / "DLock2.delta",
                     "delta DLock2;\nuses ShiftForkCaseStudyApp;\n{\n  <Remove> NetworkElement name=Nope;\n}\n");
  auto g = post("/v1/sessions/" + id + "/generate", {{"deltas", "bad"}});
  EXPECT_EQ(g.status, 409);
  EXPECT_EQ(g.body["delta"], "DLock2");
}

TEST_F(ServiceTest, CorsForLocalOrigins) {
  httplib::Headers h = {{"Origin", "http://localhost:5173"}};
  auto res = client_->Get("/v1/health", h);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "http://localhost:5173");
  auto foreign = client_->Get("/v1/health", httplib::Headers{{"Origin", "http://example.com"}});
  ASSERT_TRUE(foreign);
  EXPECT_FALSE(foreign->has_header("Access-Control-Allow-Origin"));
  auto pre = client_->Options("/v1/sessions", httplib::Headers{{"Origin", "http://127.0.0.1:3000"}});
  ASSERT_TRUE(pre);
  EXPECT_EQ(pre->status, 204);
  EXPECT_NE(pre->get_header_value("Access-Control-Allow-Methods").find("POST"), std::string::npos);
}

TEST_F(ServiceTest, ConcurrentSessions) {
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 6; ++i)
    threads.emplace_back([&] {
      httplib::Client c("127.0.0.1", run_->port());
      auto r = c.Post("/v1/sessions", "{}", "application/json");
      if (!r || r->status != 201) return;
      std::string id = json::parse(r->body)["id"];
      json sel = {{"selected", fx::walkthrough_product()}};
      auto p = c.Post("/v1/sessions/" + id + "/product", sel.dump(), "application/json");
      if (p && p->status == 200) ++ok;
    });
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), 6);
  EXPECT_EQ(run_->server().session_count(), 6U);
}

TEST(ServicePersistence, SessionsSurviveRestart) {
  fx::TempDir dir;
  prepare(dir.path());
  std::string id;
  json before;
  {
    Running run(service::Options{dir.path(), true});
    httplib::Client c("127.0.0.1", run.port());
    auto r = c.Post("/v1/sessions", "{}", "application/json");
    ASSERT_TRUE(r);
    id = json::parse(r->body)["id"];
    json sel = {{"selected", fx::walkthrough_product()}};
    ASSERT_EQ(c.Post("/v1/sessions/" + id + "/product", sel.dump(), "application/json")->status, 200);
    json d = {{"decision", "InsertPipe2"}, {"value", true}};
    auto t = c.Post("/v1/sessions/" + id + "/process/decisions", d.dump(), "application/json");
    ASSERT_EQ(t->status, 200);
    before = json::parse(t->body);
  }
  EXPECT_TRUE(fx::fs::exists(dir.path() / "sessions" / (id + ".json")));
  Running again(service::Options{dir.path(), true});
  EXPECT_EQ(again.server().session_count(), 1U);
  httplib::Client c("127.0.0.1", again.port());
  auto g = c.Get("/v1/sessions/" + id);
  ASSERT_TRUE(g);
  ASSERT_EQ(g->status, 200);
  auto after = json::parse(g->body);
  EXPECT_EQ(after["process"]["queue"], before["process"]["queue"]);
  EXPECT_EQ(after["stage"], "process");
}

TEST(ServiceBind, InvalidHostFails) {
  service::Server s(service::Options{});
  EXPECT_EQ(s.bind("256.0.0.1", 0), -1);
}
