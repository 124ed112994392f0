#include "tsad/api/server.hpp"
#include "tsad/core/csv.hpp"
#include "tsad/core/error.hpp"
#include "tsad/core/synthetic.hpp"
#include "tsad/primitives/preprocessing.hpp"

#include "store_harness.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

using namespace tsad;
using nlohmann::json;

namespace {

class Api : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = harness::fresh_dir("api"); }
  void TearDown() override {
    client_.reset();
    server_.reset();
    std::filesystem::remove_all(dir_);
  }

  void launch(ApiConfig cfg = {}) {
    cfg.port = 0;
    cfg.store_path = dir_ / "store";
    server_ = std::make_unique<ApiServer>(cfg);
    const int port = server_->start();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port);
  }

  struct Reply {
    int status = 0;
    json body;
  };

  Reply call(const std::string& method, const std::string& path, const json& body = nullptr) {
    httplib::Result r{nullptr, httplib::Error::Unknown};
    const std::string text = body.is_null() ? std::string() : body.dump();
    if (method == "GET") r = client_->Get(path);
    if (method == "POST") r = client_->Post(path, text, "application/json");
    if (method == "PATCH") r = client_->Patch(path, text, "application/json");
    if (method == "DELETE") r = client_->Delete(path);
    EXPECT_TRUE(r) << method << " " << path;
    if (!r) return {};
    return {r->status, json::parse(r->body, nullptr, false)};
  }

  // A one-minute-spaced sine signal registered as a Signal document.
  std::string register_signal(std::size_t n = 600, const std::string& name = "s1") {
    if (dataset_.empty()) dataset_ = call("POST", "/datasets", {{"name", "demo"}}).body.at("id");
    SyntheticSpec spec;
    spec.n = n;
    spec.seed = 5;
    spec.anomalies.count = 3;
    const Signal s = generate_synthetic(spec).signal;
    const auto path = dir_ / (name + ".csv");
    write_signal_csv(path, s);
    const Reply r = call("POST", "/signals", {{"dataset_id", dataset_}, {"name", name}, {"data_uri", "file://" + path.string()}});
    EXPECT_EQ(r.status, 201);
    return r.body.at("id");
  }

  std::string manual_event(const std::string& signal, Timestamp t_s, Timestamp t_e) {
    const Reply r = call("POST", "/events", {{"signal_id", signal}, {"t_s", t_s}, {"t_e", t_e}, {"source", "manual"}});
    EXPECT_EQ(r.status, 201) << r.body.dump();
    return r.body.at("id");
  }

  std::filesystem::path dir_;
  std::unique_ptr<ApiServer> server_;
  std::unique_ptr<httplib::Client> client_;
  std::string dataset_;
};

constexpr Timestamp kStart = 1'600'000'000;

}  // namespace

TEST_F(Api, FreshStoreListsNothing) {
  launch();
  const Reply r = call("GET", "/signals");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body, json::array());
  EXPECT_EQ(call("GET", "/datasets").body, json::array());
}

TEST_F(Api, SchemaIsPublished) {
  launch();
  const Reply r = call("GET", "/schema");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body, knowledge_base_schema());
}

TEST_F(Api, ErrorBodies) {
  launch();
  const std::string sig = register_signal();
  Reply r = call("POST", "/events", {{"signal_id", sig}, {"t_e", kStart + 60}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body.at("error"), "MissingField");
  EXPECT_EQ(r.body.at("field"), "t_s");
  EXPECT_TRUE(r.body.at("message").is_string());

  r = call("POST", "/events", {{"signal_id", sig}, {"t_s", kStart + 60}, {"t_e", kStart}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body.at("field"), "t_e");

  r = call("POST", "/events", {{"signal_id", "nope"}, {"t_s", 1}, {"t_e", 2}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body.at("error"), "DanglingReference");
  EXPECT_EQ(r.body.at("field"), "signal_id");

  r = call("GET", "/events/unknown");
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(r.body.at("error"), "NotFound");

  const auto raw = client_->Post("/datasets", "{not json", "application/json");
  ASSERT_TRUE(raw);
  EXPECT_EQ(raw->status, 400);

  r = call("POST", "/signals", {{"dataset_id", dataset_}, {"name", "x"}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body.at("field"), "data_uri");

  r = call("GET", "/no/such/route");
  EXPECT_EQ(r.status, 404);
}

TEST_F(Api, EventLifecycleLogsInteractions) {
  launch();
  const std::string sig = register_signal();
  const std::string ev = manual_event(sig, kStart + 600, kStart + 1200);

  Reply r = call("PATCH", "/events/" + ev, {{"t_e", kStart + 1800}});
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body.at("t_e"), kStart + 1800);

  r = call("GET", "/events/" + ev + "/interactions");
  ASSERT_EQ(r.status, 200);
  ASSERT_EQ(r.body.size(), 2u);
  EXPECT_EQ(r.body[0].at("action"), "create");
  EXPECT_EQ(r.body[1].at("action"), "modify");
  EXPECT_EQ(r.body[1].at("payload").at("old").at("t_e"), kStart + 1200);
  EXPECT_EQ(r.body[1].at("payload").at("new").at("t_e"), kStart + 1800);

  EXPECT_EQ(call("GET", "/events?signal=" + sig).body.size(), 1u);
  EXPECT_EQ(call("GET", "/events?signal=" + sig + "&t0=" + std::to_string(kStart + 2000)).body.size(), 0u);
  EXPECT_EQ(call("GET", "/events?signal=" + sig + "&t1=" + std::to_string(kStart + 700)).body.size(), 1u);

  r = call("DELETE", "/events/" + ev);
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body.at("deleted"), true);
  r = call("GET", "/events/" + ev + "/interactions");
  ASSERT_EQ(r.body.size(), 3u);
  EXPECT_EQ(r.body[2].at("action"), "delete");
  EXPECT_EQ(call("GET", "/events?signal=" + sig).body.size(), 0u);
  // The id stays resolvable as a tombstone; further mutation is refused.
  EXPECT_EQ(call("GET", "/events/" + ev).status, 200);
  EXPECT_EQ(call("PATCH", "/events/" + ev, {{"t_e", kStart + 3000}}).status, 404);
  EXPECT_EQ(call("DELETE", "/events/" + ev).status, 404);
  EXPECT_TRUE(server_->store().audit().ok());
}

TEST_F(Api, AnnotationsAccumulate) {
  launch();
  const std::string sig = register_signal();
  const std::string ev = manual_event(sig, kStart + 600, kStart + 1200);
  EXPECT_EQ(call("POST", "/events/" + ev + "/annotations", {{"user", "ana"}, {"tag", "confirmed"}, {"comment", "real"}}).status, 201);
  EXPECT_EQ(call("POST", "/events/" + ev + "/annotations", {{"user", "ben"}, {"tag", "investigate"}}).status, 201);
  Reply r = call("POST", "/events/" + ev + "/annotations", {{"user", "ben"}, {"tag", "bogus"}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body.at("field"), "tag");
  r = call("GET", "/events/" + ev + "/annotations");
  ASSERT_EQ(r.body.size(), 2u);
  EXPECT_EQ(r.body[0].at("user"), "ana");
  EXPECT_EQ(r.body[1].at("tag"), "investigate");
  r = call("GET", "/events/" + ev + "/interactions");
  EXPECT_EQ(r.body.size(), 3u);
  EXPECT_EQ(r.body[1].at("action"), "tag");
  EXPECT_EQ(call("POST", "/events/missing/annotations", {{"user", "a"}, {"tag", "normal"}}).status, 404);
}

TEST_F(Api, SignalDataAggregation) {
  launch();
  // 1 Hz signal, ten minutes long.
  const std::size_t n = 600;
  std::vector<Timestamp> ts(n);
  Matrix v(static_cast<Eigen::Index>(n), 1);
  for (std::size_t i = 0; i < n; ++i) {
    ts[i] = kStart + static_cast<Timestamp>(i);
    v(static_cast<Eigen::Index>(i), 0) = std::sin(0.01 * static_cast<double>(i)) + 0.001 * static_cast<double>(i % 7);
  }
  const Signal s("hz", ts, v);
  write_signal_csv(dir_ / "hz.csv", s);
  const std::string ds = call("POST", "/datasets", {{"name", "d"}}).body.at("id");
  const std::string sig =
      call("POST", "/signals", {{"dataset_id", ds}, {"name", "hz"}, {"data_uri", (dir_ / "hz.csv").string()}}).body.at("id");

  Reply r = call("GET", "/signals/" + sig + "/data?agg=60");
  ASSERT_EQ(r.status, 200) << r.body.dump();
  ASSERT_EQ(r.body.at("timestamps").size(), 10u);
  const RegularSeries direct = time_segments_aggregate(ts, v, 60, AggregateMethod::mean);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(r.body["timestamps"][i].get<Timestamp>(), direct.timestamps[i]);
    EXPECT_EQ(r.body["values"][i][0].get<double>(), direct.values(static_cast<Eigen::Index>(i), 0));
  }

  const std::string slice = "?t0=" + std::to_string(kStart + 100) + "&t1=" + std::to_string(kStart + 109);
  r = call("GET", "/signals/" + sig + "/data" + slice + "&agg=0");
  ASSERT_EQ(r.body.at("timestamps").size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(r.body["timestamps"][i].get<Timestamp>(), ts[100 + i]);
    EXPECT_EQ(r.body["values"][i][0].get<double>(), v(static_cast<Eigen::Index>(100 + i), 0));
  }
  // Same parameters over a slice match the primitive on that slice.
  r = call("GET", "/signals/" + sig + "/data?t0=" + std::to_string(kStart + 30) + "&t1=" + std::to_string(kStart + 400) +
                      "&agg=45");
  const std::vector<Timestamp> sub(ts.begin() + 30, ts.begin() + 401);
  const RegularSeries part = time_segments_aggregate(sub, v.middleRows(30, 371), 45, AggregateMethod::mean);
  ASSERT_EQ(r.body.at("timestamps").size(), part.timestamps.size());
  for (std::size_t i = 0; i < part.timestamps.size(); ++i) {
    EXPECT_EQ(r.body["values"][i][0].get<double>(), part.values(static_cast<Eigen::Index>(i), 0));
  }

  EXPECT_EQ(call("GET", "/signals/nope/data").status, 404);
  EXPECT_EQ(call("GET", "/signals/" + sig + "/data?agg=x").status, 400);
}

TEST_F(Api, TooManyPointsIs413) {
  ApiConfig cfg;
  cfg.max_points = 100;
  launch(cfg);
  const std::string sig = register_signal(600);
  Reply r = call("GET", "/signals/" + sig + "/data");
  EXPECT_EQ(r.status, 413);
  EXPECT_EQ(r.body.at("error"), "TooManyPoints");
  r = call("GET", "/signals/" + sig + "/data?agg=600");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body.at("timestamps").size(), 60u);
}

TEST_F(Api, DatarunPersistsSignalrunsAndEvents) {
  launch();
  const std::string s1 = register_signal(800, "a");
  const std::string s2 = register_signal(800, "b");
  Reply exp = call("POST", "/experiments", {{"name", "e1"}, {"dataset_id", dataset_}, {"template", "ar_dynamic_threshold"}});
  ASSERT_EQ(exp.status, 201) << exp.body.dump();
  EXPECT_EQ(call("GET", "/templates/" + exp.body.at("template_id").get<std::string>()).status, 200);

  Reply run = call("POST", "/dataruns", {{"experiment_id", exp.body.at("id")}, {"signal_ids", {s1, s2}}});
  ASSERT_EQ(run.status, 201) << run.body.dump();
  EXPECT_EQ(run.body.at("status"), "done");
  ASSERT_EQ(run.body.at("signalruns").size(), 2u);
  EXPECT_EQ(call("GET", "/pipelines/" + run.body.at("pipeline_id").get<std::string>()).status, 200);

  const Reply fetched = call("GET", "/dataruns/" + run.body.at("id").get<std::string>());
  ASSERT_EQ(fetched.status, 200);
  ASSERT_EQ(fetched.body.at("signalruns").size(), 2u);
  for (const auto& sr : fetched.body.at("signalruns")) {
    EXPECT_EQ(sr.at("status"), "ok");
    EXPECT_TRUE(sr.contains("profile"));
    const std::string id = sr.at("id");
    EXPECT_EQ(call("GET", "/signalruns/" + id).status, 200);
    const Reply events = call("GET", "/events?signalrun=" + id);
    EXPECT_EQ(events.body.size(), sr.at("num_events").get<std::size_t>());
    for (const auto& e : events.body) EXPECT_EQ(call("GET", "/events/" + e.at("id").get<std::string>()).status, 200);
  }
  EXPECT_TRUE(server_->store().audit().ok());

  EXPECT_EQ(call("POST", "/dataruns", {{"experiment_id", "missing"}}).status, 400);
  // Without signal_ids every signal of the dataset runs.
  run = call("POST", "/dataruns", {{"experiment_id", exp.body.at("id")}});
  EXPECT_EQ(run.body.at("signalruns").size(), 2u);
}

TEST_F(Api, DatarunRecordsFailedSignals) {
  launch();
  const std::string ok = register_signal(800, "ok");
  const std::string bad = call("POST", "/signals", {{"dataset_id", dataset_}, {"name", "gone"}, {"data_uri", "/nonexistent.csv"}})
                              .body.at("id");
  const std::string exp =
      call("POST", "/experiments", {{"name", "e"}, {"dataset_id", dataset_}, {"template", "ar_dynamic_threshold"}}).body.at("id");
  const Reply run = call("POST", "/dataruns", {{"experiment_id", exp}, {"signal_ids", {ok, bad}}});
  ASSERT_EQ(run.status, 201);
  EXPECT_EQ(run.body["signalruns"][0].at("status"), "ok");
  EXPECT_EQ(run.body["signalruns"][1].at("status"), "failed:Io");
  EXPECT_EQ(run.body["signalruns"][1].at("num_events"), 0);
}

TEST_F(Api, RetrainContract) {
  launch();
  const std::string sig = register_signal(600);
  auto annotate = [&](Timestamp from, const std::string& tag) {
    const std::string ev = manual_event(sig, kStart + from * 60, kStart + (from + 10) * 60);
    EXPECT_EQ(call("POST", "/events/" + ev + "/annotations", {{"user", "u"}, {"tag", tag}}).status, 201);
  };
  annotate(50, "confirmed");
  annotate(150, "confirmed");
  Reply r = call("POST", "/feedback/retrain");
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(r.body.at("error"), "SingleClassData");

  annotate(250, "normal");
  annotate(350, "normal");
  r = call("POST", "/feedback/retrain");
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_GT(r.body.at("n_labeled").get<int>(), 0);
  EXPECT_EQ(r.body.at("metrics").at("n_annotations"), 4);
  const std::string model = r.body.at("model_id");
  const Reply stored = call("GET", "/pipelines/" + model);
  ASSERT_EQ(stored.status, 200);
  EXPECT_EQ(stored.body.at("kind"), "semi_supervised");
  EXPECT_TRUE(stored.body.at("model").contains("weights"));

  r = call("POST", "/feedback/retrain");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body.at("model_id"), model);
  EXPECT_EQ(r.body.at("reused"), true);

  annotate(450, "normal");
  r = call("POST", "/feedback/retrain", json::object());
  EXPECT_EQ(r.status, 200);
  EXPECT_NE(r.body.at("model_id"), model);
}

TEST_F(Api, BearerToken) {
  ApiConfig cfg;
  cfg.auth_token = "s3cret";
  launch(cfg);
  EXPECT_EQ(call("GET", "/datasets").status, 401);
  client_->set_bearer_token_auth("wrong");
  EXPECT_EQ(call("GET", "/datasets").status, 401);
  client_->set_bearer_token_auth("s3cret");
  EXPECT_EQ(call("GET", "/datasets").status, 200);
}

TEST_F(Api, StaticFiles) {
  std::filesystem::create_directories(dir_ / "ui");
  harness::write_file(dir_ / "ui" / "index.html", "<html>hi</html>");
  ApiConfig cfg;
  cfg.static_dir = dir_ / "ui";
  cfg.auth_token = "t";
  launch(cfg);
  const auto r = client_->Get("/ui/index.html");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->body, "<html>hi</html>");
}

TEST_F(Api, MutationsAreDurableAndStoreIsExclusive) {
  launch();
  const std::string sig = register_signal();
  const std::string ev = manual_event(sig, kStart + 60, kStart + 600);
  EXPECT_EQ(call("POST", "/events/" + ev + "/annotations", {{"user", "u"}, {"tag", "normal"}}).status, 201);
  ApiConfig second;
  second.store_path = dir_ / "store";
  try {
    ApiServer other(second);
    FAIL() << "second server opened a locked store";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Locked);
  }
  server_->stop();
  client_.reset();
  server_.reset();
  auto store = Store::open(dir_ / "store");
  EXPECT_TRUE(store->try_get(Collection::Event, ev).has_value());
  EXPECT_EQ(store->count(Collection::Annotation), 1u);
  EXPECT_EQ(store->count(Collection::EventInteraction), 2u);
  EXPECT_TRUE(store->audit().ok());
}

TEST_F(Api, BindErrorWhenPortTaken) {
  launch();
  ApiConfig cfg;
  cfg.store_path = dir_ / "other";
  cfg.port = server_->port();
  ApiServer other(cfg);
  try {
    other.bind();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BindError);
  }
}
