#include "tsad/api/server.hpp"

#include "tsad/bench/benchmark.hpp"
#include "tsad/core/csv.hpp"
#include "tsad/core/error.hpp"
#include "tsad/feedback/feedback.hpp"
#include "tsad/pipeline/pipeline.hpp"
#include "tsad/primitives/preprocessing.hpp"

#include <httplib.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <thread>

namespace tsad {

namespace {

using nlohmann::json;

// Raised inside handlers for failures that have no library error code.
struct HttpError {
  int status;
  std::string code;
  std::string message;
  std::string field;
};

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
    case ErrorCode::UnknownCollection:
      return 404;
    case ErrorCode::SingleClassData:
    case ErrorCode::Locked:
      return 409;
    case ErrorCode::TooManyPoints:
      return 413;
    case ErrorCode::Io:
    case ErrorCode::CorruptJournal:
    case ErrorCode::NumericalFailure:
    case ErrorCode::BindError:
      return 500;
    default:
      return 400;
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                const std::string& field) {
  json body{{"error", code}, {"message", message}};
  if (!field.empty()) body["field"] = field;
  send_json(res, status, body);
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

json parse_body(const httplib::Request& req, bool allow_empty = false) {
  if (req.body.empty() && allow_empty) return json::object();
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    throw HttpError{400, "InvalidArgument", "request body must be a JSON object", ""};
  }
  return body;
}

std::optional<std::int64_t> query_int(const httplib::Request& req, const std::string& name) {
  if (!req.has_param(name)) return std::nullopt;
  const std::string text = req.get_param_value(name);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw HttpError{400, "InvalidArgument", "query parameter '" + name + "' must be an integer", name};
  }
  return v;
}

std::size_t query_size(const httplib::Request& req, const std::string& name, std::size_t fallback) {
  const auto v = query_int(req, name);
  if (!v) return fallback;
  if (*v < 0) throw HttpError{400, "InvalidArgument", "query parameter '" + name + "' must be >= 0", name};
  return static_cast<std::size_t>(*v);
}

std::int64_t body_int(const json& body, const std::string& field) {
  const auto it = body.find(field);
  if (it == body.end() || it->is_null()) {
    throw HttpError{400, "MissingField", "field '" + field + "' is required", field};
  }
  if (!it->is_number_integer()) throw HttpError{400, "InvalidArgument", "field '" + field + "' must be an integer", field};
  return it->get<std::int64_t>();
}

std::string body_string(const json& body, const std::string& field) {
  const auto it = body.find(field);
  if (it == body.end() || it->is_null()) {
    throw HttpError{400, "MissingField", "field '" + field + "' is required", field};
  }
  if (!it->is_string()) throw HttpError{400, "InvalidArgument", "field '" + field + "' must be a string", field};
  return it->get<std::string>();
}

json docs_json(const std::vector<Document>& docs) {
  json out = json::array();
  for (const Document& d : docs) out.push_back(d.to_json());
  return out;
}

Query list_query(const httplib::Request& req) {
  Query q;
  q.offset = query_size(req, "offset", 0);
  q.limit = query_size(req, "limit", 0);
  return q;
}

Signal load_signal_doc(const Document& doc) {
  std::string uri = doc.body.value("data_uri", std::string());
  if (uri.rfind("file://", 0) == 0) uri = uri.substr(7);
  CsvSchema schema;
  if (doc.body.contains("timestamp_column") && doc.body["timestamp_column"].is_string()) {
    schema.timestamp_column = doc.body["timestamp_column"].get<std::string>();
  }
  if (doc.body.contains("value_columns") && doc.body["value_columns"].is_array()) {
    for (const auto& c : doc.body["value_columns"]) schema.value_columns.push_back(c.get<std::string>());
  }
  return load_signal_csv(uri, schema).with_name(doc.body.value("name", doc.id));
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Live event or 404.
Document live_event(const Store& store, const std::string& id) {
  const auto doc = store.try_get(Collection::Event, id);
  if (!doc || doc->deleted()) throw HttpError{404, "NotFound", "no live event '" + id + "'", ""};
  return *doc;
}

}  // namespace

struct ApiServer::Impl {
  ApiConfig config;
  std::unique_ptr<Store> store;
  httplib::Server http;
  std::thread thread;
  int port = -1;

  explicit Impl(ApiConfig cfg) : config(std::move(cfg)), store(Store::open(config.store_path)) {}

  template <typename F>
  httplib::Server::Handler wrap(F fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const HttpError& e) {
        send_error(res, e.status, e.code, e.message, e.field);
      } catch (const Error& e) {
        send_error(res, status_for(e.code()), to_string(e.code()), e.what(), e.context());
      } catch (const json::exception& e) {
        send_error(res, 400, "InvalidArgument", e.what(), "");
      } catch (const std::exception& e) {
        send_error(res, 500, "Internal", e.what(), "");
      }
    };
  }

  void get_by_id(const std::string& path, Collection c) {
    http.Get(path + "/:id", wrap([this, c](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, store->get(c, req.path_params.at("id")).to_json());
             }));
  }

  void routes();
  json signal_data(const httplib::Request& req);
  json run_datarun(const json& body);
  json retrain(const json& body);
  std::string ensure_template(WriteBatch& batch, const std::string& name_or_path);
};

void ApiServer::Impl::routes() {
  http.set_payload_max_length(64u << 20);
  // No SO_REUSEPORT: a second server on a busy port must fail to bind.
  http.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  if (config.auth_token) {
    const std::string expected = "Bearer " + *config.auth_token;
    http.set_pre_routing_handler([expected](const httplib::Request& req, httplib::Response& res) {
      if (req.path.rfind("/ui/", 0) == 0 || req.path == "/ui") return httplib::Server::HandlerResponse::Unhandled;
      if (req.get_header_value("Authorization") == expected) return httplib::Server::HandlerResponse::Unhandled;
      send_error(res, 401, "Unauthorized", "missing or wrong bearer token", "");
      return httplib::Server::HandlerResponse::Handled;
    });
  }
  if (config.static_dir) http.set_mount_point("/ui", config.static_dir->string());
  http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) send_error(res, res.status, res.status == 404 ? "NotFound" : "HttpError", "no such route", "");
  });

  http.Get("/schema", wrap([](const httplib::Request&, httplib::Response& res) {
             send_json(res, 200, knowledge_base_schema());
           }));

  // Datasets, signals, templates, experiments: plain documents.
  http.Get("/datasets", wrap([this](const httplib::Request& req, httplib::Response& res) {
             send_json(res, 200, docs_json(store->find(Collection::Dataset, list_query(req))));
           }));
  http.Post("/datasets", wrap([this](const httplib::Request& req, httplib::Response& res) {
              send_json(res, 201, store->put(Collection::Dataset, parse_body(req)).to_json());
            }));
  get_by_id("/datasets", Collection::Dataset);

  http.Get("/signals", wrap([this](const httplib::Request& req, httplib::Response& res) {
             Query q = list_query(req);
             if (req.has_param("dataset")) q.filter["dataset_id"] = req.get_param_value("dataset");
             send_json(res, 200, docs_json(store->find(Collection::Signal, q)));
           }));
  http.Post("/signals", wrap([this](const httplib::Request& req, httplib::Response& res) {
              send_json(res, 201, store->put(Collection::Signal, parse_body(req)).to_json());
            }));
  get_by_id("/signals", Collection::Signal);
  http.Get("/signals/:id/data", wrap([this](const httplib::Request& req, httplib::Response& res) {
             send_json(res, 200, signal_data(req));
           }));

  http.Get("/templates", wrap([this](const httplib::Request& req, httplib::Response& res) {
             send_json(res, 200, docs_json(store->find(Collection::PipelineTemplate, list_query(req))));
           }));
  http.Post("/templates", wrap([this](const httplib::Request& req, httplib::Response& res) {
              json body = parse_body(req);
              if (body.contains("json")) load_template(body["json"]);  // reject invalid templates early
              send_json(res, 201, store->put(Collection::PipelineTemplate, body).to_json());
            }));
  get_by_id("/templates", Collection::PipelineTemplate);
  get_by_id("/pipelines", Collection::Pipeline);

  http.Get("/experiments", wrap([this](const httplib::Request& req, httplib::Response& res) {
             send_json(res, 200, docs_json(store->find(Collection::Experiment, list_query(req))));
           }));
  http.Post("/experiments", wrap([this](const httplib::Request& req, httplib::Response& res) {
              json body = parse_body(req);
              auto batch = store->batch();
              if (!body.contains("template_id") && body.contains("template")) {
                body["template_id"] = ensure_template(batch, body_string(body, "template"));
              }
              body.erase("template");
              const Document doc = batch.put(Collection::Experiment, body);
              batch.commit();
              send_json(res, 201, doc.to_json());
            }));
  get_by_id("/experiments", Collection::Experiment);

  http.Post("/dataruns", wrap([this](const httplib::Request& req, httplib::Response& res) {
              send_json(res, 201, run_datarun(parse_body(req)));
            }));
  http.Get("/dataruns/:id", wrap([this](const httplib::Request& req, httplib::Response& res) {
             const Document run = store->get(Collection::Datarun, req.path_params.at("id"));
             Query q;
             q.filter = {{"datarun_id", run.id}};
             json out = run.to_json();
             out["signalruns"] = docs_json(store->find(Collection::Signalrun, q));
             send_json(res, 200, out);
           }));
  get_by_id("/signalruns", Collection::Signalrun);

  // Events: every mutation carries its interaction record in the same batch.
  http.Get("/events", wrap([this](const httplib::Request& req, httplib::Response& res) {
             Query q;
             if (req.has_param("signal")) q.filter["signal_id"] = req.get_param_value("signal");
             if (req.has_param("signalrun")) q.filter["signalrun_id"] = req.get_param_value("signalrun");
             q.order_by = "t_s";
             const auto t0 = query_int(req, "t0");
             const auto t1 = query_int(req, "t1");
             json out = json::array();
             for (const Document& d : store->find(Collection::Event, q)) {
               const auto ts = d.body.value("t_s", std::int64_t{0});
               const auto te = d.body.value("t_e", std::int64_t{0});
               if ((t1 && ts > *t1) || (t0 && te < *t0)) continue;
               out.push_back(d.to_json());
             }
             send_json(res, 200, out);
           }));
  get_by_id("/events", Collection::Event);
  http.Post("/events", wrap([this](const httplib::Request& req, httplib::Response& res) {
              const json in = parse_body(req);
              const std::string signal_id = body_string(in, "signal_id");
              const std::int64_t t_s = body_int(in, "t_s");
              const std::int64_t t_e = body_int(in, "t_e");
              if (t_s >= t_e) throw HttpError{400, "InvalidArgument", "t_s must be before t_e", "t_e"};
              json body{{"signal_id", signal_id},
                        {"signalrun_id", nullptr},
                        {"t_s", t_s},
                        {"t_e", t_e},
                        {"source", in.value("source", std::string("manual"))}};
              if (in.contains("severity")) body["severity"] = in["severity"];
              auto batch = store->batch();
              const Document doc = batch.put(Collection::Event, body);
              log_interaction(batch, doc.id, InteractionAction::create, {{"t_s", t_s}, {"t_e", t_e}});
              batch.commit();
              send_json(res, 201, doc.to_json());
            }));
  http.Patch("/events/:id", wrap([this](const httplib::Request& req, httplib::Response& res) {
               const json in = parse_body(req);
               auto batch = store->batch();
               const Document old = live_event(*store, req.path_params.at("id"));
               const std::int64_t old_s = old.body.at("t_s").get<std::int64_t>();
               const std::int64_t old_e = old.body.at("t_e").get<std::int64_t>();
               const std::int64_t t_s = in.contains("t_s") ? body_int(in, "t_s") : old_s;
               const std::int64_t t_e = in.contains("t_e") ? body_int(in, "t_e") : old_e;
               if (t_s >= t_e) throw HttpError{400, "InvalidArgument", "t_s must be before t_e", "t_e"};
               const Document doc = batch.update(Collection::Event, old.id, {{"t_s", t_s}, {"t_e", t_e}});
               log_interaction(batch, old.id, InteractionAction::modify,
                               {{"old", {{"t_s", old_s}, {"t_e", old_e}}}, {"new", {{"t_s", t_s}, {"t_e", t_e}}}});
               batch.commit();
               send_json(res, 200, doc.to_json());
             }));
  http.Delete("/events/:id", wrap([this](const httplib::Request& req, httplib::Response& res) {
                auto batch = store->batch();
                const Document old = live_event(*store, req.path_params.at("id"));
                log_interaction(batch, old.id, InteractionAction::remove,
                                {{"t_s", old.body.at("t_s")}, {"t_e", old.body.at("t_e")}});
                const Document doc = batch.remove(Collection::Event, old.id);
                batch.commit();
                send_json(res, 200, doc.to_json());
              }));
  http.Post("/events/:id/annotations", wrap([this](const httplib::Request& req, httplib::Response& res) {
              const json in = parse_body(req);
              const std::string user = body_string(in, "user");
              const std::string tag = body_string(in, "tag");
              const std::string comment = in.value("comment", std::string());
              try {
                check_annotation_tag(tag);
              } catch (const Error& e) {
                throw HttpError{400, "InvalidArgument", e.what(), "tag"};
              }
              auto batch = store->batch();
              const Document event = live_event(*store, req.path_params.at("id"));
              const Document doc = add_annotation(batch, event.id, user, tag, comment);
              log_interaction(batch, event.id, InteractionAction::tag,
                              {{"tag", tag}, {"user", user}, {"annotation_id", doc.id}});
              batch.commit();
              send_json(res, 201, doc.to_json());
            }));
  for (const auto& [suffix, collection] : {std::pair{"annotations", Collection::Annotation},
                                           std::pair{"interactions", Collection::EventInteraction}}) {
    http.Get(std::string("/events/:id/") + suffix,
             wrap([this, c = collection](const httplib::Request& req, httplib::Response& res) {
               const std::string id = req.path_params.at("id");
               if (!store->try_get(Collection::Event, id)) throw HttpError{404, "NotFound", "no event '" + id + "'", ""};
               Query q;
               q.filter = {{"event_id", id}};
               send_json(res, 200, docs_json(store->find(c, q)));
             }));
  }

  http.Post("/feedback/retrain", wrap([this](const httplib::Request& req, httplib::Response& res) {
              send_json(res, 200, retrain(parse_body(req, true)));
            }));
}

json ApiServer::Impl::signal_data(const httplib::Request& req) {
  const Document doc = store->get(Collection::Signal, req.path_params.at("id"));
  const Signal signal = load_signal_doc(doc);
  const auto& ts = signal.timestamps();
  const std::int64_t t0 = query_int(req, "t0").value_or(signal.start());
  const std::int64_t t1 = query_int(req, "t1").value_or(signal.end());
  const auto agg = query_int(req, "agg").value_or(0);
  if (agg < 0) throw HttpError{400, "InvalidArgument", "agg must be >= 0", "agg"};
  if (t0 > t1) throw HttpError{400, "InvalidArgument", "t0 must not exceed t1", "t1"};

  const std::size_t lo = lower_index(ts, t0);
  const std::size_t hi = t1 == std::numeric_limits<std::int64_t>::max() ? ts.size() : lower_index(ts, t1 + 1);
  std::vector<Timestamp> out_ts(ts.begin() + static_cast<std::ptrdiff_t>(lo),
                                ts.begin() + static_cast<std::ptrdiff_t>(std::max(lo, hi)));
  Matrix out_values = signal.values().middleRows(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(out_ts.size()));
  if (agg > 0 && !out_ts.empty()) {
    // Bucket count is known before aggregating, so refuse early.
    const auto buckets = static_cast<std::size_t>((out_ts.back() - out_ts.front()) / agg + 1);
    if (buckets > config.max_points) {
      throw Error(ErrorCode::TooManyPoints, std::to_string(buckets) + " points exceed the limit of " +
                                                std::to_string(config.max_points));
    }
    RegularSeries r = time_segments_aggregate(out_ts, out_values, agg, AggregateMethod::mean);
    out_ts = std::move(r.timestamps);
    out_values = std::move(r.values);
  }
  if (out_ts.size() > config.max_points) {
    throw Error(ErrorCode::TooManyPoints, std::to_string(out_ts.size()) + " points exceed the limit of " +
                                              std::to_string(config.max_points));
  }
  json values = json::array();
  for (Eigen::Index r = 0; r < out_values.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < out_values.cols(); ++c) row.push_back(number_or_null(out_values(r, c)));
    values.push_back(std::move(row));
  }
  return {{"signal_id", doc.id}, {"t0", t0}, {"t1", t1}, {"agg", agg}, {"timestamps", out_ts}, {"values", values}};
}

std::string ApiServer::Impl::ensure_template(WriteBatch& batch, const std::string& name_or_path) {
  const auto path = resolve_template_path(name_or_path);
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read template " + path.string());
  const json tmpl = json::parse(in);
  load_template(tmpl);
  const std::string name = tmpl.value("name", path.stem().string());
  Query q;
  q.filter = {{"name", name}};
  for (const Document& d : store->find(Collection::PipelineTemplate, q)) {
    if (d.body.value("json", json()) == tmpl) return d.id;
  }
  return batch.put(Collection::PipelineTemplate, {{"name", name}, {"json", tmpl}}).id;
}

json ApiServer::Impl::run_datarun(const json& body) {
  const std::string experiment_id = body_string(body, "experiment_id");
  const auto experiment = store->try_get(Collection::Experiment, experiment_id);
  if (!experiment || experiment->deleted()) {
    throw HttpError{400, "DanglingReference", "no experiment '" + experiment_id + "'", "experiment_id"};
  }
  const Document tmpl_doc = store->get(Collection::PipelineTemplate, experiment->body.at("template_id"));
  const Pipeline pipeline = instantiate(load_template(tmpl_doc.body.at("json")),
                                        body.value("hyperparameters", json::object()));

  std::vector<std::string> signal_ids;
  if (body.contains("signal_ids")) {
    signal_ids = body["signal_ids"].get<std::vector<std::string>>();
  } else if (experiment->body.contains("signal_ids")) {
    signal_ids = experiment->body["signal_ids"].get<std::vector<std::string>>();
  } else {
    Query q;
    q.filter = {{"dataset_id", experiment->body.at("dataset_id")}};
    for (const Document& d : store->find(Collection::Signal, q)) signal_ids.push_back(d.id);
  }
  for (const std::string& id : signal_ids) {
    const auto s = store->try_get(Collection::Signal, id);
    if (!s || s->deleted()) throw HttpError{400, "DanglingReference", "no signal '" + id + "'", "signal_ids"};
  }

  std::string pipeline_id;
  std::string datarun_id;
  {
    auto batch = store->batch();
    pipeline_id = batch
                      .put(Collection::Pipeline, {{"template_id", tmpl_doc.id},
                                                  {"name", tmpl_doc.body.value("name", std::string("pipeline"))},
                                                  {"hyperparameters", pipeline.assignment_json()},
                                                  {"kind", "unsupervised"}})
                      .id;
    datarun_id = batch
                     .put(Collection::Datarun, {{"experiment_id", experiment_id},
                                                {"pipeline_id", pipeline_id},
                                                {"status", "running"},
                                                {"started_at", now_ms()}})
                     .id;
    batch.commit();
  }

  json runs = json::array();
  for (const std::string& id : signal_ids) {
    EventList events;
    std::string status = "ok";
    std::optional<ComputeProfile> profile;
    try {
      const Signal signal = load_signal_doc(store->get(Collection::Signal, id));
      profile = measure_compute(pipeline, signal, nullptr, &events);
    } catch (const Error& e) {
      status = "failed:" + std::string(to_string(e.code()));
      events.clear();
    }
    const std::string run =
        record_signalrun(*store, datarun_id, id, pipeline_id, events, profile ? &*profile : nullptr, status);
    runs.push_back({{"id", run}, {"signal_id", id}, {"status", status}, {"num_events", events.size()}});
  }
  const Document done =
      store->update(Collection::Datarun, datarun_id, {{"status", "done"}, {"ended_at", now_ms()}});
  json out = done.to_json();
  out["signalruns"] = runs;
  return out;
}

json ApiServer::Impl::retrain(const json& body) {
  const std::size_t window_size = body.value("window_size", config.window_size);
  const std::size_t step = body.value("step", config.step);
  if (window_size == 0 || step == 0) throw HttpError{400, "InvalidArgument", "window_size and step must be >= 1", ""};

  // Latest verdict per live event; every annotation on a live event counts as consumed.
  std::map<std::string, std::vector<AnnotatedEvent>> by_signal;
  std::map<std::string, std::pair<std::int64_t, std::string>> latest;  // event -> (created_at, tag)
  std::set<std::string> consumed;
  for (const Document& a : store->find(Collection::Annotation)) {
    const std::string event_id = a.body.at("event_id").get<std::string>();
    const auto event = store->try_get(Collection::Event, event_id);
    if (!event || event->deleted()) continue;
    consumed.insert(a.id);
    latest[event_id] = {a.created_at, a.body.at("tag").get<std::string>()};
  }
  for (const auto& [event_id, entry] : latest) {
    const Document e = store->get(Collection::Event, event_id);
    const Event ev{e.body.at("t_s").get<Timestamp>(), e.body.at("t_e").get<Timestamp>()};
    by_signal[e.body.at("signal_id").get<std::string>()].push_back({ev, entry.second, event_id});
  }

  Query last_q;
  last_q.filter = {{"kind", "semi_supervised"}};
  last_q.descending = true;
  last_q.limit = 1;
  const auto previous = store->find(Collection::Pipeline, last_q);
  if (!previous.empty()) {
    const auto& prev = previous.front().body;
    const auto used = prev.value("annotation_ids", std::vector<std::string>());
    if (std::set<std::string>(used.begin(), used.end()) == consumed &&
        prev.value("hyperparameters", json::object()).value("window_size", std::size_t{0}) == window_size &&
        prev.at("hyperparameters").value("step", std::size_t{0}) == step) {
      return {{"model_id", previous.front().id},
              {"n_labeled", prev.at("metrics").at("n_labeled")},
              {"metrics", prev.at("metrics")},
              {"reused", true}};
    }
  }

  std::vector<LabeledWindow> windows;
  std::optional<std::size_t> channels;
  for (const auto& [signal_id, annotated] : by_signal) {
    const Signal signal = load_signal_doc(store->get(Collection::Signal, signal_id));
    if (channels && *channels != signal.channels()) {
      throw Error(ErrorCode::ShapeMismatch, "annotated signals differ in channel count", signal_id);
    }
    channels = signal.channels();
    auto part = build_training_set(signal, annotated, window_size, step);
    windows.insert(windows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  ClassifierHyperparams hp;
  hp.seed = static_cast<std::uint64_t>(config.seed);
  const ClassifierModel model = retrain_semisupervised(windows, window_size, channels.value_or(1), hp);

  std::size_t anomalous = 0;
  std::size_t correct = 0;
  Matrix x(static_cast<Eigen::Index>(windows.size()), windows.front().window.size());
  for (std::size_t i = 0; i < windows.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = windows[i].window.transpose();
  const Vector p = predict_proba(model, x);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const bool positive = windows[i].label == WindowLabel::anomalous;
    anomalous += positive ? 1 : 0;
    correct += (p(static_cast<Eigen::Index>(i)) > 0.5) == positive ? 1 : 0;
  }
  const json metrics{{"n_labeled", windows.size()},
                     {"n_anomalous", anomalous},
                     {"n_normal", windows.size() - anomalous},
                     {"n_annotations", consumed.size()},
                     {"training_accuracy", static_cast<double>(correct) / static_cast<double>(windows.size())}};

  auto batch = store->batch();
  const std::string template_id = ensure_template(batch, "window_classifier_supervised");
  const Document doc = batch.put(Collection::Pipeline,
                                 {{"template_id", template_id},
                                  {"name", "semi_supervised"},
                                  {"kind", "semi_supervised"},
                                  {"hyperparameters",
                                   {{"window_size", window_size},
                                    {"step", step},
                                    {"learning_rate", hp.learning_rate},
                                    {"epochs", hp.epochs},
                                    {"l2", hp.l2},
                                    {"seed", config.seed}}},
                                  {"model", to_json(model)},
                                  {"metrics", metrics},
                                  {"annotation_ids", std::vector<std::string>(consumed.begin(), consumed.end())}});
  batch.commit();
  return {{"model_id", doc.id}, {"n_labeled", windows.size()}, {"metrics", metrics}, {"reused", false}};
}

ApiServer::ApiServer(ApiConfig config) : impl_(std::make_unique<Impl>(std::move(config))) { impl_->routes(); }

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind() {
  if (impl_->port >= 0) return impl_->port;
  const ApiConfig& c = impl_->config;
  if (c.port == 0) {
    impl_->port = impl_->http.bind_to_any_port(c.host);
  } else if (impl_->http.bind_to_port(c.host, c.port)) {
    impl_->port = c.port;
  }
  if (impl_->port <= 0) {
    impl_->port = -1;
    throw Error(ErrorCode::BindError, "cannot listen on " + c.host + ":" + std::to_string(c.port));
  }
  return impl_->port;
}

void ApiServer::run() {
  bind();
  impl_->http.listen_after_bind();
}

int ApiServer::start() {
  const int p = bind();
  impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return p;
}

void ApiServer::stop() {
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int ApiServer::port() const noexcept { return impl_->port; }

Store& ApiServer::store() noexcept { return *impl_->store; }

}  // namespace tsad
