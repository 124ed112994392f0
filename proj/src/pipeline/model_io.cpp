#include "tsad/pipeline/model_io.hpp"

#include "tsad/core/error.hpp"

#include <nlohmann/json.hpp>
#include <zlib.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

namespace tsad {
namespace {

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const std::string& in, std::size_t at) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  }
  return v;
}

std::uint32_t crc_of(const std::string& bytes) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

[[noreturn]] void corrupt(const std::string& why) { throw Error(ErrorCode::CorruptModel, why); }

nlohmann::json events_json(const EventList& events) {
  auto arr = nlohmann::json::array();
  for (const auto& e : events) arr.push_back({e.t_s, e.t_e, e.severity, std::string(to_string(e.source))});
  return arr;
}

EventList events_from(const nlohmann::json& arr) {
  EventList out;
  for (const auto& e : arr) {
    out.push_back(Event{e.at(0).get<Timestamp>(), e.at(1).get<Timestamp>(), e.at(2).get<double>(),
                        parse_event_source(e.at(3).get<std::string>())});
  }
  return out;
}

}  // namespace

void save_model(std::ostream& out, const FittedPipeline& fitted) {
  const Pipeline& p = fitted.pipeline;
  nlohmann::json pipe{{"assignment", p.assignment_json()}, {"seed", nullptr}};
  if (p.seed()) pipe["seed"] = *p.seed();

  auto timings = nlohmann::json::array();
  for (const auto& t : fitted.fit_timings) timings.push_back({t.step_id, t.seconds});
  const nlohmann::json meta{{"channels", fitted.channels},
                            {"train_start", fitted.train_start},
                            {"train_end", fitted.train_end},
                            {"complete", fitted.complete},
                            {"fit_timings", timings},
                            {"fit_events", events_json(fitted.fit_events)}};

  auto states = nlohmann::json::array();
  for (const auto& s : fitted.states) states.push_back(s ? s->to_json() : nlohmann::json());

  const std::pair<const char*, nlohmann::json> sections[] = {
      {"TMPL", p.tmpl()->to_json()}, {"PIPE", pipe}, {"META", meta}, {"STAT", states}};

  std::string bytes(kModelMagic, 8);
  put_le<std::uint32_t>(bytes, kModelFormatVersion);
  put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(std::size(sections)));
  for (const auto& [tag, body] : sections) {
    const auto cbor = nlohmann::json::to_cbor(body);
    const std::string payload(cbor.begin(), cbor.end());
    bytes.append(tag, 4);
    put_le<std::uint64_t>(bytes, payload.size());
    bytes += payload;
    put_le<std::uint32_t>(bytes, crc_of(payload));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "failed to write model");
}

void save_model(const std::filesystem::path& path, const FittedPipeline& fitted) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing", path.string());
  save_model(out, fitted);
}

FittedPipeline load_model(std::istream& in) {
  const std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (data.size() < 16 || data.compare(0, 8, kModelMagic) != 0) corrupt("not a model file");
  const auto version = get_le<std::uint32_t>(data, 8);
  if (version != kModelFormatVersion) corrupt("unsupported model format version " + std::to_string(version));
  const auto count = get_le<std::uint32_t>(data, 12);

  std::map<std::string, nlohmann::json> sections;
  std::size_t at = 16;
  for (std::uint32_t i = 0; i < count; ++i) {
    if (data.size() - at < 12) corrupt("truncated section header");
    const std::string tag = data.substr(at, 4);
    const auto len = get_le<std::uint64_t>(data, at + 4);
    at += 12;
    if (len > data.size() - at || data.size() - at - len < 4) corrupt("truncated section " + tag);
    const std::string payload = data.substr(at, len);
    if (get_le<std::uint32_t>(data, at + len) != crc_of(payload)) corrupt("checksum mismatch in section " + tag);
    at += len + 4;
    try {
      sections[tag] = nlohmann::json::from_cbor(payload);
    } catch (const nlohmann::json::exception& e) {
      corrupt("undecodable section " + tag + ": " + e.what());
    }
  }
  if (at != data.size()) corrupt("trailing bytes after the last section");
  for (const char* tag : {"TMPL", "PIPE", "META", "STAT"}) {
    if (!sections.count(tag)) corrupt(std::string("missing section ") + tag);
  }

  try {
    FittedPipeline fitted;
    const TemplatePtr tmpl = load_template(sections["TMPL"]);
    const auto& pipe = sections["PIPE"];
    fitted.pipeline = instantiate(tmpl, pipe.at("assignment"));
    if (!pipe.at("seed").is_null()) fitted.pipeline = fitted.pipeline.with_seed(pipe.at("seed").get<std::int64_t>());

    const auto& meta = sections["META"];
    fitted.channels = meta.at("channels").get<std::size_t>();
    fitted.train_start = meta.at("train_start").get<Timestamp>();
    fitted.train_end = meta.at("train_end").get<Timestamp>();
    fitted.complete = meta.at("complete").get<bool>();
    for (const auto& t : meta.at("fit_timings")) {
      fitted.fit_timings.push_back({t.at(0).get<std::string>(), t.at(1).get<double>()});
    }
    fitted.fit_events = events_from(meta.at("fit_events"));

    const auto& states = sections["STAT"];
    if (!states.is_array() || states.size() != tmpl->steps().size()) corrupt("state count does not match the template");
    for (std::size_t i = 0; i < states.size(); ++i) {
      fitted.states.push_back(states[i].is_null() ? nullptr : tmpl->primitive(i).load_state(states[i]));
    }
    return fitted;
  } catch (const nlohmann::json::exception& e) {
    corrupt(std::string("malformed model content: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptModel) throw;
    corrupt(std::string("model does not rebuild: ") + e.what());
  }
}

FittedPipeline load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string(), path.string());
  return load_model(in);
}

}  // namespace tsad
