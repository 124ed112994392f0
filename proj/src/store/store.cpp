#include "tsad/store/store.hpp"

#include "tsad/bench/benchmark.hpp"
#include "tsad/core/error.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>
#include <zlib.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <set>
#include <tuple>

namespace tsad {

namespace fs = std::filesystem;

namespace {

constexpr const char* kJournal = "journal.log";
constexpr const char* kLock = "LOCK";
constexpr char kCrockford[] = "0123456789ABCDEFGHJKMNPQRSTVWXYZ";

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::uint32_t crc32_of(std::string_view bytes) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

std::string errno_text() { return std::strerror(errno); }

bool matches_allowed(const std::string& value, const std::vector<std::string>& allowed) {
  for (const std::string& a : allowed) {
    if (!a.empty() && a.back() == '*') {
      const std::string_view prefix(a.data(), a.size() - 1);
      if (value.size() > prefix.size() && value.compare(0, prefix.size(), prefix) == 0) return true;
    } else if (value == a) {
      return true;
    }
  }
  return false;
}

bool type_ok(const nlohmann::json& v, FieldType t) {
  switch (t) {
    case FieldType::string: return v.is_string();
    case FieldType::number: return v.is_number();
    case FieldType::integer: return v.is_number_integer();
    case FieldType::boolean: return v.is_boolean();
    case FieldType::object: return v.is_object();
    case FieldType::array: return v.is_array();
    case FieldType::ref:
    case FieldType::nullable_ref: return v.is_string();
    case FieldType::ref_list:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const auto& x) { return x.is_string(); });
  }
  return false;
}

bool is_reference(FieldType t) {
  return t == FieldType::ref || t == FieldType::nullable_ref || t == FieldType::ref_list;
}

std::vector<std::string> referenced_ids(const nlohmann::json& v, FieldType t) {
  if (t == FieldType::ref_list) return v.get<std::vector<std::string>>();
  return {v.get<std::string>()};
}

nlohmann::json doc_record(const Document& d) {
  return {{"collection", to_string(d.collection)},
          {"id", d.id},
          {"body", d.body},
          {"created_at", d.created_at},
          {"updated_at", d.updated_at}};
}

Document doc_from_record(const nlohmann::json& j) {
  Document d;
  d.collection = parse_collection(j.at("collection").get<std::string>());
  d.id = j.at("id").get<std::string>();
  d.body = j.at("body");
  d.created_at = j.at("created_at").get<std::int64_t>();
  d.updated_at = j.at("updated_at").get<std::int64_t>();
  if (!d.body.is_object()) throw std::runtime_error("body is not an object");
  return d;
}

const std::set<std::string>& reserved_keys() {
  static const std::set<std::string> keys{"id", "collection", "created_at", "updated_at"};
  return keys;
}

}  // namespace

std::string frame_record(std::string_view json) {
  std::string out;
  out.reserve(json.size() + 8);
  put_u32(out, static_cast<std::uint32_t>(json.size()));
  out.append(json);
  put_u32(out, crc32_of(json));
  return out;
}

bool Document::deleted() const {
  const auto it = body.find("deleted");
  return it != body.end() && it->is_boolean() && it->get<bool>();
}

nlohmann::json Document::to_json() const {
  nlohmann::json j = body;
  j["id"] = id;
  j["collection"] = to_string(collection);
  j["created_at"] = created_at;
  j["updated_at"] = updated_at;
  return j;
}

// ---- WriteBatch ------------------------------------------------------------

WriteBatch::WriteBatch(Store& store) : store_(&store), lock_(store.write_mutex_) {}

WriteBatch::WriteBatch(WriteBatch&& other) noexcept
    : store_(other.store_),
      lock_(std::move(other.lock_)),
      staged_(std::move(other.staged_)),
      staged_index_(std::move(other.staged_index_)),
      committed_(other.committed_) {}

WriteBatch::~WriteBatch() = default;

const Document* WriteBatch::lookup(Collection c, const std::string& id) const {
  if (const auto it = staged_index_.find({c, id}); it != staged_index_.end()) return &staged_[it->second];
  const auto& docs = store_->docs_.at(c);
  const auto it = docs.find(id);
  return it == docs.end() ? nullptr : &it->second;
}

void WriteBatch::validate(const Document& doc) const {
  for (const FieldSpec& f : collection_schema(doc.collection)) {
    const auto it = doc.body.find(f.name);
    const bool missing = it == doc.body.end() || it->is_null();
    if (missing) {
      if (f.required) {
        throw Error(ErrorCode::MissingField,
                    std::string(to_string(doc.collection)) + " requires field '" + f.name + "'", f.name);
      }
      continue;
    }
    if (!type_ok(*it, f.type)) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string(to_string(doc.collection)) + "." + f.name + " has the wrong type", f.name);
    }
    if (!f.allowed.empty() && !matches_allowed(it->get<std::string>(), f.allowed)) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string(to_string(doc.collection)) + "." + f.name + " = '" + it->get<std::string>() +
                      "' is not an allowed value",
                  f.name);
    }
  }
}

Document WriteBatch::put(Collection c, nlohmann::json body) {
  if (committed_) throw Error(ErrorCode::InvalidArgument, "batch already committed");
  if (!body.is_object()) throw Error(ErrorCode::InvalidArgument, "document body must be a JSON object");
  for (const std::string& key : reserved_keys()) body.erase(key);
  Document doc;
  doc.collection = c;
  doc.body = std::move(body);
  doc.body.erase("deleted");
  validate(doc);
  for (const FieldSpec& f : collection_schema(c)) {
    const auto it = doc.body.find(f.name);
    if (!is_reference(f.type) || it == doc.body.end() || it->is_null()) continue;
    for (const std::string& id : referenced_ids(*it, f.type)) {
      const Document* target = lookup(*f.target, id);
      if (target == nullptr || target->deleted()) {
        throw Error(ErrorCode::DanglingReference,
                    std::string(to_string(c)) + "." + f.name + " references missing " +
                        std::string(to_string(*f.target)) + " '" + id + "'",
                    f.name);
      }
    }
  }
  doc.id = store_->next_id(doc.created_at);
  doc.updated_at = doc.created_at;
  staged_index_[{c, doc.id}] = staged_.size();
  staged_.push_back(doc);
  return doc;
}

Document WriteBatch::update(Collection c, const std::string& id, const nlohmann::json& patch) {
  if (committed_) throw Error(ErrorCode::InvalidArgument, "batch already committed");
  if (is_append_only(c)) {
    throw Error(ErrorCode::InvalidArgument, std::string(to_string(c)) + " documents are append-only");
  }
  if (!patch.is_object()) throw Error(ErrorCode::InvalidArgument, "patch must be a JSON object");
  const Document* current = lookup(c, id);
  if (current == nullptr || current->deleted()) {
    throw Error(ErrorCode::NotFound, std::string(to_string(c)) + " '" + id + "' not found", id);
  }
  Document doc = *current;
  for (const auto& [key, value] : patch.items()) {
    if (reserved_keys().count(key) || key == "deleted") continue;
    if (value.is_null()) {
      doc.body.erase(key);
    } else {
      doc.body[key] = value;
    }
  }
  validate(doc);
  // Only references being changed are re-resolved; unchanged ones may point
  // at documents tombstoned since.
  for (const FieldSpec& f : collection_schema(c)) {
    const auto it = doc.body.find(f.name);
    if (!is_reference(f.type) || !patch.contains(f.name) || it == doc.body.end() || it->is_null()) continue;
    for (const std::string& ref : referenced_ids(*it, f.type)) {
      const Document* target = lookup(*f.target, ref);
      if (target == nullptr || target->deleted()) {
        throw Error(ErrorCode::DanglingReference,
                    std::string(to_string(c)) + "." + f.name + " references missing " +
                        std::string(to_string(*f.target)) + " '" + ref + "'",
                    f.name);
      }
    }
  }
  doc.updated_at = std::max(now_ms(), doc.updated_at);
  staged_index_[{c, id}] = staged_.size();
  staged_.push_back(doc);
  return doc;
}

Document WriteBatch::remove(Collection c, const std::string& id) {
  if (committed_) throw Error(ErrorCode::InvalidArgument, "batch already committed");
  if (is_append_only(c)) {
    throw Error(ErrorCode::InvalidArgument, std::string(to_string(c)) + " documents are append-only");
  }
  const Document* current = lookup(c, id);
  if (current == nullptr || current->deleted()) {
    throw Error(ErrorCode::NotFound, std::string(to_string(c)) + " '" + id + "' not found", id);
  }
  Document doc = *current;
  nlohmann::json tomb{{"deleted", true}};
  for (const FieldSpec& f : collection_schema(c)) {
    if (is_reference(f.type) && doc.body.contains(f.name)) tomb[f.name] = doc.body[f.name];
  }
  doc.body = std::move(tomb);
  doc.updated_at = std::max(now_ms(), doc.updated_at);
  staged_index_[{c, id}] = staged_.size();
  staged_.push_back(doc);
  return doc;
}

void WriteBatch::commit() {
  if (committed_) throw Error(ErrorCode::InvalidArgument, "batch already committed");
  if (!lock_.owns_lock()) throw Error(ErrorCode::InvalidArgument, "batch no longer holds the writer lock");
  if (!staged_.empty()) {
    nlohmann::json ops = nlohmann::json::array();
    for (const Document& d : staged_) ops.push_back(doc_record(d));
    store_->append_record(nlohmann::json{{"ops", std::move(ops)}}.dump());
    std::unique_lock data(store_->data_mutex_);
    for (Document& d : staged_) store_->docs_[d.collection][d.id] = std::move(d);
  }
  committed_ = true;
  lock_.unlock();
}

// ---- Store -----------------------------------------------------------------

Store::Store(fs::path root, const StoreOptions& options) : root_(std::move(root)), options_(options) {
  std::random_device rd;
  id_rng_.seed((static_cast<std::uint64_t>(rd()) << 32) ^ rd());
  for (Collection c : kAllCollections) docs_[c];
}

Store::~Store() {
  if (journal_fd_ >= 0) ::close(journal_fd_);
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

std::unique_ptr<Store> Store::open(const fs::path& root, const StoreOptions& options) {
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create store directory " + root.string() + ": " + ec.message());
  std::unique_ptr<Store> store(new Store(root, options));

  store->lock_fd_ = ::open((root / kLock).c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (store->lock_fd_ < 0) throw Error(ErrorCode::Io, "cannot open lock file: " + errno_text());
  if (::flock(store->lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    const bool busy = errno == EWOULDBLOCK;
    ::close(store->lock_fd_);
    store->lock_fd_ = -1;
    if (busy) throw Error(ErrorCode::Locked, "store " + root.string() + " is open in another handle");
    throw Error(ErrorCode::Io, "cannot lock store: " + errno_text());
  }
  store->journal_fd_ = ::open((root / kJournal).c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (store->journal_fd_ < 0) throw Error(ErrorCode::Io, "cannot open journal: " + errno_text());
  store->replay();
  return store;
}

void Store::replay() {
  std::string data;
  {
    struct stat st {};
    if (::fstat(journal_fd_, &st) != 0) throw Error(ErrorCode::Io, "cannot stat journal: " + errno_text());
    data.resize(static_cast<std::size_t>(st.st_size));
    std::size_t got = 0;
    while (got < data.size()) {
      const ssize_t r = ::pread(journal_fd_, data.data() + got, data.size() - got, static_cast<off_t>(got));
      if (r < 0) throw Error(ErrorCode::Io, "cannot read journal: " + errno_text());
      if (r == 0) break;
      got += static_cast<std::size_t>(r);
    }
    data.resize(got);
  }

  std::size_t offset = 0;
  std::size_t good_end = 0;
  bool corrupt = false;
  std::string reason;
  while (offset < data.size()) {
    const std::size_t remaining = data.size() - offset;
    if (remaining < 4) break;  // torn length prefix
    const std::uint32_t len = get_u32(data, offset);
    if (remaining < static_cast<std::size_t>(len) + 8) break;  // torn record
    const std::string_view json(data.data() + offset + 4, len);
    if (get_u32(data, offset + 4 + len) != crc32_of(json)) {
      corrupt = true;
      reason = "checksum mismatch";
      break;
    }
    std::vector<Document> batch;
    try {
      const auto j = nlohmann::json::parse(json);
      for (const auto& op : j.at("ops")) batch.push_back(doc_from_record(op));
    } catch (const std::exception& e) {
      corrupt = true;
      reason = e.what();
      break;
    }
    for (Document& d : batch) {
      last_ms_ = std::max(last_ms_, d.created_at);
      docs_[d.collection][d.id] = std::move(d);
    }
    offset += static_cast<std::size_t>(len) + 8;
    good_end = offset;
  }
  if (corrupt && !options_.repair) {
    throw Error(ErrorCode::CorruptJournal,
                "journal record at byte " + std::to_string(good_end) + " is corrupt (" + reason +
                    "); reopen with repair to truncate there",
                std::to_string(good_end));
  }
  // A torn tail is a write that never committed; drop it so appends start
  // on a record boundary.
  if (good_end < data.size()) {
    if (::ftruncate(journal_fd_, static_cast<off_t>(good_end)) != 0) {
      throw Error(ErrorCode::Io, "cannot truncate journal: " + errno_text());
    }
  }
  journal_size_ = good_end;
}

void Store::append_record(const std::string& payload) {
  const std::string record = frame_record(payload);
  std::size_t written = 0;
  while (written < record.size()) {
    const ssize_t w = ::pwrite(journal_fd_, record.data() + written, record.size() - written,
                               static_cast<off_t>(journal_size_ + written));
    if (w < 0) {
      if (errno == EINTR) continue;
      const std::string why = errno_text();
      [[maybe_unused]] const int ignored = ::ftruncate(journal_fd_, static_cast<off_t>(journal_size_));
      throw Error(ErrorCode::Io, "journal write failed: " + why);
    }
    written += static_cast<std::size_t>(w);
  }
  if (options_.sync && ::fdatasync(journal_fd_) != 0) {
    throw Error(ErrorCode::Io, "journal sync failed: " + errno_text());
  }
  journal_size_ += record.size();
}

std::string Store::next_id(std::int64_t& ms) {
  // 48-bit millisecond time then 80 random bits, incremented within a
  // millisecond so ids stay sortable by creation.
  std::int64_t t = now_ms();
  if (t <= last_ms_) {
    t = last_ms_;
    if (++last_rand_lo_ == 0) last_rand_hi_ = (last_rand_hi_ + 1) & 0xffff;
  } else {
    last_rand_hi_ = id_rng_() & 0xffff;
    last_rand_lo_ = id_rng_();
  }
  last_ms_ = t;
  ms = t;
  unsigned __int128 v = (static_cast<unsigned __int128>(static_cast<std::uint64_t>(t) & 0xffffffffffffULL) << 80) |
                        (static_cast<unsigned __int128>(last_rand_hi_) << 64) | last_rand_lo_;
  std::string id(26, '0');
  for (int i = 25; i >= 0; --i) {
    id[static_cast<std::size_t>(i)] = kCrockford[static_cast<unsigned>(v & 31)];
    v >>= 5;
  }
  return id;
}

Document Store::put(Collection c, nlohmann::json body) {
  WriteBatch b = batch();
  Document d = b.put(c, std::move(body));
  b.commit();
  return d;
}

Document Store::update(Collection c, const std::string& id, const nlohmann::json& patch) {
  WriteBatch b = batch();
  Document d = b.update(c, id, patch);
  b.commit();
  return d;
}

Document Store::remove(Collection c, const std::string& id) {
  WriteBatch b = batch();
  Document d = b.remove(c, id);
  b.commit();
  return d;
}

std::optional<Document> Store::try_get(Collection c, const std::string& id) const {
  std::shared_lock lock(data_mutex_);
  const auto& docs = docs_.at(c);
  const auto it = docs.find(id);
  if (it == docs.end()) return std::nullopt;
  return it->second;
}

Document Store::get(Collection c, const std::string& id) const {
  auto d = try_get(c, id);
  if (!d) throw Error(ErrorCode::NotFound, std::string(to_string(c)) + " '" + id + "' not found", id);
  return std::move(*d);
}

std::vector<Document> Store::find(Collection c, const Query& query) const {
  if (!query.filter.is_object()) throw Error(ErrorCode::InvalidArgument, "filter must be a JSON object");
  std::vector<Document> out;
  {
    std::shared_lock lock(data_mutex_);
    for (const auto& [id, doc] : docs_.at(c)) {
      if (!query.include_deleted && doc.deleted()) continue;
      bool keep = true;
      for (const auto& [key, value] : query.filter.items()) {
        const auto it = doc.body.find(key);
        if (it == doc.body.end() || *it != value) {
          keep = false;
          break;
        }
      }
      if (keep) out.push_back(doc);
    }
  }
  const auto by_creation = [](const Document& a, const Document& b) {
    return std::tie(a.created_at, a.id) < std::tie(b.created_at, b.id);
  };
  if (query.order_by.empty() || query.order_by == "created_at") {
    std::sort(out.begin(), out.end(), by_creation);
  } else if (query.order_by == "updated_at") {
    std::sort(out.begin(), out.end(), [&](const Document& a, const Document& b) {
      return a.updated_at != b.updated_at ? a.updated_at < b.updated_at : by_creation(a, b);
    });
  } else {
    const std::string& key = query.order_by;
    const nlohmann::json none;
    std::sort(out.begin(), out.end(), [&](const Document& a, const Document& b) {
      const auto ia = a.body.find(key);
      const auto ib = b.body.find(key);
      const nlohmann::json& va = ia == a.body.end() ? none : *ia;
      const nlohmann::json& vb = ib == b.body.end() ? none : *ib;
      if (va != vb) return va < vb;
      return by_creation(a, b);
    });
  }
  if (query.descending) std::reverse(out.begin(), out.end());
  if (query.offset >= out.size()) return {};
  out.erase(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(query.offset));
  if (query.limit > 0 && out.size() > query.limit) out.resize(query.limit);
  return out;
}

std::size_t Store::count(Collection c, bool include_deleted) const {
  std::shared_lock lock(data_mutex_);
  const auto& docs = docs_.at(c);
  if (include_deleted) return docs.size();
  return static_cast<std::size_t>(
      std::count_if(docs.begin(), docs.end(), [](const auto& kv) { return !kv.second.deleted(); }));
}

std::uint64_t Store::journal_size() const {
  std::shared_lock lock(data_mutex_);
  return journal_size_;
}

AuditReport Store::audit() const {
  std::shared_lock lock(data_mutex_);
  AuditReport report;
  std::set<std::string> ids;
  std::map<std::string, std::int64_t> events_per_run;
  for (const auto& [id, ev] : docs_.at(Collection::Event)) {
    const auto it = ev.body.find("signalrun_id");
    if (it != ev.body.end() && it->is_string()) ++events_per_run[it->get<std::string>()];
  }
  for (const auto& [c, docs] : docs_) {
    const std::string cname(to_string(c));
    for (const auto& [id, doc] : docs) {
      ++report.documents;
      const std::string where = cname + " " + id;
      if (!ids.insert(id).second) report.problems.push_back(where + ": duplicate id");
      if (doc.id != id || doc.collection != c) report.problems.push_back(where + ": index mismatch");
      if (doc.created_at > doc.updated_at) report.problems.push_back(where + ": updated before created");
      if (doc.deleted() && is_append_only(c)) report.problems.push_back(where + ": append-only document deleted");
      for (const FieldSpec& f : collection_schema(c)) {
        const auto it = doc.body.find(f.name);
        const bool missing = it == doc.body.end() || it->is_null();
        if (missing) {
          if (f.required && !doc.deleted()) report.problems.push_back(where + ": missing " + f.name);
          continue;
        }
        if (!type_ok(*it, f.type)) {
          report.problems.push_back(where + ": bad type for " + f.name);
          continue;
        }
        if (!f.allowed.empty() && !matches_allowed(it->get<std::string>(), f.allowed)) {
          report.problems.push_back(where + ": bad value for " + f.name);
        }
        if (!is_reference(f.type)) continue;
        for (const std::string& ref : referenced_ids(*it, f.type)) {
          if (!docs_.at(*f.target).count(ref)) {
            report.problems.push_back(where + ": " + f.name + " -> missing " +
                                      std::string(to_string(*f.target)) + " " + ref);
          }
        }
      }
      if (c == Collection::Signalrun && !doc.deleted()) {
        const auto it = doc.body.find("num_events");
        const std::int64_t have = events_per_run.count(id) ? events_per_run[id] : 0;
        if (it != doc.body.end() && it->is_number_integer() && it->get<std::int64_t>() != have) {
          report.problems.push_back(where + ": num_events " + std::to_string(it->get<std::int64_t>()) +
                                    " but " + std::to_string(have) + " events");
        }
      }
    }
  }
  return report;
}

// ---- domain helpers --------------------------------------------------------

std::string_view to_string(InteractionAction a) noexcept {
  switch (a) {
    case InteractionAction::create: return "create";
    case InteractionAction::modify: return "modify";
    case InteractionAction::remove: return "delete";
    case InteractionAction::tag: return "tag";
    case InteractionAction::comment: return "comment";
  }
  return "create";
}

void check_annotation_tag(std::string_view tag) {
  if (tag == "confirmed" || tag == "normal" || tag == "investigate") return;
  if (tag.size() > 6 && tag.substr(0, 6) == "other:") return;
  throw Error(ErrorCode::InvalidArgument,
              "tag must be confirmed, normal, investigate or other:<text>, got '" + std::string(tag) + "'", "tag");
}

std::string record_signalrun(Store& store, const std::string& datarun_id, const std::string& signal_id,
                             const std::string& pipeline_id, const EventList& events,
                             const ComputeProfile* profile, const std::string& status,
                             const nlohmann::json& metrics) {
  WriteBatch batch = store.batch();
  nlohmann::json run{{"datarun_id", datarun_id},
                     {"signal_id", signal_id},
                     {"num_events", static_cast<std::int64_t>(events.size())},
                     {"status", status}};
  if (!pipeline_id.empty()) run["pipeline_id"] = pipeline_id;
  if (profile != nullptr) {
    run["profile"] = {{"train_s", profile->train_time_s},
                      {"latency_s", profile->detect_latency_s},
                      {"peak_mem_bytes", profile->peak_memory_bytes},
                      {"memory_available", profile->memory_available}};
  }
  if (metrics.is_object()) run["metrics"] = metrics;
  const Document signalrun = batch.put(Collection::Signalrun, std::move(run));
  for (const Event& e : events) {
    nlohmann::json body{{"signal_id", signal_id},
                        {"signalrun_id", signalrun.id},
                        {"t_s", e.t_s},
                        {"t_e", e.t_e},
                        {"source", to_string(e.source)}};
    if (std::isfinite(e.severity)) body["severity"] = e.severity;
    batch.put(Collection::Event, std::move(body));
  }
  batch.commit();
  return signalrun.id;
}

Document add_annotation(WriteBatch& batch, const std::string& event_id, const std::string& user,
                        const std::string& tag, const std::string& comment) {
  check_annotation_tag(tag);
  nlohmann::json body{{"event_id", event_id}, {"user", user}, {"tag", tag}};
  if (!comment.empty()) body["comment"] = comment;
  return batch.put(Collection::Annotation, std::move(body));
}

Document log_interaction(WriteBatch& batch, const std::string& event_id, InteractionAction action,
                         const nlohmann::json& payload) {
  nlohmann::json body{{"event_id", event_id}, {"action", to_string(action)}};
  if (!payload.is_null()) body["payload"] = payload;
  return batch.put(Collection::EventInteraction, std::move(body));
}

Document add_annotation(Store& store, const std::string& event_id, const std::string& user,
                        const std::string& tag, const std::string& comment) {
  WriteBatch batch = store.batch();
  Document d = add_annotation(batch, event_id, user, tag, comment);
  batch.commit();
  return d;
}

Document log_interaction(Store& store, const std::string& event_id, InteractionAction action,
                         const nlohmann::json& payload) {
  WriteBatch batch = store.batch();
  Document d = log_interaction(batch, event_id, action, payload);
  batch.commit();
  return d;
}

}  // namespace tsad
