#pragma once

#include "tsad/core/event.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace tsad {

enum class Collection {
  Dataset,
  Signal,
  PipelineTemplate,
  Pipeline,
  Experiment,
  Datarun,
  Signalrun,
  Event,
  EventInteraction,
  Annotation,
};

inline constexpr std::array<Collection, 10> kAllCollections{
    Collection::Dataset,   Collection::Signal,    Collection::PipelineTemplate, Collection::Pipeline,
    Collection::Experiment, Collection::Datarun,  Collection::Signalrun,        Collection::Event,
    Collection::EventInteraction, Collection::Annotation};

std::string_view to_string(Collection c) noexcept;
/// Throws UnknownCollection.
Collection parse_collection(std::string_view text);

// Interactions and annotations are history; they are never updated or deleted.
bool is_append_only(Collection c) noexcept;

enum class FieldType { string, number, integer, boolean, object, array, ref, nullable_ref, ref_list };

struct FieldSpec {
  std::string name;
  FieldType type = FieldType::string;
  bool required = false;
  std::optional<Collection> target;  // for reference fields
  // Allowed string values; an entry ending in '*' matches by prefix.
  std::vector<std::string> allowed;
};

const std::vector<FieldSpec>& collection_schema(Collection c);

/// The schema table for every collection, as published in
/// schema/knowledge_base_schema.json and served at GET /schema.
nlohmann::json knowledge_base_schema();

struct Document {
  std::string id;
  Collection collection = Collection::Dataset;
  nlohmann::json body = nlohmann::json::object();
  std::int64_t created_at = 0;  // ms since the epoch
  std::int64_t updated_at = 0;

  bool deleted() const;
  nlohmann::json to_json() const;  // {id, collection, created_at, updated_at, ...body}
};

struct Query {
  nlohmann::json filter = nlohmann::json::object();  // top-level field = value conjunctions
  std::string order_by;                              // empty: created_at, then id
  bool descending = false;
  std::size_t offset = 0;
  std::size_t limit = 0;  // 0: no limit
  bool include_deleted = false;
};

struct StoreOptions {
  // Drop a corrupt journal suffix instead of refusing to open.
  bool repair = false;
  // fdatasync after every committed batch.
  bool sync = true;
};

struct AuditReport {
  std::size_t documents = 0;
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};

class Store;

/// Writes staged under the store's single-writer lock and committed as one
/// journal record. Ids are assigned when staged, so later operations in the
/// batch may reference earlier ones. Uncommitted batches are discarded.
class WriteBatch {
 public:
  WriteBatch(WriteBatch&&) noexcept;
  WriteBatch& operator=(WriteBatch&&) = delete;
  ~WriteBatch();

  /// Throws UnknownCollection, MissingField, DanglingReference, InvalidArgument.
  Document put(Collection c, nlohmann::json body);
  /// Merge top-level fields into a live document. Throws NotFound.
  Document update(Collection c, const std::string& id, const nlohmann::json& patch);
  /// Tombstone: the body becomes {deleted: true} plus the reference fields.
  Document remove(Collection c, const std::string& id);

  std::size_t size() const noexcept { return staged_.size(); }
  void commit();

 private:
  friend class Store;
  explicit WriteBatch(Store& store);

  const Document* lookup(Collection c, const std::string& id) const;
  void validate(const Document& doc) const;

  Store* store_;
  std::unique_lock<std::mutex> lock_;
  std::vector<Document> staged_;
  std::map<std::pair<Collection, std::string>, std::size_t> staged_index_;
  bool committed_ = false;
};

/// Embedded document store: one append-only journal of CRC-checked batch
/// records under `root`, replayed into memory on open. One writer at a time,
/// any number of readers. A second open of the same root fails with Locked.
class Store {
 public:
  /// Throws Io, Locked, CorruptJournal.
  static std::unique_ptr<Store> open(const std::filesystem::path& root, const StoreOptions& options = {});
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  const std::filesystem::path& root() const noexcept { return root_; }

  WriteBatch batch() { return WriteBatch(*this); }
  Document put(Collection c, nlohmann::json body);
  Document update(Collection c, const std::string& id, const nlohmann::json& patch);
  Document remove(Collection c, const std::string& id);

  /// Throws NotFound.
  Document get(Collection c, const std::string& id) const;
  std::optional<Document> try_get(Collection c, const std::string& id) const;
  std::vector<Document> find(Collection c, const Query& query = {}) const;
  std::size_t count(Collection c, bool include_deleted = false) const;

  /// Required fields, reference resolution and Signalrun.num_events against
  /// the Event documents that reference each run.
  AuditReport audit() const;

  std::uint64_t journal_size() const;

 private:
  friend class WriteBatch;
  Store(std::filesystem::path root, const StoreOptions& options);

  void replay();
  void append_record(const std::string& payload);
  std::string next_id(std::int64_t& ms);

  std::filesystem::path root_;
  StoreOptions options_;
  int lock_fd_ = -1;
  int journal_fd_ = -1;
  std::uint64_t journal_size_ = 0;

  std::mutex write_mutex_;
  mutable std::shared_mutex data_mutex_;
  std::map<Collection, std::map<std::string, Document>> docs_;

  std::mt19937_64 id_rng_;
  std::int64_t last_ms_ = 0;
  std::uint64_t last_rand_hi_ = 0;  // 16 bits
  std::uint64_t last_rand_lo_ = 0;  // 64 bits
};

// Journal record framing: u32 little-endian length, JSON bytes, u32
// little-endian CRC-32 of the JSON bytes.
std::string frame_record(std::string_view json);

// ---- domain helpers --------------------------------------------------------

struct ComputeProfile;

enum class InteractionAction { create, modify, remove, tag, comment };
std::string_view to_string(InteractionAction a) noexcept;

/// confirmed, normal, investigate, or other:<text>. Throws InvalidArgument.
void check_annotation_tag(std::string_view tag);

/// Signalrun plus one Event per detection in a single batch.
std::string record_signalrun(Store& store, const std::string& datarun_id, const std::string& signal_id,
                             const std::string& pipeline_id, const EventList& events,
                             const ComputeProfile* profile, const std::string& status,
                             const nlohmann::json& metrics = nullptr);

Document add_annotation(Store& store, const std::string& event_id, const std::string& user,
                        const std::string& tag, const std::string& comment);
Document log_interaction(Store& store, const std::string& event_id, InteractionAction action,
                         const nlohmann::json& payload);

// Stage the same operations inside an existing batch.
Document add_annotation(WriteBatch& batch, const std::string& event_id, const std::string& user,
                        const std::string& tag, const std::string& comment);
Document log_interaction(WriteBatch& batch, const std::string& event_id, InteractionAction action,
                         const nlohmann::json& payload);

}  // namespace tsad
