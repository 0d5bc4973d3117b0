#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "cds/critique.hpp"
#include "cds/critique_json.hpp"

namespace cds {

/// History entry for one critique. Drafts (and sheets made with another
/// catalog version) carry no score.
struct RecordHeader {
  std::string sheet_id;
  std::string artefact_key;
  std::string appraiser;
  Timestamp created_at{};
  Timestamp updated_at{};
  SheetStatus status = SheetStatus::kDraft;
  std::string catalog_version;
  std::optional<ScoreSummary> score;

  bool operator==(const RecordHeader&) const = default;
};

nlohmann::json header_to_json(const RecordHeader& header);

/// Durable repository of critique records.
///
/// Writers are serialized by an exclusive lock; readers never block on it.
/// Saving a record whose stored copy is finalized and differs is a conflict.
class Repository {
 public:
  virtual ~Repository() = default;

  /// Validates against the critique schema and stores. Idempotent: saving
  /// content identical to the stored copy writes nothing. Returns sheet_id.
  std::string save(const CritiqueRecord& record);
  std::string save(const CritiqueSheet& sheet) { return save(make_record(sheet)); }
  std::string save_json(const nlohmann::json& record_document);

  /// Throws Error(kNotFound).
  CritiqueRecord load(std::string_view sheet_id) const;
  bool contains(std::string_view sheet_id) const;

  /// Critiques of one artefact ordered by (created_at, sheet_id).
  std::vector<RecordHeader> history(std::string_view artefact_key, const HeuristicCatalog& catalog) const;

  /// Every record ordered by (created_at, sheet_id).
  std::vector<CritiqueRecord> all() const;

  /// Throws Error(kNotFound).
  void remove(std::string_view sheet_id);

  /// Writes every record as one JSON array. Returns the record count.
  std::size_t export_all(const std::filesystem::path& bundle) const;

  /// Validates the whole bundle first; any bad record aborts the import
  /// with nothing written. Returns the number of records in the bundle.
  std::size_t import_all(const std::filesystem::path& bundle);

  /// RAII guard for the single-writer lock.
  class WriterLock {
   public:
    virtual ~WriterLock() = default;
  };

 protected:
  virtual std::unique_ptr<WriterLock> lock_writer() const = 0;
  virtual std::optional<CritiqueRecord> fetch(std::string_view sheet_id) const = 0;
  virtual std::vector<CritiqueRecord> fetch_all() const = 0;
  virtual std::vector<std::string> ids_for(std::string_view artefact_key) const;
  /// Must leave the repository unchanged if it throws.
  virtual void put_all(const std::vector<CritiqueRecord>& records) = 0;
  virtual bool erase(std::string_view sheet_id) = 0;

 private:
  /// Checks a new record against its stored copy. Returns false when the
  /// write is a no-op.
  bool needs_write(const CritiqueRecord& incoming) const;
};

/// Keeps records in memory; for tests and ephemeral services.
class MemoryRepository final : public Repository {
 protected:
  std::unique_ptr<WriterLock> lock_writer() const override;
  std::optional<CritiqueRecord> fetch(std::string_view sheet_id) const override;
  std::vector<CritiqueRecord> fetch_all() const override;
  void put_all(const std::vector<CritiqueRecord>& records) override;
  bool erase(std::string_view sheet_id) override;

 private:
  mutable std::mutex writer_;
  mutable std::shared_mutex data_mutex_;
  std::map<std::string, CritiqueRecord, std::less<>> records_;
};

/// Directory layout:
///   <root>/records/<sheet_id>.json   one record document each
///   <root>/index.json                artefact_key -> ids by created_at (a cache)
///   <root>/.lock                     writer lock (flock)
class FileRepository final : public Repository {
 public:
  /// Creates the directory tree if needed. Throws Error(kIo).
  explicit FileRepository(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path record_path(std::string_view sheet_id) const;

  /// Rebuilds index.json from the record files.
  void rebuild_index();

 protected:
  std::unique_ptr<WriterLock> lock_writer() const override;
  std::optional<CritiqueRecord> fetch(std::string_view sheet_id) const override;
  std::vector<CritiqueRecord> fetch_all() const override;
  std::vector<std::string> ids_for(std::string_view artefact_key) const override;
  void put_all(const std::vector<CritiqueRecord>& records) override;
  bool erase(std::string_view sheet_id) override;

 private:
  struct IndexEntry {
    std::string sheet_id;
    Timestamp created_at{};
  };
  using Index = std::map<std::string, std::vector<IndexEntry>, std::less<>>;

  Index build_index() const;
  Index current_index() const;
  std::optional<Index> read_index() const;
  void write_index(const Index& index) const;
  std::size_t record_file_count() const;

  std::filesystem::path root_;
  std::filesystem::path records_dir_;
  mutable std::mutex writer_;
};

/// CDS_STORE_DIR if set, else $XDG_DATA_HOME/cds, else ~/.local/share/cds,
/// else ./.cds-store.
std::filesystem::path default_store_dir();

}  // namespace cds
