#include "cds/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <fmt/format.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace cds {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool chronological(const CritiqueRecord& a, const CritiqueRecord& b) {
  if (a.sheet.created_at != b.sheet.created_at) return a.sheet.created_at < b.sheet.created_at;
  return a.sheet.sheet_id < b.sheet.sheet_id;
}

[[noreturn]] void io_error(const std::string& what) {
  throw Error(ErrorCode::kIo, fmt::format("{}: {}", what, std::strerror(errno)));
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot read '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write to a sibling temp file, fsync, then rename over the target.
void write_file_atomic(const fs::path& path, std::string_view content) {
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) io_error(fmt::format("cannot create '{}'", tmp.string()));
  std::size_t written = 0;
  while (written < content.size()) {
    const ssize_t n = ::write(fd, content.data() + written, content.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int saved = errno;
      ::close(fd);
      ::unlink(tmp.c_str());
      errno = saved;
      io_error(fmt::format("cannot write '{}'", tmp.string()));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) {
    ::unlink(tmp.c_str());
    io_error(fmt::format("cannot flush '{}'", tmp.string()));
  }
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    ::unlink(tmp.c_str());
    io_error(fmt::format("cannot rename into '{}'", path.string()));
  }
}

std::string record_text(const CritiqueRecord& record) { return record_to_json(record).dump(2) + "\n"; }

class MutexLock final : public Repository::WriterLock {
 public:
  explicit MutexLock(std::mutex& m) : lock_(m) {}

 private:
  std::unique_lock<std::mutex> lock_;
};

// In-process mutex plus an advisory flock for other processes.
class FileLock final : public Repository::WriterLock {
 public:
  FileLock(std::mutex& m, const fs::path& path) : lock_(m) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) io_error(fmt::format("cannot open lock file '{}'", path.string()));
    while (::flock(fd_, LOCK_EX) != 0) {
      if (errno != EINTR) {
        ::close(fd_);
        io_error(fmt::format("cannot lock '{}'", path.string()));
      }
    }
  }
  ~FileLock() override {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  std::unique_lock<std::mutex> lock_;
  int fd_ = -1;
};

}  // namespace

json header_to_json(const RecordHeader& h) {
  return {
      {"sheet_id", h.sheet_id},
      {"artefact_key", h.artefact_key},
      {"appraiser", h.appraiser},
      {"created_at", format_rfc3339(h.created_at)},
      {"updated_at", format_rfc3339(h.updated_at)},
      {"status", status_key(h.status)},
      {"catalog_version", h.catalog_version},
      {"score", h.score ? score_to_json(*h.score) : json(nullptr)},
  };
}

// ---- Repository ----------------------------------------------------------

bool Repository::needs_write(const CritiqueRecord& incoming) const {
  auto existing = fetch(incoming.sheet.sheet_id);
  if (!existing) return true;
  if (existing->content_hash == incoming.content_hash) return false;
  if (existing->sheet.finalized()) {
    throw Error(ErrorCode::kConflict,
                fmt::format("sheet {} is finalized; stored content cannot be replaced", incoming.sheet.sheet_id));
  }
  return true;
}

std::string Repository::save(const CritiqueRecord& record) {
  // Re-validate through the wire schema so typed callers get the same checks.
  json doc = record_to_json(record);
  if (record.content_hash.empty()) doc.erase("content_hash");
  return save_json(doc);
}

std::string Repository::save_json(const json& record_document) {
  const CritiqueRecord record = record_from_json(record_document);
  auto guard = lock_writer();
  if (needs_write(record)) put_all({record});
  return record.sheet.sheet_id;
}

CritiqueRecord Repository::load(std::string_view sheet_id) const {
  auto record = fetch(sheet_id);
  if (!record) throw Error(ErrorCode::kNotFound, fmt::format("no critique with id '{}'", sheet_id), {std::string(sheet_id)});
  return std::move(*record);
}

bool Repository::contains(std::string_view sheet_id) const { return fetch(sheet_id).has_value(); }

std::vector<std::string> Repository::ids_for(std::string_view artefact_key) const {
  std::vector<std::string> ids;
  for (const auto& r : all()) {
    if (r.sheet.artefact_key == artefact_key) ids.push_back(r.sheet.sheet_id);
  }
  return ids;
}

std::vector<RecordHeader> Repository::history(std::string_view artefact_key, const HeuristicCatalog& catalog) const {
  std::vector<CritiqueRecord> records;
  for (const auto& id : ids_for(artefact_key)) {
    if (auto r = fetch(id); r && r->sheet.artefact_key == artefact_key) records.push_back(std::move(*r));
  }
  std::sort(records.begin(), records.end(), chronological);
  std::vector<RecordHeader> out;
  for (const auto& r : records) {
    const auto& s = r.sheet;
    RecordHeader h{s.sheet_id, s.artefact_key, s.appraiser, s.created_at, s.updated_at, s.status, s.catalog_version, {}};
    if (s.finalized() && s.catalog_version == catalog.version_tag()) h.score = compute_score(s, catalog);
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<CritiqueRecord> Repository::all() const {
  auto records = fetch_all();
  std::sort(records.begin(), records.end(), chronological);
  return records;
}

void Repository::remove(std::string_view sheet_id) {
  auto guard = lock_writer();
  if (!erase(sheet_id)) {
    throw Error(ErrorCode::kNotFound, fmt::format("no critique with id '{}'", sheet_id), {std::string(sheet_id)});
  }
}

std::size_t Repository::export_all(const fs::path& bundle) const {
  json doc = json::array();
  const auto records = all();
  for (const auto& r : records) doc.push_back(record_to_json(r));
  if (bundle.has_parent_path()) fs::create_directories(bundle.parent_path());
  write_file_atomic(bundle, doc.dump(2) + "\n");
  return records.size();
}

std::size_t Repository::import_all(const fs::path& bundle) {
  json doc;
  try {
    doc = json::parse(read_file(bundle));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchema, fmt::format("bundle '{}' is not valid JSON: {}", bundle.string(), e.what()));
  }
  if (!doc.is_array()) throw Error(ErrorCode::kSchema, "bundle must be a JSON array of records");

  std::vector<CritiqueRecord> records;
  std::map<std::string, std::string> hashes;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string id = doc[i].is_object() && doc[i].contains("sheet_id") && doc[i]["sheet_id"].is_string()
                               ? doc[i]["sheet_id"].get<std::string>()
                               : std::string("?");
    try {
      records.push_back(record_from_json(doc[i]));
    } catch (const Error& e) {
      throw Error(ErrorCode::kSchema,
                  fmt::format("bundle record {} (sheet_id {}) rejected, nothing imported: {}", i + 1, id, e.what()),
                  {fmt::format("record={}", i + 1), fmt::format("sheet_id={}", id)});
    }
    auto [it, inserted] = hashes.emplace(id, records.back().content_hash);
    if (!inserted && it->second != records.back().content_hash) {
      throw Error(ErrorCode::kConflict,
                  fmt::format("bundle record {} repeats sheet_id {} with different content, nothing imported", i + 1, id));
    }
  }

  auto guard = lock_writer();
  std::vector<CritiqueRecord> to_write;
  std::set<std::string> queued;
  for (const auto& r : records) {
    try {
      if (queued.insert(r.sheet.sheet_id).second && needs_write(r)) to_write.push_back(r);
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("nothing imported: {}", e.what()), e.details());
    }
  }
  if (!to_write.empty()) put_all(to_write);
  return records.size();
}

// ---- MemoryRepository ----------------------------------------------------

std::unique_ptr<Repository::WriterLock> MemoryRepository::lock_writer() const {
  return std::make_unique<MutexLock>(writer_);
}

std::optional<CritiqueRecord> MemoryRepository::fetch(std::string_view sheet_id) const {
  std::shared_lock lock(data_mutex_);
  auto it = records_.find(sheet_id);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::vector<CritiqueRecord> MemoryRepository::fetch_all() const {
  std::shared_lock lock(data_mutex_);
  std::vector<CritiqueRecord> out;
  for (const auto& [_, r] : records_) out.push_back(r);
  return out;
}

void MemoryRepository::put_all(const std::vector<CritiqueRecord>& records) {
  std::unique_lock lock(data_mutex_);
  for (const auto& r : records) records_.insert_or_assign(r.sheet.sheet_id, r);
}

bool MemoryRepository::erase(std::string_view sheet_id) {
  std::unique_lock lock(data_mutex_);
  auto it = records_.find(sheet_id);
  if (it == records_.end()) return false;
  records_.erase(it);
  return true;
}

// ---- FileRepository ------------------------------------------------------

FileRepository::FileRepository(fs::path root) : root_(std::move(root)), records_dir_(root_ / "records") {
  std::error_code ec;
  fs::create_directories(records_dir_, ec);
  if (ec || !fs::is_directory(records_dir_)) {
    throw Error(ErrorCode::kIo, fmt::format("cannot create store directory '{}': {}", records_dir_.string(),
                                            ec ? ec.message() : "not a directory"));
  }
  if (::access(records_dir_.c_str(), W_OK) != 0) io_error(fmt::format("store directory '{}' is not writable", root_.string()));
}

fs::path FileRepository::record_path(std::string_view sheet_id) const {
  return records_dir_ / (std::string(sheet_id) + ".json");
}

std::unique_ptr<Repository::WriterLock> FileRepository::lock_writer() const {
  return std::make_unique<FileLock>(writer_, root_ / ".lock");
}

std::optional<CritiqueRecord> FileRepository::fetch(std::string_view sheet_id) const {
  if (!is_valid_sheet_id(sheet_id)) return std::nullopt;
  const fs::path path = record_path(sheet_id);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return record_from_json(json::parse(ss.str()));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchema, fmt::format("record file '{}' is not valid JSON: {}", path.string(), e.what()));
  }
}

std::vector<CritiqueRecord> FileRepository::fetch_all() const {
  std::vector<CritiqueRecord> out;
  for (const auto& entry : fs::directory_iterator(records_dir_)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    if (auto r = fetch(entry.path().stem().string())) out.push_back(std::move(*r));
  }
  return out;
}

std::size_t FileRepository::record_file_count() const {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(records_dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") ++n;
  }
  return n;
}

FileRepository::Index FileRepository::build_index() const {
  Index index;
  for (const auto& r : Repository::all()) index[r.sheet.artefact_key].push_back({r.sheet.sheet_id, r.sheet.created_at});
  return index;
}

std::optional<FileRepository::Index> FileRepository::read_index() const {
  std::ifstream in(root_ / "index.json", std::ios::binary);
  if (!in) return std::nullopt;
  try {
    std::ostringstream ss;
    ss << in.rdbuf();
    const json doc = json::parse(ss.str());
    if (doc.at("schema_version").get<int>() != kSchemaVersion) return std::nullopt;
    Index index;
    for (const auto& [key, entries] : doc.at("artefacts").items()) {
      for (const auto& e : entries) {
        index[key].push_back({e.at("sheet_id").get<std::string>(), parse_rfc3339(e.at("created_at").get<std::string>())});
      }
    }
    return index;
  } catch (const json::exception&) {
    return std::nullopt;
  } catch (const Error&) {
    return std::nullopt;
  }
}

FileRepository::Index FileRepository::current_index() const {
  auto index = read_index();
  if (!index) return build_index();
  std::size_t indexed = 0;
  for (const auto& [_, entries] : *index) indexed += entries.size();
  return indexed == record_file_count() ? std::move(*index) : build_index();
}

void FileRepository::write_index(const Index& index) const {
  json artefacts = json::object();
  for (const auto& [key, entries] : index) {
    json list = json::array();
    for (const auto& e : entries) list.push_back({{"sheet_id", e.sheet_id}, {"created_at", format_rfc3339(e.created_at)}});
    artefacts[key] = std::move(list);
  }
  write_file_atomic(root_ / "index.json",
                    json{{"schema_version", kSchemaVersion}, {"artefacts", std::move(artefacts)}}.dump(2) + "\n");
}

void FileRepository::rebuild_index() {
  auto guard = lock_writer();
  write_index(build_index());
}

std::vector<std::string> FileRepository::ids_for(std::string_view artefact_key) const {
  const Index index = current_index();
  std::vector<std::string> ids;
  if (auto it = index.find(artefact_key); it != index.end()) {
    for (const auto& e : it->second) ids.push_back(e.sheet_id);
  }
  // A dangling id means the cache is stale; answer from the records.
  for (const auto& id : ids) {
    if (!fs::exists(record_path(id))) return Repository::ids_for(artefact_key);
  }
  return ids;
}

void FileRepository::put_all(const std::vector<CritiqueRecord>& records) {
  Index index = current_index();
  // Remember what is being replaced so a failed batch can be rolled back.
  std::vector<std::pair<fs::path, std::optional<std::string>>> undo;
  try {
    for (const auto& r : records) {
      const fs::path path = record_path(r.sheet.sheet_id);
      std::optional<std::string> previous;
      if (fs::exists(path)) previous = read_file(path);
      undo.emplace_back(path, std::move(previous));
      write_file_atomic(path, record_text(r));
    }
  } catch (...) {
    for (auto it = undo.rbegin(); it != undo.rend(); ++it) {
      std::error_code ec;
      if (it->second) {
        try {
          write_file_atomic(it->first, *it->second);
        } catch (const Error&) {
        }
      } else {
        fs::remove(it->first, ec);
      }
    }
    throw;
  }

  for (const auto& r : records) {
    for (auto& [_, entries] : index) {
      std::erase_if(entries, [&](const IndexEntry& e) { return e.sheet_id == r.sheet.sheet_id; });
    }
    auto& entries = index[r.sheet.artefact_key];
    const IndexEntry entry{r.sheet.sheet_id, r.sheet.created_at};
    auto pos = std::upper_bound(entries.begin(), entries.end(), entry, [](const IndexEntry& a, const IndexEntry& b) {
      return a.created_at != b.created_at ? a.created_at < b.created_at : a.sheet_id < b.sheet_id;
    });
    entries.insert(pos, entry);
  }
  std::erase_if(index, [](const auto& kv) { return kv.second.empty(); });
  write_index(index);
}

bool FileRepository::erase(std::string_view sheet_id) {
  if (!is_valid_sheet_id(sheet_id)) return false;
  std::error_code ec;
  const bool removed = fs::remove(record_path(sheet_id), ec);
  if (ec) throw Error(ErrorCode::kIo, fmt::format("cannot delete record '{}': {}", sheet_id, ec.message()));
  if (removed) {
    Index index = current_index();
    for (auto& [_, entries] : index) {
      std::erase_if(entries, [&](const IndexEntry& e) { return e.sheet_id == sheet_id; });
    }
    std::erase_if(index, [](const auto& kv) { return kv.second.empty(); });
    write_index(index);
  }
  return removed;
}

fs::path default_store_dir() {
  if (const char* dir = std::getenv("CDS_STORE_DIR"); dir && *dir) return dir;
  if (const char* xdg = std::getenv("XDG_DATA_HOME"); xdg && *xdg) return fs::path(xdg) / "cds";
  if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".local" / "share" / "cds";
  return ".cds-store";
}

}  // namespace cds
