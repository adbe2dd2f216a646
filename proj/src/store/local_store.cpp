// Copyright 2026 The Marsad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fcntl.h>
#include <sqlite3.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <random>

#include "marsad/error.hpp"
#include "marsad/store.hpp"

namespace marsad::store {
namespace {

namespace fs = std::filesystem;

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS datasets (
  seq        INTEGER PRIMARY KEY AUTOINCREMENT,
  dataset_id TEXT NOT NULL UNIQUE,
  name       TEXT NOT NULL,
  created_at TEXT NOT NULL,
  metadata   TEXT NOT NULL,
  status     TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS jobs (
  job_id       TEXT PRIMARY KEY,
  dataset_id   TEXT NOT NULL REFERENCES datasets(dataset_id),
  kind         TEXT NOT NULL,
  priority     INTEGER NOT NULL,
  state        TEXT NOT NULL,
  submitted_at TEXT NOT NULL,
  started_at   TEXT,
  finished_at  TEXT,
  error        TEXT,
  webhook      TEXT,
  seed         INTEGER NOT NULL,
  seq          INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS results (
  seq         INTEGER PRIMARY KEY AUTOINCREMENT,
  job_id      TEXT NOT NULL UNIQUE,
  dataset_id  TEXT NOT NULL REFERENCES datasets(dataset_id),
  kind        TEXT NOT NULL,
  payload     TEXT NOT NULL,
  produced_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS annotations (
  seq           INTEGER PRIMARY KEY AUTOINCREMENT,
  annotation_id TEXT NOT NULL UNIQUE,
  dataset_id    TEXT NOT NULL REFERENCES datasets(dataset_id),
  post_id       TEXT NOT NULL,
  kind          TEXT NOT NULL,
  old_label     TEXT NOT NULL,
  new_label     TEXT NOT NULL,
  annotator     TEXT NOT NULL,
  created_at    TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS post_ids (
  dataset_id TEXT NOT NULL REFERENCES datasets(dataset_id),
  post_id    TEXT NOT NULL,
  PRIMARY KEY (dataset_id, post_id)
);
CREATE TABLE IF NOT EXISTS lexicons (
  version    INTEGER PRIMARY KEY,
  created_at TEXT NOT NULL,
  content    TEXT NOT NULL
);
)sql";

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK)
      throw Error(Errc::kIo, std::string("sqlite prepare: ") + sqlite3_errmsg(db));
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& bind(int index, const std::string& value) {
    sqlite3_bind_text(stmt_, index, value.data(), static_cast<int>(value.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Statement& bind(int index, std::int64_t value) {
    sqlite3_bind_int64(stmt_, index, value);
    return *this;
  }
  Statement& bind(int index, const std::optional<std::string>& value) {
    if (value) return bind(index, *value);
    sqlite3_bind_null(stmt_, index);
    return *this;
  }

  /// Returns true while rows are available.
  bool step() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    if (rc == SQLITE_CONSTRAINT)
      throw Error(Errc::kForeignKey, std::string("constraint violated: ") + sqlite3_errmsg(db_));
    throw Error(Errc::kIo, std::string("sqlite step: ") + sqlite3_errmsg(db_));
  }
  void run() {
    while (step()) {
    }
  }
  void reset() {
    sqlite3_reset(stmt_);
    sqlite3_clear_bindings(stmt_);
  }

  std::string text(int col) const {
    const auto* p = sqlite3_column_text(stmt_, col);
    return p ? std::string(reinterpret_cast<const char*>(p),
                           static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
             : std::string();
  }
  std::optional<std::string> optional_text(int col) const {
    if (sqlite3_column_type(stmt_, col) == SQLITE_NULL) return std::nullopt;
    return text(col);
  }
  std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

Instant time_from(const std::string& s) {
  auto t = parse_iso8601(s);
  if (!t) throw Error(Errc::kInternal, "stored timestamp does not parse: " + s);
  return *t;
}

std::optional<std::string> time_to(const std::optional<Instant>& t) {
  if (!t) return std::nullopt;
  return format_iso8601(*t);
}

std::optional<Instant> time_from(const std::optional<std::string>& s) {
  if (!s) return std::nullopt;
  return time_from(*s);
}

AnalysisKind kind_from(const std::string& s) {
  auto k = parse_analysis_kind(s);
  if (!k) throw Error(Errc::kInternal, "stored kind does not parse: " + s);
  return *k;
}

void write_durably(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw Error(Errc::kIo, "cannot create " + tmp.string());
  std::size_t written = 0;
  while (written < content.size()) {
    ssize_t n = ::write(fd, content.data() + written, content.size() - written);
    if (n <= 0) {
      ::close(fd);
      throw Error(Errc::kIo, "write failed for " + tmp.string());
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    ::close(fd);
    throw Error(Errc::kIo, "fsync failed for " + tmp.string());
  }
  ::close(fd);
  fs::rename(tmp, path);
  int dir = ::open(path.parent_path().c_str(), O_RDONLY);
  if (dir >= 0) {
    ::fsync(dir);
    ::close(dir);
  }
}

int status_rank(DatasetStatus s) { return static_cast<int>(s); }

class LocalStore final : public Store {
 public:
  explicit LocalStore(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_);
    fs::path db_path = root_ / "marsad.db";
    if (sqlite3_open_v2(db_path.c_str(), &db_,
                        SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                        nullptr) != SQLITE_OK) {
      std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
      sqlite3_close(db_);
      throw Error(Errc::kIo, "cannot open " + db_path.string() + ": " + msg);
    }
    sqlite3_busy_timeout(db_, 5000);
    exec("PRAGMA foreign_keys = ON");
    exec("PRAGMA journal_mode = WAL");
    exec("PRAGMA synchronous = FULL");
    exec(kSchema);
  }

  ~LocalStore() override { sqlite3_close(db_); }

  std::string put_dataset(const std::string& name, std::span<const ingest::Post> posts,
                          const ingest::DatasetMetadata& metadata) override {
    std::string id = new_id();
    fs::path dir = root_ / id;
    fs::create_directories(dir);
    std::string body;
    for (const auto& post : posts) {
      body += ingest::to_document_json(post).dump();
      body.push_back('\n');
    }
    write_durably(dir / "posts.jsonl", body);

    std::lock_guard lock(mu_);
    Transaction tx(*this);
    Statement insert(db_,
                     "INSERT INTO datasets (dataset_id, name, created_at, metadata, status) "
                     "VALUES (?, ?, ?, ?, ?)");
    insert.bind(1, id)
        .bind(2, name)
        .bind(3, format_iso8601(now_utc()))
        .bind(4, ingest::to_json(metadata).dump())
        .bind(5, std::string(to_string(DatasetStatus::kStored)));
    insert.run();
    Statement ids(db_, "INSERT OR IGNORE INTO post_ids (dataset_id, post_id) VALUES (?, ?)");
    for (const auto& post : posts) {
      ids.bind(1, id).bind(2, post.id);
      ids.run();
      ids.reset();
    }
    tx.commit();
    return id;
  }

  DatasetRecord get_dataset_record(const std::string& dataset_id) const override {
    std::lock_guard lock(mu_);
    Statement q(db_,
                "SELECT dataset_id, name, created_at, metadata, status FROM datasets "
                "WHERE dataset_id = ?");
    q.bind(1, dataset_id);
    if (!q.step()) throw Error(Errc::kNotFound, "unknown dataset " + dataset_id);
    return dataset_from(q);
  }

  std::vector<ingest::Post> get_posts(const std::string& dataset_id) const override {
    if (!has_dataset(dataset_id)) throw Error(Errc::kNotFound, "unknown dataset " + dataset_id);
    std::ifstream in(root_ / dataset_id / "posts.jsonl", std::ios::binary);
    if (!in) throw Error(Errc::kIo, "posts for dataset " + dataset_id + " are missing");
    std::vector<ingest::Post> posts;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      posts.push_back(ingest::post_from_document(nlohmann::json::parse(line)));
    }
    return posts;
  }

  bool has_dataset(const std::string& dataset_id) const override {
    std::lock_guard lock(mu_);
    Statement q(db_, "SELECT 1 FROM datasets WHERE dataset_id = ?");
    q.bind(1, dataset_id);
    return q.step();
  }

  std::vector<DatasetRecord> list_datasets(std::size_t limit,
                                           const std::string& after) const override {
    std::lock_guard lock(mu_);
    std::int64_t after_seq = 0;
    if (!after.empty()) {
      Statement s(db_, "SELECT seq FROM datasets WHERE dataset_id = ?");
      s.bind(1, after);
      if (!s.step()) throw Error(Errc::kNotFound, "unknown cursor " + after);
      after_seq = s.integer(0);
    }
    Statement q(db_,
                "SELECT dataset_id, name, created_at, metadata, status FROM datasets "
                "WHERE seq > ? ORDER BY seq LIMIT ?");
    q.bind(1, after_seq).bind(2, static_cast<std::int64_t>(limit));
    std::vector<DatasetRecord> out;
    while (q.step()) out.push_back(dataset_from(q));
    return out;
  }

  void advance_dataset_status(const std::string& dataset_id, DatasetStatus status) override {
    std::lock_guard lock(mu_);
    Statement q(db_, "SELECT status FROM datasets WHERE dataset_id = ?");
    q.bind(1, dataset_id);
    if (!q.step()) throw Error(Errc::kNotFound, "unknown dataset " + dataset_id);
    auto current = parse_dataset_status(q.text(0)).value_or(DatasetStatus::kStored);
    if (status_rank(status) <= status_rank(current)) return;
    Statement u(db_, "UPDATE datasets SET status = ? WHERE dataset_id = ?");
    u.bind(1, std::string(to_string(status))).bind(2, dataset_id);
    u.run();
  }

  void put_result(const AnalysisResult& result) override {
    std::lock_guard lock(mu_);
    insert_result(result);
  }

  std::vector<AnalysisResult> get_results(const std::string& dataset_id,
                                          std::optional<AnalysisKind> kind) const override {
    if (!has_dataset(dataset_id)) throw Error(Errc::kNotFound, "unknown dataset " + dataset_id);
    std::lock_guard lock(mu_);
    Statement q(db_,
                "SELECT job_id, dataset_id, kind, payload, produced_at FROM results "
                "WHERE dataset_id = ? AND (? = '' OR kind = ?) ORDER BY seq");
    std::string k = kind ? std::string(to_string(*kind)) : std::string();
    q.bind(1, dataset_id).bind(2, k).bind(3, k);
    std::vector<AnalysisResult> out;
    while (q.step()) out.push_back(result_from(q));
    return out;
  }

  std::optional<AnalysisResult> get_result(const std::string& job_id) const override {
    std::lock_guard lock(mu_);
    Statement q(db_,
                "SELECT job_id, dataset_id, kind, payload, produced_at FROM results "
                "WHERE job_id = ?");
    q.bind(1, job_id);
    if (!q.step()) return std::nullopt;
    return result_from(q);
  }

  std::string record_annotation(const Annotation& a) override {
    const auto& labels = label_set(a.kind);
    if (std::find(labels.begin(), labels.end(), a.new_label) == labels.end())
      throw Error(Errc::kInvalidLabel, "label '" + a.new_label + "' is not valid for kind " +
                                           std::string(to_string(a.kind)));
    std::lock_guard lock(mu_);
    {
      Statement d(db_, "SELECT 1 FROM datasets WHERE dataset_id = ?");
      d.bind(1, a.dataset_id);
      if (!d.step()) throw Error(Errc::kNotFound, "unknown dataset " + a.dataset_id);
    }
    {
      Statement p(db_, "SELECT 1 FROM post_ids WHERE dataset_id = ? AND post_id = ?");
      p.bind(1, a.dataset_id).bind(2, a.post_id);
      if (!p.step()) throw Error(Errc::kUnknownPost, "post " + a.post_id + " is not in dataset");
    }
    std::string id = a.annotation_id.empty() ? new_id() : a.annotation_id;
    Statement ins(db_,
                  "INSERT INTO annotations (annotation_id, dataset_id, post_id, kind, old_label, "
                  "new_label, annotator, created_at) VALUES (?, ?, ?, ?, ?, ?, ?, ?)");
    ins.bind(1, id)
        .bind(2, a.dataset_id)
        .bind(3, a.post_id)
        .bind(4, std::string(to_string(a.kind)))
        .bind(5, a.old_label)
        .bind(6, a.new_label)
        .bind(7, a.annotator)
        .bind(8, format_iso8601(a.created_at == Instant{} ? now_utc() : a.created_at));
    ins.run();
    return id;
  }

  std::vector<Annotation> list_annotations(const std::string& dataset_id) const override {
    if (!has_dataset(dataset_id)) throw Error(Errc::kNotFound, "unknown dataset " + dataset_id);
    std::lock_guard lock(mu_);
    Statement q(db_,
                "SELECT annotation_id, dataset_id, post_id, kind, old_label, new_label, "
                "annotator, created_at FROM annotations WHERE dataset_id = ? ORDER BY seq");
    q.bind(1, dataset_id);
    std::vector<Annotation> out;
    while (q.step()) {
      Annotation a;
      a.annotation_id = q.text(0);
      a.dataset_id = q.text(1);
      a.post_id = q.text(2);
      a.kind = kind_from(q.text(3));
      a.old_label = q.text(4);
      a.new_label = q.text(5);
      a.annotator = q.text(6);
      a.created_at = time_from(q.text(7));
      out.push_back(std::move(a));
    }
    return out;
  }

  void insert_job(const AnalysisJob& job) override {
    std::lock_guard lock(mu_);
    Statement ins(db_,
                  "INSERT INTO jobs (job_id, dataset_id, kind, priority, state, submitted_at, "
                  "started_at, finished_at, error, webhook, seed, seq) "
                  "VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)");
    bind_job(ins, job);
    ins.run();
  }

  void update_job(const AnalysisJob& job) override {
    std::lock_guard lock(mu_);
    update_job_locked(job);
  }

  void finish_job(const AnalysisJob& job, const AnalysisResult* result) override {
    std::lock_guard lock(mu_);
    Transaction tx(*this);
    if (result != nullptr) insert_result(*result);
    update_job_locked(job);
    tx.commit();
  }

  std::optional<AnalysisJob> get_job(const std::string& job_id) const override {
    std::lock_guard lock(mu_);
    Statement q(db_, (std::string(kJobColumns) + " WHERE job_id = ?").c_str());
    q.bind(1, job_id);
    if (!q.step()) return std::nullopt;
    return job_from(q);
  }

  std::vector<AnalysisJob> list_jobs() const override {
    std::lock_guard lock(mu_);
    Statement q(db_, (std::string(kJobColumns) + " ORDER BY seq").c_str());
    std::vector<AnalysisJob> out;
    while (q.step()) out.push_back(job_from(q));
    return out;
  }

  void put_lexicon(const LexiconVersion& lexicon) override {
    std::lock_guard lock(mu_);
    Statement ins(db_, "INSERT OR IGNORE INTO lexicons (version, created_at, content) VALUES (?, ?, ?)");
    ins.bind(1, static_cast<std::int64_t>(lexicon.version))
        .bind(2, format_iso8601(lexicon.created_at))
        .bind(3, lexicon.content.dump());
    ins.run();
  }

  std::optional<LexiconVersion> get_lexicon(int version) const override {
    std::lock_guard lock(mu_);
    Statement q(db_, "SELECT version, created_at, content FROM lexicons WHERE version = ?");
    q.bind(1, static_cast<std::int64_t>(version));
    if (!q.step()) return std::nullopt;
    return lexicon_from(q);
  }

  std::optional<LexiconVersion> latest_lexicon() const override {
    std::lock_guard lock(mu_);
    Statement q(db_, "SELECT version, created_at, content FROM lexicons ORDER BY version DESC LIMIT 1");
    if (!q.step()) return std::nullopt;
    return lexicon_from(q);
  }

 private:
  static constexpr const char* kJobColumns =
      "SELECT job_id, dataset_id, kind, priority, state, submitted_at, started_at, finished_at, "
      "error, webhook, seed, seq FROM jobs";

  class Transaction {
   public:
    explicit Transaction(LocalStore& s) : s_(s) { s_.exec("BEGIN IMMEDIATE"); }
    ~Transaction() {
      if (!done_) sqlite3_exec(s_.db_, "ROLLBACK", nullptr, nullptr, nullptr);
    }
    void commit() {
      s_.exec("COMMIT");
      done_ = true;
    }

   private:
    LocalStore& s_;
    bool done_ = false;
  };

  void exec(const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "unknown";
      sqlite3_free(err);
      throw Error(Errc::kIo, "sqlite: " + msg);
    }
  }

  void insert_result(const AnalysisResult& result) {
    {
      Statement d(db_, "SELECT 1 FROM datasets WHERE dataset_id = ?");
      d.bind(1, result.dataset_id);
      if (!d.step()) throw Error(Errc::kForeignKey, "result references unknown dataset " + result.dataset_id);
    }
    Statement ins(db_,
                  "INSERT INTO results (job_id, dataset_id, kind, payload, produced_at) "
                  "VALUES (?, ?, ?, ?, ?)");
    ins.bind(1, result.job_id)
        .bind(2, result.dataset_id)
        .bind(3, std::string(to_string(result.kind)))
        .bind(4, result.payload.dump())
        .bind(5, format_iso8601(result.produced_at));
    ins.run();
  }

  void update_job_locked(const AnalysisJob& job) {
    Statement up(db_,
                 "UPDATE jobs SET dataset_id = ?2, kind = ?3, priority = ?4, state = ?5, "
                 "submitted_at = ?6, started_at = ?7, finished_at = ?8, error = ?9, webhook = ?10, "
                 "seed = ?11, seq = ?12 WHERE job_id = ?1");
    bind_job(up, job);
    up.run();
    if (sqlite3_changes(db_) != 1) throw Error(Errc::kNotFound, "unknown job " + job.job_id);
  }

  static void bind_job(Statement& s, const AnalysisJob& job) {
    s.bind(1, job.job_id)
        .bind(2, job.dataset_id)
        .bind(3, std::string(to_string(job.kind)))
        .bind(4, static_cast<std::int64_t>(job.priority))
        .bind(5, std::string(to_string(job.state)))
        .bind(6, format_iso8601(job.submitted_at))
        .bind(7, time_to(job.started_at))
        .bind(8, time_to(job.finished_at))
        .bind(9, job.error)
        .bind(10, job.webhook)
        .bind(11, static_cast<std::int64_t>(job.seed))
        .bind(12, job.seq);
  }

  static AnalysisJob job_from(const Statement& q) {
    AnalysisJob job;
    job.job_id = q.text(0);
    job.dataset_id = q.text(1);
    job.kind = kind_from(q.text(2));
    job.priority = static_cast<int>(q.integer(3));
    job.state = parse_job_state(q.text(4)).value_or(JobState::kFailed);
    job.submitted_at = time_from(q.text(5));
    job.started_at = time_from(q.optional_text(6));
    job.finished_at = time_from(q.optional_text(7));
    job.error = q.optional_text(8);
    job.webhook = q.optional_text(9);
    job.seed = static_cast<std::uint64_t>(q.integer(10));
    job.seq = q.integer(11);
    return job;
  }

  static DatasetRecord dataset_from(const Statement& q) {
    DatasetRecord r;
    r.dataset_id = q.text(0);
    r.name = q.text(1);
    r.created_at = time_from(q.text(2));
    r.metadata = ingest::metadata_from_json(nlohmann::json::parse(q.text(3)));
    r.status = parse_dataset_status(q.text(4)).value_or(DatasetStatus::kStored);
    return r;
  }

  static AnalysisResult result_from(const Statement& q) {
    AnalysisResult r;
    r.job_id = q.text(0);
    r.dataset_id = q.text(1);
    r.kind = kind_from(q.text(2));
    r.payload = nlohmann::json::parse(q.text(3));
    r.produced_at = time_from(q.text(4));
    return r;
  }

  static LexiconVersion lexicon_from(const Statement& q) {
    LexiconVersion l;
    l.version = static_cast<int>(q.integer(0));
    l.created_at = time_from(q.text(1));
    l.content = nlohmann::json::parse(q.text(2));
    return l;
  }

  fs::path root_;
  sqlite3* db_ = nullptr;
  // Serializes use of the connection; SQLite transactions are per connection.
  mutable std::recursive_mutex mu_;
};

}  // namespace

std::string new_id() {
  static std::mutex mu;
  static std::mt19937_64 rng = [] {
    std::random_device rd;
    std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
    return std::mt19937_64(seq);
  }();
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  {
    std::lock_guard lock(mu);
    hi = rng();
    lo = rng();
  }
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(hi),
                static_cast<unsigned long long>(lo));
  return buf;
}

std::unique_ptr<Store> open_local_store(const std::filesystem::path& root) {
  return std::make_unique<LocalStore>(root);
}

}  // namespace marsad::store
