#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vist/data/candidates.hpp"
#include "vist/data/stories.hpp"
#include "vist/io.hpp"
#include "vist/numerics/random.hpp"
#include "vist/rating/aggregate.hpp"

namespace vist::rating {

struct ServiceConfig {
  // Target ratings per task; tasks at the target are no longer served. 0 = no cap.
  std::size_t raters_per_task = 3;
  int scale_max = 5;
};

// Model and human stories in one seeded shuffle. Task ids follow the shuffled
// order, so they say nothing about the source; the same inputs and seed give
// the same ids, which log replay relies on.
inline std::vector<RatingTask> build_pool(const std::vector<data::CandidateRecord>& generated,
                                          const std::vector<data::StoryRecord>& human, std::uint64_t seed) {
  std::vector<RatingTask> pool;
  for (const auto& c : generated) {
    RatingTask t{"", c.story_id, c.texts, kModelSource, {}};
    if (data::join_segments(t.segments).empty()) t.segments[0] = c.concatenated;
    pool.push_back(std::move(t));
  }
  for (const auto& h : human) {
    pool.push_back({"", h.story_id, h.texts, kHumanSource, {h.photos.begin(), h.photos.end()}});
  }
  Rng rng(seed);
  for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[uniform_index(rng, i)]);
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i].task_id = fmt::format("t{:05}", i + 1);
  return pool;
}

enum class NextStatus { kTask, kExhausted, kEmptyPool };

struct NextTask {
  NextStatus status = NextStatus::kEmptyPool;
  RatingTask task;
};

enum class SubmitStatus { kAccepted, kDuplicate, kInvalid, kUnknownTask, kConflict };

struct SubmitResult {
  SubmitStatus status = SubmitStatus::kInvalid;
  std::string message;

  bool ok() const { return status == SubmitStatus::kAccepted || status == SubmitStatus::kDuplicate; }

  int http_status() const {
    switch (status) {
      case SubmitStatus::kAccepted:
      case SubmitStatus::kDuplicate:
        return 200;
      case SubmitStatus::kConflict:
        return 409;
      default:
        return 400;
    }
  }
};

// Task pool, ratings log and assignment state. Every public call takes one
// lock, so appends are serialized and reports see a consistent snapshot.
class RatingService {
 public:
  using Clock = std::function<std::string()>;

  RatingService(std::vector<RatingTask> pool, std::filesystem::path log_path, ServiceConfig cfg = {},
                Clock clock = utc_timestamp)
      : tasks_(std::move(pool)), log_path_(std::move(log_path)), cfg_(cfg), clock_(std::move(clock)) {
    if (cfg_.scale_max < 1) throw InvalidArgument("scale_max must be at least 1");
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      if (!index_.emplace(tasks_[i].task_id, i).second) {
        throw InvalidArgument("duplicate task id '" + tasks_[i].task_id + "'");
      }
    }
    counts_.assign(tasks_.size(), 0);
    pending_counts_.assign(tasks_.size(), 0);
    replay();
    fd_ = ::open(log_path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error("cannot open ratings log '" + log_path_.string() + "': " + std::strerror(errno));
  }

  RatingService(const RatingService&) = delete;
  RatingService& operator=(const RatingService&) = delete;

  ~RatingService() {
    if (fd_ >= 0) ::close(fd_);
  }

  NextTask next_task(const std::string& rater) {
    std::lock_guard lock(mu_);
    if (tasks_.empty()) return {NextStatus::kEmptyPool, {}};
    if (const auto it = pending_.find(rater); it != pending_.end()) return {NextStatus::kTask, tasks_[it->second]};

    const auto& done = rated_by_[rater];
    auto pick = choose(rater, done, true);
    // Abandoned assignments must not lock tasks below the target forever.
    if (pick == kNone) pick = choose(rater, done, false);
    if (pick == kNone) return {NextStatus::kExhausted, {}};
    pending_[rater] = pick;
    ++pending_counts_[pick];
    last_source_[rater] = tasks_[pick].source;
    return {NextStatus::kTask, tasks_[pick]};
  }

  SubmitResult submit(RatingRecord record) {
    std::lock_guard lock(mu_);
    for (int s : record.scores) {
      if (s < 1 || s > cfg_.scale_max) return {SubmitStatus::kInvalid, "score outside the rating scale"};
    }
    const auto task = index_.find(record.task_id);
    if (task == index_.end()) return {SubmitStatus::kUnknownTask, "unknown task '" + record.task_id + "'"};
    if (const auto prev = by_key_.find({task->second, record.rater_id}); prev != by_key_.end()) {
      if (ratings_[prev->second].same_judgment(record)) return {SubmitStatus::kDuplicate, "already recorded"};
      return {SubmitStatus::kConflict,
              "rater '" + record.rater_id + "' already rated task '" + record.task_id + "' with different scores"};
    }
    if (record.timestamp.empty()) record.timestamp = clock_();
    append(log_line(record) + '\n');
    remember(task->second, std::move(record));
    return {SubmitStatus::kAccepted, "recorded"};
  }

  // Validates a submitted JSON body, then submits it.
  SubmitResult submit_json(const Json& body) {
    RatingRecord record;
    try {
      record = parse_rating(body, cfg_.scale_max);
    } catch (const RatingRejected& e) {
      return {SubmitStatus::kInvalid, e.what()};
    }
    return submit(std::move(record));
  }

  AggregateReport report() const {
    std::lock_guard lock(mu_);
    std::vector<SourcedScores> rows;
    rows.reserve(ratings_.size());
    for (const auto& r : ratings_) rows.push_back({tasks_[index_.at(r.task_id)].source, r.scores});
    return aggregate(rows);
  }

  std::vector<std::size_t> rating_counts() const {
    std::lock_guard lock(mu_);
    return counts_;
  }

  std::vector<RatingRecord> ratings() const {
    std::lock_guard lock(mu_);
    return ratings_;
  }

  std::size_t pool_size() const { return tasks_.size(); }
  const std::vector<std::string>& replay_warnings() const { return warnings_; }
  const ServiceConfig& config() const { return cfg_; }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  // Least-loaded task the rater has not rated; ties prefer the source this
  // rater did not see last, then pool order.
  std::size_t choose(const std::string& rater, const std::set<std::size_t>& done, bool count_pending) const {
    const auto last = last_source_.find(rater);
    std::size_t best = kNone, best_load = 0;
    bool best_alternates = false;
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      if (done.count(i)) continue;
      const std::size_t load = counts_[i] + pending_counts_[i];
      if (cfg_.raters_per_task && (count_pending ? load : counts_[i]) >= cfg_.raters_per_task) continue;
      const bool alternates = last == last_source_.end() || tasks_[i].source != last->second;
      if (best == kNone || load < best_load || (load == best_load && alternates && !best_alternates)) {
        best = i;
        best_load = load;
        best_alternates = alternates;
      }
    }
    return best;
  }

  void remember(std::size_t task, RatingRecord record) {
    const std::string rater = record.rater_id;
    by_key_[{task, rater}] = ratings_.size();
    ratings_.push_back(std::move(record));
    ++counts_[task];
    rated_by_[rater].insert(task);
    if (const auto it = pending_.find(rater); it != pending_.end() && it->second == task) {
      --pending_counts_[task];
      pending_.erase(it);
    }
  }

  // Acknowledged only once the line is on disk.
  void append(const std::string& line) {
    std::size_t off = 0;
    while (off < line.size()) {
      const auto n = ::write(fd_, line.data() + off, line.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error("ratings log write failed: " + std::string(std::strerror(errno)));
      }
      off += static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) throw Error("ratings log fsync failed: " + std::string(std::strerror(errno)));
  }

  // Rebuilds state from the log. A final line without its newline was never
  // acknowledged (the crash hit mid-write); it is cut off with a warning.
  void replay() {
    if (!std::filesystem::exists(log_path_)) return;
    const std::string text = io::read_file(log_path_);
    std::size_t start = 0, lineno = 0;
    while (start < text.size()) {
      const auto end = text.find('\n', start);
      ++lineno;
      if (end == std::string::npos) {
        warnings_.push_back(fmt::format("ratings log line {}: incomplete final line dropped", lineno));
        std::filesystem::resize_file(log_path_, start);
        break;
      }
      const std::string line = text.substr(start, end - start);
      start = end + 1;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const std::string where = fmt::format("ratings log line {}", lineno);
      RatingRecord record;
      try {
        record = parse_rating(Json::parse(line), cfg_.scale_max);
      } catch (const nlohmann::json::exception&) {
        throw FormatError(FormatError::Kind::kMalformed, where + ": invalid JSON");
      } catch (const RatingRejected& e) {
        throw FormatError(FormatError::Kind::kMalformed, where + ": " + e.what());
      }
      const auto task = index_.find(record.task_id);
      if (task == index_.end()) {
        throw FormatError(FormatError::Kind::kCorrupt,
                          where + ": task '" + record.task_id + "' is not in the pool (pool inputs or seed changed?)");
      }
      if (const auto prev = by_key_.find({task->second, record.rater_id}); prev != by_key_.end()) {
        if (ratings_[prev->second].same_judgment(record)) continue;
        throw FormatError(FormatError::Kind::kDuplicate, where + ": conflicting rating for the same task and rater");
      }
      remember(task->second, std::move(record));
    }
  }

  std::vector<RatingTask> tasks_;
  std::map<std::string, std::size_t> index_;
  std::filesystem::path log_path_;
  ServiceConfig cfg_;
  Clock clock_;
  int fd_ = -1;
  std::vector<std::string> warnings_;

  mutable std::mutex mu_;
  std::vector<RatingRecord> ratings_;
  std::map<std::pair<std::size_t, std::string>, std::size_t> by_key_;
  std::vector<std::size_t> counts_, pending_counts_;
  std::map<std::string, std::set<std::size_t>> rated_by_;
  std::map<std::string, std::size_t> pending_;
  std::map<std::string, std::string> last_source_;
};

}  // namespace vist::rating
