#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <thread>

#include "rating_sim.hpp"
#include "vist/rating/server.hpp"

namespace vist::rating {
namespace {

using testing::TempDir;

RatingRecord record(const std::string& task, const std::string& rater, Scores s) {
  return {task, rater, s, "2026-01-01T00:00:00.000Z"};
}

std::vector<RatingTask> one_task_pool() {
  data::CandidateRecord c{"s1", {"a", "b", "c", "d", "e"}, "a b c d e"};
  return build_pool({c}, {}, 1);
}

TEST(Pool, IdsAreOpaqueAndReproducible) {
  const auto a = testing::story_pool(20, 3);
  const auto b = testing::story_pool(20, 3);
  ASSERT_EQ(a.size(), 40u);
  std::size_t model_first_half = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].task_id, b[i].task_id);
    EXPECT_EQ(a[i].source, b[i].source);
    EXPECT_EQ(a[i].task_id.find(a[i].source), std::string::npos);
    model_first_half += (i < 20 && a[i].source == kModelSource) ? 1 : 0;
  }
  // Shuffled, not model block then human block.
  EXPECT_LT(model_first_half, 20u);
}

TEST(NextTask, SingletonPool) {
  TempDir dir("rating");
  RatingService svc(one_task_pool(), dir / "log.jsonl");
  const auto next = svc.next_task("r1");
  ASSERT_EQ(next.status, NextStatus::kTask);
  EXPECT_EQ(next.task.story_id, "s1");
  // Asking again before rating hands back the same assignment.
  EXPECT_EQ(svc.next_task("r1").task.task_id, next.task.task_id);
}

TEST(NextTask, ExhaustionDiffersFromEmptyPool) {
  TempDir dir("rating");
  RatingService empty({}, dir / "empty.jsonl");
  EXPECT_EQ(empty.next_task("r").status, NextStatus::kEmptyPool);

  RatingService svc(testing::story_pool(2), dir / "log.jsonl", {0, 5});
  for (int i = 0; i < 4; ++i) {
    const auto next = svc.next_task("r");
    ASSERT_EQ(next.status, NextStatus::kTask);
    ASSERT_TRUE(svc.submit(record(next.task.task_id, "r", {3, 3, 3, 3, 3, 3})).ok());
  }
  EXPECT_EQ(svc.next_task("r").status, NextStatus::kExhausted);
  EXPECT_EQ(svc.next_task("other").status, NextStatus::kTask);
}

TEST(NextTask, BalancedOverTwoHundredTasks) {
  TempDir dir("rating");
  RatingService svc(testing::story_pool(100), dir / "log.jsonl");
  ASSERT_EQ(svc.pool_size(), 200u);
  Rng rng(7);
  std::vector<std::string> raters;
  for (int i = 0; i < 25; ++i) raters.push_back("rater" + std::to_string(i));
  std::set<std::string> exhausted;
  std::size_t submitted = 0;
  while (exhausted.size() < raters.size()) {
    const auto& rater = raters[uniform_index(rng, raters.size())];
    const auto next = svc.next_task(rater);
    if (next.status == NextStatus::kExhausted) {
      exhausted.insert(rater);
      continue;
    }
    ASSERT_TRUE(svc.submit(record(next.task.task_id, rater, {4, 4, 4, 4, 4, 4})).ok());
    ++submitted;
    const auto counts = svc.rating_counts();
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    ASSERT_LE(*hi - *lo, 1u) << "after " << submitted << " submissions";
  }
  // Default target of three raters per story, reached everywhere.
  EXPECT_EQ(submitted, 600u);
  for (auto c : svc.rating_counts()) EXPECT_EQ(c, 3u);
}

TEST(NextTask, AlternatesSourcesForARater) {
  TempDir dir("rating");
  RatingService svc(testing::story_pool(10), dir / "log.jsonl");
  std::string last;
  for (int i = 0; i < 20; ++i) {
    const auto next = svc.next_task("solo");
    ASSERT_EQ(next.status, NextStatus::kTask);
    EXPECT_NE(next.task.source, last) << i;
    last = next.task.source;
    ASSERT_TRUE(svc.submit(record(next.task.task_id, "solo", {2, 2, 2, 2, 2, 2})).ok());
  }
}

TEST(Submit, MidScaleAccepted) {
  TempDir dir("rating");
  RatingService svc(one_task_pool(), dir / "log.jsonl");
  const auto id = svc.next_task("r").task.task_id;
  const auto res = svc.submit_json({{"task_id", id}, {"rater_id", "r"}, {"scores", {3, 3, 3, 3, 3, 3}}});
  EXPECT_EQ(res.status, SubmitStatus::kAccepted);
  EXPECT_EQ(res.http_status(), 200);
  ASSERT_EQ(svc.ratings().size(), 1u);
  EXPECT_FALSE(svc.ratings()[0].timestamp.empty());
}

TEST(Submit, OutOfRangeNamesTheAspect) {
  TempDir dir("rating");
  RatingService svc(one_task_pool(), dir / "log.jsonl");
  const auto id = svc.next_task("r").task.task_id;
  auto res = svc.submit_json({{"task_id", id}, {"rater_id", "r"}, {"scores", {3, 3, 6, 3, 3, 3}}});
  EXPECT_EQ(res.http_status(), 400);
  EXPECT_NE(res.message.find("aspect c"), std::string::npos) << res.message;

  res = svc.submit_json({{"task_id", id}, {"rater_id", "r"}, {"scores", {{"a", 1}, {"b", 2}, {"c", 3}, {"d", 4}, {"e", 0}, {"f", 5}}}});
  EXPECT_NE(res.message.find("aspect e"), std::string::npos) << res.message;
  res = svc.submit_json({{"task_id", id}, {"rater_id", "r"}, {"scores", {3, 3, 3, 3, 3}}});
  EXPECT_EQ(res.status, SubmitStatus::kInvalid);
  res = svc.submit_json({{"task_id", id}, {"rater_id", "r"}, {"scores", {3, 3, 3, 3.5, 3, 3}}});
  EXPECT_NE(res.message.find("aspect d"), std::string::npos) << res.message;
  res = svc.submit_json({{"task_id", id}, {"scores", {3, 3, 3, 3, 3, 3}}});
  EXPECT_NE(res.message.find("rater_id"), std::string::npos);
  EXPECT_TRUE(svc.ratings().empty());
}

TEST(Submit, IdenticalResubmissionIsIdempotent) {
  TempDir dir("rating");
  RatingService svc(one_task_pool(), dir / "log.jsonl");
  const auto id = svc.next_task("r").task.task_id;
  const auto rec = record(id, "r", {1, 2, 3, 4, 5, 1});
  ASSERT_EQ(svc.submit(rec).status, SubmitStatus::kAccepted);
  const auto log = io::read_file(dir / "log.jsonl");
  const auto again = svc.submit(rec);
  EXPECT_TRUE(again.ok());
  EXPECT_EQ(again.http_status(), 200);
  EXPECT_EQ(svc.ratings().size(), 1u);
  EXPECT_EQ(io::read_file(dir / "log.jsonl"), log);
}

TEST(Submit, ConflictAndUnknownTask) {
  TempDir dir("rating");
  RatingService svc(one_task_pool(), dir / "log.jsonl");
  const auto id = svc.next_task("r").task.task_id;
  ASSERT_TRUE(svc.submit(record(id, "r", {1, 2, 3, 4, 5, 1})).ok());
  EXPECT_EQ(svc.submit(record(id, "r", {5, 5, 5, 5, 5, 5})).http_status(), 409);
  const auto unknown = svc.submit(record("nope", "r", {1, 1, 1, 1, 1, 1}));
  EXPECT_EQ(unknown.status, SubmitStatus::kUnknownTask);
  EXPECT_EQ(unknown.http_status(), 400);
  EXPECT_EQ(svc.ratings().size(), 1u);
}

TEST(Aggregate, EmptyIsExplicit) {
  TempDir dir("rating");
  RatingService svc(one_task_pool(), dir / "log.jsonl");
  const auto report = svc.report();
  EXPECT_TRUE(report.empty());
  EXPECT_EQ(to_json(report)["status"], "empty");
}

TEST(Aggregate, SingleTopRating) {
  TempDir dir("rating");
  RatingService svc(one_task_pool(), dir / "log.jsonl");
  ASSERT_TRUE(svc.submit(record(svc.next_task("r").task.task_id, "r", {5, 5, 5, 5, 5, 5})).ok());
  const auto report = svc.report();
  const auto& ours = report.sources.at(kModelSource);
  for (double m : ours.means) EXPECT_EQ(m, 5.0);
  EXPECT_EQ(ours.total, 30.0);
  EXPECT_EQ(ours.ratings, 1u);
  EXPECT_EQ(render_table(report),
            "      | a)    | b)    | c)    | d)    | e)    | f)    | Total score\n"
            "Ours  | 5.000 | 5.000 | 5.000 | 5.000 | 5.000 | 5.000 | 30.000\n");
}

std::vector<SourcedScores> table2_ratings(std::size_t n) {
  std::vector<SourcedScores> rows;
  for (const auto& s : testing::rows_with_means(testing::kOursMeans, n, 1)) rows.push_back({kModelSource, s});
  for (const auto& s : testing::rows_with_means(testing::kHumanMeans, n, 2)) rows.push_back({kHumanSource, s});
  return rows;
}

TEST(Aggregate, PublishedMeansGiveTotals) {
  const auto report = aggregate(table2_ratings(1000));
  const auto& ours = report.sources.at(kModelSource);
  const auto& human = report.sources.at(kHumanSource);
  for (std::size_t k = 0; k < kNumAspects; ++k) {
    EXPECT_NEAR(ours.means[k], testing::kOursMeans[k], 1e-12);
    EXPECT_NEAR(human.means[k], testing::kHumanMeans[k], 1e-12);
  }
  EXPECT_NEAR(ours.total, 18.498, 0.002);
  EXPECT_NEAR(human.total, 23.596, 0.002);
  const auto table = render_table(report);
  EXPECT_NE(table.find("Ours  | 3.347 | 3.278 | 2.871 | 3.222 | 2.886 | 2.893 | 18.497\n"), std::string::npos)
      << table;
  EXPECT_NE(table.find("Human | 4.025 | 3.975 | 3.772 | 4.003 | 3.965 | 3.857 | 23.597\n"), std::string::npos)
      << table;
  EXPECT_LT(table.find("Ours"), table.find("Human"));
}

TEST(Aggregate, TotalIsSumOfMeans) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SourcedScores> rows;
    const auto n = 1 + uniform_index(rng, 40);
    for (std::uint64_t i = 0; i < n; ++i) {
      Scores s;
      for (auto& x : s) x = 1 + static_cast<int>(uniform_index(rng, 5));
      rows.push_back({uniform_index(rng, 2) ? kModelSource : kHumanSource, s});
    }
    for (const auto& [source, summary] : aggregate(rows).sources) {
      double sum = 0;
      for (double m : summary.means) sum += m;
      EXPECT_NEAR(summary.total, sum, 1e-9);
    }
  }
}

TEST(Persistence, AckedRatingsSurviveACrash) {
  TempDir dir("rating");
  const auto log = dir / "log.jsonl";
  const auto pool = testing::story_pool(10);
  const pid_t child = ::fork();
  ASSERT_GE(child, 0);
  if (child == 0) {
    RatingService svc(pool, log);
    for (int i = 0; i < 15; ++i) {
      const auto rater = "r" + std::to_string(i % 4);
      const auto next = svc.next_task(rater);
      if (!svc.submit(record(next.task.task_id, rater, {1, 2, 3, 4, 5, (i % 5) + 1})).ok()) ::_exit(3);
    }
    // Die right after the last ack: no destructors, no buffered flushes.
    ::_exit(0);
  }
  int status = 0;
  ASSERT_EQ(::waitpid(child, &status, 0), child);
  ASSERT_TRUE(WIFEXITED(status));
  ASSERT_EQ(WEXITSTATUS(status), 0);

  {
    RatingService svc(pool, log);
    EXPECT_EQ(svc.ratings().size(), 15u);
    EXPECT_TRUE(svc.replay_warnings().empty());
  }

  // A write torn by the crash was never acked: dropped on replay, and later
  // appends still land on their own lines.
  {
    std::ofstream os(log, std::ios::app);
    os << R"({"task_id":"t00001","rater_id":"late","sco)";
  }
  {
    RatingService svc(pool, log);
    EXPECT_EQ(svc.ratings().size(), 15u);
    ASSERT_EQ(svc.replay_warnings().size(), 1u);
    const auto next = svc.next_task("fresh");
    ASSERT_TRUE(svc.submit(record(next.task.task_id, "fresh", {2, 2, 2, 2, 2, 2})).ok());
  }
  RatingService svc(pool, log);
  EXPECT_EQ(svc.ratings().size(), 16u);
  EXPECT_TRUE(svc.replay_warnings().empty());
}

TEST(Persistence, ReplayRejectsForeignLog) {
  TempDir dir("rating");
  const auto log = dir / "log.jsonl";
  {
    std::ofstream os(log);
    os << R"({"task_id":"t99999","rater_id":"r","scores":[1,1,1,1,1,1],"timestamp":""})" << '\n';
  }
  EXPECT_THROW(RatingService(testing::story_pool(3), log), FormatError);
  {
    std::ofstream os(log);
    os << "not json\n";
  }
  EXPECT_THROW(RatingService(testing::story_pool(3), log), FormatError);
}

TEST(Blindness, PayloadCarriesNoSource) {
  const std::set<std::string> allowed = {"task_id", "story_id", "segments", "images"};
  for (const auto& task : testing::story_pool(30)) {
    const auto payload = rater_payload(task);
    for (const auto& [key, _] : payload.items()) EXPECT_TRUE(allowed.count(key)) << key;
    EXPECT_EQ(payload.dump().find("source"), std::string::npos);
    EXPECT_EQ(payload["segments"].size(), 5u);
  }
}

// Runs the HTTP server on an ephemeral port for the lifetime of the object.
struct LiveServer {
  RatingServer server;
  int port;
  std::thread thread;

  explicit LiveServer(RatingService& svc) : server(svc), port(server.bind_any_port()) {
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LiveServer() {
    server.stop();
    thread.join();
  }
};

TEST(Http, Endpoints) {
  TempDir dir("rating");
  RatingService svc(testing::story_pool(2), dir / "log.jsonl");
  LiveServer live(svc);
  ASSERT_GT(live.port, 0);
  httplib::Client cli("127.0.0.1", live.port);

  auto res = cli.Get("/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);

  EXPECT_EQ(cli.Get("/task")->status, 400);
  res = cli.Get("/task?rater=alice");
  ASSERT_EQ(res->status, 200);
  const auto task = Json::parse(res->body);
  EXPECT_EQ(task["status"], "task");
  EXPECT_FALSE(task.contains("source"));
  const std::string id = task["task_id"];

  const std::string bad = Json{{"task_id", id}, {"rater_id", "alice"}, {"scores", {3, 3, 6, 3, 3, 3}}}.dump();
  res = cli.Post("/rating", bad, "application/json");
  EXPECT_EQ(res->status, 400);
  EXPECT_NE(res->body.find("aspect c"), std::string::npos);
  EXPECT_EQ(cli.Post("/rating", "{", "application/json")->status, 400);

  const std::string good = Json{{"task_id", id}, {"rater_id", "alice"}, {"scores", {3, 3, 3, 3, 3, 3}}}.dump();
  res = cli.Post("/rating", good, "application/json");
  ASSERT_EQ(res->status, 200);
  const auto first_ack = res->body;
  res = cli.Post("/rating", good, "application/json");
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->body, first_ack);
  const std::string other = Json{{"task_id", id}, {"rater_id", "alice"}, {"scores", {4, 3, 3, 3, 3, 3}}}.dump();
  EXPECT_EQ(cli.Post("/rating", other, "application/json")->status, 409);

  res = cli.Get("/report");
  ASSERT_EQ(res->status, 200);
  const auto report = Json::parse(res->body);
  EXPECT_EQ(report["status"], "ok");
}

TEST(Http, EmptyPoolAndEmptyReport) {
  TempDir dir("rating");
  RatingService svc({}, dir / "log.jsonl");
  LiveServer live(svc);
  httplib::Client cli("127.0.0.1", live.port);
  const auto res = cli.Get("/task?rater=x");
  EXPECT_EQ(res->status, 503);
  EXPECT_EQ(Json::parse(res->body)["status"], "empty");
  EXPECT_EQ(Json::parse(cli.Get("/report")->body)["status"], "empty");
}

TEST(Http, StaticFilesServedAtRoot) {
  TempDir dir("rating");
  std::filesystem::create_directories(dir / "ui");
  {
    std::ofstream os(dir / "ui" / "index.html");
    os << "<html>rate</html>";
  }
  RatingService svc(one_task_pool(), dir / "log.jsonl");
  RatingServer server(svc, dir / "ui");
  const int port = server.bind_any_port();
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);
  const auto res = cli.Get("/index.html");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->body, "<html>rate</html>");
  EXPECT_EQ(cli.Get("/health")->status, 200);
  server.stop();
  t.join();
  EXPECT_THROW(RatingServer(svc, dir / "missing"), InvalidArgument);
}

TEST(Http, ConcurrentSubmissionsAllLogged) {
  TempDir dir("rating");
  RatingService svc(testing::story_pool(20), dir / "log.jsonl", {0, 5});
  LiveServer live(svc);
  std::vector<std::thread> workers;
  for (int w = 0; w < 4; ++w) {
    workers.emplace_back([&, w] {
      httplib::Client cli("127.0.0.1", live.port);
      const std::string rater = "w" + std::to_string(w);
      for (int i = 0; i < 10; ++i) {
        const auto task = Json::parse(cli.Get("/task?rater=" + rater)->body);
        const Json body = {{"task_id", task["task_id"]}, {"rater_id", rater}, {"scores", {w + 1, 1, 1, 1, 1, 1}}};
        cli.Post("/rating", body.dump(), "application/json");
      }
    });
  }
  for (auto& t : workers) t.join();
  EXPECT_EQ(svc.ratings().size(), 40u);
  RatingService reread(testing::story_pool(20), dir / "log.jsonl", {0, 5});
  EXPECT_EQ(reread.ratings().size(), 40u);
}

}  // namespace
}  // namespace vist::rating
