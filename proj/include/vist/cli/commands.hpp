#pragma once

#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "vist/cli/config.hpp"
#include "vist/cli/diagnostics.hpp"
#include "vist/data/candidates.hpp"
#include "vist/data/dataset.hpp"
#include "vist/metrics/report.hpp"
#include "vist/rating/server.hpp"
#include "vist/text/embedding_io.hpp"
#include "vist/training/trainer.hpp"

namespace vist::cli {

// Candidate and reference files disagree on story ids.
class IdMismatch : public Error {
 public:
  IdMismatch(std::vector<std::string> missing, std::vector<std::string> extra)
      : Error(describe(missing, extra)), missing_(std::move(missing)), extra_(std::move(extra)) {}

  const std::vector<std::string>& missing() const { return missing_; }
  const std::vector<std::string>& extra() const { return extra_; }

 private:
  static std::string describe(const std::vector<std::string>& missing, const std::vector<std::string>& extra) {
    std::string s = "candidate and reference story ids differ";
    if (!missing.empty()) s += fmt::format("; missing candidates for: {}", fmt::join(missing, ", "));
    if (!extra.empty()) s += fmt::format("; candidates without a reference: {}", fmt::join(extra, ", "));
    return s;
  }

  std::vector<std::string> missing_, extra_;
};

namespace detail {

inline void require_input(const fs::path& p, const std::string& key) {
  if (p.empty()) throw ConfigError(key + " is required for this command");
  if (!fs::exists(p)) throw ConfigError(key + ": '" + p.string() + "' does not exist");
}

inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  io::atomic_write(path, text);
}

inline std::vector<data::StoryRecord> load_split(const fs::path& path, const std::string& split, std::ostream& out) {
  auto load = data::load_stories(path);
  for (const auto& w : load.warnings) out << "warning: " << w << '\n';
  auto records = data::filter_split(load.records, split);
  if (records.empty()) throw Error("no stories with split '" + split + "' in '" + path.string() + "'");
  return records;
}

template <typename T>
void seed_embeddings(const RunConfig& c, model::StoryModel<T>& m, const text::Vocab& vocab,
                     const std::vector<data::StoryRecord>& records, std::ostream& out) {
  if (!c.paths.word_vectors.empty()) {
    std::ifstream is(c.paths.word_vectors);
    const auto imported = text::read_embeddings(is);
    const text::EmbeddingTable<T> current{m.params.embeddings[0], true};
    m.set_embeddings(text::align_embeddings(imported, vocab, current).table);
    out << "word vectors: imported from " << c.paths.word_vectors.string() << '\n';
  } else if (c.word2vec.enabled) {
    text::SkipgramStats stats;
    const auto table =
        text::train_skipgram<T>(data::segment_ids(records, vocab), vocab.size(), c.word2vec.skipgram, &stats);
    m.set_embeddings(table.table);
    out << fmt::format("word vectors: skip-gram, final loss {:.4f}\n",
                       stats.epoch_loss.empty() ? 0.0 : stats.epoch_loss.back());
  }
}

template <typename T>
int train_as(const RunConfig& c, std::ostream& out) {
  const auto records = load_split(c.paths.stories, c.data.train_split, out);
  const auto store = data::load_embeddings(c.paths.embeddings);
  data::check_joined(store, records);
  const auto vocab = text::Vocab::build(data::segment_corpus(records), c.data.min_count);

  model::ModelConfig mc = c.model;
  mc.image_dim = static_cast<int>(store.image_dim());
  mc.vocab_size = static_cast<int>(vocab.size());
  auto m = model::StoryModel<T>::initialized(mc, c.seed);
  seed_embeddings(c, m, vocab, records, out);
  const auto examples = data::build_examples<T>(records, store, vocab);
  out << fmt::format("train: {} stories, vocabulary {}, {} parameters, {} precision\n", records.size(),
                     vocab.size(), model::parameter_count(m.params), c.train.precision);

  std::string log;
  auto result = training::train<T>(std::move(m), examples, c.train, std::nullopt,
                                   [&](const training::EpochStats& e) {
                                     log += Json{{"epoch", e.epoch},
                                                 {"mean_loss", e.mean_loss},
                                                 {"steps", e.steps},
                                                 {"rejected_steps", e.rejected_steps}}
                                                .dump() +
                                            '\n';
                                     if (e.epoch == 1 || e.epoch % 50 == 0 || e.epoch == c.train.epochs) {
                                       out << fmt::format("epoch {:>4}  loss {:.6f}\n", e.epoch, e.mean_loss);
                                     }
                                   });
  const double final_loss = model::evaluate_loss<T>(result.model, examples);

  const training::Checkpoint<T> ck{mc, c.train, vocab, result.model.params, result.optim};
  const auto ckpt = c.checkpoint_path();
  write_text(ckpt, training::serialize_checkpoint(ck));
  write_text(c.paths.out / "train_log.jsonl", log);
  const Json report = {{"stories", records.size()},
                       {"vocab_size", vocab.size()},
                       {"parameters", model::parameter_count(result.model.params)},
                       {"epochs", result.epochs.size()},
                       {"final_loss", final_loss},
                       {"checkpoint", ckpt.string()}};
  write_text(c.paths.out / "train_report.json", report.dump(2) + '\n');
  out << fmt::format("final loss {:.6f}; checkpoint {}\n", final_loss, ckpt.string());
  return 0;
}

template <typename T>
int generate_as(const RunConfig& c, std::string_view bytes, std::ostream& out) {
  const auto ck = training::deserialize_checkpoint<T>(bytes);
  if (ck.vocab.size() != static_cast<std::size_t>(ck.model_config.vocab_size)) {
    throw FormatError(FormatError::Kind::kCorrupt,
                      fmt::format("checkpoint/vocab mismatch: model has {} outputs, vocabulary has {} tokens",
                                  ck.model_config.vocab_size, ck.vocab.size()));
  }
  const model::StoryModel<T> m{ck.model_config, ck.params};
  m.check_shapes();
  const auto records = load_split(c.paths.stories, c.data.eval_split, out);
  const auto store = data::load_embeddings(c.paths.embeddings);
  if (store.image_dim() != static_cast<std::size_t>(m.config.image_dim)) {
    throw DimensionError(fmt::format("embeddings have dimension {}, checkpoint expects {}", store.image_dim(),
                                     m.config.image_dim));
  }
  data::check_joined(store, records);

  std::vector<data::CandidateRecord> stories;
  for (const auto& r : records) {
    const auto story = model::generate_story(m, data::resolve_images<T>(store, r), c.decode);
    data::CandidateRecord cand{r.story_id, {}, ""};
    for (std::size_t k = 0; k < model::kNumImages; ++k) {
      cand.texts[k] = model::segment_text(ck.vocab, model::strip_eos(story.segments[k]));
    }
    cand.concatenated = data::join_segments(cand.texts);
    stories.push_back(std::move(cand));
  }
  std::ostringstream lines;
  data::write_candidates(lines, stories);
  const auto path = c.candidates_path();
  write_text(path, lines.str());

  const auto rep = repetition_summary(stories);
  const Json report = {{"stories", stories.size()},
                       {"decode", {{"max_len", c.decode.max_len}, {"beam_width", c.decode.beam_width}}},
                       {"repetition", {{"ngram", kRepeatN}, {"fraction", rep.fraction}, {"flagged", rep.flagged}}}};
  write_text(c.paths.out / "generate_report.json", report.dump(2) + '\n');
  out << fmt::format("generated {} stories -> {}\n", stories.size(), path.string());
  out << fmt::format("repetition: {:.1f}% of stories repeat a {}-gram across segments\n", 100.0 * rep.fraction,
                     kRepeatN);
  return 0;
}

inline std::vector<rating::RatingTask> rating_pool(const RunConfig& c, std::ostream& out) {
  auto generated = data::load_candidates(c.candidates_path());
  if (c.rating.max_stories && generated.size() > c.rating.max_stories) generated.resize(c.rating.max_stories);
  std::set<std::string> ids;
  for (const auto& g : generated) ids.insert(g.story_id);
  auto load = data::load_stories(c.paths.stories);
  std::vector<data::StoryRecord> human;
  for (auto& r : load.records) {
    if (ids.count(r.story_id)) human.push_back(std::move(r));
  }
  if (human.size() != generated.size()) {
    out << fmt::format("warning: {} of {} generated stories have no human counterpart\n",
                       generated.size() - human.size(), generated.size());
  }
  return rating::build_pool(generated, human, c.seed);
}

}  // namespace detail

inline int cmd_train(const RunConfig& c, std::ostream& out) {
  detail::require_input(c.paths.stories, "paths.stories");
  detail::require_input(c.paths.embeddings, "paths.embeddings");
  if (!c.paths.word_vectors.empty()) detail::require_input(c.paths.word_vectors, "paths.word_vectors");
  return c.train.precision == "float" ? detail::train_as<float>(c, out) : detail::train_as<double>(c, out);
}

inline int cmd_generate(const RunConfig& c, std::ostream& out) {
  detail::require_input(c.checkpoint_path(), "paths.checkpoint");
  detail::require_input(c.paths.stories, "paths.stories");
  detail::require_input(c.paths.embeddings, "paths.embeddings");
  const auto bytes = io::read_file(c.checkpoint_path());
  switch (training::checkpoint_scalar_bytes(bytes)) {
    case 8:
      return detail::generate_as<double>(c, bytes, out);
    case 4:
      return detail::generate_as<float>(c, bytes, out);
    default:
      throw FormatError(FormatError::Kind::kCorrupt, "checkpoint: unknown scalar width");
  }
}

inline int cmd_evaluate(const RunConfig& c, std::ostream& out) {
  detail::require_input(c.candidates_path(), "paths.candidates");
  detail::require_input(c.paths.stories, "paths.stories");
  const auto candidates = data::load_candidates(c.candidates_path());
  const auto references = detail::load_split(c.paths.stories, c.data.eval_split, out);

  std::map<std::string, const data::CandidateRecord*> by_id;
  for (const auto& cand : candidates) by_id[cand.story_id] = &cand;
  std::set<std::string> ref_ids;
  std::vector<std::string> missing, extra;
  for (const auto& r : references) {
    ref_ids.insert(r.story_id);
    if (!by_id.count(r.story_id)) missing.push_back(r.story_id);
  }
  for (const auto& cand : candidates) {
    if (!ref_ids.count(cand.story_id)) extra.push_back(cand.story_id);
  }
  if (!missing.empty() || !extra.empty()) throw IdMismatch(missing, extra);

  std::vector<metrics::EvalPair> pairs;
  for (const auto& r : references) {
    pairs.push_back({r.story_id, by_id.at(r.story_id)->concatenated, {data::join_segments(r.texts)}});
  }
  const auto report = metrics::evaluate_corpus(pairs);
  const auto table = metrics::render_table(report);
  detail::write_text(c.paths.out / "metrics.json", metrics::to_json(report).dump(2) + '\n');
  detail::write_text(c.paths.out / "metrics.txt", table);
  out << table;
  return 0;
}

inline int cmd_synth_data(const RunConfig& c, std::ostream& out) {
  const auto ds = data::synth_dataset(c.synth);
  std::ostringstream lines;
  data::write_stories(lines, ds.records);
  detail::write_text(c.paths.out / "stories.jsonl", lines.str());
  detail::write_text(c.paths.out / "images.vemb", data::serialize_embeddings(ds.store));
  out << fmt::format("wrote {} stories and {} embeddings to {}\n", ds.records.size(), ds.store.size(),
                     c.paths.out.string());
  return 0;
}

// Blocks until SIGINT or SIGTERM.
inline int cmd_serve_ratings(const RunConfig& c, std::ostream& out) {
  detail::require_input(c.candidates_path(), "paths.candidates");
  detail::require_input(c.paths.stories, "paths.stories");
  if (!c.paths.static_dir.empty()) detail::require_input(c.paths.static_dir, "paths.static_dir");
  auto pool = detail::rating_pool(c, out);
  const auto log_path = c.ratings_log_path();
  if (log_path.has_parent_path()) fs::create_directories(log_path.parent_path());
  rating::RatingService service(std::move(pool), log_path, {c.rating.raters_per_task, c.rating.scale_max});
  for (const auto& w : service.replay_warnings()) out << "warning: " << w << '\n';
  rating::RatingServer server(service, c.paths.static_dir);
  const int port = c.rating.port == 0 ? server.bind_any_port(c.rating.host)
                                       : (server.bind(c.rating.host, c.rating.port) ? c.rating.port : -1);
  if (port < 0) throw Error(fmt::format("cannot listen on {}:{}", c.rating.host, c.rating.port));

  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
  std::atomic<bool> signalled{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&stop_signals, &sig);
    signalled = true;
    server.stop();
  });
  out << fmt::format("serving {} tasks ({} ratings on record) at http://{}:{}\n", service.pool_size(),
                     service.ratings().size(), c.rating.host, port)
      << std::flush;
  const bool clean = server.listen_after_bind();
  // The server can also stop on its own; release the waiter then.
  if (!signalled) pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  if (!clean && !signalled) throw Error("rating server stopped unexpectedly");
  out << "stopped\n";
  return 0;
}

}  // namespace vist::cli
