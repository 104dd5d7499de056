// distill-targets, probe-train.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>

#include "commands.h"
#include "sedkit/distill.h"
#include "sedkit/parallel.h"
#include "sedkit/probe.h"
#include "sedkit/resample.h"

namespace sedkit::cli {

namespace {

// Keeps soft targets strictly inside (0, 1) after the cast to f32.
double open_unit_f32(double v) {
  const double lo = static_cast<double>(std::numeric_limits<float>::denorm_min());
  const double hi = static_cast<double>(std::nextafter(1.0f, 0.0f));
  return std::clamp(v, lo, hi);
}

VocabularyPtr index_vocabulary(std::size_t classes) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < classes; ++c) names.push_back("class_" + std::to_string(c));
  return make_vocabulary(std::move(names));
}

std::map<std::string, BatchEntry> by_clip(const std::vector<BatchEntry>& entries) {
  std::map<std::string, BatchEntry> m;
  for (const auto& e : entries) m.emplace(e.clip_id, e);
  return m;
}

// Head file: C x (D + 1) matrix, the last column holding the bias.
Matrix pack_head(const LinearHead& head) {
  Matrix m(head.classes(), head.dim() + 1);
  for (std::size_t c = 0; c < head.classes(); ++c) {
    for (std::size_t d = 0; d < head.dim(); ++d) m(c, d) = head.weight(c, d);
    m(c, head.dim()) = head.bias[c];
  }
  return m;
}

}  // namespace

Command add_distill_targets(CLI::App& root, CommonOptions& common) {
  struct Args {
    std::vector<std::string> members;
    std::string out, vocab;
    double resolution = kDefaultResolution;
    bool require_all = false;
    FileFormat format = FileFormat::Binary;
  };
  auto args = std::make_shared<Args>();
  CLI::App* app = root.add_subcommand("distill-targets", "Ensemble soft targets from member logits");
  app->add_option("--members", args->members, "One directory of per-clip logit .sedb files per member")
      ->required();
  app->add_option("--out", args->out, "Output directory")->required();
  app->add_flag("--require-all", args->require_all, "Fail when a clip is missing from any member");
  app->add_option("--vocab", args->vocab, "Class list (needed for TSV output)");
  app->add_option("--resolution", args->resolution, "Frame length in seconds")
      ->capture_default_str()->check(CLI::PositiveNumber);
  add_format_option(app, args->format, FileFormat::Binary);
  add_common_options(app, common);

  return {app, [args](RunContext& ctx) {
    if (args->format == FileFormat::Tsv && args->vocab.empty()) {
      throw UsageError("--format tsv needs --vocab for the class columns");
    }
    VocabularyPtr vocab;
    if (!args->vocab.empty()) {
      ctx.add_input("--vocab", args->vocab);
      vocab = load_vocabulary(args->vocab);
    }
    std::vector<std::map<std::string, BatchEntry>> members;
    std::map<std::string, std::size_t> clips;  // clip -> member count
    for (const auto& dir : args->members) {
      ctx.add_input("--members", dir);
      members.push_back(by_clip(list_batch(dir)));
      for (const auto& [id, e] : members.back()) ++clips[id];
    }
    std::vector<std::string> ids;
    std::size_t partial = 0;
    for (const auto& [id, count] : clips) {
      if (count < members.size()) {
        if (args->require_all) {
          throw ValidationError("clip '" + id + "' is present in only " + std::to_string(count) +
                                " of " + std::to_string(members.size()) + " members");
        }
        ++partial;
      }
      ids.push_back(id);
    }
    if (partial) {
      ctx.warn(std::to_string(partial) + " clips are averaged over a subset of the members");
    }

    prepare_output_dir(args->out);
    parallel_for(ids.size(), ctx.threads(), [&](std::size_t i) {
      std::vector<io::SedbFile> files;
      for (const auto& m : members) {
        const auto it = m.find(ids[i]);
        if (it == m.end()) continue;
        files.push_back(load_sedb(it->second));
        if (files.back().layout != io::Layout::TimeMajor) {
          throw ValidationError(it->second.path.string() + ": logit files must be time-major");
        }
      }
      const VocabularyPtr v = vocab ? vocab : index_vocabulary(files.front().values.cols());
      std::vector<ScoreMatrix> logits;
      for (auto& f : files) {
        if (f.values.cols() != v->size()) {
          throw VocabularyError("clip '" + ids[i] + "': member logits have " +
                                std::to_string(f.values.cols()) + " columns, expected " +
                                std::to_string(v->size()));
        }
        const std::size_t frames = f.values.rows();
        logits.emplace_back(FrameGrid(args->resolution, frames), v, std::move(f.values), ScoreKind::Logit);
      }
      const EnsembleTargets targets(ensemble_average(logits));
      Matrix values = targets.values();
      for (double& v : values.data()) v = open_unit_f32(v);
      write_scores(args->out, ids[i], targets.targets().grid(), logits.front().vocabulary(), values,
                   args->format);
    });

    std::string listing = "clip_id\tn_members\n";
    for (const auto& id : ids) listing += id + '\t' + std::to_string(clips[id]) + '\n';
    io::write_file_atomic(fs::path(args->out) / "manifest.tsv", listing);
    if (ids.empty()) ctx.warn("no member logits found; nothing written");
    ctx.add_output(args->out);
    ctx.emit_report({{"command", "distill-targets"},
                     {"clips", ids.size()},
                     {"members", members.size()},
                     {"partial_clips", partial},
                     {"out", args->out}});
    ctx.write_manifest(fs::path(args->out) / "run_manifest.json");
  }};
}

Command add_probe_train(CLI::App& root, CommonOptions& common) {
  struct Args {
    std::string embeddings, targets, soft, vocab, out, eval_embeddings, eval_out;
    double resolution = kDefaultResolution;
    double lambda = 0.5;
    std::size_t epochs = 10;
    std::size_t batch_size = 16;
    double lr = 0.5;
    std::optional<std::size_t> warmup_steps;
    double final_lr = 0.0;
    bool mixup = false;
    double mixup_alpha = 0.2;
    FileFormat format = FileFormat::Tsv;
  };
  auto args = std::make_shared<Args>();
  CLI::App* app = root.add_subcommand("probe-train", "Train a linear frame-level head on frozen embeddings");
  app->add_option("--embeddings", args->embeddings, "Directory of 250-frame embedding .sedb files")
      ->required();
  app->add_option("--targets", args->targets, "Directory of hard target files")
      ->required();
  app->add_option("--soft", args->soft, "Directory of soft target files (default: hard targets)")
      ;
  app->add_option("--vocab", args->vocab, "Class list (needed for binary targets)");
  app->add_option("--resolution", args->resolution, "Frame length in seconds")
      ->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--lambda", args->lambda, "Weight of the distillation term")
      ->capture_default_str()->check(CLI::Range(0.0, 1.0));
  app->add_option("--epochs", args->epochs)->capture_default_str();
  app->add_option("--batch-size", args->batch_size)->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--lr", args->lr, "Peak learning rate")->capture_default_str();
  app->add_option("--warmup-steps", args->warmup_steps, "Linear warmup steps (default: 10% of all steps)");
  app->add_option("--final-lr", args->final_lr)->capture_default_str();
  app->add_flag("--mixup", args->mixup, "Mix pairs of clips inside each batch");
  app->add_option("--mixup-alpha", args->mixup_alpha)->capture_default_str();
  app->add_option("--out", args->out, "Head file to write (.sedb, C x (D+1), bias last)")->required();
  app->add_option("--eval-embeddings", args->eval_embeddings, "Embeddings to score with the trained head")
      ;
  app->add_option("--eval-out", args->eval_out, "Directory for the probability score files");
  add_format_option(app, args->format);
  add_common_options(app, common);

  return {app, [args](RunContext& ctx) {
    if (args->eval_embeddings.empty() != args->eval_out.empty()) {
      throw UsageError("--eval-embeddings and --eval-out go together");
    }
    VocabularyPtr vocab;
    if (!args->vocab.empty()) {
      ctx.add_input("--vocab", args->vocab);
      vocab = load_vocabulary(args->vocab);
    }
    ctx.add_input("--embeddings", args->embeddings);
    ctx.add_input("--targets", args->targets);
    const auto embeddings = list_batch(args->embeddings);
    const auto target_files = by_clip(list_batch(args->targets));
    std::map<std::string, BatchEntry> soft_files;
    if (!args->soft.empty()) {
      ctx.add_input("--soft", args->soft);
      soft_files = by_clip(list_batch(args->soft));
    }

    std::vector<BatchEntry> hard_entries;
    for (const auto& e : embeddings) {
      const auto it = target_files.find(e.clip_id);
      if (it == target_files.end()) throw ValidationError("no targets for clip '" + e.clip_id + "'");
      hard_entries.push_back(it->second);
      if (!args->soft.empty() && !soft_files.count(e.clip_id)) {
        throw ValidationError("no soft targets for clip '" + e.clip_id + "'");
      }
    }
    if (target_files.size() > embeddings.size()) {
      ctx.warn(std::to_string(target_files.size() - embeddings.size()) +
               " target files have no embedding and were ignored");
    }
    const auto hard = load_score_batch(hard_entries, ScoreKind::Probability, vocab, args->resolution,
                                       ctx.threads());
    if (!hard.empty()) vocab = hard.front().vocabulary_ptr();

    std::vector<ProbeClip> clips(embeddings.size());
    parallel_for(embeddings.size(), ctx.threads(), [&](std::size_t i) {
      io::SedbFile f = load_sedb(embeddings[i]);
      if (f.layout != io::Layout::TimeMajor) {
        throw ValidationError(embeddings[i].path.string() + ": embeddings must be time-major");
      }
      clips[i].embedding = EmbeddingSequence(embeddings[i].clip_id, std::move(f.values));
      clips[i].hard = hard[i].scores();
      if (!args->soft.empty()) {
        clips[i].soft = load_scores(soft_files.at(embeddings[i].clip_id), ScoreKind::Probability, vocab,
                                    args->resolution).scores();
      }
    });

    ProbeConfig cfg;
    cfg.kd.lambda_kd = args->lambda;
    cfg.epochs = args->epochs;
    cfg.batch_size = args->batch_size;
    cfg.mixup = args->mixup;
    cfg.mixup_alpha = args->mixup_alpha;
    const std::size_t batches = (clips.size() + cfg.batch_size - 1) / cfg.batch_size;
    const std::size_t total = std::max<std::size_t>(1, cfg.epochs * batches);
    cfg.schedule = {.peak_lr = args->lr,
                    .warmup_steps = args->warmup_steps.value_or(total / 10),
                    .total_steps = total,
                    .final_lr = args->final_lr};

    json report = {{"command", "probe-train"}, {"clips", clips.size()}, {"out", args->out}};
    if (clips.empty()) {
      ctx.warn("no training clips; writing an empty head");
      io::write_sedb(args->out, Matrix());
    } else {
      const ProbeResult res = probe_fit(clips, cfg, ctx.seed());
      io::write_sedb(args->out, pack_head(res.head));
      report["classes"] = res.head.classes();
      report["dim"] = res.head.dim();
      report["steps"] = res.steps;
      report["final_loss"] = res.final_loss;
      report["first_batch_loss"] = res.batch_losses.empty() ? json() : json(res.batch_losses.front());
      report["last_batch_loss"] = res.batch_losses.empty() ? json() : json(res.batch_losses.back());
      report["schedule"] = {{"peak_lr", cfg.schedule.peak_lr},
                            {"warmup_steps", cfg.schedule.warmup_steps},
                            {"total_steps", cfg.schedule.total_steps},
                            {"final_lr", cfg.schedule.final_lr}};

      if (!args->eval_embeddings.empty()) {
        ctx.add_input("--eval-embeddings", args->eval_embeddings);
        const auto eval = list_batch(args->eval_embeddings);
        prepare_output_dir(args->eval_out);
        parallel_for(eval.size(), ctx.threads(), [&](std::size_t i) {
          io::SedbFile f = load_sedb(eval[i]);
          const EmbeddingSequence e(eval[i].clip_id, std::move(f.values));
          const ScoreMatrix probs =
              head_forward(e, res.head, vocab, args->resolution, false).sigmoid();
          write_scores(args->eval_out, eval[i].clip_id, probs.grid(), *vocab, probs.scores(),
                       args->format);
        });
        ctx.add_output(args->eval_out);
        report["eval_clips"] = eval.size();
      }
    }
    ctx.add_output(args->out);
    ctx.emit_report(std::move(report));
    ctx.write_manifest(sibling_manifest(args->out));
  }};
}

}  // namespace sedkit::cli
