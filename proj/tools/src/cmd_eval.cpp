// postprocess, eval-psds, eval-onset-f, aso.

#include <charconv>
#include <map>
#include <memory>
#include <set>

#include "commands.h"
#include "sedkit/aso.h"
#include "sedkit/median_filter.h"
#include "sedkit/onset.h"
#include "sedkit/parallel.h"
#include "sedkit/psds.h"

namespace sedkit::cli {

namespace {

std::vector<double> read_sample(const std::string& path) {
  const std::string text = io::read_file(path);
  std::vector<double> values;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    std::string_view line(text.data() + start, nl - start);
    start = nl + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    std::size_t lead = 0;
    while (lead < line.size() && (line[lead] == ' ' || line[lead] == '\t')) ++lead;
    line.remove_prefix(lead);
    if (line.empty()) continue;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || ptr != line.data() + line.size() || !std::isfinite(v)) {
      throw ParseError(path, line_no, lead + 1, "expected one number per line, got '" + std::string(line) + "'");
    }
    values.push_back(v);
  }
  return values;
}

// Events of every row, class ids taken from `vocab`.
ClipEvents group_events(const std::vector<io::EventRow>& rows, const ClassVocabulary& vocab) {
  ClipEvents out;
  for (const auto& r : rows) out[r.clip_id].push_back({vocab.index(r.label), r.onset, r.offset});
  return out;
}

}  // namespace

Command add_postprocess(CLI::App& root, CommonOptions& common) {
  struct Args {
    std::string scores, vocab, out, events_out;
    double resolution = kDefaultResolution;
    bool logits = false;
    std::optional<double> median_filter;
    std::optional<double> threshold;
    FileFormat format = FileFormat::Tsv;
  };
  auto args = std::make_shared<Args>();
  CLI::App* app = root.add_subcommand("postprocess", "Median filtering and event decoding of frame scores");
  app->add_option("--scores", args->scores, "Directory of per-clip score files")
      ->required();
  app->add_option("--vocab", args->vocab, "Class list (needed for binary scores)");
  app->add_option("--resolution", args->resolution, "Frame length of binary scores in seconds")
      ->capture_default_str()->check(CLI::PositiveNumber);
  app->add_flag("--logits", args->logits, "Inputs are logits; the sigmoid is applied first");
  app->add_option("--median-filter", args->median_filter, "Median filter length in seconds")
      ->check(CLI::PositiveNumber);
  app->add_option("--threshold", args->threshold, "Decode events at this probability")
      ->check(CLI::Range(0.0, 1.0));
  app->add_option("--out", args->out, "Directory for the processed score files");
  app->add_option("--events-out", args->events_out, "Events TSV of the decoded detections");
  add_format_option(app, args->format);
  add_common_options(app, common);

  return {app, [args](RunContext& ctx) {
    if (args->out.empty() && args->events_out.empty()) {
      throw UsageError("nothing to write: give --out and/or --events-out");
    }
    if (args->threshold.has_value() == args->events_out.empty()) {
      throw UsageError("--threshold and --events-out go together");
    }
    VocabularyPtr vocab;
    if (!args->vocab.empty()) {
      ctx.add_input("--vocab", args->vocab);
      vocab = load_vocabulary(args->vocab);
    }
    ctx.add_input("--scores", args->scores);
    const auto entries = list_batch(args->scores);
    auto scores = load_score_batch(entries, args->logits ? ScoreKind::Logit : ScoreKind::Probability,
                                   vocab, args->resolution, ctx.threads());
    if (!args->out.empty()) prepare_output_dir(args->out);
    std::vector<std::vector<io::EventRow>> rows(entries.size());
    parallel_for(entries.size(), ctx.threads(), [&](std::size_t i) {
      ScoreMatrix m = args->logits ? scores[i].sigmoid() : scores[i];
      if (args->median_filter) m = median_filter(m, *args->median_filter);
      if (!args->out.empty()) {
        write_scores(args->out, entries[i].clip_id, m.grid(), m.vocabulary(), m.scores(), args->format);
      }
      if (args->threshold) {
        const auto per_class = decode_events(m, *args->threshold);
        for (const auto& events : per_class) {
          for (const auto& e : events) {
            rows[i].push_back({entries[i].clip_id, m.vocabulary().name(e.class_id), e.onset, e.offset, 0});
          }
        }
        std::stable_sort(rows[i].begin(), rows[i].end(), [](const io::EventRow& a, const io::EventRow& b) {
          return a.onset < b.onset;
        });
      }
    });
    std::size_t detections = 0;
    if (!args->events_out.empty()) {
      std::vector<io::EventRow> all;
      for (auto& r : rows) all.insert(all.end(), r.begin(), r.end());
      detections = all.size();
      io::write_events_tsv(args->events_out, all);
      ctx.add_output(args->events_out);
    }
    if (!args->out.empty()) ctx.add_output(args->out);
    if (entries.empty()) ctx.warn("score directory is empty; nothing processed");

    json report = {{"command", "postprocess"}, {"clips", entries.size()}};
    if (args->median_filter && !scores.empty()) {
      report["median_window_frames"] =
          median_window_frames(*args->median_filter, scores.front().grid().resolution());
    }
    if (args->threshold) report["detections"] = detections;
    ctx.emit_report(std::move(report));
    ctx.write_manifest(!args->out.empty() ? fs::path(args->out) / "run_manifest.json"
                                          : sibling_manifest(args->events_out));
  }};
}

Command add_eval_psds(CLI::App& root, CommonOptions& common) {
  struct Args {
    std::string scores, gt, classes, vocab, no_gt = "tpr-one";
    double resolution = kDefaultResolution;
    PsdsParams params;
    std::optional<double> median_filter;
  };
  auto args = std::make_shared<Args>();
  CLI::App* app = root.add_subcommand("eval-psds", "Threshold-independent PSDS");
  app->add_option("--scores", args->scores, "Directory of per-clip probability score files")
      ->required();
  app->add_option("--gt", args->gt, "Ground-truth events TSV")->required();
  app->add_option("--dtc", args->params.rho_dtc, "Detection tolerance criterion")->capture_default_str();
  app->add_option("--gtc", args->params.rho_gtc, "Ground-truth intersection criterion")->capture_default_str();
  app->add_option("--emax", args->params.e_max, "Maximum eFPR (false positives per hour)")->capture_default_str();
  app->add_option("--alpha-st", args->params.alpha_st, "Across-class variance penalty")->capture_default_str();
  app->add_option("--classes", args->classes, "Evaluate only these classes (one per line)")
      ;
  app->add_option("--median-filter", args->median_filter, "Median filter length in seconds")
      ->check(CLI::PositiveNumber);
  app->add_option("--no-gt-classes", args->no_gt, "Classes without ground truth: tpr-one or exclude")
      ->check(CLI::IsMember({"tpr-one", "exclude"}))->capture_default_str();
  app->add_option("--vocab", args->vocab, "Class list of binary score files");
  app->add_option("--resolution", args->resolution, "Frame length of binary scores in seconds")
      ->capture_default_str()->check(CLI::PositiveNumber);
  add_common_options(app, common);

  return {app, [args](RunContext& ctx) {
    PsdsParams params = args->params;
    params.median_filter_seconds = args->median_filter;
    params.no_ground_truth =
        args->no_gt == "exclude" ? NoGroundTruthPolicy::Exclude : NoGroundTruthPolicy::TprOne;
    params.threads = ctx.threads();
    params.validate();

    VocabularyPtr file_vocab;
    if (!args->vocab.empty()) {
      ctx.add_input("--vocab", args->vocab);
      file_vocab = load_vocabulary(args->vocab);
    }
    ctx.add_input("--scores", args->scores);
    ctx.add_input("--gt", args->gt);
    const auto entries = list_batch(args->scores);
    auto loaded = load_score_batch(entries, ScoreKind::Probability, file_vocab, args->resolution,
                                   ctx.threads());
    VocabularyPtr eval_vocab = loaded.empty() ? file_vocab : loaded.front().vocabulary_ptr();
    if (!args->classes.empty()) {
      ctx.add_input("--classes", args->classes);
      eval_vocab = load_vocabulary(args->classes);
      parallel_for(loaded.size(), ctx.threads(),
                   [&](std::size_t i) { loaded[i] = project_vocabulary(loaded[i], eval_vocab); });
    }

    const auto rows = io::read_events_tsv(args->gt);
    GroundTruth gt;
    std::size_t skipped = 0;
    std::size_t kept = 0;
    std::set<std::string> outside;
    for (const auto& r : rows) {
      const auto id = eval_vocab ? eval_vocab->find(r.label) : std::nullopt;
      if (!id) {
        ++skipped;
        outside.insert(r.label);
        continue;
      }
      gt[r.clip_id].push_back({*id, r.onset, r.offset});
      ++kept;
    }
    if (skipped) {
      ctx.warn("skipped " + std::to_string(skipped) + " ground-truth events of " +
               std::to_string(outside.size()) + " classes outside the evaluated vocabulary");
    }

    json parameters = {{"dtc", params.rho_dtc},
                       {"gtc", params.rho_gtc},
                       {"alpha_st", params.alpha_st},
                       {"emax", params.e_max},
                       {"no_gt_classes", args->no_gt},
                       {"median_filter", args->median_filter ? json(*args->median_filter) : json()}};
    json report = {{"command", "eval-psds"},
                   {"clips", loaded.size()},
                   {"ground_truth_events", kept},
                   {"skipped_ground_truth_events", skipped},
                   {"parameters", parameters}};

    if (loaded.empty() || kept == 0) {
      ctx.warn(loaded.empty() ? "no score files; PSDS is undefined"
                              : "no ground-truth events in the evaluated classes; PSDS is undefined");
      report["psds"] = nullptr;
      report["dataset_duration_hours"] = nullptr;
      report["classes"] = json::array();
    } else {
      std::vector<ClipScores> clips;
      clips.reserve(loaded.size());
      for (std::size_t i = 0; i < loaded.size(); ++i) clips.push_back({entries[i].clip_id, std::move(loaded[i])});
      const PsdsResult res = psds(clips, gt, params);
      report["psds"] = res.psds;
      report["dataset_duration_hours"] = res.dataset_duration_hours;
      json classes = json::array();
      for (const auto& c : res.curves) {
        json points = json::array();
        for (const auto& p : c.points) {
          points.push_back({{"threshold", std::isfinite(p.threshold) ? json(p.threshold) : json()},
                            {"tp", p.tp},
                            {"fp", p.fp},
                            {"tpr", p.tpr},
                            {"efpr", p.efpr}});
        }
        classes.push_back({{"name", c.name},
                           {"ground_truth_events", c.num_ground_truth},
                           {"included", c.included},
                           {"roc", points}});
      }
      report["classes"] = classes;
    }
    ctx.emit_report(std::move(report));
    ctx.write_manifest({});
  }};
}

Command add_eval_onset_f(CLI::App& root, CommonOptions& common) {
  struct Args {
    std::string pred, gt;
    OnsetEvalConfig cfg;
  };
  auto args = std::make_shared<Args>();
  CLI::App* app = root.add_subcommand("eval-onset-f", "Micro-averaged onset F-measure");
  app->add_option("--pred", args->pred, "Detected events TSV")->required();
  app->add_option("--gt", args->gt, "Ground-truth events TSV")->required();
  app->add_option("--tolerance", args->cfg.tolerance, "Onset tolerance in seconds")
      ->capture_default_str()->check(CLI::PositiveNumber);
  add_common_options(app, common);

  return {app, [args](RunContext& ctx) {
    ctx.add_input("--pred", args->pred);
    ctx.add_input("--gt", args->gt);
    const auto pred_rows = io::read_events_tsv(args->pred);
    const auto gt_rows = io::read_events_tsv(args->gt);
    std::set<std::string> labels;
    for (const auto& r : pred_rows) labels.insert(r.label);
    for (const auto& r : gt_rows) labels.insert(r.label);
    const ClassVocabulary vocab(std::vector<std::string>(labels.begin(), labels.end()));
    if (pred_rows.empty() && gt_rows.empty()) ctx.warn("both event files are empty");
    const OnsetResult r = onset_f(group_events(pred_rows, vocab), group_events(gt_rows, vocab), args->cfg);
    ctx.emit_report({{"command", "eval-onset-f"},
                     {"tolerance", args->cfg.tolerance},
                     {"precision", r.precision},
                     {"recall", r.recall},
                     {"f1", r.f1},
                     {"tp", r.tp},
                     {"fp", r.fp},
                     {"fn", r.fn}});
    ctx.write_manifest({});
  }};
}

Command add_aso(CLI::App& root, CommonOptions& common) {
  struct Args {
    std::string a, b;
    AsoConfig cfg;
  };
  auto args = std::make_shared<Args>();
  CLI::App* app = root.add_subcommand("aso", "Almost Stochastic Order significance test");
  app->add_option("--a", args->a, "Scores of system A, one per line")->required();
  app->add_option("--b", args->b, "Scores of system B, one per line")->required();
  app->add_option("--alpha", args->cfg.alpha, "Confidence level before correction")->capture_default_str();
  app->add_option("--comparisons", args->cfg.num_comparisons, "Bonferroni divisor")->capture_default_str();
  app->add_option("--threshold", args->cfg.threshold, "epsilon_min below this is significant")
      ->capture_default_str();
  app->add_option("--bootstrap", args->cfg.bootstrap_samples, "Bootstrap iterations")->capture_default_str();
  add_common_options(app, common);

  return {app, [args](RunContext& ctx) {
    AsoConfig cfg = args->cfg;
    cfg.rng_seed = ctx.seed();
    cfg.threads = ctx.threads();
    cfg.validate();
    ctx.add_input("--a", args->a);
    ctx.add_input("--b", args->b);
    const auto a = read_sample(args->a);
    const auto b = read_sample(args->b);
    json report = {{"command", "aso"},
                   {"n_a", a.size()},
                   {"n_b", b.size()},
                   {"alpha", cfg.alpha},
                   {"comparisons", cfg.num_comparisons},
                   {"threshold", cfg.threshold},
                   {"bootstrap", cfg.bootstrap_samples}};
    if (a.empty() || b.empty()) {
      ctx.warn("a score sample is empty; the test is undefined");
      report["violation_ratio"] = nullptr;
      report["epsilon_min"] = nullptr;
      report["significant"] = nullptr;
    } else {
      const AsoResult r = aso(a, b, cfg);
      report["violation_ratio"] = r.violation_ratio;
      report["epsilon_min"] = r.epsilon_min;
      report["significant"] = r.significant;
    }
    ctx.emit_report(std::move(report));
    ctx.write_manifest({});
  }};
}

}  // namespace sedkit::cli
