// rasterize, weights, sample, augment, resample.

#include <algorithm>
#include <map>
#include <memory>
#include <set>

#include "commands.h"
#include "sedkit/augment.h"
#include "sedkit/parallel.h"
#include "sedkit/random.h"
#include "sedkit/resample.h"
#include "sedkit/sampling.h"

namespace sedkit::cli {

namespace {

// Drops rows whose label is not in the vocabulary, reporting how many.
std::vector<io::EventRow> filter_known(std::vector<io::EventRow> rows, const ClassVocabulary& vocab,
                                       RunContext& ctx) {
  const auto before = rows.size();
  std::erase_if(rows, [&](const io::EventRow& r) { return !vocab.contains(r.label); });
  if (rows.size() != before) {
    ctx.warn("skipped " + std::to_string(before - rows.size()) +
             " events with classes outside the vocabulary");
  }
  return rows;
}

std::vector<std::pair<std::string, double>> load_durations(const std::string& path,
                                                           RunContext& ctx) {
  if (path.empty()) return {};
  ctx.add_input("--durations", path);
  return io::read_durations_tsv(path);
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  }
  return t;
}

std::string optional_number(const std::optional<double>& v) {
  return v ? io::format_double(*v) : std::string();
}

}  // namespace

Command add_rasterize(CLI::App& root, CommonOptions& common) {
  struct Args {
    std::string events, vocab, durations, out, overlap = "any";
    double resolution = kDefaultResolution;
    std::optional<double> clip_duration;
    bool clamp = false;
    bool skip_unknown = false;
    FileFormat format = FileFormat::Tsv;
  };
  auto args = std::make_shared<Args>();
  CLI::App* app = root.add_subcommand("rasterize", "Strong-label events to per-clip frame targets");
  app->add_option("--events", args->events, "Events TSV")->required();
  app->add_option("--vocab", args->vocab, "Class list, one per line")->required();
  app->add_option("--resolution", args->resolution, "Frame length in seconds")
      ->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--clip-duration", args->clip_duration, "Duration of clips not in --durations")
      ->check(CLI::PositiveNumber);
  app->add_option("--durations", args->durations, "TSV filename<TAB>duration");
  app->add_flag("--clamp", args->clamp, "Clamp events running past the clip end");
  app->add_flag("--skip-unknown", args->skip_unknown, "Ignore events of classes outside --vocab");
  app->add_option("--overlap", args->overlap, "Frame activation rule")
      ->check(CLI::IsMember({"any", "half"}))->capture_default_str();
  app->add_option("--out", args->out, "Output directory")->required();
  add_format_option(app, args->format);
  add_common_options(app, common);

  return {app, [args](RunContext& ctx) {
    if (!args->clip_duration && args->durations.empty()) {
      throw UsageError("one of --clip-duration or --durations is required");
    }
    ctx.add_input("--events", args->events);
    ctx.add_input("--vocab", args->vocab);
    const VocabularyPtr vocab = load_vocabulary(args->vocab);
    auto rows = io::read_events_tsv(args->events);
    if (args->skip_unknown) rows = filter_known(std::move(rows), *vocab, ctx);
    const auto durations = load_durations(args->durations, ctx);
    const auto clips = io::build_annotations(rows, *vocab, durations, args->clip_duration, args->clamp);
    const OverlapRule rule = args->overlap == "half" ? OverlapRule::Half : OverlapRule::Any;

    prepare_output_dir(args->out);
    std::vector<std::size_t> frames(clips.size());
    parallel_for(clips.size(), ctx.threads(), [&](std::size_t i) {
      const FrameGrid grid = FrameGrid::covering(clips[i].duration(), args->resolution);
      const TargetMatrix t = rasterize_events(clips[i], *vocab, grid, rule);
      write_scores(args->out, clips[i].clip_id(), grid, *vocab, t.values(), args->format);
      frames[i] = grid.num_frames();
    });
    if (clips.empty()) ctx.warn("no clips in the input; nothing written");
    ctx.add_output(args->out);

    std::size_t total_frames = 0;
    for (auto f : frames) total_frames += f;
    ctx.emit_report({{"command", "rasterize"},
                     {"clips", clips.size()},
                     {"events", rows.size()},
                     {"frames", total_frames},
                     {"resolution", args->resolution},
                     {"out", args->out}});
    ctx.write_manifest(fs::path(args->out) / "run_manifest.json");
  }};
}

Command add_weights(CLI::App& root, CommonOptions& common) {
  struct Args {
    std::string events, vocab, durations, out, aggregate = "sum", unlabeled = "skip";
    std::optional<double> clip_duration;
    bool skip_unknown = false;
  };
  auto args = std::make_shared<Args>();
  CLI::App* app = root.add_subcommand("weights", "Inverse-label-frequency clip sampling weights");
  app->add_option("--events", args->events, "Events TSV")->required();
  app->add_option("--vocab", args->vocab, "Class list")->required();
  app->add_option("--durations", args->durations,
                  "TSV filename<TAB>duration; listed clips without events count as unlabeled")
      ;
  app->add_option("--clip-duration", args->clip_duration,
                  "Duration of clips not in --durations (default: last event offset)")
      ->check(CLI::PositiveNumber);
  app->add_option("--aggregate", args->aggregate, "Combine a clip's inverse label frequencies")
      ->check(CLI::IsMember({"sum", "mean"}))->capture_default_str();
  app->add_option("--unlabeled", args->unlabeled, "Clips without labels: skip or minimum weight")
      ->check(CLI::IsMember({"skip", "min"}))->capture_default_str();
  app->add_flag("--skip-unknown", args->skip_unknown, "Ignore events of classes outside --vocab");
  app->add_option("--out", args->out, "Weights TSV to write")->required();
  add_common_options(app, common);

  return {app, [args](RunContext& ctx) {
    ctx.add_input("--events", args->events);
    ctx.add_input("--vocab", args->vocab);
    const VocabularyPtr vocab = load_vocabulary(args->vocab);
    auto rows = io::read_events_tsv(args->events);
    if (args->skip_unknown) rows = filter_known(std::move(rows), *vocab, ctx);
    auto durations = load_durations(args->durations, ctx);
    if (!args->clip_duration) {
      std::map<std::string, double> last;
      for (const auto& r : rows) last[r.clip_id] = std::max(last[r.clip_id], r.offset);
      std::set<std::string> listed;
      for (const auto& d : durations) listed.insert(d.first);
      for (const auto& [id, end] : last) {
        if (!listed.count(id)) durations.emplace_back(id, end);
      }
    }
    const auto clips = io::build_annotations(rows, *vocab, durations, args->clip_duration, false);

    WeightOptions options;
    options.aggregate = args->aggregate == "mean" ? LabelAggregate::Mean : LabelAggregate::Sum;
    options.unlabeled = args->unlabeled == "min" ? UnlabeledPolicy::MinimumWeight : UnlabeledPolicy::Skip;
    SamplingWeights weights;
    if (clips.empty()) {
      ctx.warn("no clips in the input; writing an empty weights file");
    } else {
      weights = sampling_weights(clips, *vocab, options);
      if (weights.size() < clips.size()) {
        ctx.warn(std::to_string(clips.size() - weights.size()) + " clips without labels were skipped");
      }
    }
    io::write_weights_tsv(args->out, weights);
    ctx.add_output(args->out);

    json seconds = json::object();
    if (!clips.empty()) {
      const auto freq = label_frequencies(clips, *vocab);
      for (std::size_t c = 0; c < vocab->size(); ++c) seconds[vocab->name(c)] = freq[c];
    }
    ctx.emit_report({{"command", "weights"},
                     {"clips", weights.size()},
                     {"class_seconds", seconds},
                     {"out", args->out}});
    ctx.write_manifest(sibling_manifest(args->out));
  }};
}

Command add_sample(CLI::App& root, CommonOptions& common) {
  struct Args {
    std::string weights, out;
    std::size_t n = 0;
  };
  auto args = std::make_shared<Args>();
  CLI::App* app = root.add_subcommand("sample", "Weighted clip draws with replacement");
  app->add_option("--weights", args->weights, "Weights TSV")->required();
  app->add_option("-n,--num", args->n, "Number of draws")->required();
  app->add_option("--out", args->out, "TSV of drawn clip ids")->required();
  add_common_options(app, common);

  return {app, [args](RunContext& ctx) {
    ctx.add_input("--weights", args->weights);
    const SamplingWeights weights = io::read_weights_tsv(args->weights);
    std::vector<std::string> drawn;
    if (weights.empty()) {
      ctx.warn("weights file lists no clips; writing an empty sample");
    } else {
      drawn = weighted_sample(weights, args->n, ctx.seed());
    }
    std::string text = "filename\n";
    for (const auto& id : drawn) text += id + '\n';
    io::write_file_atomic(args->out, text);
    ctx.add_output(args->out);

    const std::set<std::string> distinct(drawn.begin(), drawn.end());
    ctx.emit_report({{"command", "sample"},
                     {"draws", drawn.size()},
                     {"distinct_clips", distinct.size()},
                     {"out", args->out}});
    ctx.write_manifest(sibling_manifest(args->out));
  }};
}

Command add_augment(CLI::App& root, CommonOptions& common) {
  struct Args {
    std::string input, out;
    AugmentConfig cfg;
    bool no_mixup = false, no_fms = false, no_filter = false, no_warp = false;
  };
  auto args = std::make_shared<Args>();
  CLI::App* app = root.add_subcommand("augment", "Seeded spectrogram augmentation");
  app->add_option("--input", args->input, "Directory of per-clip spectrogram .sedb files")
      ->required();
  app->add_option("--out", args->out, "Output directory")->required();
  auto& c = args->cfg;
  app->add_option("--mixup-alpha", c.mixup_alpha, "Beta parameter of mixup")->capture_default_str();
  app->add_option("--fms-alpha", c.fms_alpha, "Beta parameter of Freq-MixStyle")->capture_default_str();
  app->add_option("--fms-prob", c.fms_prob, "Probability of applying Freq-MixStyle")->capture_default_str();
  app->add_option("--filter-bands-min", c.filter_bands_min)->capture_default_str();
  app->add_option("--filter-bands-max", c.filter_bands_max)->capture_default_str();
  app->add_option("--filter-db-min", c.filter_db_min)->capture_default_str();
  app->add_option("--filter-db-max", c.filter_db_max)->capture_default_str();
  app->add_option("--warp-min", c.warp_min)->capture_default_str();
  app->add_option("--warp-max", c.warp_max)->capture_default_str();
  app->add_flag("--no-mixup", args->no_mixup);
  app->add_flag("--no-fms", args->no_fms);
  app->add_flag("--no-filter", args->no_filter);
  app->add_flag("--no-warp", args->no_warp);
  add_common_options(app, common);

  return {app, [args](RunContext& ctx) {
    AugmentConfig cfg = args->cfg;
    cfg.enable_mixup = !args->no_mixup;
    cfg.enable_freq_mixstyle = !args->no_fms;
    cfg.enable_filter = !args->no_filter;
    cfg.enable_warp = !args->no_warp;
    cfg.validate();
    ctx.add_input("--input", args->input);

    const auto entries = list_batch(args->input);
    std::vector<Spectrogram> specs(entries.size());
    parallel_for(entries.size(), ctx.threads(), [&](std::size_t i) {
      io::SedbFile f = load_sedb(entries[i]);
      specs[i] = Spectrogram(f.layout == io::Layout::FrequencyMajor ? std::move(f.values)
                                                                     : transpose(f.values));
    });

    // Partner of clip i: a uniformly drawn other clip of the same shape.
    const std::size_t n = entries.size();
    const std::uint64_t partner_seed = derive_seed(ctx.seed(), 0);
    const std::uint64_t pipeline_seed = derive_seed(ctx.seed(), 1);
    std::vector<std::optional<std::size_t>> partner(n);
    std::size_t unpartnered = 0;
    for (std::size_t i = 0; i < n && n > 1; ++i) {
      Rng rng = make_rng(derive_seed(partner_seed, i));
      std::size_t j = std::uniform_int_distribution<std::size_t>(0, n - 2)(rng);
      if (j >= i) ++j;
      if (specs[j].bins() == specs[i].bins() && specs[j].frames() == specs[i].frames()) {
        partner[i] = j;
      } else {
        ++unpartnered;
      }
    }
    if (unpartnered) {
      ctx.warn(std::to_string(unpartnered) +
               " clips drew a partner of a different shape; mixing transforms skipped for them");
    }

    prepare_output_dir(args->out);
    std::vector<AugmentRecord> records(n);
    parallel_for(n, ctx.threads(), [&](std::size_t i) {
      const Spectrogram* other = partner[i] ? &specs[*partner[i]] : nullptr;
      AugmentOutcome res = augment_pipeline(specs[i], other, cfg, derive_seed(pipeline_seed, i));
      io::write_sedb(fs::path(args->out) / (entries[i].clip_id + ".sedb"), res.spectrogram.values(),
                     io::Layout::FrequencyMajor);
      records[i] = std::move(res.record);
    });

    std::string log = "clip_id\tpartner\twarp_scale\tfilter_bands\tfms_lambda\tmixup_lambda\n";
    for (std::size_t i = 0; i < n; ++i) {
      const auto& r = records[i];
      log += entries[i].clip_id + '\t' + (partner[i] ? entries[*partner[i]].clip_id : "") + '\t' +
             optional_number(r.warp_scale) + '\t' +
             (r.filter ? std::to_string(r.filter->boundaries.size()) : "") + '\t' +
             optional_number(r.fms_lambda) + '\t' + optional_number(r.mixup_lambda) + '\n';
    }
    io::write_file_atomic(fs::path(args->out) / "manifest.tsv", log);
    if (n == 0) ctx.warn("input directory holds no spectrograms; nothing augmented");
    ctx.add_output(args->out);
    ctx.emit_report({{"command", "augment"}, {"clips", n}, {"out", args->out}});
    ctx.write_manifest(fs::path(args->out) / "run_manifest.json");
  }};
}

Command add_resample(CLI::App& root, CommonOptions& common) {
  struct Args {
    std::string input, out;
    std::size_t frames = kCanonicalFrames;
  };
  auto args = std::make_shared<Args>();
  CLI::App* app = root.add_subcommand("resample", "Resample embedding sequences to a fixed frame count");
  app->add_option("--input", args->input, "Directory of per-clip embedding .sedb files")
      ->required();
  app->add_option("--frames", args->frames, "Output frames per clip")
      ->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--out", args->out, "Output directory")->required();
  add_common_options(app, common);

  return {app, [args](RunContext& ctx) {
    ctx.add_input("--input", args->input);
    const auto entries = list_batch(args->input);
    prepare_output_dir(args->out);
    std::vector<std::size_t> source_frames(entries.size());
    parallel_for(entries.size(), ctx.threads(), [&](std::size_t i) {
      io::SedbFile f = load_sedb(entries[i]);
      if (f.layout != io::Layout::TimeMajor) {
        throw ValidationError(entries[i].path.string() + ": embeddings must be time-major");
      }
      source_frames[i] = f.values.rows();
      const EmbeddingSequence e(entries[i].clip_id, std::move(f.values));
      io::write_sedb(fs::path(args->out) / (entries[i].clip_id + ".sedb"),
                     resample(e, args->frames).values());
    });
    if (entries.empty()) ctx.warn("input directory holds no embeddings; nothing resampled");
    std::map<std::size_t, std::size_t> histogram;
    for (auto s : source_frames) ++histogram[s];
    json lengths = json::object();
    for (const auto& [s, count] : histogram) lengths[std::to_string(s)] = count;
    ctx.add_output(args->out);
    ctx.emit_report({{"command", "resample"},
                     {"clips", entries.size()},
                     {"frames", args->frames},
                     {"input_frames", lengths},
                     {"out", args->out}});
    ctx.write_manifest(fs::path(args->out) / "run_manifest.json");
  }};
}

}  // namespace sedkit::cli
