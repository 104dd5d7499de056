#include "support.h"

#include <algorithm>
#include <iostream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "sedkit/error.h"
#include "sedkit/parallel.h"

#ifndef SEDKIT_VERSION
#define SEDKIT_VERSION "0.0.0"
#endif

namespace sedkit::cli {

namespace {

constexpr const char* kManifestName = "run_manifest.json";

std::string option_value(const CLI::Option* opt) {
  if (opt->count() == 0) return opt->get_default_str();
  const auto& results = opt->results();
  std::string joined;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (i) joined += ',';
    joined += results[i];
  }
  return joined;
}

bool is_batch_file(const fs::path& p) {
  const auto ext = p.extension();
  return (ext == ".tsv" || ext == ".sedb") && p.filename() != "manifest.tsv";
}

}  // namespace

RunContext::RunContext(std::string command, CLI::App* app, const CommonOptions& common,
                       std::ostream& out, std::ostream& err)
    : command_(std::move(command)),
      app_(app),
      common_(common),
      out_(out),
      err_(err),
      start_(std::chrono::steady_clock::now()) {}

std::size_t RunContext::threads() const { return resolve_threads(common_.threads); }

void RunContext::warn(const std::string& message) {
  warnings_.push_back(message);
  err_ << "warning: " << message << '\n';
}

void RunContext::add_input(const std::string& flag, const fs::path& path) {
  inputs_.emplace_back(flag, path);
}

void RunContext::add_output(const fs::path& path) { outputs_.push_back(path); }

void RunContext::emit_report(json report) {
  report["warnings"] = warnings_;
  const std::string text = report.dump(2) + "\n";
  if (common_.report.empty()) {
    out_ << text;
  } else {
    io::write_file_atomic(common_.report, text);
    add_output(common_.report);
  }
}

void RunContext::write_manifest(const fs::path& default_path) {
  fs::path path = common_.manifest.empty() ? default_path : fs::path(common_.manifest);
  if (path.empty() && !common_.report.empty()) path = sibling_manifest(common_.report);
  if (path.empty()) return;

  json params = json::object();
  for (const CLI::Option* opt : app_->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help") continue;
    params[name] = option_value(opt);
  }
  json inputs = json::array();
  for (const auto& [flag, p] : inputs_) {
    inputs.push_back({{"flag", flag}, {"path", p.string()}, {"sha256", digest_path(p)}});
  }
  json outputs = json::array();
  for (const auto& p : outputs_) {
    outputs.push_back({{"path", p.string()}, {"sha256", digest_path(p)}});
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  json manifest = {
      {"command", command_},     {"tool_version", SEDKIT_VERSION}, {"seed", common_.seed},
      {"parameters", params},    {"inputs", inputs},               {"outputs", outputs},
      {"warnings", warnings_},   {"wall_time_seconds", wall},
  };
  io::write_file_atomic(path, manifest.dump(2) + "\n");
}

void add_common_options(CLI::App* app, CommonOptions& common) {
  app->add_option("--threads", common.threads, "Worker threads (0 = one per core)")
      ->capture_default_str();
  app->add_option("--seed", common.seed, "Seed for every random draw")->capture_default_str();
  app->add_option("--report", common.report, "Write the JSON report here instead of stdout");
  app->add_option("--manifest", common.manifest, "Where to write the run manifest");
}

void add_format_option(CLI::App* app, FileFormat& format, FileFormat fallback) {
  format = fallback;
  static const std::map<std::string, FileFormat> kFormats{{"tsv", FileFormat::Tsv},
                                                          {"binary", FileFormat::Binary}};
  app->add_option("--format", format, "Per-clip output format")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case))
      ->default_str(fallback == FileFormat::Tsv ? "tsv" : "binary");
}

fs::path sibling_manifest(const fs::path& output) {
  return output.parent_path() / (output.stem().string() + ".run_manifest.json");
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

std::string digest_path(const fs::path& path) {
  if (!fs::is_directory(path)) return sha256_hex(io::read_file(path));
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file() && entry.path().filename() != kManifestName) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::string listing;
  for (const auto& f : files) {
    listing += f.filename().string() + '\0' + sha256_hex(io::read_file(f)) + '\n';
  }
  return sha256_hex(listing);
}

std::vector<BatchEntry> list_batch(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
  std::vector<BatchEntry> entries;
  const fs::path manifest = dir / "manifest.tsv";
  if (fs::exists(manifest)) {
    const std::string text = io::read_file(manifest);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    for (auto f : CLI::detail::split(line, '\t')) header.push_back(f);
    const auto col = [&](const std::string& name) -> std::optional<std::size_t> {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) return std::nullopt;
      return static_cast<std::size_t>(it - header.begin());
    };
    const auto id_col = col("clip_id");
    if (!id_col) throw ParseError(manifest.string(), 1, 1, "header lacks column 'clip_id'");
    const auto file_col = col("file");
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto fields = CLI::detail::split(line, '\t');
      if (fields.size() <= *id_col) throw ParseError(manifest.string(), line_no, 1, "missing clip_id");
      BatchEntry e;
      e.clip_id = fields[*id_col];
      if (file_col && *file_col < fields.size() && !fields[*file_col].empty()) {
        e.path = dir / fields[*file_col];
      } else if (fs::exists(dir / (e.clip_id + ".sedb"))) {
        e.path = dir / (e.clip_id + ".sedb");
      } else {
        e.path = dir / (e.clip_id + ".tsv");
      }
      if (!fs::exists(e.path)) {
        throw IoError(manifest.string() + ":" + std::to_string(line_no) + ": no file for clip '" +
                      e.clip_id + "'");
      }
      entries.push_back(std::move(e));
    }
  } else {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && is_batch_file(entry.path())) {
        entries.push_back({entry.path().stem().string(), entry.path()});
      }
    }
    std::sort(entries.begin(), entries.end(),
              [](const BatchEntry& a, const BatchEntry& b) { return a.clip_id < b.clip_id || (a.clip_id == b.clip_id && a.path < b.path); });
  }
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (!seen.insert(e.clip_id).second) {
      throw ValidationError("clip '" + e.clip_id + "' appears twice in " + dir.string());
    }
  }
  return entries;
}

io::SedbFile load_sedb(const BatchEntry& entry) {
  if (entry.path.extension() != ".sedb") {
    throw ValidationError(entry.path.string() + ": expected a binary .sedb file");
  }
  return io::read_sedb(entry.path);
}

ScoreMatrix load_scores(const BatchEntry& entry, ScoreKind kind, const VocabularyPtr& vocab,
                        double resolution) {
  if (entry.path.extension() == ".sedb") {
    if (!vocab) throw ContractError(entry.path.string() + ": binary score files need --vocab");
    io::SedbFile file = io::read_sedb(entry.path);
    if (file.layout != io::Layout::TimeMajor) {
      throw ValidationError(entry.path.string() + ": score files must be time-major");
    }
    if (file.values.cols() != vocab->size()) {
      throw VocabularyError(entry.path.string() + ": " + std::to_string(file.values.cols()) +
                            " columns but the vocabulary has " + std::to_string(vocab->size()) +
                            " classes");
    }
    const std::size_t frames = file.values.rows();
    return ScoreMatrix(FrameGrid(resolution, frames), vocab, std::move(file.values), kind);
  }
  ScoreMatrix m = io::read_score_tsv(entry.path, kind, vocab);
  if (vocab && m.vocabulary().names() != vocab->names()) {
    throw VocabularyError(entry.path.string() + ": class columns do not match the vocabulary");
  }
  return m;
}

std::vector<ScoreMatrix> load_score_batch(const std::vector<BatchEntry>& entries, ScoreKind kind,
                                          VocabularyPtr vocab, double resolution,
                                          std::size_t threads) {
  std::vector<ScoreMatrix> out(entries.size());
  if (entries.empty()) return out;
  out[0] = load_scores(entries[0], kind, vocab, resolution);
  vocab = out[0].vocabulary_ptr();
  parallel_for(entries.size() - 1, threads, [&](std::size_t i) {
    out[i + 1] = load_scores(entries[i + 1], kind, vocab, resolution);
  });
  return out;
}

fs::path write_scores(const fs::path& dir, const std::string& clip_id, const FrameGrid& grid,
                      const ClassVocabulary& vocab, const Matrix& values, FileFormat format) {
  if (format == FileFormat::Tsv) {
    const fs::path path = dir / (clip_id + ".tsv");
    io::write_file_atomic(path, io::format_score_tsv(grid, vocab, values));
    return path;
  }
  const fs::path path = dir / (clip_id + ".sedb");
  io::write_sedb(path, values);
  return path;
}

VocabularyPtr load_vocabulary(const std::string& path) {
  return std::make_shared<const ClassVocabulary>(io::read_vocabulary(path));
}

void prepare_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

}  // namespace sedkit::cli
