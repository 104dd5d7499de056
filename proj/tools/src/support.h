#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sedkit/error.h"
#include "sedkit/io.h"
#include "sedkit/timeline.h"

namespace sedkit::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

enum class FileFormat { Tsv, Binary };

// Flag combinations that parse but make no sense together.
class UsageError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Flags shared by every subcommand.
struct CommonOptions {
  std::size_t threads = 0;
  std::uint64_t seed = 0;
  std::string report;
  std::string manifest;
};

// State of one subcommand invocation.
class RunContext {
 public:
  RunContext(std::string command, CLI::App* app, const CommonOptions& common, std::ostream& out,
             std::ostream& err);

  const std::string& command() const { return command_; }
  std::size_t threads() const;
  std::uint64_t seed() const { return common_.seed; }

  void warn(const std::string& message);
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Files or directories whose SHA-256 goes into the run manifest.
  void add_input(const std::string& flag, const fs::path& path);
  void add_output(const fs::path& path);

  // Writes `report` (plus the warnings) to --report or to stdout.
  void emit_report(json report);
  // Writes run_manifest.json. `default_path` is used unless --manifest is
  // given; with an empty default it goes next to --report, and without
  // --report nothing is written.
  void write_manifest(const fs::path& default_path);

 private:
  std::string command_;
  CLI::App* app_;
  CommonOptions common_;
  std::ostream& out_;
  std::ostream& err_;
  std::vector<std::string> warnings_;
  std::vector<std::pair<std::string, fs::path>> inputs_;
  std::vector<fs::path> outputs_;
  std::chrono::steady_clock::time_point start_;
};

struct Command {
  CLI::App* app = nullptr;
  std::function<void(RunContext&)> run;
};

// Adds --threads, --seed, --report and --manifest to `app`.
void add_common_options(CLI::App* app, CommonOptions& common);
void add_format_option(CLI::App* app, FileFormat& format, FileFormat fallback = FileFormat::Tsv);

// "out/weights.tsv" -> "out/weights.run_manifest.json".
fs::path sibling_manifest(const fs::path& output);

std::string sha256_hex(std::string_view bytes);
// Digest of a file, or of the sorted (name, digest) list of a directory's files.
std::string digest_path(const fs::path& path);

// One member of a batch directory: a per-clip file whose stem is the clip id.
struct BatchEntry {
  std::string clip_id;
  fs::path path;
};

// Lists `<clip_id>.tsv` / `<clip_id>.sedb` files of a directory, sorted by clip
// id. When the directory has a manifest.tsv, its clip_id column selects and
// orders the clips. Throws IoError for a missing directory or listed file.
std::vector<BatchEntry> list_batch(const fs::path& dir);

// Loads a per-clip score or target file. TSV files carry their own class names
// and frame length; binary files take them from `vocab` and `resolution`.
ScoreMatrix load_scores(const BatchEntry& entry, ScoreKind kind, const VocabularyPtr& vocab,
                        double resolution);
std::vector<ScoreMatrix> load_score_batch(const std::vector<BatchEntry>& entries, ScoreKind kind,
                                          VocabularyPtr vocab, double resolution,
                                          std::size_t threads);

// Binary (.sedb) per-clip matrix; TSV entries are rejected.
io::SedbFile load_sedb(const BatchEntry& entry);

// Writes `<dir>/<clip_id>.tsv` or `.sedb` and returns the path.
fs::path write_scores(const fs::path& dir, const std::string& clip_id, const FrameGrid& grid,
                      const ClassVocabulary& vocab, const Matrix& values, FileFormat format);

VocabularyPtr load_vocabulary(const std::string& path);

// Ensures the output directory exists.
void prepare_output_dir(const fs::path& dir);

}  // namespace sedkit::cli
