#pragma once

// File formats: the SEDB binary matrix container, strong-label event TSVs,
// vocabulary lists, per-clip score/target TSVs and sampling-weight TSVs.
// Every writer goes through a temporary file and an atomic rename.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sedkit/matrix.h"
#include "sedkit/sampling.h"
#include "sedkit/timeline.h"

namespace sedkit::io {

namespace fs = std::filesystem;

// SEDB container: "SEDB", u32 version, u32 rows, u32 cols, then rows*cols
// little-endian f32, row-major. Version 1 is time-major (rows are frames).
// Version 2 adds a u32 layout word after cols, used for frequency-major
// spectrograms (rows are bins).
enum class Layout : std::uint32_t { TimeMajor = 0, FrequencyMajor = 1 };

struct SedbFile {
  Matrix values;
  Layout layout = Layout::TimeMajor;
  std::uint32_t version = 1;
};

void write_sedb(const fs::path& path, const Matrix& values, Layout layout = Layout::TimeMajor);
std::string encode_sedb(const Matrix& values, Layout layout = Layout::TimeMajor);
SedbFile read_sedb(const fs::path& path);
SedbFile decode_sedb(std::string_view bytes, const std::string& source = "<memory>");

// One row of an events TSV (header: filename, onset, offset, event_label;
// extra columns are ignored).
struct EventRow {
  std::string clip_id;
  std::string label;
  double onset = 0.0;
  double offset = 0.0;
  std::size_t line = 0;
};

// Throws ParseError with file, line and column on malformed rows or
// negative times.
std::vector<EventRow> read_events_tsv(const fs::path& path);
std::vector<EventRow> parse_events_tsv(std::string_view text, const std::string& source);
void write_events_tsv(const fs::path& path, const std::vector<EventRow>& rows);

// "dir/Y00abc.wav" -> "Y00abc". Only audio extensions are stripped so ids
// containing dots survive a write/read cycle.
std::string clip_id_from_filename(std::string_view filename);

// Rows whose label is absent from the vocabulary throw VocabularyError, or are
// skipped (and counted in *skipped) when skip_unknown is set.
std::vector<Event> events_for_vocabulary(const std::vector<EventRow>& rows,
                                         const ClassVocabulary& vocab, bool skip_unknown = false,
                                         std::size_t* skipped = nullptr);

// Groups rows by clip into validated annotations. Durations come from
// `durations` when listed there, else from default_duration.
std::vector<ClipAnnotations> build_annotations(
    const std::vector<EventRow>& rows, const ClassVocabulary& vocab,
    const std::vector<std::pair<std::string, double>>& durations,
    std::optional<double> default_duration, bool clamp);

ClassVocabulary read_vocabulary(const fs::path& path);
void write_vocabulary(const fs::path& path, const ClassVocabulary& vocab);

// Header "filename\tduration".
std::vector<std::pair<std::string, double>> read_durations_tsv(const fs::path& path);

// Per-clip score/target TSV: header "onset\toffset\t<class_1>\t...", one row
// per frame.
ScoreMatrix read_score_tsv(const fs::path& path, ScoreKind kind = ScoreKind::Probability,
                           const VocabularyPtr& expected = nullptr);
std::string format_score_tsv(const FrameGrid& grid, const ClassVocabulary& vocab,
                             const Matrix& values);
void write_score_tsv(const fs::path& path, const ScoreMatrix& scores);
void write_target_tsv(const fs::path& path, const TargetMatrix& targets,
                      const ClassVocabulary& vocab);

// Header "filename\tweight".
SamplingWeights read_weights_tsv(const fs::path& path);
void write_weights_tsv(const fs::path& path, const SamplingWeights& weights);

std::string read_file(const fs::path& path);
// Writes to "<path>.tmp.<pid>" and renames over `path`.
void write_file_atomic(const fs::path& path, std::string_view bytes);

// Shortest text that round-trips through f32; used for all interchange values.
std::string format_float(double v);
// Full double precision.
std::string format_double(double v);

}  // namespace sedkit::io
