#include "sedkit/io.h"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "sedkit/error.h"

namespace sedkit::io {

namespace {

constexpr std::array<char, 4> kMagic{'S', 'E', 'D', 'B'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + static_cast<std::size_t>(i)])) << (8 * i);
  }
  return v;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

// Splits text into lines, dropping a trailing '\r' and a final empty line.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  return lines;
}

// 1-based column of field `index` within a tab-separated line.
std::size_t column_of(const std::vector<std::string_view>& fields, std::size_t index) {
  std::size_t col = 1;
  for (std::size_t i = 0; i < index; ++i) col += fields[i].size() + 1;
  return col;
}

double parse_number(std::string_view field, const std::string& source, std::size_t line,
                    std::size_t column) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || field.empty() || !std::isfinite(v)) {
    throw ParseError(source, line, column, "expected a number, got '" + std::string(field) + "'");
  }
  return v;
}

std::size_t header_index(const std::vector<std::string_view>& header, std::string_view name,
                         const std::string& source) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw ParseError(source, 1, 1, "header lacks column '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::string format_float(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), static_cast<float>(v));
  return std::string(buf.data(), res.ptr);
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return std::move(ss).str();
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("error writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

std::string encode_sedb(const Matrix& values, Layout layout) {
  if (values.rows() > UINT32_MAX || values.cols() > UINT32_MAX) throw SizeError("matrix too large for SEDB");
  std::string out;
  out.reserve(20 + values.data().size() * 4);
  out.append(kMagic.data(), kMagic.size());
  const std::uint32_t version = layout == Layout::TimeMajor ? 1 : 2;
  put_u32(out, version);
  put_u32(out, static_cast<std::uint32_t>(values.rows()));
  put_u32(out, static_cast<std::uint32_t>(values.cols()));
  if (version == 2) put_u32(out, static_cast<std::uint32_t>(layout));
  for (double v : values.data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

void write_sedb(const fs::path& path, const Matrix& values, Layout layout) {
  write_file_atomic(path, encode_sedb(values, layout));
}

SedbFile decode_sedb(std::string_view bytes, const std::string& source) {
  if (bytes.size() < 16 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw ValidationError(source + ": not an SEDB file");
  }
  SedbFile file;
  file.version = get_u32(bytes, 4);
  const std::uint32_t rows = get_u32(bytes, 8);
  const std::uint32_t cols = get_u32(bytes, 12);
  std::size_t at = 16;
  if (file.version == 2) {
    if (bytes.size() < 20) throw ValidationError(source + ": truncated SEDB header");
    const std::uint32_t layout = get_u32(bytes, 16);
    if (layout > 1) throw ValidationError(source + ": unknown SEDB layout " + std::to_string(layout));
    file.layout = static_cast<Layout>(layout);
    at = 20;
  } else if (file.version != 1) {
    throw ValidationError(source + ": unsupported SEDB version " + std::to_string(file.version));
  }
  const std::size_t count = static_cast<std::size_t>(rows) * cols;
  if (bytes.size() != at + 4 * count) {
    throw ValidationError(source + ": SEDB payload size does not match " + std::to_string(rows) +
                          "x" + std::to_string(cols));
  }
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = static_cast<double>(std::bit_cast<float>(get_u32(bytes, at + 4 * i)));
  }
  file.values = Matrix(rows, cols, std::move(data));
  return file;
}

SedbFile read_sedb(const fs::path& path) { return decode_sedb(read_file(path), path.string()); }

std::string clip_id_from_filename(std::string_view filename) {
  const std::size_t slash = filename.find_last_of('/');
  if (slash != std::string_view::npos) filename.remove_prefix(slash + 1);
  static constexpr std::array<std::string_view, 6> kAudio{".wav", ".flac", ".mp3", ".ogg", ".opus", ".m4a"};
  for (auto ext : kAudio) {
    if (filename.size() > ext.size() && filename.ends_with(ext)) {
      filename.remove_suffix(ext.size());
      break;
    }
  }
  return std::string(filename);
}

std::vector<EventRow> parse_events_tsv(std::string_view text, const std::string& source) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError(source, 1, 1, "missing header");
  const auto header = split_tabs(lines.front());
  const std::size_t i_file = header_index(header, "filename", source);
  const std::size_t i_on = header_index(header, "onset", source);
  const std::size_t i_off = header_index(header, "offset", source);
  const std::size_t i_label = header_index(header, "event_label", source);
  const std::size_t needed = std::max({i_file, i_on, i_off, i_label}) + 1;

  std::vector<EventRow> rows;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    if (lines[n].empty()) continue;
    const auto fields = split_tabs(lines[n]);
    if (fields.size() < needed) {
      throw ParseError(source, line_no, lines[n].size() + 1,
                       "expected at least " + std::to_string(needed) + " columns");
    }
    EventRow row;
    row.line = line_no;
    row.clip_id = clip_id_from_filename(fields[i_file]);
    if (row.clip_id.empty()) throw ParseError(source, line_no, column_of(fields, i_file), "empty filename");
    row.label = std::string(fields[i_label]);
    if (row.label.empty()) throw ParseError(source, line_no, column_of(fields, i_label), "empty event label");
    row.onset = parse_number(fields[i_on], source, line_no, column_of(fields, i_on));
    row.offset = parse_number(fields[i_off], source, line_no, column_of(fields, i_off));
    if (row.onset < 0.0) throw ParseError(source, line_no, column_of(fields, i_on), "negative onset");
    if (row.offset < 0.0) throw ParseError(source, line_no, column_of(fields, i_off), "negative offset");
    if (!(row.offset > row.onset)) {
      throw ParseError(source, line_no, column_of(fields, i_off), "offset must exceed onset");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<EventRow> read_events_tsv(const fs::path& path) {
  return parse_events_tsv(read_file(path), path.string());
}

void write_events_tsv(const fs::path& path, const std::vector<EventRow>& rows) {
  std::string out = "filename\tonset\toffset\tevent_label\n";
  for (const auto& r : rows) {
    out += r.clip_id + '\t' + format_float(r.onset) + '\t' + format_float(r.offset) + '\t' + r.label + '\n';
  }
  write_file_atomic(path, out);
}

std::vector<Event> events_for_vocabulary(const std::vector<EventRow>& rows,
                                         const ClassVocabulary& vocab, bool skip_unknown,
                                         std::size_t* skipped) {
  std::vector<Event> events;
  std::size_t dropped = 0;
  for (const auto& r : rows) {
    const auto id = vocab.find(r.label);
    if (!id) {
      if (!skip_unknown) throw VocabularyError("unknown class '" + r.label + "' (line " + std::to_string(r.line) + ")");
      ++dropped;
      continue;
    }
    events.push_back({*id, r.onset, r.offset});
  }
  if (skipped) *skipped = dropped;
  return events;
}

std::vector<ClipAnnotations> build_annotations(
    const std::vector<EventRow>& rows, const ClassVocabulary& vocab,
    const std::vector<std::pair<std::string, double>>& durations,
    std::optional<double> default_duration, bool clamp) {
  std::map<std::string, std::vector<EventRow>> by_clip;
  for (const auto& [id, d] : durations) by_clip[id];
  for (const auto& r : rows) by_clip[r.clip_id].push_back(r);
  std::map<std::string, double> duration_of(durations.begin(), durations.end());

  std::vector<ClipAnnotations> out;
  out.reserve(by_clip.size());
  for (const auto& [id, clip_rows] : by_clip) {
    double duration = 0.0;
    if (auto it = duration_of.find(id); it != duration_of.end()) {
      duration = it->second;
    } else if (default_duration) {
      duration = *default_duration;
    } else {
      throw ValidationError("no duration known for clip '" + id + "'");
    }
    out.emplace_back(id, duration, events_for_vocabulary(clip_rows, vocab), clamp);
  }
  return out;
}

ClassVocabulary read_vocabulary(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<std::string> names;
  std::size_t line_no = 0;
  for (auto line : split_lines(text)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.find('\t') != std::string_view::npos) {
      throw ParseError(path.string(), line_no, line.find('\t') + 1, "class names may not contain tabs");
    }
    names.emplace_back(line);
  }
  return ClassVocabulary(std::move(names));
}

void write_vocabulary(const fs::path& path, const ClassVocabulary& vocab) {
  std::string out;
  for (const auto& n : vocab.names()) out += n + '\n';
  write_file_atomic(path, out);
}

std::vector<std::pair<std::string, double>> read_durations_tsv(const fs::path& path) {
  const std::string text = read_file(path);
  const std::string source = path.string();
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError(source, 1, 1, "missing header");
  const auto header = split_tabs(lines.front());
  const std::size_t i_file = header_index(header, "filename", source);
  const std::size_t i_dur = header_index(header, "duration", source);
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto fields = split_tabs(lines[n]);
    if (fields.size() <= std::max(i_file, i_dur)) throw ParseError(source, n + 1, lines[n].size() + 1, "missing columns");
    const double d = parse_number(fields[i_dur], source, n + 1, column_of(fields, i_dur));
    if (!(d > 0.0)) throw ParseError(source, n + 1, column_of(fields, i_dur), "duration must be positive");
    out.emplace_back(clip_id_from_filename(fields[i_file]), d);
  }
  return out;
}

ScoreMatrix read_score_tsv(const fs::path& path, ScoreKind kind, const VocabularyPtr& expected) {
  const std::string text = read_file(path);
  const std::string source = path.string();
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError(source, 1, 1, "missing header");
  const auto header = split_tabs(lines.front());
  if (header.size() < 3 || header[0] != "onset" || header[1] != "offset") {
    throw ParseError(source, 1, 1, "header must start with 'onset\\toffset' followed by class names");
  }
  std::vector<std::string> names(header.begin() + 2, header.end());
  VocabularyPtr vocab;
  if (expected && expected->names() == names) {
    vocab = expected;
  } else {
    vocab = make_vocabulary(std::move(names));
  }
  const std::size_t classes = vocab->size();

  std::vector<double> data;
  std::size_t frames = 0;
  double resolution = 0.0;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const std::size_t line_no = n + 1;
    const auto fields = split_tabs(lines[n]);
    if (fields.size() != classes + 2) {
      throw ParseError(source, line_no, 1,
                       "expected " + std::to_string(classes + 2) + " columns, got " + std::to_string(fields.size()));
    }
    const double onset = parse_number(fields[0], source, line_no, 1);
    const double offset = parse_number(fields[1], source, line_no, column_of(fields, 1));
    if (frames == 0) {
      resolution = offset - onset;
      if (!(resolution > 0.0) || onset != 0.0) {
        throw ParseError(source, line_no, 1, "first frame must start at 0 with positive length");
      }
    }
    const double expected_onset = resolution * static_cast<double>(frames);
    if (std::abs(onset - expected_onset) > 1e-4 * resolution + 1e-6) {
      throw ParseError(source, line_no, 1, "frame onsets must be contiguous multiples of the frame length");
    }
    for (std::size_t c = 0; c < classes; ++c) {
      data.push_back(parse_number(fields[c + 2], source, line_no, column_of(fields, c + 2)));
    }
    ++frames;
  }
  if (frames == 0) throw ParseError(source, 2, 1, "no frames");
  // Resolution parsed from f32 text is snapped to 1e-9 s to undo float noise.
  resolution = std::round(resolution * 1e9) / 1e9;
  return ScoreMatrix(FrameGrid(resolution, frames), vocab, Matrix(frames, classes, std::move(data)), kind);
}

std::string format_score_tsv(const FrameGrid& grid, const ClassVocabulary& vocab,
                             const Matrix& values) {
  std::string out = "onset\toffset";
  for (const auto& n : vocab.names()) out += '\t' + n;
  out += '\n';
  for (std::size_t t = 0; t < values.rows(); ++t) {
    out += format_float(grid.frame_start(t));
    out += '\t';
    out += format_float(grid.frame_end(t));
    for (double v : values.row(t)) {
      out += '\t';
      out += format_float(v);
    }
    out += '\n';
  }
  return out;
}

void write_score_tsv(const fs::path& path, const ScoreMatrix& scores) {
  write_file_atomic(path, format_score_tsv(scores.grid(), scores.vocabulary(), scores.scores()));
}

void write_target_tsv(const fs::path& path, const TargetMatrix& targets,
                      const ClassVocabulary& vocab) {
  if (targets.num_classes() != vocab.size()) throw SizeError("target columns do not match vocabulary");
  write_file_atomic(path, format_score_tsv(targets.grid(), vocab, targets.values()));
}

SamplingWeights read_weights_tsv(const fs::path& path) {
  const std::string text = read_file(path);
  const std::string source = path.string();
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError(source, 1, 1, "missing header");
  const auto header = split_tabs(lines.front());
  const std::size_t i_file = header_index(header, "filename", source);
  const std::size_t i_w = header_index(header, "weight", source);
  std::vector<std::string> ids;
  std::vector<double> weights;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto fields = split_tabs(lines[n]);
    if (fields.size() <= std::max(i_file, i_w)) throw ParseError(source, n + 1, lines[n].size() + 1, "missing columns");
    const double w = parse_number(fields[i_w], source, n + 1, column_of(fields, i_w));
    if (!(w > 0.0)) throw ParseError(source, n + 1, column_of(fields, i_w), "weight must be positive");
    ids.push_back(clip_id_from_filename(fields[i_file]));
    weights.push_back(w);
  }
  return SamplingWeights(std::move(ids), std::move(weights));
}

void write_weights_tsv(const fs::path& path, const SamplingWeights& weights) {
  std::string out = "filename\tweight\n";
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out += weights.clip_ids()[i] + '\t' + format_double(weights.weights()[i]) + '\n';
  }
  write_file_atomic(path, out);
}

}  // namespace sedkit::io
