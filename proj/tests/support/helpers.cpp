#include "helpers.h"

#include <fstream>
#include <random>
#include <sstream>

namespace testing_support {

TempDir::TempDir(const std::string& tag) {
  static std::uint64_t counter = 0;
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          ("sedkit_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

sedkit::Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.front().size() : 0;
  sedkit::Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

sedkit::VocabularyPtr letters_vocabulary(std::size_t classes) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < classes; ++c) names.push_back(std::string(1, static_cast<char>('a' + c)));
  return sedkit::make_vocabulary(std::move(names));
}

MicroDataset random_micro_dataset(std::uint64_t seed, std::size_t max_clips, std::size_t classes,
                                  std::size_t max_frames) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  MicroDataset d;
  d.setup.classes = classes;
  d.setup.resolution = 0.04;
  const std::size_t n_clips = uniform(1, max_clips);
  for (std::size_t k = 0; k < n_clips; ++k) {
    oracle::Clip clip;
    clip.id = "clip" + std::to_string(k);
    clip.frames = uniform(3, max_frames);
    clip.scores.assign(clip.frames, std::vector<double>(classes, 0.0));
    for (std::size_t c = 0; c < classes; ++c) {
      // Mix smooth bumps with noise so runs of varying length appear.
      const bool coarse = uniform(0, 1) == 0;
      for (std::size_t t = 0; t < clip.frames; ++t) {
        const double v = coarse ? static_cast<double>(uniform(0, 10)) / 10.0
                                : std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        clip.scores[t][c] = v;
      }
      if (uniform(0, 3) == 0) {
        const std::size_t a = uniform(0, clip.frames - 1);
        const std::size_t b = uniform(a, clip.frames - 1);
        for (std::size_t t = a; t <= b; ++t) clip.scores[t][c] = std::min(1.0, clip.scores[t][c] + 0.5);
      }
    }
    const std::size_t centis = clip.frames * 4;  // clip length in 0.01 s units
    for (std::size_t c = 0; c < classes; ++c) {
      const std::size_t n_events = uniform(0, 2);
      for (std::size_t e = 0; e < n_events; ++e) {
        const std::size_t on = uniform(0, centis - 1);
        const std::size_t off = uniform(on + 1, std::min(centis, on + 40));
        d.gt.push_back({clip.id, c, static_cast<double>(on) / 100.0, static_cast<double>(off) / 100.0});
      }
    }
    d.clips.push_back(std::move(clip));
  }
  return d;
}

std::vector<sedkit::ClipScores> to_clip_scores(const MicroDataset& d) {
  const auto vocab = letters_vocabulary(d.setup.classes);
  std::vector<sedkit::ClipScores> out;
  for (const auto& c : d.clips) {
    out.push_back({c.id, sedkit::ScoreMatrix(sedkit::FrameGrid(d.setup.resolution, c.frames), vocab,
                                             matrix_from_rows(c.scores))});
  }
  return out;
}

sedkit::GroundTruth to_ground_truth(const MicroDataset& d) {
  sedkit::GroundTruth gt;
  for (const auto& c : d.clips) gt[c.id];
  for (const auto& g : d.gt) gt[g.clip].push_back({g.cls, g.onset, g.offset});
  return gt;
}

sedkit::PsdsParams to_params(const oracle::PsdsSetup& s) {
  sedkit::PsdsParams p;
  p.rho_dtc = s.rho_dtc;
  p.rho_gtc = s.rho_gtc;
  p.alpha_st = s.alpha_st;
  p.e_max = s.e_max;
  p.no_ground_truth = s.no_gt_tpr_one ? sedkit::NoGroundTruthPolicy::TprOne
                                      : sedkit::NoGroundTruthPolicy::Exclude;
  return p;
}

}  // namespace testing_support
