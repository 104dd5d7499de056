#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oracles.h"
#include "sedkit/matrix.h"
#include "sedkit/psds.h"
#include "sedkit/random.h"
#include "sedkit/timeline.h"

namespace testing_support {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

sedkit::Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows);

sedkit::VocabularyPtr letters_vocabulary(std::size_t classes);

// Random micro PSDS dataset: up to max_clips clips of up to max_frames
// frames and `classes` classes. Scores are drawn from a coarse grid so ties
// and plateaus are common; ground-truth bounds lie on a 0.01 s grid.
struct MicroDataset {
  oracle::PsdsSetup setup;
  std::vector<oracle::Clip> clips;
  std::vector<oracle::GtEvent> gt;
};
MicroDataset random_micro_dataset(std::uint64_t seed, std::size_t max_clips, std::size_t classes,
                                  std::size_t max_frames);

// Same data in library types.
std::vector<sedkit::ClipScores> to_clip_scores(const MicroDataset& d);
sedkit::GroundTruth to_ground_truth(const MicroDataset& d);
sedkit::PsdsParams to_params(const oracle::PsdsSetup& s);

}  // namespace testing_support
