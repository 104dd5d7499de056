#pragma once

#include "support.h"

namespace sedkit::cli {

Command add_rasterize(CLI::App& root, CommonOptions& common);
Command add_weights(CLI::App& root, CommonOptions& common);
Command add_sample(CLI::App& root, CommonOptions& common);
Command add_augment(CLI::App& root, CommonOptions& common);
Command add_resample(CLI::App& root, CommonOptions& common);
Command add_distill_targets(CLI::App& root, CommonOptions& common);
Command add_probe_train(CLI::App& root, CommonOptions& common);
Command add_postprocess(CLI::App& root, CommonOptions& common);
Command add_eval_psds(CLI::App& root, CommonOptions& common);
Command add_eval_onset_f(CLI::App& root, CommonOptions& common);
Command add_aso(CLI::App& root, CommonOptions& common);

}  // namespace sedkit::cli
