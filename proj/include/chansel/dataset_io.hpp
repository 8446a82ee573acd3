#pragma once

#include <filesystem>

#include "chansel/dataset.hpp"

namespace chansel {

// Dataset directory layout:
//   meta.json     {"fs_hz", "n_samples", "classes": [...], "channels": [{"name","x","y"}...]}
//   trials.f32le  N*C*T little-endian float32, trial-major, then channel, then time
//   labels.csv    "trial,label,split" header, one row per trial in blob order
//
// Samples are widened to double on load and narrowed to float32 on save, so
// load(save(d)) == d holds for any dataset whose samples are float32-exact.

inline constexpr const char* kMetaFile = "meta.json";
inline constexpr const char* kTrialsFile = "trials.f32le";
inline constexpr const char* kLabelsFile = "labels.csv";

EpochedDataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const EpochedDataset& dataset, const std::filesystem::path& dir);

}  // namespace chansel
