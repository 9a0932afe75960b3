#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advi/dataset.hpp"
#include "advi/network.hpp"

namespace advi {

// Parses the classic IDX pair (big-endian; images magic 0x00000803, labels
// magic 0x00000801). Pixels are scaled to [0,1] by division by 255.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 const std::string& name = "idx");

// Keeps only the listed classes and remaps labels in ascending original
// order (e.g. keep {3,7} gives 3 -> 0, 7 -> 1).
Dataset filter_classes(const Dataset& ds, const std::vector<int>& keep);

// Retains exactly the samples the model classifies correctly.
Dataset filter_correct(const SplitModel& model, const Dataset& ds, int batch_size = 256);

// Seeded Gaussian blobs clipped to [0,1]; images get shape [N,1,1,dims].
Dataset synth_generate(uint64_t seed, int n_per_class, int dims,
                       const std::vector<std::vector<float>>& class_centers, float noise_std);

// First n samples (or all when n >= size).
Dataset dataset_head(const Dataset& ds, int64_t n);

}  // namespace advi
