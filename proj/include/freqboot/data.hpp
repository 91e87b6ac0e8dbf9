#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "freqboot/common.hpp"
#include "freqboot/tensor.hpp"

// Bit-exact dataset store: a directory with meta.json plus one .bin
// (little-endian float32, row-major [n, channels, length]) and one .labels
// (little-endian int64) file per split. Loading normalizes with per-channel
// z-scores computed from the train split only.

namespace freqboot::data {

struct TimeSeriesDataset {
  Tensor<float> samples;  // [n, channels, length]
  std::vector<std::int64_t> labels;
  long num_classes = 0;
  std::string name;
  std::string origin_split;  // which stored split the rows came from ("" if synthetic/derived)

  long n() const { return samples.empty() ? 0 : samples.dim(0); }
  long channels() const { return samples.empty() ? 0 : samples.dim(1); }
  long length() const { return samples.empty() ? 0 : samples.dim(2); }

  /// Enforces the shape/label/finiteness invariants; throws DataError.
  void validate() const;
};

struct SplitSpec {
  double train_frac = 0.6;
  double val_frac = 0.2;
  double test_frac = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticSpec {
  long n_per_class = 200;
  long channels = 3;
  long length = 128;
  std::vector<double> low_freq_classes{2.0, 4.0};   // cycles per window, full-length envelope
  std::vector<double> high_freq_classes{16.0, 24.0};  // cycles per window, localized burst
  double noise_sigma = 0.1;

  long num_classes() const {
    return static_cast<long>(low_freq_classes.size() + high_freq_classes.size());
  }
  void validate() const;
};

struct DatasetMeta {
  std::string name;
  long channels = 0;
  long length = 0;
  long num_classes = 0;
  std::map<std::string, long> splits;  // split name -> n
};

DatasetMeta read_meta(const std::string& root);

/// Raw split read: exactly the stored float32/int64 values, no normalization.
TimeSeriesDataset read_raw_split(const std::string& root, const std::string& split);

/// Split read with per-channel z-scoring using train-split statistics.
/// Channels with zero variance are left unscaled.
TimeSeriesDataset load_dataset(const std::string& root, const std::string& split,
                               bool normalize = true);

/// Writes meta.json plus <split>.bin/.labels for every entry. All datasets
/// must agree on channels/length/num_classes.
void save_dataset(const std::string& root, const std::string& name,
                  const std::map<std::string, TimeSeriesDataset>& splits);

/// Per-channel mean/std over every sample and timestep. Std is the population
/// standard deviation; zero-variance channels report std 1.
struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};
ChannelStats channel_stats(const TimeSeriesDataset& ds);

/// Deterministic, label-stratified 3-way partition. Global split sizes follow
/// largest-remainder rounding of n * frac; stratification (applied when every
/// class has at least 5 samples) distributes each class proportionally while
/// keeping the global sizes exact.
struct SplitIndices {
  std::vector<long> train, val, test;
};
SplitIndices split_indices(long n, const std::vector<std::int64_t>& labels, const SplitSpec& spec);

void split_dataset(const TimeSeriesDataset& ds, const SplitSpec& spec, TimeSeriesDataset& train,
                   TimeSeriesDataset& val, TimeSeriesDataset& test);

/// Stratified subset of ceil(fraction * n) samples. Per-class counts follow a
/// highest-quotient (divisor) allocation, so a smaller fraction always
/// selects a subset of a larger one under the same seed. A class that ends up
/// empty is recorded in the warning log, not an error.
TimeSeriesDataset subsample_labels(const TimeSeriesDataset& ds, double fraction,
                                   std::uint64_t seed);
std::vector<long> subsample_indices(long n, const std::vector<std::int64_t>& labels,
                                    long num_classes, double fraction, std::uint64_t seed);

/// Balanced synthetic task: the first classes are full-window sinusoids at
/// the given low frequencies, the rest are Gaussian-windowed bursts at the
/// high frequencies, plus N(0, noise_sigma^2) noise.
TimeSeriesDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Rows of `ds` at `idx`, keeping metadata; origin_split set to `tag`.
TimeSeriesDataset take_rows(const TimeSeriesDataset& ds, const std::vector<long>& idx,
                            const std::string& tag);

}  // namespace freqboot::data
