#include "freqboot/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "freqboot/rng.hpp"
#include "json.hpp"

// The binary format stores the raw little-endian bytes of float32/int64
// arrays; loading on a little-endian machine is a plain buffer read.
static_assert(std::endian::native == std::endian::little,
              "dataset/checkpoint format requires a little-endian host");

namespace fs = std::filesystem;
using nlohmann::json;

namespace freqboot::data {

void TimeSeriesDataset::validate() const {
  if (samples.rank() != 3) throw DataError("dataset: samples must be [n, channels, length]");
  if (samples.dim(0) != static_cast<long>(labels.size()))
    throw DataError("dataset: " + std::to_string(samples.dim(0)) + " samples but " +
                    std::to_string(labels.size()) + " labels");
  if (num_classes < 1) throw DataError("dataset: num_classes must be positive");
  if (channels() < 1) throw DataError("dataset: need at least 1 channel");
  if (length() < 2) throw DataError("dataset: need length >= 2");
  for (std::int64_t l : labels)
    if (l < 0 || l >= num_classes)
      throw DataError("dataset: label " + std::to_string(l) + " outside [0, " +
                      std::to_string(num_classes) + ")");
  const float* p = samples.data();
  for (long i = 0; i < samples.size(); ++i)
    if (!std::isfinite(p[i])) throw DataError("dataset: non-finite sample value at index " +
                                              std::to_string(i));
}

void SplitSpec::validate() const {
  for (double f : {train_frac, val_frac, test_frac})
    if (!(f > 0.0 && f < 1.0)) throw ConfigError("split: fractions must be in (0,1)");
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9)
    throw ConfigError("split: fractions must sum to 1");
}

void SyntheticSpec::validate() const {
  if (n_per_class < 1) throw ConfigError("synthetic: n_per_class must be >= 1");
  if (channels < 1) throw ConfigError("synthetic: channels must be >= 1");
  if (length < 2) throw ConfigError("synthetic: length must be >= 2");
  if (low_freq_classes.empty() && high_freq_classes.empty())
    throw ConfigError("synthetic: need at least one class frequency");
  for (double f : low_freq_classes)
    if (f <= 0.0) throw ConfigError("synthetic: frequencies must be positive");
  for (double f : high_freq_classes)
    if (f <= 0.0) throw ConfigError("synthetic: frequencies must be positive");
  if (!low_freq_classes.empty() && !high_freq_classes.empty()) {
    const double lo_max = *std::max_element(low_freq_classes.begin(), low_freq_classes.end());
    const double hi_min = *std::min_element(high_freq_classes.begin(), high_freq_classes.end());
    if (lo_max >= hi_min)
      throw ConfigError("synthetic: low-frequency classes must sit strictly below high-frequency ones");
  }
}

// ---------------------------------------------------------------------------
// IO

DatasetMeta read_meta(const std::string& root) {
  const fs::path p = fs::path(root) / "meta.json";
  std::ifstream in(p);
  if (!in) throw DataError("cannot open " + p.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("malformed meta.json at " + p.string() + ": " + e.what());
  }
  DatasetMeta m;
  try {
    m.name = j.at("name").get<std::string>();
    m.channels = j.at("channels").get<long>();
    m.length = j.at("length").get<long>();
    m.num_classes = j.at("num_classes").get<long>();
    for (auto& [k, v] : j.at("splits").items()) m.splits[k] = v.get<long>();
  } catch (const json::exception& e) {
    throw DataError("meta.json missing required keys: " + std::string(e.what()));
  }
  return m;
}

namespace {

std::vector<char> read_file_exact(const fs::path& p, std::size_t expected_bytes,
                                  const std::string& what) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  in.seekg(0, std::ios::end);
  const auto actual = static_cast<std::size_t>(in.tellg());
  if (actual != expected_bytes)
    throw DataError(what + ": " + p.string() + " holds " + std::to_string(actual) +
                    " bytes, metadata implies " + std::to_string(expected_bytes));
  in.seekg(0);
  std::vector<char> buf(expected_bytes);
  in.read(buf.data(), static_cast<std::streamsize>(expected_bytes));
  if (!in) throw DataError("short read on " + p.string());
  return buf;
}

}  // namespace

TimeSeriesDataset read_raw_split(const std::string& root, const std::string& split) {
  const DatasetMeta meta = read_meta(root);
  auto it = meta.splits.find(split);
  if (it == meta.splits.end())
    throw DataError("split '" + split + "' not present in " + root + "/meta.json");
  const long n = it->second;

  TimeSeriesDataset ds;
  ds.name = meta.name;
  ds.num_classes = meta.num_classes;
  ds.origin_split = split;
  ds.samples = Tensor<float>({n, meta.channels, meta.length});
  ds.labels.resize(static_cast<std::size_t>(n));

  const auto sample_bytes = static_cast<std::size_t>(ds.samples.size()) * sizeof(float);
  auto buf = read_file_exact(fs::path(root) / (split + ".bin"), sample_bytes, "format mismatch");
  std::memcpy(ds.samples.data(), buf.data(), sample_bytes);

  const auto label_bytes = static_cast<std::size_t>(n) * sizeof(std::int64_t);
  auto lbuf =
      read_file_exact(fs::path(root) / (split + ".labels"), label_bytes, "format mismatch");
  std::memcpy(ds.labels.data(), lbuf.data(), label_bytes);

  ds.validate();
  return ds;
}

ChannelStats channel_stats(const TimeSeriesDataset& ds) {
  const long n = ds.n(), c = ds.channels(), t = ds.length();
  ChannelStats st;
  st.mean.assign(static_cast<std::size_t>(c), 0.0);
  st.stddev.assign(static_cast<std::size_t>(c), 1.0);
  const double count = static_cast<double>(n) * static_cast<double>(t);
  for (long ci = 0; ci < c; ++ci) {
    double sum = 0.0, sumsq = 0.0;
    for (long b = 0; b < n; ++b)
      for (long ti = 0; ti < t; ++ti) {
        const double v = ds.samples.at3(b, ci, ti);
        sum += v;
        sumsq += v * v;
      }
    const double mean = sum / count;
    const double var = std::max(0.0, sumsq / count - mean * mean);
    st.mean[static_cast<std::size_t>(ci)] = mean;
    st.stddev[static_cast<std::size_t>(ci)] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return st;
}

TimeSeriesDataset load_dataset(const std::string& root, const std::string& split, bool normalize) {
  TimeSeriesDataset ds = read_raw_split(root, split);
  if (!normalize) return ds;
  TimeSeriesDataset train = split == "train" ? ds : read_raw_split(root, "train");
  const ChannelStats st = channel_stats(train);
  const long n = ds.n(), c = ds.channels(), t = ds.length();
  for (long ci = 0; ci < c; ++ci) {
    const float mean = static_cast<float>(st.mean[static_cast<std::size_t>(ci)]);
    const float inv = static_cast<float>(1.0 / st.stddev[static_cast<std::size_t>(ci)]);
    for (long b = 0; b < n; ++b)
      for (long ti = 0; ti < t; ++ti)
        ds.samples.at3(b, ci, ti) = (ds.samples.at3(b, ci, ti) - mean) * inv;
  }
  return ds;
}

void save_dataset(const std::string& root, const std::string& name,
                  const std::map<std::string, TimeSeriesDataset>& splits) {
  if (splits.empty()) throw ConfigError("save_dataset: no splits given");
  const TimeSeriesDataset& first = splits.begin()->second;
  for (auto& [split, ds] : splits) {
    ds.validate();
    if (ds.channels() != first.channels() || ds.length() != first.length() ||
        ds.num_classes != first.num_classes)
      throw DataError("save_dataset: split '" + split + "' disagrees with '" +
                      splits.begin()->first + "' on shape or class count");
  }
  fs::create_directories(root);
  json meta;
  meta["name"] = name;
  meta["channels"] = first.channels();
  meta["length"] = first.length();
  meta["num_classes"] = first.num_classes;
  meta["splits"] = json::object();
  for (auto& [split, ds] : splits) meta["splits"][split] = ds.n();
  {
    std::ofstream out(fs::path(root) / "meta.json");
    if (!out) throw DataError("cannot write " + root + "/meta.json");
    out << meta.dump(2) << "\n";
  }
  for (auto& [split, ds] : splits) {
    {
      std::ofstream out(fs::path(root) / (split + ".bin"), std::ios::binary);
      if (!out) throw DataError("cannot write " + split + ".bin under " + root);
      out.write(reinterpret_cast<const char*>(ds.samples.data()),
                static_cast<std::streamsize>(ds.samples.size() * sizeof(float)));
    }
    {
      std::ofstream out(fs::path(root) / (split + ".labels"), std::ios::binary);
      if (!out) throw DataError("cannot write " + split + ".labels under " + root);
      out.write(reinterpret_cast<const char*>(ds.labels.data()),
                static_cast<std::streamsize>(ds.labels.size() * sizeof(std::int64_t)));
    }
  }
}

// ---------------------------------------------------------------------------
// Splitting

namespace {

/// Largest-remainder rounding of n * frac_s into integers summing to n.
std::vector<long> largest_remainder(long n, const std::vector<double>& fracs) {
  std::vector<long> base(fracs.size());
  std::vector<double> rem(fracs.size());
  long assigned = 0;
  for (std::size_t s = 0; s < fracs.size(); ++s) {
    const double q = static_cast<double>(n) * fracs[s];
    base[s] = static_cast<long>(std::floor(q));
    rem[s] = q - std::floor(q);
    assigned += base[s];
  }
  std::vector<std::size_t> order(fracs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (long k = 0; k < n - assigned; ++k) base[order[static_cast<std::size_t>(k)]] += 1;
  return base;
}

template <class T>
void seeded_shuffle(std::vector<T>& v, std::uint64_t key) {
  rng::Stream rs(key);
  for (long i = static_cast<long>(v.size()) - 1; i > 0; --i) {
    const long j = rs.uniform_int(0, i);
    std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
  }
}

}  // namespace

SplitIndices split_indices(long n, const std::vector<std::int64_t>& labels,
                           const SplitSpec& spec) {
  spec.validate();
  if (n < 1) throw ConfigError("split: empty dataset");
  const std::vector<double> fracs{spec.train_frac, spec.val_frac, spec.test_frac};
  const std::vector<long> sizes = largest_remainder(n, fracs);
  for (long s : sizes)
    if (s == 0)
      throw ConfigError("split: fractions leave an empty split for n=" + std::to_string(n));

  // group by class; stratify only when every present class has >= 5 samples
  std::map<std::int64_t, std::vector<long>> by_class;
  for (long i = 0; i < n; ++i) by_class[labels[static_cast<std::size_t>(i)]].push_back(i);
  bool stratify = true;
  for (auto& [c, members] : by_class)
    if (static_cast<long>(members.size()) < 5) stratify = false;

  SplitIndices out;
  if (!stratify) {
    std::vector<long> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0L);
    seeded_shuffle(idx, rng::mix(spec.seed, "split-shuffle"));
    out.train.assign(idx.begin(), idx.begin() + sizes[0]);
    out.val.assign(idx.begin() + sizes[0], idx.begin() + sizes[0] + sizes[1]);
    out.test.assign(idx.begin() + sizes[0] + sizes[1], idx.end());
  } else {
    // Controlled rounding: per-(class, split) quotas are floored, then the
    // leftover seats are granted by descending fractional remainder subject
    // to both the per-class totals and the exact global split sizes.
    struct Cell {
      std::int64_t cls;
      int split;
      double rem;
    };
    std::map<std::int64_t, std::array<long, 3>> alloc;
    std::map<std::int64_t, long> need;
    std::array<long, 3> cap{sizes[0], sizes[1], sizes[2]};
    std::vector<Cell> cells;
    for (auto& [c, members] : by_class) {
      const long nc = static_cast<long>(members.size());
      long base_total = 0;
      for (int s = 0; s < 3; ++s) {
        const double q = static_cast<double>(nc) * fracs[static_cast<std::size_t>(s)];
        const long b = static_cast<long>(std::floor(q));
        alloc[c][static_cast<std::size_t>(s)] = b;
        cap[static_cast<std::size_t>(s)] -= b;
        base_total += b;
        cells.push_back({c, s, q - std::floor(q)});
      }
      need[c] = nc - base_total;
    }
    std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
      if (a.rem != b.rem) return a.rem > b.rem;
      if (a.cls != b.cls) return a.cls < b.cls;
      return a.split < b.split;
    });
    for (const Cell& cell : cells) {
      if (need[cell.cls] > 0 && cap[static_cast<std::size_t>(cell.split)] > 0) {
        alloc[cell.cls][static_cast<std::size_t>(cell.split)] += 1;
        need[cell.cls] -= 1;
        cap[static_cast<std::size_t>(cell.split)] -= 1;
      }
    }
    for (auto& [c, members] : by_class) {
      seeded_shuffle(members, rng::mix(spec.seed, "split-class", static_cast<std::uint64_t>(c)));
      const long a0 = alloc[c][0], a1 = alloc[c][1];
      const long nc = static_cast<long>(members.size());
      for (long i = 0; i < nc; ++i) {
        if (i < a0)
          out.train.push_back(members[static_cast<std::size_t>(i)]);
        else if (i < a0 + a1)
          out.val.push_back(members[static_cast<std::size_t>(i)]);
        else
          out.test.push_back(members[static_cast<std::size_t>(i)]);
      }
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.val.begin(), out.val.end());
    std::sort(out.test.begin(), out.test.end());
  }
  if (out.train.empty() || out.val.empty() || out.test.empty())
    throw ConfigError("split: a split came out empty");
  return out;
}

TimeSeriesDataset take_rows(const TimeSeriesDataset& ds, const std::vector<long>& idx,
                            const std::string& tag) {
  TimeSeriesDataset out;
  out.name = ds.name;
  out.num_classes = ds.num_classes;
  out.origin_split = tag;
  const long c = ds.channels(), t = ds.length();
  out.samples = Tensor<float>({static_cast<long>(idx.size()), c, t});
  out.labels.resize(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const long src = idx[r];
    if (src < 0 || src >= ds.n()) throw StateError("take_rows: index out of range");
    std::memcpy(&out.samples.at3(static_cast<long>(r), 0, 0), &ds.samples.at3(src, 0, 0),
                static_cast<std::size_t>(c * t) * sizeof(float));
    out.labels[r] = ds.labels[static_cast<std::size_t>(src)];
  }
  return out;
}

void split_dataset(const TimeSeriesDataset& ds, const SplitSpec& spec, TimeSeriesDataset& train,
                   TimeSeriesDataset& val, TimeSeriesDataset& test) {
  ds.validate();
  const SplitIndices idx = split_indices(ds.n(), ds.labels, spec);
  train = take_rows(ds, idx.train, "train");
  val = take_rows(ds, idx.val, "val");
  test = take_rows(ds, idx.test, "test");
}

// ---------------------------------------------------------------------------
// Label subsampling

std::vector<long> subsample_indices(long n, const std::vector<std::int64_t>& labels,
                                    long num_classes, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ConfigError("subsample: fraction must be in (0,1]");
  const long m = static_cast<long>(std::ceil(fraction * static_cast<double>(n)));

  std::vector<std::vector<long>> by_class(static_cast<std::size_t>(num_classes));
  for (long i = 0; i < n; ++i)
    by_class[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(i);

  // Highest-quotient (divisor) allocation of m seats: repeatedly grant a seat
  // to the class maximizing n_c / (seats_c + 1). The grant sequence is fixed
  // for given class counts, so seats at a smaller m are a prefix of seats at
  // a larger m; that makes subsets at growing fractions nested.
  std::vector<long> seats(static_cast<std::size_t>(num_classes), 0);
  for (long granted = 0; granted < m; ++granted) {
    long best = -1;
    for (long c = 0; c < num_classes; ++c) {
      const long nc = static_cast<long>(by_class[static_cast<std::size_t>(c)].size());
      if (seats[static_cast<std::size_t>(c)] >= nc) continue;  // class exhausted
      if (best < 0) {
        best = c;
        continue;
      }
      const long nb = static_cast<long>(by_class[static_cast<std::size_t>(best)].size());
      // n_c/(s_c+1) > n_best/(s_best+1), compared exactly by cross-multiplying
      const long lhs = nc * (seats[static_cast<std::size_t>(best)] + 1);
      const long rhs = nb * (seats[static_cast<std::size_t>(c)] + 1);
      if (lhs > rhs || (lhs == rhs && nc > nb)) best = c;
    }
    if (best < 0) break;  // m == n and everything granted
    seats[static_cast<std::size_t>(best)] += 1;
  }

  std::vector<long> chosen;
  for (long c = 0; c < num_classes; ++c) {
    auto members = by_class[static_cast<std::size_t>(c)];
    if (members.empty()) continue;
    if (seats[static_cast<std::size_t>(c)] == 0) {
      WarningLog::add("subsample: class " + std::to_string(c) +
                      " received no samples at fraction " + std::to_string(fraction));
      continue;
    }
    seeded_shuffle(members, rng::mix(seed, "subsample", static_cast<std::uint64_t>(c)));
    chosen.insert(chosen.end(), members.begin(),
                  members.begin() + seats[static_cast<std::size_t>(c)]);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

TimeSeriesDataset subsample_labels(const TimeSeriesDataset& ds, double fraction,
                                   std::uint64_t seed) {
  ds.validate();
  const std::vector<long> idx = subsample_indices(ds.n(), ds.labels, ds.num_classes, fraction, seed);
  return take_rows(ds, idx, ds.origin_split);
}

// ---------------------------------------------------------------------------
// Synthetic task

TimeSeriesDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  const long k = spec.num_classes();
  const long n = spec.n_per_class * k;
  const long c = spec.channels, t = spec.length;
  constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

  TimeSeriesDataset ds;
  ds.name = "synthetic";
  ds.num_classes = k;
  ds.samples = Tensor<float>({n, c, t});
  ds.labels.resize(static_cast<std::size_t>(n));

  std::vector<double> freqs = spec.low_freq_classes;
  freqs.insert(freqs.end(), spec.high_freq_classes.begin(), spec.high_freq_classes.end());
  const long n_low = static_cast<long>(spec.low_freq_classes.size());

  for (long cls = 0; cls < k; ++cls) {
    const double f = freqs[static_cast<std::size_t>(cls)];
    const bool burst = cls >= n_low;
    for (long i = 0; i < spec.n_per_class; ++i) {
      const long row = cls * spec.n_per_class + i;
      ds.labels[static_cast<std::size_t>(row)] = cls;
      rng::Stream rs(rng::mix(seed, "synth", static_cast<std::uint64_t>(cls),
                              static_cast<std::uint64_t>(i)));
      const double center = burst ? static_cast<double>(t) * (0.25 + 0.5 * rs.uniform()) : 0.0;
      const double width = static_cast<double>(t) / 16.0;
      for (long ci = 0; ci < c; ++ci) {
        const double amp = 0.8 + 0.4 * rs.uniform();
        const double phase = kTwoPi * rs.uniform();
        for (long ti = 0; ti < t; ++ti) {
          double v = amp * std::sin(kTwoPi * f * static_cast<double>(ti) / static_cast<double>(t) +
                                    phase);
          if (burst) {
            const double d = (static_cast<double>(ti) - center) / width;
            v *= std::exp(-0.5 * d * d);
          }
          ds.samples.at3(row, ci, ti) = static_cast<float>(v);
        }
      }
      if (spec.noise_sigma > 0.0)
        for (long ci = 0; ci < c; ++ci)
          for (long ti = 0; ti < t; ++ti)
            ds.samples.at3(row, ci, ti) +=
                static_cast<float>(rs.gaussian(0.0, spec.noise_sigma));
    }
  }
  ds.validate();
  return ds;
}

}  // namespace freqboot::data
