#pragma once

// Training-set augmentation for binding-energy regression.
//
// Only targets are perturbed; (Z, A) are copied verbatim from the source
// record. Row order is fixed: all originals in input order, then one block
// per augmentation pass.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ame.hpp"
#include "errors.hpp"
#include "random.hpp"

namespace nucaug {

enum class OriginKind { original, error_plus, error_minus, gaussian };

struct RowOrigin {
  OriginKind kind = OriginKind::original;
  int resample_index = 0;  // >= 1 for gaussian rows

  friend bool operator==(const RowOrigin&, const RowOrigin&) = default;
};

inline std::string to_string(const RowOrigin& o) {
  switch (o.kind) {
    case OriginKind::original: return "original";
    case OriginKind::error_plus: return "err_plus";
    case OriginKind::error_minus: return "err_minus";
    case OriginKind::gaussian: return "gauss_" + std::to_string(o.resample_index);
  }
  return "?";
}

inline RowOrigin origin_from_string(std::string_view s) {
  if (s == "original") return {OriginKind::original, 0};
  if (s == "err_plus") return {OriginKind::error_plus, 0};
  if (s == "err_minus") return {OriginKind::error_minus, 0};
  if (s.starts_with("gauss_")) {
    int idx = 0;
    const auto tail = s.substr(6);
    const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), idx);
    if (ec == std::errc{} && ptr == tail.data() + tail.size() && idx >= 1) return {OriginKind::gaussian, idx};
  }
  throw ConfigError("unknown row origin '" + std::string(s) + "'");
}

struct TrainingRow {
  int z = 0;
  int a = 0;
  double energy = 0.0;  // MeV
  RowOrigin origin;
  std::size_t source = 0;  // index of the source record in the base list

  friend bool operator==(const TrainingRow&, const TrainingRow&) = default;
};

enum class Technique { none, error, gaussian };

inline std::string to_string(Technique t) {
  switch (t) {
    case Technique::none: return "none";
    case Technique::error: return "error";
    case Technique::gaussian: return "gaussian";
  }
  return "?";
}

inline Technique technique_from_string(std::string_view s) {
  if (s == "none") return Technique::none;
  if (s == "error") return Technique::error;
  if (s == "gaussian") return Technique::gaussian;
  throw ConfigError("unknown augmentation technique '" + std::string(s) + "'");
}

struct AugmentedTrainingSet {
  std::vector<TrainingRow> rows;
  std::size_t base_size = 0;
  Technique technique = Technique::none;
  int k = 0;  // resample count, gaussian only
  std::uint64_t noise_seed = 0;
  std::vector<NuclideRecord> base;  // source records, rows[i].source indexes this
};

inline TrainingRow original_row(const NuclideRecord& r, std::size_t index) {
  return {r.z, r.a, r.be_total, {OriginKind::original, 0}, index};
}

// The un-augmented set.
inline AugmentedTrainingSet no_augmentation(const std::vector<NuclideRecord>& train) {
  AugmentedTrainingSet set;
  set.base = train;
  set.base_size = train.size();
  set.technique = Technique::none;
  set.rows.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) set.rows.push_back(original_row(train[i], i));
  return set;
}

// Triplicates every record with a nonzero uncertainty as (E, E + dE, E - dE).
// Zero-uncertainty records keep their single original row.
inline AugmentedTrainingSet error_resample(const std::vector<NuclideRecord>& train) {
  if (train.empty()) throw ContractViolation("error_resample needs a nonempty training set");
  auto set = no_augmentation(train);
  set.technique = Technique::error;
  for (std::size_t i = 0; i < train.size(); ++i)
    if (train[i].be_err > 0.0)
      set.rows.push_back({train[i].z, train[i].a, train[i].be_total + train[i].be_err,
                          {OriginKind::error_plus, 0}, i});
  for (std::size_t i = 0; i < train.size(); ++i)
    if (train[i].be_err > 0.0)
      set.rows.push_back({train[i].z, train[i].a, train[i].be_total - train[i].be_err,
                          {OriginKind::error_minus, 0}, i});
  return set;
}

struct GaussianParams {
  double mu = 0.0;     // MeV
  double sigma = 0.0;  // MeV
};

// One Normal(mu, sigma) sample; consumes two stream values. sigma == 0
// returns mu exactly (the stream still advances).
inline double gaussian_draw(const GaussianParams& params, CounterStream& stream) {
  if (params.sigma < 0.0 || std::isnan(params.sigma)) throw DomainError("gaussian_draw: sigma must be >= 0");
  const double z = stream.next_standard_normal();
  if (params.sigma == 0.0) return params.mu;
  return params.mu + params.sigma * z;
}

// Stream for nucleus `index` in resample pass `pass` (1-based).
inline CounterStream resample_stream(std::uint64_t noise_seed, std::size_t index, int pass) {
  return CounterStream(noise_seed, {static_cast<std::uint64_t>(index), static_cast<std::uint64_t>(pass)});
}

// Originals followed by k passes of per-nucleus Gaussian draws around
// (be_total, be_err). Pass p only depends on (noise_seed, nucleus, p), so the
// set for k - 1 is a prefix of the set for k.
inline AugmentedTrainingSet gaussian_resample(const std::vector<NuclideRecord>& train, int k,
                                              std::uint64_t noise_seed) {
  if (k < 1) throw ConfigError("gaussian_resample: k must be >= 1");
  auto set = no_augmentation(train);
  set.technique = Technique::gaussian;
  set.k = k;
  set.noise_seed = noise_seed;
  set.rows.reserve(train.size() * static_cast<std::size_t>(1 + k));
  for (int pass = 1; pass <= k; ++pass) {
    for (std::size_t i = 0; i < train.size(); ++i) {
      auto stream = resample_stream(noise_seed, i, pass);
      const double e = gaussian_draw({train[i].be_total, train[i].be_err}, stream);
      set.rows.push_back({train[i].z, train[i].a, e, {OriginKind::gaussian, pass}, i});
    }
  }
  return set;
}

// Dispatch on a technique description.
inline AugmentedTrainingSet augment(const std::vector<NuclideRecord>& train, Technique technique, int k,
                                    std::uint64_t noise_seed) {
  switch (technique) {
    case Technique::none: return no_augmentation(train);
    case Technique::error: return error_resample(train);
    case Technique::gaussian: return gaussian_resample(train, k, noise_seed);
  }
  throw ConfigError("unknown augmentation technique");
}

inline std::size_t count_zero_uncertainty(const std::vector<NuclideRecord>& records) {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const NuclideRecord& r) { return r.be_err == 0.0; }));
}

// ---------------------------------------------------------------------------
// Augmented CSV: the canonical nuclide columns plus `origin`. be_total_mev
// holds the (possibly perturbed) row energy, be_err_mev the source
// uncertainty. The manifest line travels in a sidecar file.

inline void write_augmented_csv(std::ostream& os, const AugmentedTrainingSet& set) {
  os << kNuclideCsvHeader << ",origin\n";
  for (const auto& row : set.rows) {
    auto rec = set.base.at(row.source);
    rec.be_total = row.energy;
    write_nuclide_row(os, rec);
    os << ',' << to_string(row.origin) << '\n';
  }
}

inline std::string augmentation_manifest_line(const AugmentedTrainingSet& set) {
  std::ostringstream os;
  os << "technique=" << to_string(set.technique) << " k=" << set.k << " base_size=" << set.base_size
     << " noise_seed=" << set.noise_seed << " rows=" << set.rows.size();
  return os.str();
}

struct AugmentedCsvRow {
  NuclideRecord record;
  RowOrigin origin;
};

inline std::vector<AugmentedCsvRow> read_augmented_csv(std::istream& is) {
  std::vector<AugmentedCsvRow> rows;
  std::string line;
  if (!std::getline(is, line)) throw ParseError(1, "empty augmented CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != std::string(kNuclideCsvHeader) + ",origin") throw ParseError(1, "unexpected header '" + line + "'");
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_commas(line);
    if (cells.size() != 7) throw ParseError(line_no, "expected 7 columns");
    AugmentedCsvRow row;
    row.record = parse_nuclide_cells(cells, line_no);
    try {
      row.origin = origin_from_string(cells[6]);
    } catch (const ConfigError& e) {
      throw ParseError(line_no, e.what());
    }
    rows.push_back(row);
  }
  return rows;
}

// Rebuilds a training set from CSV rows: originals become the base list and
// every row keeps its energy and origin.
inline AugmentedTrainingSet training_set_from_rows(const std::vector<AugmentedCsvRow>& rows) {
  AugmentedTrainingSet set;
  std::map<std::pair<int, int>, std::size_t> index;
  for (const auto& r : rows) {
    if (r.origin.kind != OriginKind::original) continue;
    if (!index.emplace(r.record.key(), set.base.size()).second)
      throw DataIntegrityError("duplicate original row for Z=" + std::to_string(r.record.z) +
                               " A=" + std::to_string(r.record.a));
    set.base.push_back(r.record);
  }
  set.base_size = set.base.size();
  int max_pass = 0;
  bool has_error = false;
  for (const auto& r : rows) {
    const auto it = index.find(r.record.key());
    if (it == index.end())
      throw DataIntegrityError("augmented row for Z=" + std::to_string(r.record.z) + " A=" +
                               std::to_string(r.record.a) + " has no original row");
    set.rows.push_back({r.record.z, r.record.a, r.record.be_total, r.origin, it->second});
    if (r.origin.kind == OriginKind::gaussian) max_pass = std::max(max_pass, r.origin.resample_index);
    if (r.origin.kind == OriginKind::error_plus || r.origin.kind == OriginKind::error_minus) has_error = true;
  }
  set.technique = max_pass > 0 ? Technique::gaussian : has_error ? Technique::error : Technique::none;
  set.k = max_pass;
  return set;
}

}  // namespace nucaug
