#pragma once

// Atomic Mass Evaluation (AME) table ingestion.
//
// Reads the fixed-width `mass` files of the AME2016 and AME2020 editions,
// converts binding energy per nucleon (keV) into total binding energy (MeV),
// and provides the filtering, edition diff and train/test split used by the
// experiments. The canonical nuclide CSV defined here is the only format the
// rest of the library consumes.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "random.hpp"

namespace nucaug {

struct NuclideRecord {
  int z = 0;
  int n = 0;
  int a = 0;
  double be_total = 0.0;  // MeV
  double be_err = 0.0;    // MeV, one sigma
  bool estimated = false;

  std::pair<int, int> key() const noexcept { return {z, a}; }

  friend bool operator==(const NuclideRecord&, const NuclideRecord&) = default;
};

enum class AmeEdition { ame2016, ame2020 };

inline AmeEdition edition_from_string(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "ame2016" || lower == "2016") return AmeEdition::ame2016;
  if (lower == "ame2020" || lower == "2020") return AmeEdition::ame2020;
  throw ConfigError("unknown AME edition '" + std::string(text) + "' (expected AME2016 or AME2020)");
}

inline std::string to_string(AmeEdition edition) {
  return edition == AmeEdition::ame2016 ? "AME2016" : "AME2020";
}

// Zero-based [begin, end) column span of one fixed-width field.
struct FieldSpan {
  std::size_t begin;
  std::size_t end;

  std::string_view slice(std::string_view line) const { return line.substr(begin, end - begin); }
};

// Column positions measured against the data lines of each edition. The
// AME2020 header advertises `f15.5,f11.5` for the binding energy pair but
// the values actually occupy 54-67 and 68-78.
struct MassTableLayout {
  std::size_t header_lines;
  FieldSpan n;
  FieldSpan z;
  FieldSpan a;
  FieldSpan element;
  FieldSpan binding_per_nucleon;      // keV
  FieldSpan binding_per_nucleon_err;  // keV

  std::size_t min_width() const { return binding_per_nucleon_err.end; }
};

inline MassTableLayout layout_for(AmeEdition edition) {
  switch (edition) {
    case AmeEdition::ame2016:
      return {39, {4, 9}, {9, 14}, {14, 19}, {20, 23}, {52, 63}, {63, 72}};
    case AmeEdition::ame2020:
      return {36, {4, 9}, {9, 14}, {14, 19}, {20, 23}, {54, 67}, {68, 78}};
  }
  throw ConfigError("unknown AME edition");
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

inline int parse_int_field(std::string_view field, std::size_t line_no, const char* name) {
  const auto t = trim(field);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw ParseError(line_no, std::string("non-numeric ") + name + " field '" + std::string(field) + "'");
  return value;
}

// AME replaces the decimal point by '#' for estimated values.
inline double parse_ame_real(std::string_view field, std::size_t line_no, const char* name, bool& estimated) {
  std::string t(trim(field));
  estimated = false;
  if (auto pos = t.find('#'); pos != std::string::npos) {
    estimated = true;
    t[pos] = '.';
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw ParseError(line_no, std::string("non-numeric ") + name + " field '" + std::string(field) + "'");
  return value;
}

}  // namespace detail

// Parses a complete AME `mass` file including its header block.
inline std::vector<NuclideRecord> parse_mass_table(std::string_view content, AmeEdition edition) {
  const auto layout = layout_for(edition);
  std::vector<NuclideRecord> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::size_t data_lines = 0;
  while (pos < content.size()) {
    auto eol = content.find('\n', pos);
    if (eol == std::string_view::npos) eol = content.size();
    std::string_view line = content.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no <= layout.header_lines) continue;
    if (detail::trim(line).empty()) continue;
    if (line.size() < layout.min_width())
      throw ParseError(line_no, "line is " + std::to_string(line.size()) + " columns wide, expected at least " +
                                    std::to_string(layout.min_width()));
    ++data_lines;

    NuclideRecord rec;
    rec.n = detail::parse_int_field(layout.n.slice(line), line_no, "N");
    rec.z = detail::parse_int_field(layout.z.slice(line), line_no, "Z");
    rec.a = detail::parse_int_field(layout.a.slice(line), line_no, "A");
    if (rec.n < 0 || rec.z < 0 || rec.a != rec.z + rec.n)
      throw ParseError(line_no, "inconsistent Z/N/A");
    bool est_value = false;
    bool est_err = false;
    const double per_nucleon = detail::parse_ame_real(layout.binding_per_nucleon.slice(line), line_no,
                                                      "binding energy", est_value);
    const double per_nucleon_err = detail::parse_ame_real(layout.binding_per_nucleon_err.slice(line), line_no,
                                                          "binding energy uncertainty", est_err);
    if (per_nucleon_err < 0.0) throw ParseError(line_no, "negative uncertainty");
    rec.be_total = per_nucleon * rec.a / 1000.0;
    rec.be_err = per_nucleon_err * rec.a / 1000.0;
    rec.estimated = est_value;
    records.push_back(rec);
  }
  if (line_no <= layout.header_lines)
    throw ParseError(line_no, "file ends inside the " + std::to_string(layout.header_lines) + "-line header");
  if (data_lines == 0) throw ParseError(line_no, "no data lines");
  return records;
}

// Keeps measured (non-`#`) records with z >= z_min and n >= n_min, in order.
inline std::vector<NuclideRecord> filter_experimental(const std::vector<NuclideRecord>& records, int z_min,
                                                      int n_min) {
  std::vector<NuclideRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [&](const NuclideRecord& r) { return r.z >= z_min && r.n >= n_min && !r.estimated; });
  return out;
}

namespace detail {

inline std::set<std::pair<int, int>> unique_keys(const std::vector<NuclideRecord>& records, const char* which) {
  std::set<std::pair<int, int>> keys;
  for (const auto& r : records) {
    if (!keys.insert(r.key()).second)
      throw DataIntegrityError(std::string("duplicate nuclide (Z=") + std::to_string(r.z) +
                               ", A=" + std::to_string(r.a) + ") in " + which + " list");
  }
  return keys;
}

}  // namespace detail

// Records of `newer` whose (z, a) is absent from `older`, in `newer` order.
inline std::vector<NuclideRecord> diff_new_nuclei(const std::vector<NuclideRecord>& older,
                                                  const std::vector<NuclideRecord>& newer) {
  const auto old_keys = detail::unique_keys(older, "old");
  detail::unique_keys(newer, "new");
  std::vector<NuclideRecord> out;
  for (const auto& r : newer)
    if (!old_keys.contains(r.key())) out.push_back(r);
  return out;
}

struct DatasetSplit {
  std::vector<NuclideRecord> train;
  std::vector<NuclideRecord> test;
  std::uint64_t split_seed = 0;
  double ratio = 0.0;
};

inline std::size_t train_size_for(std::size_t total, double ratio) {
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(total)));
}

// Seeded Fisher-Yates permutation; the first floor(ratio * N) records form
// the training set.
inline DatasetSplit split_dataset(const std::vector<NuclideRecord>& records, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must lie in (0, 1)");
  if (records.empty()) throw ContractViolation("cannot split an empty record list");
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  CounterStream stream(seed, {0x5b1170ULL});
  shuffle_in_place(std::span<std::size_t>(order), stream);

  DatasetSplit split;
  split.split_seed = seed;
  split.ratio = ratio;
  const auto n_train = train_size_for(records.size(), ratio);
  split.train.reserve(n_train);
  split.test.reserve(records.size() - n_train);
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_train ? split.train : split.test).push_back(records[order[i]]);
  return split;
}

// ---------------------------------------------------------------------------
// Canonical nuclide CSV: z,n,a,be_total_mev,be_err_mev,estimated
// Reals use the shortest round-trip decimal form.

inline constexpr std::string_view kNuclideCsvHeader = "z,n,a,be_total_mev,be_err_mev,estimated";

inline std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

inline void write_nuclide_row(std::ostream& os, const NuclideRecord& r) {
  os << r.z << ',' << r.n << ',' << r.a << ',' << format_real(r.be_total) << ',' << format_real(r.be_err) << ','
     << (r.estimated ? 1 : 0);
}

inline void write_nuclide_csv(std::ostream& os, const std::vector<NuclideRecord>& records) {
  os << kNuclideCsvHeader << '\n';
  for (const auto& r : records) {
    write_nuclide_row(os, r);
    os << '\n';
  }
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline double parse_real_cell(std::string_view cell, std::size_t line_no, const char* name) {
  const auto t = trim(cell);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw ParseError(line_no, std::string("bad ") + name + " value '" + std::string(cell) + "'");
  return value;
}

}  // namespace detail

// Parses one canonical row (first six cells); extra trailing cells are left
// to the caller.
inline NuclideRecord parse_nuclide_cells(const std::vector<std::string_view>& cells, std::size_t line_no) {
  if (cells.size() < 6) throw ParseError(line_no, "expected at least 6 columns");
  NuclideRecord r;
  r.z = detail::parse_int_field(cells[0], line_no, "z");
  r.n = detail::parse_int_field(cells[1], line_no, "n");
  r.a = detail::parse_int_field(cells[2], line_no, "a");
  r.be_total = detail::parse_real_cell(cells[3], line_no, "be_total_mev");
  r.be_err = detail::parse_real_cell(cells[4], line_no, "be_err_mev");
  const int est = detail::parse_int_field(cells[5], line_no, "estimated");
  if (est != 0 && est != 1) throw ParseError(line_no, "estimated must be 0 or 1");
  r.estimated = est == 1;
  if (r.a != r.z + r.n) throw ParseError(line_no, "a != z + n");
  if (r.be_err < 0.0) throw ParseError(line_no, "negative be_err_mev");
  return r;
}

inline std::vector<NuclideRecord> read_nuclide_csv(std::istream& is) {
  std::vector<NuclideRecord> records;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(is, line)) throw ParseError(1, "empty nuclide CSV");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind(kNuclideCsvHeader, 0) != 0) throw ParseError(1, "unexpected header '" + line + "'");
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    records.push_back(parse_nuclide_cells(detail::split_commas(line), line_no));
  }
  return records;
}

}  // namespace nucaug
