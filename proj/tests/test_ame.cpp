#include <gtest/gtest.h>

#include <nucaug/ame.hpp>
#include <nucaug/pipeline.hpp>

#include <algorithm>
#include <set>
#include <sstream>

using namespace nucaug;

namespace {

const std::filesystem::path kData = NUCAUG_DATA_DIR;

std::string header_of(const std::string& content, std::size_t lines) {
  std::size_t pos = 0;
  for (std::size_t i = 0; i < lines; ++i) pos = content.find('\n', pos) + 1;
  return content.substr(0, pos);
}

const std::string& ame16_text() {
  static const std::string text = read_file(kData / "mass16.txt");
  return text;
}

const std::string& ame20_text() {
  static const std::string text = read_file(kData / "mass.mas20");
  return text;
}

// Data lines copied from the two editions.
const char* kPb208_2016 =
    "  44  126   82  208 Pb       -21748.598      1.148     7867.453    0.006 B-  -2878.375    2.013 207 976651.918      1.231";
const char* kO16_2016 =
    "   0    8    8   16 O         -4737.00135    0.00016   7976.206    0.000 B- -15417.254    8.321  15 994914.61960    0.00017";
const char* kBe5_2016 =
    "  -3    1    4    5 Be    x   37139#      2003#          18#     401#    B-      *                5 039870#      2150#";
const char* kPb208_2020 =
    "  44  126   82  208 Pb       -21748.519       1.148      7867.4530     0.0055  B-  -2878.3680     2.0127  207 976652.005       1.232";
const char* kO16_2020 =
    "   0    8    8   16 O         -4737.00217     0.00030    7976.2072     0.0002  B- -15412.1840     5.3642   15 994914.61926     0.00032";

const NuclideRecord& find(const std::vector<NuclideRecord>& records, int z, int a) {
  const auto it = std::find_if(records.begin(), records.end(), [&](const auto& r) { return r.z == z && r.a == a; });
  if (it == records.end()) throw std::runtime_error("nuclide not found");
  return *it;
}

std::vector<NuclideRecord> toy_records() {
  return {
      {1, 0, 1, 0.0, 0.0, false},          {8, 8, 16, 127.619296, 0.0, false}, {8, 7, 15, 111.955, 0.0005, false},
      {7, 9, 16, 117.98, 0.002, false},    {9, 9, 18, 137.37, 0.0006, false},  {20, 20, 40, 342.05, 0.00002, false},
      {8, 12, 20, 151.37, 0.0008, true},   {50, 70, 120, 1020.5, 0.0012, false},
  };
}

}  // namespace

// ---------------------------------------------------------------------------
// Fixed-width parsing

TEST(AmeParse, Pb208LineAme2016) {
  const auto text = header_of(ame16_text(), 39) + kPb208_2016 + "\n";
  const auto records = parse_mass_table(text, AmeEdition::ame2016);
  ASSERT_EQ(records.size(), 1u);
  const auto& r = records[0];
  EXPECT_EQ(r.z, 82);
  EXPECT_EQ(r.n, 126);
  EXPECT_EQ(r.a, 208);
  EXPECT_FALSE(r.estimated);
  // 7867.453 keV * 208 / 1000, 0.006 keV * 208 / 1000
  EXPECT_NEAR(r.be_total, 1636.430224, 1e-9);
  EXPECT_NEAR(r.be_err, 0.001248, 1e-12);
  EXPECT_NEAR(r.be_total, 1636.43022, 5e-6);
  EXPECT_NEAR(r.be_err, 0.00125, 5e-6);
}

TEST(AmeParse, O16LineAme2016) {
  const auto text = header_of(ame16_text(), 39) + kO16_2016 + "\n";
  const auto r = parse_mass_table(text, AmeEdition::ame2016).at(0);
  EXPECT_EQ(r.z, 8);
  EXPECT_EQ(r.a, 16);
  EXPECT_NEAR(r.be_total, 7976.206 * 16 / 1000.0, 1e-12);
  EXPECT_EQ(r.be_err, 0.0);
}

TEST(AmeParse, Ame2020LinesWithCrlf) {
  const auto text = header_of(ame20_text(), 36) + kPb208_2020 + "\r\n" + kO16_2020 + "\r\n";
  const auto records = parse_mass_table(text, AmeEdition::ame2020);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_NEAR(records[0].be_total, 1636.430224, 1e-9);
  EXPECT_NEAR(records[0].be_err, 0.0055 * 208 / 1000.0, 1e-12);
  EXPECT_NEAR(records[1].be_total, 127.6193152, 1e-9);
  EXPECT_NEAR(records[1].be_err, 0.0002 * 16 / 1000.0, 1e-15);
}

TEST(AmeParse, HashMarksEstimatedValue) {
  const auto text = header_of(ame16_text(), 39) + kBe5_2016 + "\n";
  const auto r = parse_mass_table(text, AmeEdition::ame2016).at(0);
  EXPECT_TRUE(r.estimated);
  EXPECT_EQ(r.z, 4);
  EXPECT_NEAR(r.be_total, 18.0 * 5 / 1000.0, 1e-12);
}

TEST(AmeParse, BlankLinesIgnored) {
  const auto text = header_of(ame16_text(), 39) + kO16_2016 + "\n\n   \n" + kPb208_2016 + "\n";
  EXPECT_EQ(parse_mass_table(text, AmeEdition::ame2016).size(), 2u);
}

TEST(AmeParse, ShortLineReportsLineNumber) {
  const auto text = header_of(ame16_text(), 39) + kO16_2016 + "\n" + std::string(kPb208_2016).substr(0, 40) + "\n";
  try {
    parse_mass_table(text, AmeEdition::ame2016);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 41u);
  }
}

TEST(AmeParse, NonNumericFieldReportsLineNumber) {
  std::string bad = kPb208_2016;
  bad.replace(52, 11, "   abc.def ");
  const auto text = header_of(ame16_text(), 39) + bad + "\n";
  try {
    parse_mass_table(text, AmeEdition::ame2016);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 40u);
    EXPECT_NE(std::string(e.what()).find("binding energy"), std::string::npos);
  }
}

TEST(AmeParse, InconsistentMassNumberRejected) {
  std::string bad = kPb208_2016;
  bad.replace(14, 5, "  209");
  EXPECT_THROW(parse_mass_table(header_of(ame16_text(), 39) + bad + "\n", AmeEdition::ame2016), ParseError);
}

TEST(AmeParse, EmptyOrHeaderOnlyInputRejected) {
  EXPECT_THROW(parse_mass_table("", AmeEdition::ame2016), ParseError);
  EXPECT_THROW(parse_mass_table(header_of(ame16_text(), 39), AmeEdition::ame2016), ParseError);
}

TEST(AmeParse, UnknownEditionIsConfigError) {
  EXPECT_THROW(edition_from_string("AME2003"), ConfigError);
  EXPECT_EQ(edition_from_string("ame2020"), AmeEdition::ame2020);
  EXPECT_EQ(edition_from_string("AME2016"), AmeEdition::ame2016);
}

// Counts from an independent column parse of the distributed files.
TEST(AmeParse, FullFilesAme2016) {
  const auto records = parse_mass_table(ame16_text(), AmeEdition::ame2016);
  EXPECT_EQ(records.size(), 3436u);
  const auto& pb = find(records, 82, 208);
  EXPECT_NEAR(pb.be_total, 1636.430224, 1e-9);
  EXPECT_NEAR(pb.be_err, 0.001248, 1e-12);
  const auto& o = find(records, 8, 16);
  EXPECT_NEAR(o.be_total, 127.619296, 1e-9);
}

TEST(AmeParse, FullFilesAme2020) {
  const auto records = parse_mass_table(ame20_text(), AmeEdition::ame2020);
  EXPECT_EQ(records.size(), 3558u);
  EXPECT_NEAR(find(records, 82, 208).be_total, 1636.430224, 1e-9);
  EXPECT_NEAR(find(records, 8, 16).be_total, 127.6193152, 1e-9);
}

// Every record must reproduce per-nucleon * A / 1000 from its own line, read
// here with strtod instead of from_chars.
TEST(AmeParse, RoundTripAgainstRawColumns) {
  const auto records = parse_mass_table(ame16_text(), AmeEdition::ame2016);
  std::istringstream is(ame16_text());
  std::string line;
  for (int i = 0; i < 39; ++i) std::getline(is, line);
  std::size_t idx = 0;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(' ') == std::string::npos) continue;
    auto field = line.substr(52, 11);
    std::replace(field.begin(), field.end(), '#', '.');
    const double per_nucleon = std::strtod(field.c_str(), nullptr);
    const int a = std::atoi(line.substr(14, 5).c_str());
    ASSERT_LT(idx, records.size());
    EXPECT_NEAR(records[idx].be_total, per_nucleon * a / 1000.0, 5e-6) << "record " << idx;
    ++idx;
  }
  EXPECT_EQ(idx, records.size());
}

// ---------------------------------------------------------------------------
// Filtering

TEST(AmeFilter, ToyList) {
  const auto out = filter_experimental(toy_records(), 8, 8);
  // H-1 (Z<8), O-15 (N<8), N-16 (Z<8) and the estimated O-20 drop out.
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[0].key(), std::make_pair(8, 16));
  EXPECT_EQ(out[1].key(), std::make_pair(9, 18));
  EXPECT_EQ(out[3].key(), std::make_pair(50, 120));
}

TEST(AmeFilter, NoOpWhenEverythingQualifies) {
  const std::vector<NuclideRecord> all = {{8, 8, 16, 127.6, 0.0, false}, {20, 20, 40, 342.05, 0.0, false}};
  EXPECT_EQ(filter_experimental(all, 8, 8), all);
}

TEST(AmeFilter, IdempotentAndSubset) {
  const auto records = parse_mass_table(ame16_text(), AmeEdition::ame2016);
  const auto once = filter_experimental(records, 8, 8);
  EXPECT_EQ(filter_experimental(once, 8, 8), once);
  for (const auto& r : once) {
    EXPECT_GE(r.z, 8);
    EXPECT_GE(r.n, 8);
    EXPECT_FALSE(r.estimated);
    EXPECT_GT(r.be_total, 0.0);
  }
}

TEST(AmeFilter, PaperCounts) {
  const auto f16 = filter_experimental(parse_mass_table(ame16_text(), AmeEdition::ame2016), 8, 8);
  const auto f20 = filter_experimental(parse_mass_table(ame20_text(), AmeEdition::ame2020), 8, 8);
  EXPECT_EQ(f16.size(), 2408u);
  EXPECT_EQ(f20.size(), 2457u);
  EXPECT_EQ(count_zero_uncertainty(f16), 46u);
}

// ---------------------------------------------------------------------------
// Edition diff

TEST(AmeDiff, NewNucleiBetweenEditions) {
  const auto f16 = filter_experimental(parse_mass_table(ame16_text(), AmeEdition::ame2016), 8, 8);
  const auto f20 = filter_experimental(parse_mass_table(ame20_text(), AmeEdition::ame2020), 8, 8);
  const auto fresh = diff_new_nuclei(f16, f20);
  EXPECT_EQ(fresh.size(), 71u);
  std::set<std::pair<int, int>> old_keys;
  for (const auto& r : f16) old_keys.insert(r.key());
  for (const auto& r : fresh) EXPECT_FALSE(old_keys.contains(r.key()));
}

TEST(AmeDiff, IdenticalListsGiveNothing) {
  const auto f = filter_experimental(toy_records(), 8, 8);
  EXPECT_TRUE(diff_new_nuclei(f, f).empty());
}

TEST(AmeDiff, EmptyOldListReturnsNewer) {
  const auto f = filter_experimental(toy_records(), 8, 8);
  EXPECT_EQ(diff_new_nuclei({}, f), f);
}

TEST(AmeDiff, DuplicateKeysRejected) {
  auto f = filter_experimental(toy_records(), 8, 8);
  auto dup = f;
  dup.push_back(f[0]);
  EXPECT_THROW(diff_new_nuclei(dup, f), DataIntegrityError);
  EXPECT_THROW(diff_new_nuclei(f, dup), DataIntegrityError);
}

// ---------------------------------------------------------------------------
// Split

TEST(AmeSplit, SizesFloorRatio) {
  std::vector<NuclideRecord> records;
  for (int i = 0; i < 2408; ++i) records.push_back({8 + i % 90, 8 + i, 16 + i % 90 + i, 100.0 + i, 0.001, false});
  const auto s = split_dataset(records, 0.7, 5);
  EXPECT_EQ(s.train.size(), 1685u);
  EXPECT_EQ(s.test.size(), 723u);
}

TEST(AmeSplit, DisjointCoveringPermutation) {
  std::vector<NuclideRecord> records;
  for (int i = 0; i < 10; ++i) records.push_back({8 + i, 8, 16 + i, 100.0 + i, 0.0, false});
  const auto s = split_dataset(records, 0.5, 11);
  ASSERT_EQ(s.train.size(), 5u);
  ASSERT_EQ(s.test.size(), 5u);
  std::set<std::pair<int, int>> keys;
  for (const auto* part : {&s.train, &s.test})
    for (const auto& r : *part) EXPECT_TRUE(keys.insert(r.key()).second);
  EXPECT_EQ(keys.size(), 10u);
}

TEST(AmeSplit, DeterministicPerSeed) {
  const auto f16 = filter_experimental(parse_mass_table(ame16_text(), AmeEdition::ame2016), 8, 8);
  const auto a = split_dataset(f16, 0.7, 9);
  const auto b = split_dataset(f16, 0.7, 9);
  const auto c = split_dataset(f16, 0.7, 10);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(a.train, c.train);
}

TEST(AmeSplit, InvalidRatio) {
  const auto f = filter_experimental(toy_records(), 8, 8);
  EXPECT_THROW(split_dataset(f, 0.0, 1), ConfigError);
  EXPECT_THROW(split_dataset(f, 1.0, 1), ConfigError);
  EXPECT_THROW(split_dataset(f, -0.2, 1), ConfigError);
}

// ---------------------------------------------------------------------------
// CSV

TEST(AmeCsv, RoundTripIsExact) {
  const auto records = parse_mass_table(ame16_text(), AmeEdition::ame2016);
  std::stringstream ss;
  write_nuclide_csv(ss, records);
  EXPECT_EQ(read_nuclide_csv(ss), records);
}

TEST(AmeCsv, BadRowsRejected) {
  std::istringstream bad_header("z,n,a\n8,8,16\n");
  EXPECT_THROW(read_nuclide_csv(bad_header), ParseError);
  std::istringstream bad_cell(std::string(kNuclideCsvHeader) + "\n8,8,16,abc,0,0\n");
  EXPECT_THROW(read_nuclide_csv(bad_cell), ParseError);
}
