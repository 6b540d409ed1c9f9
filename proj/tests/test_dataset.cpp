#include <doctest.h>

#include <fstream>
#include <sstream>

#include "episignal/csv.hpp"
#include "episignal/dataset.hpp"
#include "episignal/error.hpp"
#include "episignal/random.hpp"
#include "support/fixtures.hpp"

using namespace episignal;
namespace fs = std::filesystem;

namespace {

fs::path write_text(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an episignal::Error");
  return ErrorKind::Io;
}

bool valid_key(const std::string& s) {
  if (s.empty() || s.front() == ' ' || s.back() == ' ') return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == ' ';
    if (!ok) return false;
    if (c == ' ' && i > 0 && s[i - 1] == ' ') return false;
  }
  return true;
}

}  // namespace

TEST_CASE("normalize_name strips accents, case and extra whitespace") {
  CHECK(normalize_name("São Paulo").normalized == "sao paulo");
  CHECK(normalize_name("  Mogi  das Cruzes ").normalized == "mogi das cruzes");
  CHECK(normalize_name("Taboão da Serra").normalized == "taboao da serra");
  CHECK(normalize_name("Santa Bárbara d'Oeste").normalized == "santa barbara doeste");
  CHECK(normalize_name("Embu-Guaçu").normalized == "embu-guacu");
  CHECK(normalize_name("ARAÇATUBA").normalized == "aracatuba");
  CHECK(normalize_name("São Paulo").raw_name == "São Paulo");
  CHECK(kind_of([] { normalize_name("   "); }) == ErrorKind::EmptyName);
  CHECK(kind_of([] { normalize_name(""); }) == ErrorKind::EmptyName);
}

TEST_CASE("normalize_name is idempotent on a fuzz corpus") {
  static const std::vector<std::string> pieces = {"São",  "Ribeirão", "  ",   "d'",  "Águas", "-",   "Ç",    "ê",
                                                  "Ö",    "ñ",        "\t",   "123", "Z",     ".",   ",",    "Ã",
                                                  "ÿ",    "Ł",        "e\xcc\x81", "(",  "Mogi",  "da",  "x",    "ß"};
  Rng rng(42);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string raw;
    const int len = 1 + static_cast<int>(rng.below(6));
    for (int j = 0; j < len; ++j) raw += pieces[rng.below(pieces.size())];
    std::string once;
    try {
      once = normalize(raw);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::EmptyName);
      continue;
    }
    ++checked;
    CHECK_MESSAGE(valid_key(once), "raw '" << raw << "' -> '" << once << "'");
    CHECK(normalize(once) == once);
  }
  CHECK(checked > 800);
}

TEST_CASE("csv parser handles quotes, BOM and blank lines") {
  const csv::Table t = csv::parse("\xEF\xBB\xBFname,value\n\"Santa, Rita\",1\n\n\"say \"\"hi\"\"\",2\r\n");
  REQUIRE(t.header == std::vector<std::string>{"name", "value"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][0] == "Santa, Rita");
  CHECK(t.rows[1][0] == "say \"hi\"");
  CHECK(t.rows[1][1] == "2");
  CHECK(t.column("value") == 1);
  CHECK(t.column("missing") == -1);
  CHECK(csv::escape("a,b") == "\"a,b\"");
  CHECK(csv::escape("plain") == "plain");
}

TEST_CASE("load_profiles parses numeric columns and rejects bad input") {
  const fs::path dir = testing::scratch_dir("dataset-profiles");
  const FeatureMatrix m =
      load_profiles(write_text(dir / "ok.csv", "name,pop,income\nArealva,10,2.5\nBauru,20,3.5\nCampinas,30,4.5\n"));
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 2);
  CHECK(m.feature_names == std::vector<std::string>{"pop", "income"});
  CHECK(m.values(1, 1) == doctest::Approx(3.5));
  CHECK(m.find("bauru") == 1);
  CHECK(m.find("nowhere") == -1);

  const auto dup = write_text(dir / "dup.csv", "name,pop\nArealva,1\n ARealva ,2\n");
  CHECK(kind_of([&] { load_profiles(dup); }) == ErrorKind::DuplicateCounty);
  const auto na = write_text(dir / "na.csv", "name,pop\nArealva,n/a\n");
  CHECK(kind_of([&] { load_profiles(na); }) == ErrorKind::ParseError);
  const auto noname = write_text(dir / "noname.csv", "city,pop\nArealva,1\n");
  CHECK(kind_of([&] { load_profiles(noname); }) == ErrorKind::MissingNameColumn);
  CHECK(kind_of([&] { load_profiles(dir / "absent.csv"); }) == ErrorKind::Io);

  ProfileSchema schema;
  schema.name_column = "city";
  CHECK(load_profiles(noname, schema).rows() == 1);
}

TEST_CASE("merge_profiles keeps counties present everywhere and prefers earlier sources") {
  FeatureMatrix a, b;
  a.county_keys = {normalize_name("Bauru"), normalize_name("Assis")};
  a.feature_names = {"pop", "income"};
  a.values.resize(2, 2);
  a.values << 1, 2, 3, 4;
  b.county_keys = {normalize_name("Assis"), normalize_name("Bauru"), normalize_name("Lins")};
  b.feature_names = {"income", "hdi"};
  b.values.resize(3, 2);
  b.values << 40, 0.7, 20, 0.8, 10, 0.6;
  const MergedProfiles m = merge_profiles({a, b});
  REQUIRE(m.matrix.rows() == 2);
  CHECK(m.matrix.feature_names == std::vector<std::string>{"pop", "income", "hdi"});
  const auto bauru = m.matrix.find("bauru");
  REQUIRE(bauru >= 0);
  CHECK(m.matrix.values(bauru, 1) == 2.0);
  CHECK(m.matrix.values(bauru, 2) == doctest::Approx(0.8));
  CHECK(m.dropped_counties == std::vector<std::string>{"lins"});
}

TEST_CASE("prune_correlated drops later correlated columns") {
  Rng rng(3);
  FeatureMatrix m;
  const int n = 200;
  m.values.resize(n, 4);
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    m.values(i, 0) = x;
    m.values(i, 1) = 2.0 * x + 0.01 * rng.normal();
    m.values(i, 2) = rng.normal();
    m.values(i, 3) = 5.0;
    m.county_keys.push_back(normalize_name("c" + std::to_string(i)));
  }
  m.feature_names = {"x", "x2", "y", "const"};
  // The fixture must actually be correlated for the check to mean anything.
  REQUIRE(std::abs(pearson_correlation(m.values.col(0), m.values.col(1))) > 0.99);
  REQUIRE(std::abs(pearson_correlation(m.values.col(0), m.values.col(2))) < 0.9);

  const PruneResult r = prune_correlated(m, 0.9);
  CHECK(r.matrix.feature_names == std::vector<std::string>{"x", "y"});
  CHECK(r.dropped == std::vector<std::string>{"x2"});
  CHECK(r.degenerate == std::vector<std::string>{"const"});
  for (Eigen::Index a = 0; a < r.matrix.cols(); ++a) {
    for (Eigen::Index b = a + 1; b < r.matrix.cols(); ++b) {
      CHECK(std::abs(pearson_correlation(r.matrix.values.col(a), r.matrix.values.col(b))) <= 0.9);
    }
  }
  const PruneResult again = prune_correlated(m, 0.9);
  CHECK(again.matrix.feature_names == r.matrix.feature_names);
  CHECK(again.matrix.values == r.matrix.values);

  FeatureMatrix two;
  two.county_keys = {normalize_name("a"), normalize_name("b"), normalize_name("c"), normalize_name("d")};
  two.feature_names = {"u", "v"};
  two.values.resize(4, 2);
  two.values << 1, 1, -1, 1, 1, -1, -1, -1;
  CHECK(prune_correlated(two).dropped.empty());

  FeatureMatrix one = two.select_columns({0});
  CHECK(kind_of([&] { prune_correlated(one); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { prune_correlated(two, 0.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("minmax_scale maps columns onto [0, 1]") {
  FeatureMatrix m;
  m.county_keys = {normalize_name("a"), normalize_name("b"), normalize_name("c")};
  m.feature_names = {"even", "binary", "shifted"};
  m.values.resize(3, 3);
  m.values << 2, 0, -1, 4, 1, 0, 6, 1, 3;
  const FeatureMatrix s = minmax_scale(m);
  CHECK(s.values(0, 0) == 0.0);
  CHECK(s.values(1, 0) == 0.5);
  CHECK(s.values(2, 0) == 1.0);
  CHECK(s.values.col(1) == m.values.col(1));
  CHECK(s.values(1, 2) == doctest::Approx(0.25));
  CHECK(minmax_scale(s).values == s.values);
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    CHECK(s.values.col(j).minCoeff() == 0.0);
    CHECK(s.values.col(j).maxCoeff() == 1.0);
  }
  FeatureMatrix flat = m;
  flat.values.col(1).setConstant(7.0);
  CHECK(kind_of([&] { minmax_scale(flat); }) == ErrorKind::DegenerateColumn);
}

TEST_CASE("load_case_series derives cumulative counts and repairs the input") {
  const fs::path dir = testing::scratch_dir("dataset-cases");
  const auto path = write_text(dir / "cases.csv",
                               "date,county,new_cases,new_deaths\n"
                               "2020-03-01,Assis,1,0\n2020-03-02,Assis,0,0\n2020-03-03,Assis,2,1\n"
                               "2020-03-04,Assis,0,0\n2020-03-05,Assis,1,0\n"
                               "2020-03-01,Bauru,4,0\n2020-03-03,Bauru,-2,0\n2020-03-04,Bauru,3,0\n"
                               "2020-03-04,Bauru,1,1\n");
  const CaseData data = load_case_series(path);
  REQUIRE(data.series.size() == 2);
  const CaseSeries& assis = data.series.at("assis");
  CHECK(assis.cumulative_cases == std::vector<std::int64_t>{1, 1, 3, 3, 4});
  CHECK(assis.total_deaths() == 1);

  const CaseSeries& bauru = data.series.at("bauru");
  CHECK(bauru.new_cases == std::vector<std::int64_t>{4, 0, 0, 4});
  CHECK(bauru.cumulative_cases == std::vector<std::int64_t>{4, 4, 4, 8});
  for (std::size_t t = 1; t < bauru.dates.size(); ++t) CHECK(bauru.dates[t] - bauru.dates[t - 1] == std::chrono::days(1));

  std::vector<std::string> kinds;
  for (const auto& w : data.report) kinds.push_back(w.kind);
  std::sort(kinds.begin(), kinds.end());
  CHECK(kinds == std::vector<std::string>{"duplicate_date_summed", "missing_day_filled", "negative_cases_clamped"});

  std::ostringstream report;
  write_load_report(report, data.report);
  const std::string lines = report.str();
  CHECK(std::count(lines.begin(), lines.end(), '\n') == 3);

  CHECK(kind_of([&] { load_case_series(write_text(dir / "empty.csv", "date,county,new_cases,new_deaths\n")); }) ==
        ErrorKind::EmptySeries);
  CHECK(kind_of([&] { load_case_series(write_text(dir / "bad.csv", "date,county,new_cases,new_deaths\n2020-13-01,A,1,0\n")); }) ==
        ErrorKind::ParseError);
  CHECK(kind_of([&] { load_case_series(write_text(dir / "cols.csv", "date,county,cases\n2020-01-01,A,1\n")); }) ==
        ErrorKind::ParseError);
}

TEST_CASE("cumulative counts equal prefix sums on the synthetic fixture") {
  const fs::path dir = testing::scratch_dir("dataset-prefix");
  const auto fx = testing::write_county_fixture(dir, 5, 6, 60);
  const CaseData data = load_case_series(fx.cases);
  CHECK(data.series.size() == 6);
  for (const auto& [name, s] : data.series) {
    std::int64_t sum = 0;
    for (std::size_t t = 0; t < s.size(); ++t) {
      sum += s.new_cases[t];
      CHECK(s.cumulative_cases[t] == sum);
    }
  }
}

TEST_CASE("slice_period restricts the series") {
  const CaseSeries s = make_case_series(normalize_name("Assis"), parse_date("2020-03-01"), {1, 0, 2, 0, 1}, {}, 10);
  const CaseSeries full = slice_period(s, parse_period("2020-02-01..2020-04-01"));
  CHECK(full.dates == s.dates);
  CHECK(full.cumulative_cases == s.cumulative_cases);
  const CaseSeries day = slice_period(s, parse_period("2020-03-03..2020-03-03"));
  REQUIRE(day.size() == 1);
  CHECK(day.new_cases[0] == 2);
  CHECK(day.cumulative_cases[0] == 13);
  CHECK(kind_of([&] { slice_period(s, parse_period("2020-01-01..2020-02-28")); }) == ErrorKind::EmptySlice);
  CHECK(kind_of([] { parse_period("2020-03-05..2020-03-01"); }) == ErrorKind::InvalidArgument);
}
