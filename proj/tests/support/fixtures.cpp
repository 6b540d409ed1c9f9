#include "fixtures.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "episignal/date.hpp"
#include "episignal/random.hpp"

namespace episignal::testing {

Blobs gaussian_blobs(const Eigen::MatrixXd& centers, int per_cluster, double sigma, std::uint64_t seed) {
  Rng rng(seed, 7);
  const auto k = static_cast<int>(centers.rows());
  const int n = k * per_cluster;
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    std::swap(order[static_cast<std::size_t>(i)], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  }
  Blobs b;
  b.x.resize(n, centers.cols());
  b.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int row = order[static_cast<std::size_t>(i)];
    const int c = i / per_cluster;
    for (Eigen::Index j = 0; j < centers.cols(); ++j) b.x(row, j) = centers(c, j) + sigma * rng.normal();
    b.labels[static_cast<std::size_t>(row)] = c;
  }
  return b;
}

CountyFixture write_county_fixture(const std::filesystem::path& dir, std::uint64_t seed, int counties, int days) {
  static const std::vector<std::string> stems = {
      "São Paulo",    "Campinas",      "Ribeirão Preto", "Santos",       "Sorocaba",     "Guarulhos",
      "Osasco",       "Jundiaí",       "Piracicaba",     "Bauru",        "Franca",       "Limeira",
      "Taubaté",      "Marília",       "Araçatuba",      "Presidente Prudente", "São Carlos", "Itu",
      "Botucatu",     "Assis",         "Registro",       "Ourinhos",     "Avaré",        "Jaú",
      "Lins",         "Tupã",          "Barretos",       "Catanduva",    "Mogi Mirim",   "Olímpia"};
  // Group centres: population (thousands), density, income, hdi, elderly share.
  const double centre[3][5] = {{900.0, 2500.0, 3.2, 0.82, 0.16},
                               {250.0, 600.0, 2.1, 0.76, 0.13},
                               {60.0, 90.0, 1.4, 0.70, 0.19}};
  const double growth[3] = {0.045, 0.035, 0.028};
  const double scale[3] = {40.0, 12.0, 3.0};

  Rng rng(seed, 11);
  CountyFixture fx;
  fx.days = days;
  std::filesystem::create_directories(dir);
  fx.profiles = dir / "profiles.csv";
  fx.cases = dir / "cases.csv";

  std::ofstream prof(fx.profiles);
  prof << "name,population,urban_population,density,income,hdi,elderly_share\n";
  std::ofstream cases(fx.cases);
  cases << "date,county,new_cases,new_deaths\n";
  const Date start = parse_date("2020-03-01");

  for (int i = 0; i < counties; ++i) {
    const int g = i % 3;
    std::string name = stems[static_cast<std::size_t>(i) % stems.size()];
    if (i >= static_cast<int>(stems.size())) name += " " + std::to_string(i / static_cast<int>(stems.size()) + 1);
    fx.raw_names.push_back(name);
    fx.planted.push_back(g);

    double f[5];
    for (int j = 0; j < 5; ++j) f[j] = centre[g][j] * (1.0 + 0.05 * rng.normal());
    const double urban = f[0] * (0.9 + 0.01 * rng.normal());
    prof << '"' << name << '"' << ',' << f[0] << ',' << urban << ',' << f[1] << ',' << f[2] << ',' << f[3] << ','
         << f[4] << '\n';

    const double a = scale[g] * (1.0 + 0.2 * rng.normal());
    const double r = growth[g] * (1.0 + 0.1 * rng.normal());
    for (int t = 0; t < days; ++t) {
      const double trend = a * std::exp(r * t) / (1.0 + std::exp(r * (t - 0.8 * days)));
      const double weekly = 1.0 + 0.25 * std::sin(2.0 * std::numbers::pi * t / 7.0);
      const double mean = 1.0 + trend * weekly;
      const double draw = std::max(0.0, std::round(mean + std::sqrt(mean) * rng.normal()));
      const double deaths = std::max(0.0, std::round(0.02 * draw + 0.3 * rng.normal()));
      cases << format_date(start + std::chrono::days(t)) << ",\"" << name << "\"," << static_cast<long long>(draw)
            << ',' << static_cast<long long>(deaths) << '\n';
    }
  }
  return fx;
}

Eigen::VectorXd trend_season_series(int n, double noise_sd, std::uint64_t seed) {
  Rng rng(seed, 3);
  Eigen::VectorXd y(n);
  for (int t = 0; t < n; ++t) {
    y(t) = 10.0 + 0.5 * t + 3.0 * std::sin(2.0 * std::numbers::pi * t / 7.0) + noise_sd * rng.normal();
  }
  return y;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("episignal-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace episignal::testing
