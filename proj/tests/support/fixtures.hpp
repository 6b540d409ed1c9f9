#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace episignal::testing {

struct Blobs {
  Eigen::MatrixXd x;
  std::vector<int> labels;
};

/// `per_cluster` points around each of `centers`, isotropic noise `sigma`, rows shuffled.
Blobs gaussian_blobs(const Eigen::MatrixXd& centers, int per_cluster, double sigma, std::uint64_t seed);

struct CountyFixture {
  std::filesystem::path profiles;
  std::filesystem::path cases;
  std::vector<std::string> raw_names;
  /// Planted group of each county, aligned with raw_names.
  std::vector<int> planted;
  int days = 0;
};

/// Writes profiles.csv and cases.csv for `counties` counties in three planted
/// sociodemographic groups, each with a seeded daily case series.
CountyFixture write_county_fixture(const std::filesystem::path& dir, std::uint64_t seed, int counties = 30,
                                   int days = 150);

/// y_t = 10 + 0.5 t + 3 sin(2 pi t / 7) + noise_sd * e_t
Eigen::VectorXd trend_season_series(int n, double noise_sd, std::uint64_t seed);

/// Fresh empty directory under the system temp path.
std::filesystem::path scratch_dir(const std::string& name);

std::string slurp(const std::filesystem::path& path);

}  // namespace episignal::testing
