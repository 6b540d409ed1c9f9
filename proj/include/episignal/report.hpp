#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "episignal/benford.hpp"
#include "episignal/cluster.hpp"
#include "episignal/date.hpp"
#include "episignal/pipeline.hpp"
#include "episignal/sarima.hpp"

namespace episignal {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double v);
/// Finite numbers as JSON numbers, non-finite ones as null.
Json json_number(double v);

Json to_json(const SarimaParams& p);
Json to_json(const FittedSarima& f);
Json to_json(const HoldoutMetrics& m);
Json to_json(const BenfordReport& r);
Json to_json(const AuditVerdict& v);
Json to_json(const ClusterRecord& r, const std::vector<std::string>& feature_names);

/// date,point,lower,upper with dates continuing the day after `last`.
void write_forecast_csv(std::ostream& out, const Forecast& f, Date last);
void write_residuals_csv(std::ostream& out, const Eigen::VectorXd& residuals);
/// county,period,digit,count,observed,expected
void write_digit_hist_csv(std::ostream& out, const std::vector<AuditVerdict>& audits);

/// Throws Io when the file cannot be written.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace episignal
