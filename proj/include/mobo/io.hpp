#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mobo/pareto.hpp"

namespace mobo {

using json = nlohmann::json;

/// One row of the campaign metric log.
struct MetricRecord {
  std::size_t iteration = 0;
  double hv = 0.0;
  std::optional<double> relative_hvi;        // empty when the baseline HV is zero
  std::optional<double> fraction_recovered;  // empty when no true Pareto set is known
  std::vector<std::string> batch_ids;
};

inline constexpr std::string_view kMetricsCsvHeader =
    "iteration,hv,relative_hvi,fraction_recovered,batch_ids";

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

/// Quotes a CSV field when RFC 4180 requires it.
std::string csv_field(std::string_view s);

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_line(std::string_view line);

std::string metric_row(const MetricRecord& r);
std::string metrics_csv(const std::vector<MetricRecord>& rows);

json metric_to_json(const MetricRecord& r);
MetricRecord metric_from_json(const json& j);

/// {"ref_point":[...], "points":[{"id":..., "values":[...]}]}
json front_to_json(const ParetoFront& front);
ParetoFront front_from_json(const json& j);

std::string read_file(const std::string& path);
/// Writes via a temporary file and rename so readers never see a partial file.
void write_file(const std::string& path, std::string_view contents);

/// Parses "1,2.5,-3" into numbers.
std::vector<double> parse_number_list(std::string_view s);

}  // namespace mobo
