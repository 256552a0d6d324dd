// JSON and CSV serialization of check reports. Output is deterministic:
// fixed key order, round-trip floats, non-finite values as strings.
#pragma once

#include <string>

#include <json.hpp>

#include "finslercomp/report.hpp"

namespace finslercomp {

using ojson = nlohmann::ordered_json;

// Finite values as numbers; infinities as "inf"/"-inf"; NaN as "nan".
ojson number_json(double v);
ojson params_json(const ReportParams& p);
// Grids longer than grid_cap are subsampled with a uniform stride (endpoints kept).
ojson report_json(const CheckReport& r, std::size_t grid_cap = 2000);
std::string dump(const ojson& j);  // two-space indent, trailing newline

// Shortest decimal that parses back to the same double.
std::string shortest_repr(double v);
std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace finslercomp
