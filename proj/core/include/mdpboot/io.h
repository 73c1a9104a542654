#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mdpboot/measures.h"
#include "mdpboot/rate.h"

namespace mdpboot {

/// 17 significant digits with '.' as decimal point; "inf", "-inf", "nan" for
/// non-finite values.
std::string format_real(double x);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// {"points": [x, ...] | [[x, y], ...], "probs": [...]}.
FiniteProbabilityMeasure parse_distribution(std::string_view json_text);
FiniteProbabilityMeasure read_distribution(const std::filesystem::path& path);

/// [{"f": [...], "kind": "equality" | "at_least", "c": real}, ...].
std::vector<LinearConstraint> parse_constraints(std::string_view json_text);
std::vector<LinearConstraint> read_constraints(const std::filesystem::path& path);

/// A JSON array of reals, or a comma-separated list.
std::vector<double> parse_real_list(std::string_view text);

/// Plain CSV table; cells are written verbatim, one row per line.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string str() const;
};

}  // namespace mdpboot
