#include "mdpboot/io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mdpboot/errors.h"

namespace mdpboot {
namespace {

using nlohmann::json;

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw InputError(std::string(what) + ": malformed JSON: " + e.what());
  }
}

double as_real(const json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw InputError(std::string(what) + ": expected a number, got " + j.dump());
}

std::vector<double> as_reals(const json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const json& x : j) out.push_back(as_real(x, what));
  return out;
}

}  // namespace

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("failed writing " + path.string());
}

FiniteProbabilityMeasure parse_distribution(std::string_view json_text) {
  const json doc = parse_json(json_text, "distribution");
  if (!doc.is_object() || !doc.contains("points") || !doc.contains("probs")) {
    throw InputError("distribution: expected an object with \"points\" and \"probs\"");
  }
  const std::vector<double> probs = as_reals(doc.at("probs"), "distribution probs");
  const json& pts = doc.at("points");
  if (!pts.is_array() || pts.empty()) throw InputError("distribution: \"points\" must be a nonempty array");
  if (pts.front().is_array()) {
    std::vector<Point> points;
    for (const json& p : pts) {
      if (!p.is_array() || p.size() != 2) throw InputError("distribution: bivariate points must be [x, y] pairs");
      points.push_back(Point{as_real(p[0], "distribution point"), as_real(p[1], "distribution point")});
    }
    return FiniteProbabilityMeasure(std::move(points), probs);
  }
  return FiniteProbabilityMeasure(as_reals(pts, "distribution points"), probs);
}

FiniteProbabilityMeasure read_distribution(const std::filesystem::path& path) {
  return parse_distribution(read_text_file(path));
}

std::vector<LinearConstraint> parse_constraints(std::string_view json_text) {
  const json doc = parse_json(json_text, "constraints");
  if (!doc.is_array() || doc.empty()) throw InputError("constraints: expected a nonempty array");
  std::vector<LinearConstraint> out;
  for (const json& c : doc) {
    if (!c.is_object() || !c.contains("f") || !c.contains("c")) {
      throw InputError("constraints: each entry needs \"f\" and \"c\"");
    }
    const std::string kind = c.value("kind", std::string("at_least"));
    ConstraintKind k;
    if (kind == "equality" || kind == "eq" || kind == "=") {
      k = ConstraintKind::equality;
    } else if (kind == "at_least" || kind == "at-least" || kind == ">=" || kind == "ge") {
      k = ConstraintKind::at_least;
    } else {
      throw InputError("constraints: unknown kind '" + kind + "' (expected equality or at_least)");
    }
    out.emplace_back(TestFunction(as_reals(c.at("f"), "constraint f")), k, as_real(c.at("c"), "constraint c"));
  }
  return out;
}

std::vector<LinearConstraint> read_constraints(const std::filesystem::path& path) {
  return parse_constraints(read_text_file(path));
}

std::vector<double> parse_real_list(std::string_view text) {
  std::size_t first = text.find_first_not_of(" \t\n");
  if (first != std::string_view::npos && text[first] == '[') return as_reals(parse_json(text, "list"), "list");
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw InputError("empty list of numbers");
  return out;
}

std::string CsvTable::str() const {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << cells[i];
    }
    os << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return os.str();
}

}  // namespace mdpboot
