#include "curvflux/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace curvflux::report {

namespace {

// Shortest round-trip form, so reports are byte-stable across runs.
std::string format_double(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace

Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

Json ladder_json(const calculus::Ladder& l) {
  Json j;
  j["h"] = l.h;
  Json values = Json::array(), errors = Json::array(), orders = Json::array();
  for (double v : l.values) values.push_back(number(v));
  for (double v : l.error_estimates) errors.push_back(number(v));
  for (const auto& o : l.orders) orders.push_back(o ? number(*o) : Json(nullptr));
  j["values"] = values;
  j["error_estimates"] = errors;
  j["orders"] = orders;
  j["order"] = l.order ? number(*l.order) : Json(nullptr);
  j["extrapolated"] = number(l.extrapolated);
  j["floor"] = number(l.floor);
  j["monotone"] = l.monotone;
  j["at_floor"] = l.at_floor;
  return j;
}

std::string ladder_csv(const calculus::Ladder& l) {
  std::string out = "level,h,value,error-estimate,order\n";
  for (std::size_t i = 0; i < l.values.size(); ++i) {
    out += std::to_string(i) + ',' + format_double(l.h[i]) + ',' + format_double(l.values[i]) + ',';
    if (i < l.error_estimates.size()) out += format_double(l.error_estimates[i]);
    out += ',';
    if (i < l.orders.size() && l.orders[i]) out += format_double(*l.orders[i]);
    out += '\n';
  }
  return out;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace curvflux::report
