#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "berman/error.hpp"

namespace berman::cli {

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string allowed_list(std::initializer_list<std::string_view> allowed) {
  std::string s;
  for (auto a : allowed) {
    if (!s.empty()) s += ", ";
    s += a;
  }
  return s;
}

std::vector<double> broadcast(const json& j, const std::string& path, std::size_t dim) {
  if (j.is_array()) {
    auto v = as_numbers(j, path);
    if (v.size() != dim) {
      throw ConfigError(path + ": expected " + std::to_string(dim) + " values, got " + std::to_string(v.size()));
    }
    return v;
  }
  return std::vector<double>(dim, as_extended(j, path));
}

}  // namespace

Section::Section(const json& j, std::string path, std::initializer_list<std::string_view> allowed)
    : j_(&j), path_(std::move(path)) {
  if (!j.is_object()) throw ConfigError((path_.empty() ? "config" : path_) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + join(path_, key) + "' (allowed: " + allowed_list(allowed) + ")");
    }
  }
}

bool Section::has(std::string_view key) const { return j_->contains(key); }

const json& Section::raw(std::string_view key) const {
  if (!has(key)) throw ConfigError("missing key '" + path(key) + "'");
  return (*j_)[std::string(key)];
}

std::string Section::path(std::string_view key) const { return join(path_, key); }

double Section::number(std::string_view key) const { return as_number(raw(key), path(key)); }

double Section::number_or(std::string_view key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

double Section::extended(std::string_view key) const { return as_extended(raw(key), path(key)); }

std::uint64_t Section::count(std::string_view key) const { return as_count(raw(key), path(key)); }

std::uint64_t Section::count_or(std::string_view key, std::uint64_t fallback) const {
  return has(key) ? count(key) : fallback;
}

bool Section::flag_or(std::string_view key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& v = raw(key);
  if (!v.is_boolean()) throw ConfigError(path(key) + ": expected true or false");
  return v.get<bool>();
}

std::string Section::text(std::string_view key) const {
  const auto& v = raw(key);
  if (!v.is_string()) throw ConfigError(path(key) + ": expected a string");
  return v.get<std::string>();
}

std::string Section::text_or(std::string_view key, std::string fallback) const {
  return has(key) ? text(key) : fallback;
}

std::vector<double> Section::numbers(std::string_view key) const { return as_numbers(raw(key), path(key)); }

Section Section::child(std::string_view key, std::initializer_list<std::string_view> allowed) const {
  return Section(raw(key), path(key), allowed);
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path + ": expected a finite number");
  return v;
}

double as_extended(const json& j, const std::string& path) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ConfigError(path + ": expected a number, \"inf\" or \"-inf\"");
  }
  return as_number(j, path);
}

std::uint64_t as_count(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v >= 0.0 && v < 1.8e19 && std::floor(v) == v) return static_cast<std::uint64_t>(v);
  }
  throw ConfigError(path + ": expected a non-negative integer");
}

std::vector<double> as_numbers(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_extended(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

json load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config '" + file.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + file.string() + "' is not valid JSON: " + e.what());
  }
}

std::uint64_t config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << v;
  return out.str();
}

CorrelationModel parse_correlation(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("type")) throw ConfigError(path + ": expected an object with a 'type'");
  const auto type = Section(j, path, {"type", "rows", "n", "kernel", "r", "lags", "delta", "cutoff"}).text("type");
  if (type == "matrix") {
    const Section s(j, path, {"type", "rows"});
    const auto& rows = s.raw("rows");
    if (!rows.is_array()) throw ConfigError(s.path("rows") + ": expected an array of rows");
    std::vector<std::vector<double>> m;
    for (std::size_t i = 0; i < rows.size(); ++i) m.push_back(as_numbers(rows[i], s.path("rows") + "[" + std::to_string(i) + "]"));
    return validate_correlation(m);
  }
  if (type == "identity") {
    const Section s(j, path, {"type", "n"});
    const auto n = s.count("n");
    if (n == 0) throw ConfigError(s.path("n") + ": must be at least 1");
    return stationary_correlation([](std::size_t k) { return k == 0 ? 1.0 : 0.0; }, n);
  }
  if (type == "stationary") {
    const Section s(j, path, {"type", "n", "kernel", "r", "lags"});
    const auto n = s.count("n");
    if (n == 0) throw ConfigError(s.path("n") + ": must be at least 1");
    const auto kernel = s.text("kernel");
    if (kernel == "geometric") {
      if (s.has("lags")) throw ConfigError(s.path("lags") + ": not used by the geometric kernel");
      const double r = s.number("r");
      return stationary_correlation([r](std::size_t k) { return std::pow(r, static_cast<double>(k)); }, n);
    }
    if (kernel == "lags") {
      if (s.has("r")) throw ConfigError(s.path("r") + ": not used by the lags kernel");
      const auto lags = s.numbers("lags");
      return stationary_correlation([lags](std::size_t k) { return k == 0 ? 1.0 : (k <= lags.size() ? lags[k - 1] : 0.0); },
                                    n);
    }
    throw ConfigError(s.path("kernel") + ": expected \"geometric\" or \"lags\"");
  }
  if (type == "hr-array") {
    const Section s(j, path, {"type", "n", "delta", "cutoff"});
    const auto delta = s.numbers("delta");
    return hr_array_correlation(delta, s.count("n"), s.count_or("cutoff", delta.size()));
  }
  throw ConfigError(path + ".type: expected matrix, identity, stationary or hr-array");
}

ScalingModel parse_scaling(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("law")) throw ConfigError(path + ": expected an object with a 'law'");
  const auto law = Section(j, path, {"law", "a", "b", "lambda", "c", "rate", "shape", "scale", "x", "F", "tau", "mode",
                                     "c_B", "alpha", "L", "p"})
                       .text("law");
  if (law == "uniform" || law == "degenerate") {
    Section(j, path, {"law"});
    return law == "uniform" ? ScalingModel::uniform() : ScalingModel::degenerate();
  }
  if (law == "beta") {
    const Section s(j, path, {"law", "a", "b"});
    return ScalingModel::beta(s.number("a"), s.number("b"));
  }
  if (law == "two-point") {
    const Section s(j, path, {"law", "lambda", "c"});
    return ScalingModel::two_point(s.number("lambda"), s.number("c"));
  }
  if (law == "exponential") {
    const Section s(j, path, {"law", "rate"});
    return ScalingModel::exponential(s.number_or("rate", 1.0));
  }
  if (law == "weibull") {
    const Section s(j, path, {"law", "shape", "scale"});
    return ScalingModel::weibull(s.number("shape"), s.number_or("scale", 1.0));
  }
  if (law == "gamma") {
    const Section s(j, path, {"law", "shape", "rate"});
    return ScalingModel::gamma(s.number("shape"), s.number_or("rate", 1.0));
  }
  if (law == "user-cdf-A") {
    const Section s(j, path, {"law", "x", "F", "c", "tau", "mode"});
    const auto mode = s.text_or("mode", "bound");
    if (mode != "bound" && mode != "asymptotic") throw ConfigError(s.path("mode") + ": expected bound or asymptotic");
    return ScalingModel::user_cdf_A(s.numbers("x"), s.numbers("F"), {s.number("c"), s.number("tau")},
                                    mode == "bound" ? ConstantMode::Bound : ConstantMode::Asymptotic);
  }
  if (law == "user-cdf-B") {
    const Section s(j, path, {"law", "x", "F", "c_B", "alpha", "L", "p"});
    return ScalingModel::user_cdf_B(s.numbers("x"), s.numbers("F"),
                                    {s.number("c_B"), s.number("alpha"), s.number("L"), s.number("p")});
  }
  throw ConfigError(path + ".law: unknown law '" + law + "'");
}

Coupling parse_coupling(const json& j, const std::string& path) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "independent") return Coupling::Independent;
    if (s == "comonotone") return Coupling::Comonotone;
  }
  throw ConfigError(path + ": expected \"independent\" or \"comonotone\"");
}

RectangleSpec parse_thresholds(const json& j, const std::string& path, std::size_t dim) {
  const Section s(j, path, {"u", "v", "coupling"});
  const auto coupling = s.has("coupling") ? parse_coupling(s.raw("coupling"), s.path("coupling")) : Coupling::Independent;
  auto u = broadcast(s.raw("u"), s.path("u"), dim);
  RectangleSpec spec = s.has("v") ? RectangleSpec::two_sided(std::move(u), broadcast(s.raw("v"), s.path("v"), dim), coupling)
                                  : RectangleSpec::one_sided(std::move(u), coupling);
  spec.validate(dim);
  return spec;
}

}  // namespace berman::cli
