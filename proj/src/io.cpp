#include "nfgen/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/format.h>

#include "json.hpp"

namespace nfgen {
namespace {

using boost::multiprecision::cpp_int;
using nlohmann::json;

cpp_int to_big(Mantissa m) {
  const bool negative = m < 0;
  const unsigned __int128 mag =
      negative ? static_cast<unsigned __int128>(-(m + 1)) + 1 : static_cast<unsigned __int128>(m);
  cpp_int v = static_cast<std::uint64_t>(mag >> 64);
  v <<= 64;
  v += static_cast<std::uint64_t>(mag);
  return negative ? cpp_int(-v) : v;
}

// Builds a DOM like nlohmann's parser but keeps floating-point numbers as
// their source text, so decimal literals survive without a detour through
// double.
class RawNumberSax : public json::json_sax_t {
 public:
  explicit RawNumberSax(json& root) : root_(root) {}

  bool null() override { return put(nullptr); }
  bool boolean(bool v) override { return put(v); }
  bool number_integer(number_integer_t v) override { return put(v); }
  bool number_unsigned(number_unsigned_t v) override { return put(v); }
  bool number_float(number_float_t, const string_t& s) override { return put(s); }
  bool string(string_t& v) override { return put(v); }
  bool binary(binary_t&) override { return false; }
  bool start_object(std::size_t) override {
    stack_.push_back(place(json::object()));
    return true;
  }
  bool key(string_t& k) override {
    key_ = k;
    return true;
  }
  bool end_object() override {
    stack_.pop_back();
    return true;
  }
  bool start_array(std::size_t) override {
    stack_.push_back(place(json::array()));
    return true;
  }
  bool end_array() override {
    stack_.pop_back();
    return true;
  }
  bool parse_error(std::size_t pos, const std::string&, const nlohmann::detail::exception& e) override {
    throw ConfigError(fmt::format("invalid JSON at byte {}: {}", pos, e.what()));
  }

 private:
  json* place(json v) {
    if (stack_.empty()) {
      root_ = std::move(v);
      return &root_;
    }
    json& top = *stack_.back();
    if (top.is_object()) return &(top[key_] = std::move(v));
    top.push_back(std::move(v));
    return &top.back();
  }
  bool put(json v) {
    place(std::move(v));
    return true;
  }

  json& root_;
  std::vector<json*> stack_;
  std::string key_;
};

json parse_raw_numbers(std::string_view text) {
  json root;
  RawNumberSax sax(root);
  json::sax_parse(text, &sax);
  return root;
}

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: invalid JSON: {}", what, e.what()));
  }
}

const json& field(const json& obj, const std::string& name, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(fmt::format("{}: expected an object", where));
  const auto it = obj.find(name);
  if (it == obj.end()) throw ConfigError(fmt::format("{}: missing field \"{}\"", where, name));
  return *it;
}

template <class T>
T get_as(const json& v, const std::string& name) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("field \"{}\" has the wrong type ({})", name, v.type_name()));
  }
}

int get_int(const json& v, const std::string& name) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_string()) {
    try {
      std::size_t used = 0;
      const int out = std::stoi(v.get<std::string>(), &used);
      if (used == v.get<std::string>().size()) return out;
    } catch (const std::exception&) {
    }
  }
  throw ConfigError(fmt::format("field \"{}\" must be an integer", name));
}

std::string scalar_text(const json& v, const std::string& name) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return v.dump();
  throw ConfigError(fmt::format("field \"{}\" must be a number or numeric string", name));
}

FxpValue read_value(const json& v, FxpFormat fmt, bool decimal, const std::string& name) {
  const std::string text = scalar_text(v, name);
  if (decimal) return parse_exact(text, fmt);
  try {
    return FxpValue(parse_mantissa(text), fmt);
  } catch (const UsageError& e) {
    throw ConfigError(fmt::format("field \"{}\": {}", name, e.what()));
  }
}

std::vector<FxpValue> read_values(const json& v, FxpFormat fmt, bool decimal, const std::string& name) {
  if (!v.is_array()) throw ConfigError(fmt::format("field \"{}\" must be an array", name));
  std::vector<FxpValue> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(read_value(v[i], fmt, decimal, fmt::format("{}[{}]", name, i)));
  }
  return out;
}

json mantissa_json(const FxpValue& v) { return mantissa_to_string(v.mantissa()); }

json plan_json(const PiecewisePlan& plan) {
  json j;
  j["format"] = {{"n", plan.format.n}, {"f", plan.format.f}};
  j["k"] = plan.k;
  j["m"] = plan.m();
  j["finalized"] = plan.finalized;
  json breaks = json::array();
  for (const auto& b : plan.breaks) breaks.push_back(mantissa_json(b));
  j["breaks"] = breaks;
  j["end"] = mantissa_json(plan.end);
  json coeff = json::array(), scaler = json::array();
  for (const auto& p : plan.pieces) {
    json c = json::array(), s = json::array();
    for (const auto& v : p.coeff) c.push_back(mantissa_json(v));
    for (const auto& v : p.scaler) s.push_back(mantissa_json(v));
    coeff.push_back(c);
    scaler.push_back(s);
  }
  j["coeff"] = coeff;
  j["scaler"] = scaler;
  j["defaults"] = {mantissa_json(plan.default_left), mantissa_json(plan.default_right)};
  return j;
}

PiecewisePlan plan_from(const json& j) {
  const std::string where = "plan";
  const json& fj = field(j, "format", where);
  FxpFormat fmt;
  try {
    fmt = FxpFormat(get_int(field(fj, "n", "format"), "format.n"),
                    get_int(field(fj, "f", "format"), "format.f"));
  } catch (const UsageError& e) {
    throw ConfigError(fmt::format("field \"format\": {}", e.what()));
  }
  bool decimal = false;
  if (j.contains("encoding")) {
    const auto enc = get_as<std::string>(j["encoding"], "encoding");
    if (enc != "decimal" && enc != "mantissa") {
      throw ConfigError(fmt::format("field \"encoding\": unknown value \"{}\"", enc));
    }
    decimal = enc == "decimal";
  }
  PiecewisePlan plan;
  plan.format = fmt;
  plan.k = get_int(field(j, "k", where), "k");
  plan.breaks = read_values(field(j, "breaks", where), fmt, decimal, "breaks");
  plan.end = read_value(field(j, "end", where), fmt, decimal, "end");
  const json& coeff = field(j, "coeff", where);
  const json& scaler = field(j, "scaler", where);
  if (!coeff.is_array() || !scaler.is_array() || coeff.size() != scaler.size()) {
    throw ConfigError("fields \"coeff\" and \"scaler\" must be arrays of equal length");
  }
  for (std::size_t i = 0; i < coeff.size(); ++i) {
    ScaledPolynomial p;
    p.coeff = read_values(coeff[i], fmt, decimal, fmt::format("coeff[{}]", i));
    p.scaler = read_values(scaler[i], fmt, decimal, fmt::format("scaler[{}]", i));
    plan.pieces.push_back(std::move(p));
  }
  const json& defaults = field(j, "defaults", where);
  if (!defaults.is_array() || defaults.size() != 2) {
    throw ConfigError("field \"defaults\" must be a pair");
  }
  plan.default_left = read_value(defaults[0], fmt, decimal, "defaults[0]");
  plan.default_right = read_value(defaults[1], fmt, decimal, "defaults[1]");
  if (j.contains("finalized")) plan.finalized = get_as<bool>(j["finalized"], "finalized");
  if (j.contains("m") && get_int(j["m"], "m") != static_cast<int>(plan.m())) {
    throw ConfigError(fmt::format("field \"m\" is {} but {} pieces are listed", get_int(j["m"], "m"),
                                  plan.m()));
  }
  try {
    plan.validate();
  } catch (const UsageError& e) {
    throw ConfigError(fmt::format("plan is inconsistent: {}", e.what()));
  }
  return plan;
}

double get_double(const json& obj, const std::string& name, const std::string& where) {
  const json& v = field(obj, name, where);
  if (!v.is_number()) throw ConfigError(fmt::format("field \"{}\" must be a number", name));
  return v.get<double>();
}

std::pair<double, double> get_pair(const json& v, const std::string& name) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError(fmt::format("field \"{}\" must be a pair of numbers", name));
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

const std::set<std::string>& nonlinear_ops() {
  static const std::set<std::string> ops = {"reciprocal", "sqrt", "log", "exp"};
  return ops;
}

}  // namespace

std::string format_exact(const FxpValue& v) {
  const int f = v.format().f;
  const Mantissa m = v.mantissa();
  const bool negative = m < 0;
  cpp_int mag = to_big(m);
  if (negative) mag = -mag;
  // mag * 2^-f = mag * 5^f / 10^f
  const cpp_int scaled = mag * boost::multiprecision::pow(cpp_int(5), f);
  std::string digits = scaled.str();
  if (digits.size() <= static_cast<std::size_t>(f)) digits.insert(0, f + 1 - digits.size(), '0');
  std::string int_part = digits.substr(0, digits.size() - f);
  std::string frac = digits.substr(digits.size() - f);
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  if (frac.empty()) frac = "0";
  return fmt::format("{}{}.{}", negative && m != 0 ? "-" : "", int_part, frac);
}

FxpValue parse_exact(std::string_view text, FxpFormat fmt) {
  const auto fail = [&](const char* why) {
    return ConfigError(fmt::format("literal \"{}\": {}", text, why));
  };
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) negative = text[i++] == '-';
  cpp_int digits = 0;
  int frac_digits = 0;
  bool any = false, point = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = digits * 10 + (c - '0');
      if (point) ++frac_digits;
      any = true;
    } else if (c == '.' && !point) {
      point = true;
    } else {
      break;
    }
  }
  if (!any) throw fail("not a number");
  int exponent = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    try {
      std::size_t used = 0;
      exponent = std::stoi(std::string(text.substr(i + 1)), &used);
      i += 1 + used;
    } catch (const std::exception&) {
      throw fail("bad exponent");
    }
  }
  if (i != text.size()) throw fail("trailing characters");
  const int scale = exponent - frac_digits;  // value = digits * 10^scale
  if (scale < -4000 || scale > 4000) throw fail("exponent out of range");
  cpp_int num = digits << fmt.f;
  cpp_int den = 1;
  if (scale >= 0) {
    num *= boost::multiprecision::pow(cpp_int(10), scale);
  } else {
    den = boost::multiprecision::pow(cpp_int(10), -scale);
  }
  if (num % den != 0) throw fail(fmt::format("not exactly representable in {}", to_string(fmt)).c_str());
  const cpp_int mant = num / den;
  if (mant > to_big(fmt.max_mantissa())) throw fail("outside the format's range");
  Mantissa m = 0;
  for (int shift = static_cast<int>(boost::multiprecision::msb(mant | 1)); shift >= 0; --shift) {
    m = (m << 1) | (boost::multiprecision::bit_test(mant, shift) ? 1 : 0);
  }
  return FxpValue(negative ? -m : m, fmt);
}

std::string plan_to_json(const PiecewisePlan& plan, int indent) {
  plan.validate();
  return plan_json(plan).dump(indent) + "\n";
}

PiecewisePlan plan_from_json(std::string_view text) { return plan_from(parse_raw_numbers(text)); }

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read {}", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path));
  out << text;
  if (!out) throw ConfigError(fmt::format("write to {} failed", path));
}

PiecewisePlan load_plan(const std::string& path) {
  try {
    return plan_from_json(read_text_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

FitConfig NfdDocument::fit_config() const {
  FitConfig cfg;
  cfg.a = a;
  cfg.b = b;
  cfg.epsilon = tol;
  cfg.soft_zero = zero_mask;
  cfg.format = FxpFormat(n, f);
  cfg.k_min = k_min;
  cfg.k_max = k_max;
  cfg.m_max = m_max;
  cfg.max_samples = max_samples;
  cfg.defaults = default_values;
  return cfg;
}

RealFunction NfdDocument::fit_function() const {
  return fit_time_expression(expression, tol).as_function();
}

NfdDocument parse_nfd_json(std::string_view text) {
  const json j = parse_json(text, "NFD");
  const std::string where = "NFD";
  NfdDocument d;
  d.function = get_as<std::string>(field(j, "function", where), "function");
  try {
    d.expression = parse(d.function);
  } catch (const SyntaxError& e) {
    throw ConfigError(fmt::format("field \"function\": {}", e.what()));
  }
  if (j.contains("name")) d.name = get_as<std::string>(j["name"], "name");
  std::tie(d.a, d.b) = get_pair(field(j, "range", where), "range");
  d.tol = get_double(j, "tol", where);
  d.zero_mask = get_double(j, "zero_mask", where);
  d.n = get_int(field(j, "n", where), "n");
  d.f = get_int(field(j, "f", where), "f");
  if (j.contains("default_values")) d.default_values = get_pair(j["default_values"], "default_values");
  if (j.contains("ops")) {
    d.ops = get_as<std::vector<std::string>>(j["ops"], "ops");
    for (const auto& op : d.ops) {
      if (!nonlinear_ops().count(op)) {
        throw ConfigError(fmt::format("field \"ops\": unknown op \"{}\" (expected reciprocal, sqrt, "
                                      "log or exp)", op));
      }
    }
  }
  if (j.contains("template")) d.template_id = get_as<std::string>(j["template"], "template");
  if (j.contains("output")) d.output = get_as<std::string>(j["output"], "output");
  if (j.contains("k_range")) {
    const auto [lo, hi] = get_pair(j["k_range"], "k_range");
    d.k_min = static_cast<int>(lo);
    d.k_max = static_cast<int>(hi);
  }
  if (j.contains("m_max")) d.m_max = get_int(j["m_max"], "m_max");
  if (j.contains("max_samples")) d.max_samples = get_as<std::size_t>(j["max_samples"], "max_samples");

  if (!(d.a < d.b)) throw ConfigError(fmt::format("field \"range\": need a < b, got ({}, {})", d.a, d.b));
  if (!(d.tol > 0)) throw ConfigError("field \"tol\" must be positive");
  if (!(d.zero_mask > 0)) throw ConfigError("field \"zero_mask\" must be positive");
  if (!(d.zero_mask < d.tol)) {
    throw ConfigError(fmt::format("field \"zero_mask\" ({}) must be below tol ({})", d.zero_mask, d.tol));
  }
  try {
    d.fit_config().validate();
  } catch (const UsageError& e) {
    throw ConfigError(fmt::format("NFD: {}", e.what()));
  }
  return d;
}

NfdDocument parse_nfd(const std::string& path) {
  try {
    return parse_nfd_json(read_text_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

PerfProfile parse_ppd_json(std::string_view text) {
  const json j = parse_json(text, "PPD");
  const std::string where = "PPD";
  PerfProfile p;
  if (j.contains("name")) p.name = get_as<std::string>(j["name"], "name");
  const json& td = field(j, "time_dict", where);
  if (!td.is_object()) throw ConfigError("field \"time_dict\" must be an object");
  for (const auto& [op, cost] : td.items()) {
    if (!cost.is_number()) throw ConfigError(fmt::format("field \"time_dict.{}\" must be a number", op));
    p.time_dict[op] = cost.get<double>();
  }
  const json& samples = field(j, "samples", where);
  if (!samples.is_array()) throw ConfigError("field \"samples\" must be an array");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const json& s = samples[i];
    if (!s.is_array() || s.size() != 3 || !s[0].is_number_integer() || !s[1].is_number_integer() ||
        !s[2].is_number()) {
      throw ConfigError(fmt::format("field \"samples[{}]\" must be [k, m, t]", i));
    }
    p.samples.push_back({s[0].get<int>(), s[1].get<int>(), s[2].get<double>()});
  }
  if (j.contains("metadata") && j["metadata"].contains("latency_share")) {
    p.latency_share = get_as<double>(j["metadata"]["latency_share"], "metadata.latency_share");
  }
  p.validate();
  return p;
}

PerfProfile parse_ppd(const std::string& path) {
  try {
    return parse_ppd_json(read_text_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

std::string ppd_to_json(const PerfProfile& profile) {
  json j;
  j["name"] = profile.name;
  j["time_dict"] = profile.time_dict;
  j["metadata"] = {
      {"latency_share", profile.latency_share},
      {"regression", "least squares over [1, k, m, k*m, k*log2(k), m^2, k^2], no regularization"},
      {"time_unit", "ms per vector op"},
  };
  // one sample per line keeps bundled profiles diffable
  std::string out = "{\n";
  out += fmt::format("  \"name\": {},\n", json(profile.name).dump());
  out += fmt::format("  \"time_dict\": {},\n", j["time_dict"].dump());
  out += fmt::format("  \"metadata\": {},\n", j["metadata"].dump());
  out += "  \"samples\": [\n";
  for (std::size_t i = 0; i < profile.samples.size(); ++i) {
    const auto& s = profile.samples[i];
    out += fmt::format("    [{}, {}, {}]{}\n", s.k, s.m, json(s.time).dump(),
                       i + 1 < profile.samples.size() ? "," : "");
  }
  out += "  ]\n}\n";
  return out;
}

TimeDict available_ops(const TimeDict& time_dict, const std::vector<std::string>& ops) {
  if (ops.empty()) return time_dict;
  TimeDict out;
  for (const auto& [op, cost] : time_dict) {
    if (!nonlinear_ops().count(op) || std::find(ops.begin(), ops.end(), op) != ops.end()) {
      out[op] = cost;
    }
  }
  return out;
}

std::string candidates_to_json(const CandidateSet& set, const std::string& name) {
  json j;
  j["name"] = name;
  json summary = json::array();
  for (const auto& o : set.outcomes) {
    json row = {{"k", o.k}, {"seconds", o.seconds}};
    if (o.plan) {
      row["m"] = o.plan->m();
      row["max_srd"] = o.max_srd;
    } else {
      row["failure"] = o.failure_reason;
    }
    summary.push_back(row);
  }
  j["summary"] = summary;
  json plans = json::array();
  for (const auto& p : set.plans) plans.push_back(plan_json(p));
  j["candidates"] = plans;
  return j.dump(2) + "\n";
}

std::vector<PiecewisePlan> candidates_from_json(std::string_view text) {
  const json j = parse_raw_numbers(text);
  const json& plans = field(j, "candidates", "candidate set");
  if (!plans.is_array()) throw ConfigError("field \"candidates\" must be an array");
  std::vector<PiecewisePlan> out;
  for (const auto& p : plans) out.push_back(plan_from(p));
  return out;
}

}  // namespace nfgen
