#include "opmap/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "opmap/error.hpp"

namespace opmap::io {

using json = nlohmann::ordered_json;

namespace {

void dump(const json& j, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        dump(it.value(), out, indent, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::none_of(j.begin(), j.end(), [](const json& e) { return e.is_structured(); });
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump(j[i], out, indent, depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump(j[i], out, indent, depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_double(x) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

std::string dump17(const json& j) {
  std::string out;
  dump(j, out, 2, 0);
  out += "\n";
  return out;
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

double number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw Error(ErrorCode::ParseError, std::string("missing number '") + key + "'");
  return j.at(key).get<double>();
}

Mat2 matrix(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::ParseError, std::string("missing matrix '") + key + "'");
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != 2) throw Error(ErrorCode::ParseError, std::string("'") + key + "' must be 2x2");
  Mat2 m;
  for (int r = 0; r < 2; ++r) {
    if (!a[r].is_array() || a[r].size() != 2) throw Error(ErrorCode::ParseError, std::string("'") + key + "' must be 2x2");
    for (int c = 0; c < 2; ++c) {
      if (!a[r][c].is_number()) throw Error(ErrorCode::ParseError, std::string("'") + key + "' has a non-number");
      m(r, c) = a[r][c].get<double>();
    }
  }
  return m;
}

json matrix_json(const Mat2& m) { return json::array({{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}}); }

const char* form_name(CanonicalForm f) {
  return f == CanonicalForm::GammaPositive ? "gamma_positive" : "gamma_nonpositive";
}

json canonical_json(const CanonicalMap2& c) {
  return {{"form", form_name(c.form)}, {"x", c.x}, {"y", c.y}, {"u", c.u}, {"v", c.v}};
}

json model_json(const Map2& m) {
  json j{{"d0", matrix_json(m.d0())}, {"d1", matrix_json(m.d1())}};
  if (m.canonical()) j["canonical"] = canonical_json(*m.canonical());
  return j;
}

json dpln_json(const DplnParams& p) {
  return {{"alpha", p.alpha}, {"beta", p.beta}, {"mu", p.mu}, {"sigma2", p.sigma2}};
}

json report_json(const RiskReport& r) {
  const SummaryStats& s = r.summary;
  json j{{"min", s.min},   {"max", s.max},   {"mean", s.mean}, {"SD", s.sd},     {"skewness", s.skewness},
         {"Q.025", s.q025}, {"Q.25", s.q25}, {"Q.50", s.q50}, {"Q.975", s.q975}};
  json measures = json::array();
  for (const auto& [p, var] : r.var) measures.push_back({{"p", p}, {"VaR", var}, {"ES", r.es.at(p)}});
  j["risk_measures"] = measures;
  j["warnings"] = r.warnings;
  return j;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<double> parse_row(std::string_view line, const std::string& where) {
  std::vector<double> values;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ',' || line[i] == ';' || std::isspace(static_cast<unsigned char>(line[i])))) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ',' && line[j] != ';' && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    std::string_view field = line.substr(i, j - i);
    double x = 0.0;
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(x))
      throw Error(ErrorCode::ParseError, where + ": cannot parse '" + std::string(field) + "'");
    values.push_back(x);
    i = j;
  }
  return values;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Trace ingest(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  Trace t;
  t.source = path.string();
  std::vector<double> severities;
  std::size_t columns = 0;
  std::istringstream in(text);
  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    const std::string_view s = trim(raw);
    if (s.empty() || s.front() == '#') continue;
    const std::string where = path.string() + ":" + std::to_string(line);
    const auto row = parse_row(s, where);
    if (row.size() < 1 || row.size() > 2) throw Error(ErrorCode::ParseError, where + ": expected one or two columns");
    if (columns == 0) columns = row.size();
    if (row.size() != columns) throw Error(ErrorCode::ParseError, where + ": column count changed");
    for (double x : row)
      if (x < 0) throw Error(ErrorCode::NegativeValue, where + ": negative value " + format_double(x));
    t.times.push_back(row[0]);
    if (columns == 2) severities.push_back(row[1]);
  }
  if (t.times.empty()) throw Error(ErrorCode::EmptyFile, path.string() + " holds no data rows");
  if (columns == 2) t.severities = std::move(severities);
  return t;
}

std::vector<double> read_severities(const std::filesystem::path& path) {
  Trace t = ingest(path);
  return t.severities ? *t.severities : t.times;
}

TraceStats describe(const std::vector<double>& values) {
  if (values.empty()) throw Error(ErrorCode::EmptyTrace, "no values to describe");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double mean = 0.0;
  for (double x : sorted) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : sorted) ss += (x - mean) * (x - mean);
  const std::size_t mid = sorted.size() / 2;
  const double median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  const double sd = sorted.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {mean, median, mean > 0 ? sd / mean : std::numeric_limits<double>::quiet_NaN(), sorted.back()};
}

std::string model_to_json(const Map2& m) { return dump17(model_json(m)); }

Map2 model_from_json(const std::string& text) {
  const json j = parse(text);
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "model must be a JSON object");
  const Mat2 d0 = matrix(j, "d0");
  const Mat2 d1 = matrix(j, "d1");
  if (!j.contains("canonical")) return validate_map2(d0, d1);

  const json& c = j.at("canonical");
  const std::string form = c.value("form", "");
  CanonicalMap2 params;
  if (form == "gamma_positive") {
    params.form = CanonicalForm::GammaPositive;
  } else if (form == "gamma_nonpositive") {
    params.form = CanonicalForm::GammaNonpositive;
  } else {
    throw Error(ErrorCode::ParseError, "unknown canonical form '" + form + "'");
  }
  params.x = number(c, "x");
  params.y = number(c, "y");
  params.u = number(c, "u");
  params.v = number(c, "v");
  Map2 m = expand_canonical(params);
  if (m.d0() != d0 || m.d1() != d1)
    throw Error(ErrorCode::ConstraintViolated, "canonical parameters do not match d0/d1");
  return m;
}

Map2 load_model(const std::filesystem::path& path) { return model_from_json(read_file(path)); }

std::string dpln_to_json(const DplnParams& p) { return dump17(dpln_json(p)); }

DplnParams dpln_from_json(const std::string& text) {
  const json j = parse(text);
  DplnParams p{number(j, "alpha"), number(j, "beta"), number(j, "mu"), number(j, "sigma2")};
  p.validate();
  return p;
}

DplnParams load_dpln(const std::filesystem::path& path) { return dpln_from_json(read_file(path)); }

std::string fit_result_to_json(const FitResult& r) {
  json j{{"model", model_json(r.model)},
         {"loglik", r.loglik},
         {"loglik_gamma_positive", r.loglik_gamma_positive},
         {"loglik_gamma_nonpositive", r.loglik_gamma_nonpositive},
         {"warm_start", canonical_json(r.warm_start)},
         {"warm_start_loglik", r.warm_start_loglik},
         {"moment_distance_at_start", r.delta_at_start},
         {"converged", r.converged},
         {"iterations", r.iterations}};
  return dump17(j);
}

std::string dpln_fit_to_json(const DplnFit& f) {
  json j{{"params", dpln_json(f.params)}, {"loglik", f.loglik},         {"start", dpln_json(f.start)},
         {"start_loglik", f.start_loglik}, {"iterations", f.iterations}, {"converged", f.converged}};
  return dump17(j);
}

std::string risk_report_to_json(const RiskReport& r) { return dump17(report_json(r)); }

std::string comparison_to_json(const FrequencyComparison& c) {
  json j{{"map2", report_json(c.map2)},
         {"poisson", report_json(c.poisson)},
         {"map2_zero_fraction", c.map2_sample.zero_fraction()},
         {"poisson_zero_fraction", c.poisson_sample.zero_fraction()},
         {"map2_p_zero", c.map2_p_zero},
         {"poisson_p_zero", c.poisson_p_zero},
         {"k", c.map2_sample.k}};
  return dump17(j);
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>) out += format_double(v);
            else if constexpr (std::is_same_v<V, std::int64_t>) out += std::to_string(v);
            else out += v;
          },
          row[i]);
    }
    out += "\n";
  }
  return out;
}

std::string to_json(const Table& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json o = json::object();
    for (std::size_t i = 0; i < row.size() && i < t.columns.size(); ++i)
      std::visit([&](const auto& v) { o[t.columns[i]] = v; }, row[i]);
    rows.push_back(std::move(o));
  }
  return dump17(rows);
}

std::string render(const Table& t, Format f) { return f == Format::Csv ? to_csv(t) : to_json(t); }

const char* extension(Format f) { return f == Format::Csv ? ".csv" : ".json"; }

std::string losses_to_binary(const std::vector<double>& losses) {
  std::string out(losses.size() * sizeof(double), '\0');
  for (std::size_t i = 0; i < losses.size(); ++i) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(losses[i]);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    std::memcpy(out.data() + i * sizeof(double), &bits, sizeof bits);
  }
  return out;
}

std::vector<double> losses_from_binary(const std::string& bytes) {
  if (bytes.size() % sizeof(double)) throw Error(ErrorCode::ParseError, "binary loss file is truncated");
  std::vector<double> out(bytes.size() / sizeof(double));
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, bytes.data() + i * sizeof(double), sizeof bits);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

OutputSet::OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::exists(dir_)) {
    std::filesystem::create_directories(dir_);
    created_dir_ = true;
  }
}

OutputSet::~OutputSet() {
  if (committed_) return;
  std::error_code ec;
  for (const auto& f : files_) std::filesystem::remove(f, ec);
  if (created_dir_ && std::filesystem::is_empty(dir_, ec)) std::filesystem::remove(dir_, ec);
}

std::filesystem::path OutputSet::write(const std::string& name, const std::string& contents) {
  const auto path = dir_ / name;
  files_.push_back(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::InvalidArgument, "failed writing " + path.string());
  return path;
}

}  // namespace opmap::io
