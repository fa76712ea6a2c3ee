#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "opmap/aggregate.hpp"
#include "opmap/estimation.hpp"
#include "opmap/map2.hpp"
#include "opmap/severity.hpp"

namespace opmap::io {

/// %.17g; non-finite values print as nan / inf / -inf.
std::string format_double(double x);

struct Trace {
  std::vector<double> times;
  std::optional<std::vector<double>> severities;
  std::string source;

  std::size_t n() const { return times.size(); }
};

/// One or two numeric columns separated by commas or whitespace. Blank lines
/// and lines starting with '#' are skipped.
Trace ingest(const std::filesystem::path& path);

/// Severity file: one positive value per line (a second column, if present,
/// is used instead of the first).
std::vector<double> read_severities(const std::filesystem::path& path);

struct TraceStats {
  double mean, median, cv, max;
};

TraceStats describe(const std::vector<double>& values);

// Model and parameter documents. Doubles are written with 17 significant
// digits, so write followed by read reproduces every bit.
std::string model_to_json(const Map2& m);
Map2 model_from_json(const std::string& text);
Map2 load_model(const std::filesystem::path& path);

std::string dpln_to_json(const DplnParams& p);
DplnParams dpln_from_json(const std::string& text);
DplnParams load_dpln(const std::filesystem::path& path);

std::string fit_result_to_json(const FitResult& r);
std::string dpln_fit_to_json(const DplnFit& f);
std::string risk_report_to_json(const RiskReport& r);
std::string comparison_to_json(const FrequencyComparison& c);

/// Tabular output rendered as CSV or as a JSON array of row objects.
using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

enum class Format { Csv, Json };

std::string to_csv(const Table& t);
std::string to_json(const Table& t);
std::string render(const Table& t, Format f);
const char* extension(Format f);

/// Raw little-endian float64 values, no header.
std::string losses_to_binary(const std::vector<double>& losses);
std::vector<double> losses_from_binary(const std::string& bytes);

/// Tracks files written by a command and deletes them unless commit() is
/// called, so a failing command leaves no partial outputs behind.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir);
  ~OutputSet();
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;

  std::filesystem::path write(const std::string& name, const std::string& contents);
  void commit() { committed_ = true; }
  const std::vector<std::filesystem::path>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> files_;
  bool created_dir_ = false;
  bool committed_ = false;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace opmap::io
