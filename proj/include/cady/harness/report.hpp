#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace cady::harness {

/// One run: every record carries the seed that produced it.
struct Record {
  std::uint64_t seed = 0;
  std::string condition;
  std::string model;
  std::map<std::string, double> metrics;

  friend bool operator==(const Record&, const Record&) = default;
};

struct Aggregate {
  std::string condition;
  std::string model;
  std::string metric;
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  // population
};

struct ExperimentReport {
  std::string suite;
  std::vector<Record> records;
  std::string config_ini;
  std::uint64_t config_hash = 0;
  std::string code_version;
};

/// Relative change against nominal performance.
struct DegradationMetric {
  double x = 0.0;
  double x_ref = 0.0;
  double pd = 0.0;
};

/// pd = (x - x_ref) / x_ref; x_ref must be non-zero.
DegradationMetric degradation(double x, double x_ref);

/// "higher", "lower" or "n/a" for a metric name.
std::string metric_direction(const std::string& metric);

/// Grouped by (condition, model) in first-appearance order, metrics sorted
/// by name. Records lacking a metric do not count towards it.
std::vector<Aggregate> aggregate(const std::vector<Record>& records);

/// Mean of one metric over the records matching condition and model (empty
/// condition or model matches all). Throws when nothing matches.
double mean_metric(const std::vector<Record>& records, const std::string& metric, const std::string& condition = "",
                   const std::string& model = "");

/// Long format: seed,condition,model,metric,value.
void write_records_csv(std::ostream& os, const std::vector<Record>& records);
std::vector<Record> read_records_csv(std::istream& is);
void write_aggregates_csv(std::ostream& os, const std::vector<Aggregate>& aggregates);

/// Writes records.{csv,json}, aggregates.{csv,json} and config.ini into dir.
/// formats is any subset of {"csv", "json"}.
void emit_report(const ExperimentReport& report, const std::filesystem::path& dir,
                 const std::vector<std::string>& formats = {"csv", "json"});

/// Header "trial,reward,seed".
void write_reward_curve_csv(std::ostream& os, std::uint64_t seed, const std::vector<double>& rewards,
                            bool header = true);

}  // namespace cady::harness
