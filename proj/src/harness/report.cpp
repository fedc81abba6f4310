#include "cady/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cady::harness {

using json = nlohmann::json;

DegradationMetric degradation(double x, double x_ref) {
  if (x_ref == 0.0) throw std::invalid_argument("degradation: nominal performance is zero");
  return {x, x_ref, (x - x_ref) / x_ref};
}

std::string metric_direction(const std::string& metric) {
  static const std::map<std::string, std::string> table{
      {"reward", "higher"},   {"pd", "higher"},       {"degradation", "lower"}, {"success", "higher"},
      {"success_rate", "higher"}, {"time", "lower"},  {"distance", "lower"},    {"steps", "higher"},
  };
  if (const auto it = table.find(metric); it != table.end()) return it->second;
  if (metric.rfind("mse", 0) == 0) return "lower";
  return "n/a";
}

std::vector<Aggregate> aggregate(const std::vector<Record>& records) {
  std::vector<std::pair<std::string, std::string>> groups;
  for (const auto& r : records) {
    const std::pair key{r.condition, r.model};
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
  }
  std::vector<Aggregate> out;
  for (const auto& [condition, model] : groups) {
    std::map<std::string, std::vector<double>> values;
    for (const auto& r : records) {
      if (r.condition != condition || r.model != model) continue;
      for (const auto& [name, v] : r.metrics) values[name].push_back(v);
    }
    for (const auto& [name, vs] : values) {
      Aggregate a{condition, model, name, vs.size(), 0.0, 0.0};
      for (double v : vs) a.mean += v;
      a.mean /= static_cast<double>(vs.size());
      for (double v : vs) a.std += (v - a.mean) * (v - a.mean);
      a.std = std::sqrt(a.std / static_cast<double>(vs.size()));
      out.push_back(std::move(a));
    }
  }
  return out;
}

double mean_metric(const std::vector<Record>& records, const std::string& metric, const std::string& condition,
                   const std::string& model) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : records) {
    if (!condition.empty() && r.condition != condition) continue;
    if (!model.empty() && r.model != model) continue;
    const auto it = r.metrics.find(metric);
    if (it == r.metrics.end()) continue;
    sum += it->second;
    ++count;
  }
  if (count == 0) {
    throw std::invalid_argument("mean_metric: no records with metric '" + metric + "' for condition '" + condition +
                                "', model '" + model + "'");
  }
  return sum / static_cast<double>(count);
}

namespace {

void check_cell(const std::string& s) {
  if (s.find_first_of(",\n\r\"") != std::string::npos) {
    throw std::invalid_argument("report: label '" + s + "' contains a CSV delimiter");
  }
}

json records_json(const std::vector<Record>& records) {
  json arr = json::array();
  for (const auto& r : records) {
    json m = json::object();
    for (const auto& [k, v] : r.metrics) m[k] = v;
    arr.push_back({{"seed", r.seed}, {"condition", r.condition}, {"model", r.model}, {"metrics", m}});
  }
  return arr;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write '" + p.string() + "'");
  return os;
}

}  // namespace

void write_records_csv(std::ostream& os, const std::vector<Record>& records) {
  os << "seed,condition,model,metric,value\n" << std::setprecision(17);
  for (const auto& r : records) {
    check_cell(r.condition);
    check_cell(r.model);
    for (const auto& [name, v] : r.metrics) {
      check_cell(name);
      os << r.seed << ',' << r.condition << ',' << r.model << ',' << name << ',' << v << '\n';
    }
  }
}

std::vector<Record> read_records_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "seed,condition,model,metric,value") {
    throw std::runtime_error("records CSV: missing or wrong header");
  }
  std::vector<Record> out;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw std::runtime_error("records CSV line " + std::to_string(line_no) + ": expected 5 columns");
    Record r;
    double value = 0.0;
    try {
      r.seed = std::stoull(cells[0]);
      value = std::stod(cells[4]);
    } catch (const std::exception&) {
      throw std::runtime_error("records CSV line " + std::to_string(line_no) + ": bad number");
    }
    r.condition = cells[1];
    r.model = cells[2];
    // Consecutive lines of one run share (seed, condition, model).
    if (!out.empty() && out.back().seed == r.seed && out.back().condition == r.condition &&
        out.back().model == r.model && !out.back().metrics.count(cells[3])) {
      out.back().metrics[cells[3]] = value;
    } else {
      r.metrics[cells[3]] = value;
      out.push_back(std::move(r));
    }
  }
  return out;
}

void write_aggregates_csv(std::ostream& os, const std::vector<Aggregate>& aggregates) {
  os << "condition,model,metric,direction,count,mean,std\n" << std::setprecision(17);
  for (const auto& a : aggregates) {
    os << a.condition << ',' << a.model << ',' << a.metric << ',' << metric_direction(a.metric) << ',' << a.count
       << ',' << a.mean << ',' << a.std << '\n';
  }
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& dir,
                 const std::vector<std::string>& formats) {
  if (report.records.empty()) throw std::invalid_argument("emit_report: report has no records");
  for (const auto& f : formats) {
    if (f != "csv" && f != "json") throw std::invalid_argument("emit_report: unknown format '" + f + "'");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());

  const auto aggregates = aggregate(report.records);
  for (const auto& f : formats) {
    if (f == "csv") {
      auto rec = open_out(dir / "records.csv");
      write_records_csv(rec, report.records);
      auto agg = open_out(dir / "aggregates.csv");
      write_aggregates_csv(agg, aggregates);
    } else {
      json prov = {{"suite", report.suite},
                   {"config_hash", report.config_hash},
                   {"code_version", report.code_version}};
      auto rec = open_out(dir / "records.json");
      rec << json{{"provenance", prov}, {"records", records_json(report.records)}}.dump(1) << '\n';
      json arr = json::array();
      for (const auto& a : aggregates) {
        arr.push_back({{"condition", a.condition},
                       {"model", a.model},
                       {"metric", a.metric},
                       {"direction", metric_direction(a.metric)},
                       {"count", a.count},
                       {"mean", a.mean},
                       {"std", a.std}});
      }
      auto agg = open_out(dir / "aggregates.json");
      agg << json{{"provenance", prov}, {"aggregates", arr}}.dump(1) << '\n';
    }
  }
  auto cfg = open_out(dir / "config.ini");
  cfg << report.config_ini;
}

void write_reward_curve_csv(std::ostream& os, std::uint64_t seed, const std::vector<double>& rewards, bool header) {
  if (header) os << "trial,reward,seed\n";
  os << std::setprecision(17);
  for (std::size_t t = 0; t < rewards.size(); ++t) os << t << ',' << rewards[t] << ',' << seed << '\n';
}

}  // namespace cady::harness
