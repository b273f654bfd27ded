#include "parking/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace parking::io {

using nlohmann::json;

const char* const kSeriesHeader =
    "t,vbar,vbar_sq,unparked_cars,vacant_spots,frac_spot_unvisited,frac_closer_spot,"
    "frac_closer_car,frac_tie";

const char* const kSweepHeader =
    "p,replica,seed,t_final,absorbed,absorption_time,vbar,n_cars,n_spots,unparked_cars,"
    "vacant_spots";

const char* const kSweepSummaryHeader =
    "p,replicas,absorbed,vbar_mean,vbar_se,frac_cars_parked,frac_spots_parked_in";

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw IoError("failed to format number");
  return std::string(buf, end);
}

void write_preamble(std::ostream& out, const json& config) {
  out << "# format_version: " << kFormatVersion << '\n';
  out << "# config: " << config.dump() << '\n';
}

void write_series_csv(std::ostream& out, const std::vector<ObservableRow>& rows,
                      const json& config) {
  write_preamble(out, config);
  out << kSeriesHeader << '\n';
  for (const auto& r : rows) {
    out << r.t << ',' << format_double(r.vbar) << ',' << format_double(r.vbar_sq) << ','
        << r.unparked_cars << ',' << r.vacant_spots << ',' << format_double(r.frac_spot_unvisited)
        << ',' << format_double(r.frac_closer_spot) << ',' << format_double(r.frac_closer_car)
        << ',' << format_double(r.frac_tie) << '\n';
  }
}

std::string snapshot_header(std::uint32_t dimension) {
  std::string h = "vertex_index";
  for (std::uint32_t i = 0; i < dimension; ++i) h += ",coord_" + std::to_string(i);
  h += ",role,spot_status,unparked_count,nearest_label";
  return h;
}

void write_snapshot_csv(std::ostream& out, const Topology& topology, const Snapshot& snap,
                        const NearestTypeMap* labels, const json& config) {
  json with_time = config;
  with_time["snapshot_time"] = snap.time;
  write_preamble(out, with_time);
  out << snapshot_header(topology.dimension()) << '\n';
  for (Vertex v = 0; v < snap.vertices.size(); ++v) {
    const auto& vs = snap.vertices[v];
    out << v;
    for (auto c : topology.coordinates(v)) out << ',' << c;
    out << ',' << (vs.role == Role::Car ? "car" : "spot") << ',' << spot_status_label(vs) << ','
        << vs.unparked_count << ',';
    if (labels) out << to_string(labels->labels[v]);
    out << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double x = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw IoError("bad number in CSV: " + s);
  return x;
}

template <typename T>
T parse_uint(const std::string& s) {
  T x = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw IoError("bad integer in CSV: " + s);
  return x;
}

}  // namespace

SeriesFile read_series_csv(std::istream& in) {
  SeriesFile file;
  std::string line;
  const std::string version_tag = "# format_version: ";
  const std::string config_tag = "# config: ";
  if (!std::getline(in, line) || line.rfind(version_tag, 0) != 0)
    throw IoError("series CSV: missing format_version line");
  file.format_version = parse_uint<int>(line.substr(version_tag.size()));
  if (file.format_version != kFormatVersion)
    throw IoError("series CSV: unsupported format_version " + std::to_string(file.format_version));
  if (!std::getline(in, line) || line.rfind(config_tag, 0) != 0)
    throw IoError("series CSV: missing config line");
  try {
    file.config = json::parse(line.substr(config_tag.size()));
  } catch (const json::parse_error&) {
    throw IoError("series CSV: config line is not JSON");
  }
  if (!std::getline(in, line) || line != kSeriesHeader) throw IoError("series CSV: header mismatch");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 9) throw IoError("series CSV: expected 9 fields, got " + std::to_string(f.size()));
    ObservableRow r;
    r.t = parse_uint<std::uint64_t>(f[0]);
    r.vbar = parse_double(f[1]);
    r.vbar_sq = parse_double(f[2]);
    r.unparked_cars = parse_uint<std::uint32_t>(f[3]);
    r.vacant_spots = parse_uint<std::uint32_t>(f[4]);
    r.frac_spot_unvisited = parse_double(f[5]);
    r.frac_closer_spot = parse_double(f[6]);
    r.frac_closer_car = parse_double(f[7]);
    r.frac_tie = parse_double(f[8]);
    file.rows.push_back(r);
  }
  return file;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, const json& config) {
  write_preamble(out, config);
  out << kSweepHeader << '\n';
  for (const auto& r : rows) {
    out << format_double(r.p) << ',' << r.replica << ',' << r.seed << ',' << r.t_final << ','
        << (r.absorption_time ? 1 : 0) << ',';
    if (r.absorption_time) out << *r.absorption_time;
    out << ',' << format_double(r.vbar) << ',' << r.n_cars << ',' << r.n_spots << ','
        << r.unparked_cars << ',' << r.vacant_spots << '\n';
  }
}

void write_sweep_summary_csv(std::ostream& out, const std::vector<SweepAggregate>& rows,
                             const json& config) {
  write_preamble(out, config);
  out << kSweepSummaryHeader << '\n';
  for (const auto& r : rows) {
    out << format_double(r.p) << ',' << r.replicas << ',' << r.absorbed << ','
        << format_double(r.vbar_mean) << ',' << format_double(r.vbar_se) << ','
        << format_double(r.frac_cars_parked) << ',' << format_double(r.frac_spots_parked_in)
        << '\n';
  }
}

void write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  std::ofstream out(target, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  out.close();
  if (!out) throw IoError("write failed: " + path);
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

}  // namespace parking::io
