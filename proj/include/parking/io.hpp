#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "parking/engine.hpp"
#include "parking/observables.hpp"

namespace parking::io {

inline constexpr int kFormatVersion = 1;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form; "nan" and "inf"/"-inf" for non-finite values.
std::string format_double(double x);

extern const char* const kSeriesHeader;

/// Every CSV starts with "# format_version: N" and "# config: {...}" lines,
/// followed by the header row.
void write_preamble(std::ostream& out, const nlohmann::json& config);

void write_series_csv(std::ostream& out, const std::vector<ObservableRow>& rows,
                      const nlohmann::json& config);

std::string snapshot_header(std::uint32_t dimension);

/// labels may be null, in which case nearest_label is left empty.
void write_snapshot_csv(std::ostream& out, const Topology& topology, const Snapshot& snap,
                        const NearestTypeMap* labels, const nlohmann::json& config);

struct SeriesFile {
  int format_version{0};
  nlohmann::json config;
  std::vector<ObservableRow> rows;
};

/// Parses a file written by write_series_csv; throws IoError on schema mismatch.
SeriesFile read_series_csv(std::istream& in);

struct SweepRow {
  double p{0};
  std::size_t replica{0};
  std::uint64_t seed{0};
  std::uint64_t t_final{0};
  std::optional<std::uint64_t> absorption_time;
  double vbar{0};
  std::uint32_t n_cars{0};
  std::uint32_t n_spots{0};
  std::uint32_t unparked_cars{0};
  std::uint32_t vacant_spots{0};
};

struct SweepAggregate {
  double p{0};
  std::size_t replicas{0};
  std::size_t absorbed{0};
  double vbar_mean{0};
  double vbar_se{0};
  double frac_cars_parked{0};
  double frac_spots_parked_in{0};
};

extern const char* const kSweepHeader;
extern const char* const kSweepSummaryHeader;

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows,
                     const nlohmann::json& config);
void write_sweep_summary_csv(std::ostream& out, const std::vector<SweepAggregate>& rows,
                             const nlohmann::json& config);

/// Writes content to path, creating parent directories; throws IoError.
void write_file(const std::string& path, const std::string& content);

/// Pretty JSON with a trailing newline.
std::string dump_json(const nlohmann::json& j);

}  // namespace parking::io
