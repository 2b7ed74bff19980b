#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "barnet/model.hpp"

namespace barnet {

struct IncidentRecord {
  std::int64_t timestamp = 0;  // seconds since epoch, UTC
  std::string node_key;
  std::string type;
};

// Column mapping and filters for incident CSVs. Defaults match the frozen
// fixture schema; the city portal schema maps via the column options.
struct IngestConfig {
  std::string date_column = "date";
  std::string node_column = "community_area";
  std::string type_column = "primary_type";
  std::string type_filter;  // empty = keep all types
  std::vector<std::string> date_formats = {
      "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%d",
      "%m/%d/%Y %I:%M:%S %p", "%m/%d/%Y %H:%M:%S", "%m/%d/%Y",
  };
  // Hard error when rejects exceed this fraction of data rows.
  double max_reject_fraction = 0.10;
};

struct Reject {
  std::int64_t line = 0;  // 1-based, header = line 1
  std::string reason;
};

struct IngestResult {
  std::vector<IncidentRecord> records;
  std::vector<Reject> rejects;
  std::int64_t total_rows = 0;    // data rows seen
  std::int64_t filtered_out = 0;  // valid rows dropped by the type filter
};

IngestResult read_incident_csv(const std::string& path, const IngestConfig& cfg);
IngestResult parse_incident_rows(const std::vector<std::string>& lines, const IngestConfig& cfg);

// One line of RFC-4180-style CSV (quotes, embedded commas/quotes).
std::vector<std::string> split_csv_line(const std::string& line);
std::string csv_escape(const std::string& field);

// Epoch seconds for a datetime string tried against each format in order.
// Returns false when none match.
bool parse_datetime(const std::string& s, const std::vector<std::string>& formats,
                    std::int64_t& out);

// Midnight UTC of the Monday on or before the given time.
std::int64_t week_origin(std::int64_t timestamp);

inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr std::int64_t kSecondsPerWeek = 7 * kSecondsPerDay;

struct BinResult {
  EventMatrix events;
  std::int64_t out_of_span = 0;    // records before origin or past a fixed span
  std::int64_t other_nodes = 0;    // records whose node_key is not selected
  std::int64_t binned_records = 0;
};

// events(t, i) = 1 iff some record with node_key = nodes[i] falls in
// [origin + t*w, origin + (t+1)*w). Half-open bins; duplicate records in one
// bin collapse. n_bins = 0 sizes the matrix from the latest in-span record.
BinResult bin_events(const std::vector<IncidentRecord>& records, std::int64_t bin_width_seconds,
                     std::int64_t origin, const std::vector<std::string>& nodes, int n_bins = 0);

// The k keys with the most records; ties break lexicographically.
std::vector<std::string> top_k_nodes(const std::vector<IncidentRecord>& records, int k);

struct SplitSpec {
  int train_bins = 0;
  int test_bins = 0;
  double mask_p = 1.0;
  std::uint64_t seed = 0;
};

struct SplitResult {
  EventMatrix x_train;
  EventMatrix z_train;  // thinned copy of x_train
  EventMatrix x_test;   // untouched
  EventMatrix w_train;  // the mask, for oracles only
};

SplitResult split_and_mask(const EventMatrix& x, const SplitSpec& spec);

}  // namespace barnet
