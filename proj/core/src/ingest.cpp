#include "barnet/ingest.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <unordered_map>

#include "barnet/errors.hpp"

namespace barnet {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c == '\r' && i + 1 == line.size()) {
      // trailing CR of CRLF
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

bool parse_datetime(const std::string& s, const std::vector<std::string>& formats,
                    std::int64_t& out) {
  for (const auto& fmt : formats) {
    std::tm tm = {};
    std::istringstream in(s);
    in >> std::get_time(&tm, fmt.c_str());
    if (in.fail()) continue;
    // Require the whole field to be consumed (ignoring trailing spaces).
    char trailing;
    bool clean = true;
    while (in.get(trailing)) {
      if (!std::isspace(static_cast<unsigned char>(trailing))) {
        clean = false;
        break;
      }
    }
    if (!clean) continue;
    tm.tm_isdst = 0;
    const std::time_t t = timegm(&tm);
    if (t == static_cast<std::time_t>(-1)) continue;
    out = static_cast<std::int64_t>(t);
    return true;
  }
  return false;
}

std::int64_t week_origin(std::int64_t timestamp) {
  std::int64_t day = timestamp - (((timestamp % kSecondsPerDay) + kSecondsPerDay) % kSecondsPerDay);
  // 1970-01-01 was a Thursday; shift so weeks start on Monday.
  std::int64_t days_since_epoch = day / kSecondsPerDay;
  std::int64_t weekday = ((days_since_epoch + 3) % 7 + 7) % 7;  // Monday = 0
  return day - weekday * kSecondsPerDay;
}

namespace {

// Streaming row parser so multi-GB extracts never load whole.
class IncidentParser {
 public:
  IncidentParser(const std::string& header_line, const IngestConfig& cfg) : cfg_(cfg) {
    const auto header = split_csv_line(header_line);
    auto find_col = [&](const std::string& name) {
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
      }
      throw DataError("incident CSV is missing column '" + name + "'");
    };
    date_idx_ = find_col(cfg.date_column);
    node_idx_ = find_col(cfg.node_column);
    type_idx_ = cfg.type_filter.empty() && cfg.type_column.empty() ? -1
                                                                   : find_col(cfg.type_column);
  }

  void consume(const std::string& line, std::int64_t line_no, IngestResult& result) const {
    if (line.empty() || line == "\r") return;
    ++result.total_rows;
    const auto fields = split_csv_line(line);
    const int needed = std::max(date_idx_, std::max(node_idx_, type_idx_));
    if (static_cast<int>(fields.size()) <= needed) {
      result.rejects.push_back({line_no, "too few fields"});
      return;
    }
    IncidentRecord rec;
    if (!parse_datetime(fields[date_idx_], cfg_.date_formats, rec.timestamp)) {
      result.rejects.push_back({line_no, "unparseable date '" + fields[date_idx_] + "'"});
      return;
    }
    rec.node_key = fields[node_idx_];
    if (rec.node_key.empty()) {
      result.rejects.push_back({line_no, "empty node key"});
      return;
    }
    if (type_idx_ >= 0) rec.type = fields[type_idx_];
    if (!cfg_.type_filter.empty() && rec.type != cfg_.type_filter) {
      ++result.filtered_out;
      return;
    }
    result.records.push_back(std::move(rec));
  }

 private:
  const IngestConfig& cfg_;
  int date_idx_ = 0;
  int node_idx_ = 0;
  int type_idx_ = -1;
};

void enforce_reject_budget(const IngestResult& result, const IngestConfig& cfg) {
  if (result.total_rows > 0 &&
      static_cast<double>(result.rejects.size()) >
          cfg.max_reject_fraction * static_cast<double>(result.total_rows)) {
    throw DataError("incident CSV: " + std::to_string(result.rejects.size()) + " of " +
                    std::to_string(result.total_rows) + " rows rejected (limit " +
                    std::to_string(cfg.max_reject_fraction * 100) + "%)");
  }
}

}  // namespace

IngestResult parse_incident_rows(const std::vector<std::string>& lines, const IngestConfig& cfg) {
  if (lines.empty()) throw DataError("incident CSV is empty");
  IngestResult result;
  IncidentParser parser(lines[0], cfg);
  for (std::size_t li = 1; li < lines.size(); ++li)
    parser.consume(lines[li], static_cast<std::int64_t>(li) + 1, result);
  enforce_reject_budget(result, cfg);
  return result;
}

IngestResult read_incident_csv(const std::string& path, const IngestConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open incident CSV '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("incident CSV is empty");
  IngestResult result;
  IncidentParser parser(line, cfg);
  std::int64_t line_no = 1;
  while (std::getline(in, line)) parser.consume(line, ++line_no, result);
  enforce_reject_budget(result, cfg);
  return result;
}

BinResult bin_events(const std::vector<IncidentRecord>& records, std::int64_t bin_width_seconds,
                     std::int64_t origin, const std::vector<std::string>& nodes, int n_bins) {
  if (nodes.empty()) throw ConfigError("bin_events: node list must be non-empty");
  if (bin_width_seconds <= 0) throw ConfigError("bin_events: bin width must be positive");
  if (n_bins < 0) throw ConfigError("bin_events: n_bins must be >= 0");

  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) index[nodes[i]] = static_cast<int>(i);

  int t_max = n_bins;
  if (t_max == 0) {
    for (const auto& rec : records) {
      if (rec.timestamp < origin || !index.count(rec.node_key)) continue;
      const std::int64_t t = (rec.timestamp - origin) / bin_width_seconds;
      t_max = std::max<int>(t_max, static_cast<int>(t) + 1);
    }
    if (t_max == 0) t_max = 1;
  }

  BinResult out;
  out.events.data = BinaryMatrix::Zero(static_cast<int>(nodes.size()), t_max);
  out.events.node_ids = nodes;
  out.events.bin_width_seconds = bin_width_seconds;
  for (const auto& rec : records) {
    auto it = index.find(rec.node_key);
    if (it == index.end()) {
      ++out.other_nodes;
      continue;
    }
    if (rec.timestamp < origin) {
      ++out.out_of_span;
      continue;
    }
    const std::int64_t t = (rec.timestamp - origin) / bin_width_seconds;
    if (t >= t_max) {
      ++out.out_of_span;
      continue;
    }
    out.events.data(it->second, static_cast<int>(t)) = 1;
    ++out.binned_records;
  }
  return out;
}

std::vector<std::string> top_k_nodes(const std::vector<IncidentRecord>& records, int k) {
  if (k < 1) throw ConfigError("top_k_nodes: k must be >= 1");
  std::map<std::string, std::int64_t> counts;
  for (const auto& rec : records) ++counts[rec.node_key];
  if (static_cast<int>(counts.size()) < k)
    throw DataError("top_k_nodes: only " + std::to_string(counts.size()) +
                    " distinct node keys, need " + std::to_string(k));
  std::vector<std::pair<std::string, std::int64_t>> items(counts.begin(), counts.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) out.push_back(items[i].first);
  return out;
}

SplitResult split_and_mask(const EventMatrix& x, const SplitSpec& spec) {
  x.validate();
  if (spec.train_bins < 1) throw ConfigError("split_and_mask: train_bins must be >= 1");
  if (spec.test_bins < 0) throw ConfigError("split_and_mask: test_bins must be >= 0");
  if (spec.train_bins + spec.test_bins > x.bins())
    throw ConfigError("split_and_mask: split exceeds available bins");

  SplitResult out;
  auto slice = [&](int begin, int count) {
    EventMatrix part;
    part.data = x.data.middleCols(begin, count);
    part.node_ids = x.node_ids;
    part.bin_width_seconds = x.bin_width_seconds;
    return part;
  };
  out.x_train = slice(0, spec.train_bins);
  out.x_test = slice(spec.train_bins, spec.test_bins);
  auto spec_mask = MissingnessSpec::scalar(spec.mask_p, spec.mask_p, x.nodes());
  auto [z, w] = apply_missingness(out.x_train, spec_mask, spec.seed);
  out.z_train = std::move(z);
  out.w_train = std::move(w);
  return out;
}

}  // namespace barnet
