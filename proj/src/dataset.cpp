#include "dtsurv/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "dtsurv/errors.hpp"

namespace dtsurv {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

long parse_int(const std::string& field, const char* what, std::size_t row) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw DataError(std::string("row ") + std::to_string(row) + ": " + what + " '" + field +
                    "' is not an integer");
  return v;
}

double parse_double(const std::string& field, const std::string& col, std::size_t row) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw DataError("row " + std::to_string(row) + ": column '" + col + "' value '" + field +
                    "' is not numeric");
  return v;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void SurvivalDataset::validate() const {
  grid.validate();
  std::unordered_set<std::string> seen;
  seen.reserve(observations.size());
  for (const Observation& o : observations) {
    if (!seen.insert(o.id).second) throw DataError("duplicate subject id '" + o.id + "'");
    if (o.x < 1 || o.x > grid.d + 1)
      throw DataError("subject '" + o.id + "': time " + std::to_string(o.x) +
                      " outside 1.." + std::to_string(grid.d + 1));
    if (o.j < 0 || o.j > M)
      throw DataError("subject '" + o.id + "': event code " + std::to_string(o.j) +
                      " outside 0.." + std::to_string(M));
    if (o.x == grid.d + 1 && o.j != 0)
      throw DataError("subject '" + o.id + "': event beyond the time grid");
    if (static_cast<int>(o.z.size()) != p())
      throw DataError("subject '" + o.id + "': covariate vector length mismatch");
  }
}

SurvivalDataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
  std::vector<std::string> header = split_csv_line(line);

  auto column_of = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw DataError("'" + path + "': missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t id_col = column_of(schema.id);
  const std::size_t time_col = column_of(schema.time);
  const std::size_t event_col = column_of(schema.event);

  std::vector<std::string> cov_names = schema.covariates;
  if (cov_names.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (c != id_col && c != time_col && c != event_col) cov_names.push_back(header[c]);
  }
  std::vector<std::size_t> cov_cols;
  cov_cols.reserve(cov_names.size());
  for (const std::string& name : cov_names) cov_cols.push_back(column_of(name));

  SurvivalDataset ds;
  ds.covariate_names = cov_names;

  std::size_t row = 1;  // header is row 1
  int max_event_time = 0;
  int max_any_time = 0;
  int max_code = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw DataError("row " + std::to_string(row) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));

    Observation o;
    o.id = fields[id_col];
    long x = parse_int(fields[time_col], "time", row);
    if (x < 1)
      throw DataError("row " + std::to_string(row) + ": time must be >= 1, found " +
                      std::to_string(x));
    long j = parse_int(fields[event_col], "event code", row);
    if (j < 0)
      throw DataError("row " + std::to_string(row) + ": negative event code " + std::to_string(j));
    if (schema.event_types_override > 0 && j > schema.event_types_override)
      throw DataError("row " + std::to_string(row) + ": event code " + std::to_string(j) +
                      " exceeds declared number of event types");
    o.x = static_cast<int>(x);
    o.j = static_cast<int>(j);
    o.z.reserve(cov_cols.size());
    for (std::size_t k = 0; k < cov_cols.size(); ++k)
      o.z.push_back(parse_double(fields[cov_cols[k]], cov_names[k], row));

    max_any_time = std::max(max_any_time, o.x);
    if (o.j != 0) max_event_time = std::max(max_event_time, o.x);
    max_code = std::max(max_code, o.j);
    ds.observations.push_back(std::move(o));
  }
  if (ds.observations.empty()) throw DataError("'" + path + "' contains no data rows");

  // The grid ends at the last observed event; later censoring times carry the
  // same information as censoring just past the grid and are stored as d + 1.
  int d = max_event_time > 0 ? max_event_time : max_any_time;
  ds.grid = TimeGrid::numeric(d);
  for (Observation& o : ds.observations)
    if (o.x > d) o.x = d + 1;

  ds.M = schema.event_types_override > 0 ? schema.event_types_override : std::max(max_code, 1);
  ds.validate();
  return ds;
}

void write_csv(const SurvivalDataset& ds, const std::string& path, const CsvSchema& schema) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << schema.id << ',' << schema.time << ',' << schema.event;
  for (const std::string& name : ds.covariate_names) out << ',' << name;
  out << '\n';
  for (const Observation& o : ds.observations) {
    out << o.id << ',' << o.x << ',' << o.j;
    for (double v : o.z) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw DataError("failed while writing '" + path + "'");
}

ExpandedDataset expand(const SurvivalDataset& ds) {
  ExpandedDataset ex;
  ex.source = &ds;
  std::size_t total = 0;
  for (const Observation& o : ds.observations)
    total += static_cast<std::size_t>(std::min(o.x, ds.d()));
  ex.rows.reserve(total);
  for (std::size_t i = 0; i < ds.observations.size(); ++i) {
    const Observation& o = ds.observations[i];
    const int last = std::min(o.x, ds.d());
    for (int t = 1; t <= last; ++t) {
      ExpandedDataset::Row r;
      r.subject = static_cast<int32_t>(i);
      r.t = t;
      r.outcome = (t == o.x && o.j != 0) ? o.j : 0;
      ex.rows.push_back(r);
    }
  }
  return ex;
}

EventTable event_table(const SurvivalDataset& ds) {
  const int d = ds.d();
  EventTable table;
  table.M = ds.M;
  table.labels = ds.grid.labels;
  table.at_risk.assign(d, 0);
  table.events.assign(static_cast<std::size_t>(d) * ds.M, 0);
  table.censored.assign(d, 0);

  for (const Observation& o : ds.observations) {
    if (o.x > d) {
      ++table.censored_after_grid;
      continue;
    }
    if (o.j != 0)
      ++table.events[static_cast<std::size_t>(o.x - 1) * ds.M + (o.j - 1)];
    else
      ++table.censored[o.x - 1];
  }
  // y_t by backward accumulation: y_d+... = beyond-grid, y_t = y_{t+1} + exits at t
  std::int64_t alive = table.censored_after_grid;
  for (int t0 = d - 1; t0 >= 0; --t0) {
    std::int64_t exits = table.censored[t0];
    for (int j0 = 0; j0 < ds.M; ++j0) exits += table.event_count(t0, j0);
    alive += exits;
    table.at_risk[t0] = alive;
  }
  return table;
}

SurvivalDataset clip_tail(const SurvivalDataset& ds, int upper) {
  if (upper < 1 || upper > ds.d())
    throw ArgumentError("clip upper bound " + std::to_string(upper) + " outside 1.." +
                        std::to_string(ds.d()));
  SurvivalDataset out = ds;
  out.grid.d = upper;
  out.grid.labels.assign(ds.grid.labels.begin(), ds.grid.labels.begin() + upper);
  out.grid.labels.back() += "+";
  for (Observation& o : out.observations) o.x = std::min(o.x, upper);
  out.validate();
  return out;
}

SurvivalDataset merge_times(const SurvivalDataset& ds, const std::map<int, int>& mapping) {
  const int d = ds.d();
  for (const auto& [src, tgt] : mapping) {
    if (src < 1 || src > d)
      throw ArgumentError("merge source " + std::to_string(src) + " outside the grid");
    if (tgt < 1 || tgt > d)
      throw ArgumentError("merge target " + std::to_string(tgt) + " outside the grid");
    if (tgt > src)
      throw ArgumentError("merge must map " + std::to_string(src) +
                          " to an earlier or equal time, got " + std::to_string(tgt));
    if (tgt != src && mapping.count(tgt) && mapping.at(tgt) != tgt)
      throw ArgumentError("chained merge: target " + std::to_string(tgt) +
                          " is itself remapped");
  }

  // surviving times keep their order; removed sources fold into their target
  std::vector<int> applied(d + 1);
  std::vector<bool> survives(d + 1, true);
  for (int t = 1; t <= d; ++t) applied[t] = t;
  for (const auto& [src, tgt] : mapping) {
    if (src == tgt) continue;
    applied[src] = tgt;
    survives[src] = false;
  }
  std::vector<int> new_index(d + 1, 0);
  std::unordered_map<int, std::vector<int>> group;
  int next = 0;
  for (int t = 1; t <= d; ++t) {
    if (survives[t]) new_index[t] = ++next;
    group[applied[t]].push_back(t);
  }
  const int new_d = next;

  SurvivalDataset out;
  out.M = ds.M;
  out.covariate_names = ds.covariate_names;
  out.grid.d = new_d;
  out.grid.labels.resize(new_d);
  for (int t = 1; t <= d; ++t) {
    if (!survives[t]) continue;
    const std::vector<int>& members = group[t];
    std::string label;
    if (members.size() == 1) {
      label = ds.grid.labels[t - 1];
    } else {
      bool contiguous = members.back() - members.front() + 1 == static_cast<int>(members.size());
      if (contiguous) {
        label = ds.grid.labels[members.front() - 1] + "-" + ds.grid.labels[members.back() - 1];
      } else {
        for (std::size_t i = 0; i < members.size(); ++i)
          label += (i ? "," : "") + ds.grid.labels[members[i] - 1];
      }
    }
    out.grid.labels[new_index[t] - 1] = label;
  }

  out.observations = ds.observations;
  for (Observation& o : out.observations)
    o.x = o.x > d ? new_d + 1 : new_index[applied[o.x]];
  out.validate();
  return out;
}

std::vector<std::pair<int, int>> ValidationReport::cells() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(deficient.size());
  for (const Cell& c : deficient) out.emplace_back(c.j, c.t);
  return out;
}

std::string ValidationReport::describe() const {
  if (ok) return "event counts sufficient at every (event type, time) cell";
  std::ostringstream os;
  os << "too few observed events (minimum " << min_events << ") at";
  for (std::size_t i = 0; i < deficient.size(); ++i) {
    if (i == 12) {
      os << " ... and " << deficient.size() - i << " more cells";
      break;
    }
    os << " (j=" << deficient[i].j << ",t=" << deficient[i].t << ":" << deficient[i].count << ")";
  }
  os << "; regroup the data first, e.g. clip the tail (--clip-upper) or merge sparse "
        "neighboring time points (--merge), then refit";
  return os.str();
}

ValidationReport validate_counts(const SurvivalDataset& ds, std::int64_t min_events) {
  if (min_events < 1) throw ArgumentError("min_events must be >= 1");
  EventTable table = event_table(ds);
  ValidationReport report;
  report.min_events = min_events;
  for (int j0 = 0; j0 < ds.M; ++j0)
    for (int t0 = 0; t0 < ds.d(); ++t0) {
      std::int64_t c = table.event_count(t0, j0);
      if (c < min_events) report.deficient.push_back({j0 + 1, t0 + 1, c});
    }
  report.ok = report.deficient.empty();
  return report;
}

}  // namespace dtsurv
