#include "causalrank/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "causalrank/errors.hpp"

namespace causalrank {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_int(const std::string& s, long long& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const auto* first = t.data();
  const auto* last = t.data() + t.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

bool parse_real(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const auto* first = t.data();
  const auto* last = t.data() + t.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

struct RawRow {
  std::string run;
  long long timestamp;
  std::vector<double> values;
};

void parse_file(const std::filesystem::path& path,
                std::vector<std::string>& sensor_names,
                std::vector<RawRow>& rows) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file: " + path.string());

  std::string line;
  if (!std::getline(in, line))
    throw DataError("empty input: " + path.string() + " has no header");

  auto header = split_csv_line(line);
  for (auto& h : header) h = trim(h);
  if (header.size() < 2 || header[0] != "run")
    throw DataError("schema error: missing column 'run' in " + path.string());
  if (header[1] != "timestamp")
    throw DataError("schema error: missing column 'timestamp' in " + path.string());
  if (header.size() < 3)
    throw DataError("schema error: no sensor columns in " + path.string());

  std::vector<std::string> sensors(header.begin() + 2, header.end());
  if (sensor_names.empty()) {
    sensor_names = sensors;
  } else if (sensor_names != sensors) {
    throw DataError("schema error: sensor columns in " + path.string() +
                    " differ from previously loaded files");
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw DataError("parse error at " + path.string() + ":" +
                      std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    RawRow row;
    row.run = trim(fields[0]);
    if (row.run.empty())
      throw DataError("parse error at " + path.string() + ":" +
                      std::to_string(line_no) + ": empty run id");
    if (!parse_int(fields[1], row.timestamp))
      throw DataError("parse error at " + path.string() + ":" +
                      std::to_string(line_no) + " column 'timestamp': '" +
                      trim(fields[1]) + "' is not an integer");
    row.values.resize(fields.size() - 2);
    for (std::size_t i = 2; i < fields.size(); ++i) {
      double v = 0.0;
      if (!parse_real(fields[i], v) || !std::isfinite(v))
        throw DataError("parse error at " + path.string() + ":" +
                        std::to_string(line_no) + " column '" +
                        sensor_names[i - 2] + "': '" + trim(fields[i]) +
                        "' is not a finite number");
      row.values[i - 2] = v;
    }
    rows.push_back(std::move(row));
  }
}

}  // namespace

RunDataset load_runs(const std::filesystem::path& source) {
  if (!std::filesystem::exists(source))
    throw DataError("input does not exist: " + source.string());

  std::vector<std::string> sensor_names;
  std::vector<RawRow> rows;
  if (std::filesystem::is_directory(source)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(source))
      if (entry.is_regular_file() && entry.path().extension() == ".csv")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
      throw DataError("no .csv files in directory: " + source.string());
    for (const auto& f : files) parse_file(f, sensor_names, rows);
  } else {
    parse_file(source, sensor_names, rows);
  }

  if (rows.empty()) throw DataError("empty input: no data rows");

  // Group rows by run, rejecting duplicate (run, timestamp) pairs.
  std::map<std::string, std::map<long long, std::vector<double>>> by_run;
  for (auto& row : rows) {
    auto& run = by_run[row.run];
    if (!run.emplace(row.timestamp, std::move(row.values)).second)
      throw DataError("duplicate (run, timestamp) pair: run '" + row.run +
                      "', timestamp " + std::to_string(row.timestamp));
  }

  // Every run must carry the identical timestamp sequence.
  const auto& ref = by_run.begin()->second;
  for (const auto& [id, run] : by_run) {
    if (run.size() != ref.size())
      throw DataError("alignment error: run '" + id + "' has " +
                      std::to_string(run.size()) + " timestamps while run '" +
                      by_run.begin()->first + "' has " +
                      std::to_string(ref.size()));
    auto it = ref.begin();
    for (const auto& [ts, values] : run) {
      if (ts != it->first)
        throw DataError("alignment error: run '" + id +
                        "' timestamp set differs from run '" +
                        by_run.begin()->first + "'");
      ++it;
    }
  }

  // Order runs numerically when every id is an integer.
  std::vector<std::string> ids;
  ids.reserve(by_run.size());
  for (const auto& [id, run] : by_run) ids.push_back(id);
  bool all_numeric = true;
  std::vector<long long> numeric(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (!parse_int(ids[i], numeric[i])) {
      all_numeric = false;
      break;
    }
  if (all_numeric) {
    std::vector<std::size_t> order(ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return numeric[a] < numeric[b]; });
    std::vector<std::string> sorted;
    sorted.reserve(ids.size());
    for (auto i : order) sorted.push_back(ids[i]);
    ids = std::move(sorted);
  }

  RunDataset out;
  out.sensor_names = sensor_names;
  out.run_ids = ids;
  const auto n = static_cast<Index>(sensor_names.size());
  const auto t_count = static_cast<Index>(ref.size());
  for (const auto& id : ids) {
    Matrix m(n, t_count);
    Index col = 0;
    for (const auto& [ts, values] : by_run[id]) {
      for (Index s = 0; s < n; ++s) m(s, col) = values[static_cast<std::size_t>(s)];
      ++col;
    }
    out.runs.push_back(std::move(m));
  }
  return out;
}

std::pair<RunDataset, StandardizationStats> standardize(
    const RunDataset& data, const std::optional<StandardizationStats>& stats) {
  if (data.runs.empty()) throw DataError("standardize: empty dataset");
  const Index n = data.sensor_count();

  StandardizationStats st;
  if (stats) {
    st = *stats;
    if (st.mean.size() != n || st.stddev.size() != n)
      throw DataError("standardize: supplied stats do not match sensor count");
  } else {
    const Scalar total =
        static_cast<Scalar>(data.run_count() * data.time_count());
    Vector sum = Vector::Zero(n);
    Vector sum_sq = Vector::Zero(n);
    for (const auto& run : data.runs) {
      sum += run.rowwise().sum();
      sum_sq += run.array().square().matrix().rowwise().sum();
    }
    st.mean = sum / total;
    const Vector var = (sum_sq / total - st.mean.array().square().matrix()).cwiseMax(0.0);
    st.stddev = var.array().sqrt().max(kStddevFloor).matrix();
  }

  RunDataset out = data;
  for (auto& run : out.runs)
    run = (run.colwise() - st.mean).array().colwise() / st.stddev.array();
  return {std::move(out), std::move(st)};
}

std::vector<StackedWindow> stack_windows(const RunDataset& data, Index window_size) {
  const Index t_count = data.time_count();
  const Index n = data.sensor_count();
  if (window_size < 1 || window_size > t_count)
    throw ConfigError("window size " + std::to_string(window_size) +
                      " is outside 1.." + std::to_string(t_count));

  std::vector<StackedWindow> out;
  out.reserve(static_cast<std::size_t>(data.run_count() * (t_count - window_size + 1)));
  for (Index r = 0; r < data.run_count(); ++r) {
    const Matrix& run = data.runs[static_cast<std::size_t>(r)];
    for (Index t = window_size; t <= t_count; ++t) {
      StackedWindow w;
      w.values.resize(n * window_size);
      for (Index j = 0; j < window_size; ++j)
        w.values.segment(j * n, n) = run.col(t - window_size + j);
      w.end_time = t;
      w.run = r;
      out.push_back(std::move(w));
    }
  }
  return out;
}

}  // namespace causalrank
