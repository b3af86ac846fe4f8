#include "master/market_data/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <unordered_map>

#include "master/market_data/windows.hpp"

namespace master::data {

namespace {

struct RawRow {
  std::string date;
  std::string id;
  std::size_t line = 0;
  std::vector<std::optional<double>> values;
};

bool is_missing(std::string_view cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "na";
}

bool is_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (s[i] < '0' || s[i] > '9') return false;
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

// Parses rows of `<date>,<id>,<value columns...>`.
std::vector<RawRow> parse_rows(const std::filesystem::path& path,
                               const std::vector<std::string>& lines,
                               const std::vector<std::string>& header) {
  std::vector<RawRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t line_no = i + 1;
    auto cells = split_csv_line(lines[i]);
    if (cells.size() != header.size()) {
      throw CsvError(path, line_no, cells.size() < header.size() ? header[cells.size()] : "<extra>",
                     "expected " + std::to_string(header.size()) + " fields, got " +
                         std::to_string(cells.size()));
    }
    if (!is_iso_date(cells[0])) {
      throw CsvError(path, line_no, header[0], "'" + cells[0] + "' is not an ISO-8601 date");
    }
    if (cells[1].empty()) throw CsvError(path, line_no, header[1], "empty identifier");
    RawRow row{cells[0], cells[1], line_no, {}};
    for (std::size_t c = 2; c < cells.size(); ++c) {
      if (is_missing(cells[c])) {
        row.values.emplace_back(std::nullopt);
        continue;
      }
      double v = 0.0;
      try {
        v = parse_decimal(cells[c]);
      } catch (const DataError& e) {
        throw CsvError(path, line_no, header[c], e.what());
      }
      if (!std::isfinite(v)) throw CsvError(path, line_no, header[c], "non-finite value");
      row.values.emplace_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path.string() + ": no data rows");
  return rows;
}

// Arranges rows on a dense date x id grid; rows[grid[d * ids + s]].
struct Grid {
  std::vector<std::string> dates;
  std::vector<std::string> ids;
  std::vector<const RawRow*> cells;
};

Grid arrange(const std::filesystem::path& path, const std::vector<RawRow>& rows,
             const char* id_name) {
  Grid grid;
  std::unordered_map<std::string, std::size_t> id_pos;
  for (const auto& r : rows) {
    if (id_pos.emplace(r.id, grid.ids.size()).second) grid.ids.push_back(r.id);
    grid.dates.push_back(r.date);
  }
  std::sort(grid.dates.begin(), grid.dates.end());
  grid.dates.erase(std::unique(grid.dates.begin(), grid.dates.end()), grid.dates.end());
  std::unordered_map<std::string, std::size_t> date_pos;
  for (std::size_t d = 0; d < grid.dates.size(); ++d) date_pos[grid.dates[d]] = d;
  grid.cells.assign(grid.dates.size() * grid.ids.size(), nullptr);
  for (const auto& r : rows) {
    auto& slot = grid.cells[date_pos[r.date] * grid.ids.size() + id_pos[r.id]];
    if (slot) {
      throw CsvError(path, r.line, id_name,
                     "duplicate row for " + r.id + " on " + r.date + " (first at line " +
                         std::to_string(slot->line) + ")");
    }
    slot = &r;
  }
  for (std::size_t d = 0; d < grid.dates.size(); ++d)
    for (std::size_t s = 0; s < grid.ids.size(); ++s)
      if (!grid.cells[d * grid.ids.size() + s]) {
        throw DataError("calendar misalignment in " + path.string() + ": " + grid.ids[s] +
                        " has no row for " + grid.dates[d]);
      }
  return grid;
}

// Value at grid cell (d, s), column `col` of the value block, honoring the
// missing-data policy.
double resolve(const std::filesystem::path& path, const Grid& grid,
               const std::vector<std::string>& header, std::size_t d, std::size_t s,
               std::size_t col, MissingPolicy policy) {
  const RawRow* row = grid.cells[d * grid.ids.size() + s];
  if (row->values[col]) return *row->values[col];
  if (policy == MissingPolicy::reject) {
    throw CsvError(path, row->line, header[col + 2], "missing value (policy: reject)");
  }
  for (std::size_t back = d; back-- > 0;) {
    const RawRow* prev = grid.cells[back * grid.ids.size() + s];
    if (prev->values[col]) return *prev->values[col];
  }
  throw CsvError(path, row->line, header[col + 2],
                 "missing value with no earlier observation to forward-fill");
}

}  // namespace

CsvError::CsvError(const std::filesystem::path& file, std::size_t line, std::string_view column,
                   const std::string& message)
    : DataError(file.string() + ":" + std::to_string(line) + ": column '" + std::string(column) +
                "': " + message) {}

std::string format_decimal(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific, 16);
  if (ec != std::errc()) throw DataError("cannot format value");
  return std::string(buf, end);
}

double parse_decimal(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw DataError("'" + std::string(text) + "' is not a decimal number");
  }
  return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto cell = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
    while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
    cells.emplace_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

MarketData load_csv(const std::filesystem::path& stocks_csv,
                    const std::filesystem::path& index_csv, const CsvLoadOptions& options) {
  MarketData data;

  const auto stock_lines = read_lines(stocks_csv);
  if (stock_lines.empty()) throw DataError(stocks_csv.string() + ": empty file");
  const auto header = split_csv_line(stock_lines[0]);
  if (header.size() < 4 || header[0] != "date" || header[1] != "stock_id" || header[2] != "close") {
    throw CsvError(stocks_csv, 1, header.empty() ? "" : header[0],
                   "header must be date,stock_id,close,f_0,...,f_{F-1}");
  }
  for (std::size_t c = 3; c < header.size(); ++c) {
    if (header[c] != "f_" + std::to_string(c - 3)) {
      throw CsvError(stocks_csv, 1, header[c],
                     "expected feature column f_" + std::to_string(c - 3));
    }
  }
  const auto rows = parse_rows(stocks_csv, stock_lines, header);
  const auto grid = arrange(stocks_csv, rows, "stock_id");

  Panel& panel = data.panel;
  panel.dates = grid.dates;
  panel.stocks = grid.ids;
  panel.num_features = header.size() - 3;
  panel.resize_storage();
  for (std::size_t d = 0; d < grid.dates.size(); ++d) {
    for (std::size_t s = 0; s < grid.ids.size(); ++s) {
      const double close = resolve(stocks_csv, grid, header, d, s, 0, options.missing);
      if (close <= 0.0) {
        throw CsvError(stocks_csv, grid.cells[d * grid.ids.size() + s]->line, "close",
                       "close must be positive, got " + format_decimal(close));
      }
      panel.close(d, s) = close;
      for (std::size_t k = 0; k < panel.num_features; ++k)
        panel.feature(d, s, k) = resolve(stocks_csv, grid, header, d, s, k + 1, options.missing);
    }
  }
  panel.validate();

  const auto index_lines = read_lines(index_csv);
  if (index_lines.empty()) throw DataError(index_csv.string() + ": empty file");
  const auto iheader = split_csv_line(index_lines[0]);
  const std::vector<std::string> expected{"date", "index_id", "price", "volume"};
  if (iheader != expected) {
    throw CsvError(index_csv, 1, iheader.empty() ? "" : iheader[0],
                   "header must be date,index_id,price,volume");
  }
  const auto irows = parse_rows(index_csv, index_lines, iheader);
  const auto igrid = arrange(index_csv, irows, "index_id");
  IndexSeries& series = data.index;
  series.dates = igrid.dates;
  series.indices = igrid.ids;
  series.prices.resize(igrid.dates.size() * igrid.ids.size());
  series.volumes.resize(igrid.dates.size() * igrid.ids.size());
  for (std::size_t d = 0; d < igrid.dates.size(); ++d) {
    for (std::size_t s = 0; s < igrid.ids.size(); ++s) {
      const std::size_t line = igrid.cells[d * igrid.ids.size() + s]->line;
      const double price = resolve(index_csv, igrid, iheader, d, s, 0, options.missing);
      const double volume = resolve(index_csv, igrid, iheader, d, s, 1, options.missing);
      if (price <= 0.0) throw CsvError(index_csv, line, "price", "price must be positive");
      if (volume < 0.0) throw CsvError(index_csv, line, "volume", "volume must be non-negative");
      series.prices[d * igrid.ids.size() + s] = price;
      series.volumes[d * igrid.ids.size() + s] = volume;
    }
  }
  series.validate();
  align_calendars(panel, series);
  return data;
}

void write_stocks_csv(const Panel& panel, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "date,stock_id,close";
  for (std::size_t k = 0; k < panel.num_features; ++k) out << ",f_" << k;
  out << '\n';
  for (std::size_t d = 0; d < panel.num_dates(); ++d) {
    for (std::size_t s = 0; s < panel.num_stocks(); ++s) {
      out << panel.dates[d] << ',' << panel.stocks[s] << ',' << format_decimal(panel.close(d, s));
      for (std::size_t k = 0; k < panel.num_features; ++k)
        out << ',' << format_decimal(panel.feature(d, s, k));
      out << '\n';
    }
  }
  if (!out) throw DataError("write failed: " + path.string());
}

void write_index_csv(const IndexSeries& series, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "date,index_id,price,volume\n";
  for (std::size_t d = 0; d < series.num_dates(); ++d)
    for (std::size_t i = 0; i < series.num_indices(); ++i)
      out << series.dates[d] << ',' << series.indices[i] << ','
          << format_decimal(series.price(d, i)) << ',' << format_decimal(series.volume(d, i))
          << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

void write_truth_csv(const std::vector<LeadLagLink>& truth, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "follower_id,leader_id,lag,weight\n";
  for (const auto& link : truth)
    out << link.follower << ',' << link.leader << ',' << link.lag << ','
        << format_decimal(link.weight) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<LeadLagLink> read_truth_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != "follower_id,leader_id,lag,weight") {
    throw CsvError(path, 1, "", "header must be follower_id,leader_id,lag,weight");
  }
  std::vector<LeadLagLink> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cells = split_csv_line(lines[i]);
    if (cells.size() != 4) throw CsvError(path, i + 1, "", "expected 4 fields");
    LeadLagLink link{cells[0], cells[1], 0, 0.0};
    const double lag = parse_decimal(cells[2]);
    if (lag < 0.0 || lag != std::floor(lag)) throw CsvError(path, i + 1, "lag", "not a count");
    link.lag = static_cast<std::size_t>(lag);
    link.weight = parse_decimal(cells[3]);
    out.push_back(std::move(link));
  }
  return out;
}

}  // namespace master::data
