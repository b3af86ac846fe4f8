#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "master/market_data/panel.hpp"
#include "master/market_data/synthetic.hpp"

namespace master::data {

enum class MissingPolicy { reject, forward_fill };

struct CsvLoadOptions {
  MissingPolicy missing = MissingPolicy::reject;
};

struct MarketData {
  Panel panel;
  IndexSeries index;
};

// Schema violation at a specific cell; what() names file, line and column.
class CsvError : public DataError {
 public:
  CsvError(const std::filesystem::path& file, std::size_t line, std::string_view column,
           const std::string& message);
};

// 17 significant digits in scientific notation; parses back exactly.
std::string format_decimal(double value);
double parse_decimal(std::string_view text);

// stocks.csv: date,stock_id,close,f_0,...,f_{F-1}
// index.csv:  date,index_id,price,volume
// Missing feature or close cells are empty or NA/NaN; policy decides.
MarketData load_csv(const std::filesystem::path& stocks_csv,
                    const std::filesystem::path& index_csv, const CsvLoadOptions& options = {});

void write_stocks_csv(const Panel& panel, const std::filesystem::path& path);
void write_index_csv(const IndexSeries& series, const std::filesystem::path& path);
// truth.csv: follower_id,leader_id,lag,weight
void write_truth_csv(const std::vector<LeadLagLink>& truth, const std::filesystem::path& path);
std::vector<LeadLagLink> read_truth_csv(const std::filesystem::path& path);

std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace master::data
