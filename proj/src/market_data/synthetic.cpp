#include "master/market_data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "master/numerics/random.hpp"

namespace master::data {

namespace {

// Howard Hinnant's days_from_civil inverse.
void civil_from_days(long z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y = static_cast<int>(yoe) + static_cast<int>(era) * 400 + (m <= 2);
}

void validate(const SyntheticConfig& c) {
  if (c.num_stocks < 2) throw DataError("synthetic: need at least 2 stocks");
  if (c.num_features < 3) throw DataError("synthetic: need at least 3 features");
  if (c.num_days <= c.history_days + c.lag) {
    throw DataError("synthetic: " + std::to_string(c.num_days) +
                    " days do not exceed the history requirement of " +
                    std::to_string(c.history_days + c.lag));
  }
  if (c.lag < 1 || c.lag >= c.lookback) {
    throw DataError("synthetic: lag must satisfy 1 <= lag < lookback");
  }
  if (!(c.leader_fraction > 0.0 && c.leader_fraction < 1.0)) {
    throw DataError("synthetic: leader_fraction must be in (0, 1)");
  }
  if (!(c.signal_strength >= 0.0 && c.signal_strength <= 1.0)) {
    throw DataError("synthetic: signal_strength must be in [0, 1]");
  }
  if (!(std::abs(c.leader_autocorrelation) < 1.0)) {
    throw DataError("synthetic: leader_autocorrelation must be in (-1, 1)");
  }
  if (!(c.volatility > 0.0) || c.market_volatility < 0.0) {
    throw DataError("synthetic: volatilities must be non-negative (idiosyncratic > 0)");
  }
  if (c.num_indices == 0 || c.num_indices > c.num_stocks) {
    throw DataError("synthetic: num_indices must be in [1, num_stocks]");
  }
}

}  // namespace

std::vector<std::string> business_days(std::size_t count) {
  std::vector<std::string> out;
  out.reserve(count);
  long day = 18262;  // 2020-01-01, a Wednesday
  while (out.size() < count) {
    const long weekday = (day + 4) % 7;  // 0 = Sunday
    if (weekday != 0 && weekday != 6) {
      int y = 0;
      unsigned m = 0;
      unsigned d = 0;
      civil_from_days(day, y, m, d);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
      out.emplace_back(buf);
    }
    ++day;
  }
  return out;
}

SyntheticMarket generate_synthetic(const SyntheticConfig& c) {
  validate(c);
  Rng rng(c.seed);
  const std::size_t m = c.num_stocks;
  const std::size_t n = c.num_days;
  const std::size_t f = c.num_features;
  const auto leaders = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(c.leader_fraction * static_cast<double>(m))), 1, m - 1);

  SyntheticMarket market;
  Panel& panel = market.panel;
  panel.dates = business_days(n);
  panel.num_features = f;
  for (std::size_t u = 0; u < m; ++u) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "S%03zu", u);
    panel.stocks.emplace_back(buf);
  }
  panel.resize_storage();

  std::vector<std::size_t> leader_of(m);
  for (std::size_t u = 0; u < m; ++u) leader_of[u] = u < leaders ? u : (u - leaders) % leaders;

  const std::size_t sig_dim = f - 2;
  std::vector<double> signature(leaders * sig_dim);
  for (auto& v : signature) v = rng.normal();
  std::vector<double> start_price(m);
  std::vector<double> base_volume(m);
  for (std::size_t u = 0; u < m; ++u) {
    start_price[u] = std::exp(0.2 * rng.normal());
    base_volume[u] = 0.05 * std::exp(0.2 * rng.normal());
  }

  // Leader shocks carry `lag` burn-in days so followers have a source on day 0.
  const std::size_t burn = c.lag;
  const double phi = c.leader_autocorrelation;
  const double innovation_scale = std::sqrt(1.0 - phi * phi);
  std::vector<double> leader_shock((n + burn) * leaders);
  for (std::size_t v = 0; v < leaders; ++v) leader_shock[v] = rng.normal();
  for (std::size_t t = 1; t < n + burn; ++t)
    for (std::size_t v = 0; v < leaders; ++v)
      leader_shock[t * leaders + v] =
          phi * leader_shock[(t - 1) * leaders + v] + innovation_scale * rng.normal();

  const double w = c.signal_strength;
  const double noise_scale = std::sqrt(1.0 - w * w);
  std::vector<double> prev_close = start_price;
  std::vector<double> volume(n * m);
  for (std::size_t t = 0; t < n; ++t) {
    const double market_shock = rng.normal();
    for (std::size_t u = 0; u < m; ++u) {
      const std::size_t lead = leader_of[u];
      const double shock = u < leaders
                               ? leader_shock[(t + burn) * leaders + lead]
                               : w * leader_shock[(t + burn - c.lag) * leaders + lead] +
                                     noise_scale * rng.normal();
      const double ret = c.volatility * shock + c.market_volatility * market_shock;
      const double close = prev_close[u] * (1.0 + ret);
      prev_close[u] = close;
      panel.close(t, u) = close;
      panel.feature(t, u, 0) = ret / c.volatility;
      panel.feature(t, u, 1) = u < leaders ? 1.0 : -1.0;
      for (std::size_t k = 0; k < sig_dim; ++k)
        panel.feature(t, u, 2 + k) = signature[lead * sig_dim + k] + 0.1 * rng.normal();
      volume[t * m + u] = base_volume[u] * (1.0 + std::abs(shock)) * std::exp(0.1 * rng.normal());
    }
  }
  panel.validate();

  IndexSeries& index = market.index;
  index.dates = panel.dates;
  for (std::size_t k = 0; k < c.num_indices; ++k) index.indices.push_back("IDX" + std::to_string(k));
  index.prices.assign(n * c.num_indices, 0.0);
  index.volumes.assign(n * c.num_indices, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 0; k < c.num_indices; ++k) {
      double price = 0.0;
      double vol = 0.0;
      std::size_t count = 0;
      for (std::size_t u = k; u < m; u += c.num_indices) {
        price += panel.close(t, u);
        vol += volume[t * m + u];
        ++count;
      }
      index.prices[t * c.num_indices + k] = price / static_cast<double>(count);
      index.volumes[t * c.num_indices + k] = vol;
    }
  }
  index.validate();

  for (std::size_t u = leaders; u < m; ++u) {
    market.truth.push_back({panel.stocks[u], panel.stocks[leader_of[u]], c.lag, w});
  }
  return market;
}

}  // namespace master::data
