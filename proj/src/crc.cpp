#include "ssip/crc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "ssip/math_util.hpp"

namespace ssip {

namespace {

// combinations of {1..K} of size r, lexicographic
void for_each_combination(int K, int r, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> comb(r);
  for (int i = 0; i < r; ++i) comb[i] = i + 1;
  while (true) {
    fn(comb);
    int i = r - 1;
    while (i >= 0 && comb[i] == K - r + i + 1) --i;
    if (i < 0) break;
    ++comb[i];
    for (int j = i + 1; j < r; ++j) comb[j] = comb[j - 1] + 1;
  }
}

bool pattern_has_list(std::uint32_t pattern, int K, int list_1based) {
  return (pattern >> (K - list_1based)) & 1u;
}

// smallest integer y with mixture CDF >= q
double mixture_nb_quantile(const std::vector<double>& p0, double h, double q) {
  auto cdf = [&](double y) {
    double s = 0.0;
    for (double p : p0) s += nb_cdf(y, h, p);
    return s / static_cast<double>(p0.size());
  };
  double hi = 1.0;
  while (cdf(hi) < q) {
    hi *= 2.0;
    if (hi > 1e12) return hi;  // effectively unbounded; callers treat as infinite
  }
  double lo = 0.0;
  if (cdf(0.0) >= q) return 0.0;
  while (hi - lo > 0.5) {
    const double mid = std::floor(0.5 * (lo + hi));
    if (cdf(mid) >= q) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace

long CaptureTable::count(int region, int t, std::uint32_t pattern) const {
  if (pattern == 0 || pattern >= (1u << K)) throw std::out_of_range("CaptureTable: bad pattern");
  return counts[static_cast<std::size_t>(region) * T + t][pattern - 1];
}

long CaptureTable::stratum_total(int region, int t) const {
  const auto& row = counts[static_cast<std::size_t>(region) * T + t];
  long s = 0;
  for (long c : row) s += c;
  return s;
}

long CaptureTable::total() const {
  long s = 0;
  for (const auto& row : counts) {
    for (long c : row) s += c;
  }
  return s;
}

CaptureTable build_intersection_table(int K, int n_regions, int T,
                                      const std::vector<CaptureHistory>& histories) {
  if (K < 1 || K > 20) throw std::invalid_argument("build_intersection_table: need 1 <= K <= 20");
  if (n_regions < 1 || T < 1) throw std::invalid_argument("build_intersection_table: bad dimensions");
  CaptureTable table;
  table.K = K;
  table.n_regions = n_regions;
  table.T = T;
  table.counts.assign(static_cast<std::size_t>(n_regions) * T,
                      std::vector<long>((1u << K) - 1, 0));
  for (const auto& hh : histories) {
    if (hh.pattern == 0) {
      throw std::invalid_argument("build_intersection_table: all-zero capture pattern");
    }
    if (hh.pattern >= (1u << K)) {
      throw std::invalid_argument("build_intersection_table: pattern wider than K lists");
    }
    if (hh.region < 0 || hh.region >= n_regions || hh.time_idx < 0 || hh.time_idx >= T) {
      throw std::invalid_argument("build_intersection_table: region/time out of range");
    }
    ++table.counts[static_cast<std::size_t>(hh.region) * T + hh.time_idx][hh.pattern - 1];
  }
  return table;
}

CrcDesign build_design(int K, int max_order) {
  if (K < 1 || K > 20) throw std::invalid_argument("build_design: need 1 <= K <= 20");
  if (max_order < 1 || max_order > K) throw std::invalid_argument("build_design: need 1 <= max_order <= K");

  CrcDesign design;
  design.K = K;
  design.max_order = max_order;

  design.column_members.push_back({});
  design.column_names.push_back("intercept");
  for (int r = 1; r <= max_order; ++r) {
    for_each_combination(K, r, [&](const std::vector<int>& comb) {
      design.column_members.push_back(comb);
      std::string name;
      for (std::size_t s = 0; s < comb.size(); ++s) {
        if (s) name += ":";
        name += "L" + std::to_string(comb[s]);
      }
      design.column_names.push_back(name);
    });
  }

  const int rows = (1 << K) - 1;
  const int cols = static_cast<int>(design.column_members.size());
  design.X.resize(rows, cols);
  for (int code = 1; code <= rows; ++code) {
    for (int c = 0; c < cols; ++c) {
      double v = 1.0;
      for (int list : design.column_members[static_cast<std::size_t>(c)]) {
        if (!pattern_has_list(static_cast<std::uint32_t>(code), K, list)) {
          v = 0.0;
          break;
        }
      }
      design.X(code - 1, c) = v;
    }
  }

  design.forced = Eigen::ArrayXi::Zero(cols);
  for (int c = 0; c < cols; ++c) {
    if (design.column_members[static_cast<std::size_t>(c)].size() <= 1) design.forced(c) = 1;
  }
  return design;
}

std::vector<NbRegionData> crc_region_data(const CaptureTable& table, const CrcDesign& design) {
  if (design.K != table.K) throw std::invalid_argument("crc_region_data: design/table K mismatch");
  const int rows_per_t = design.n_rows();
  const int m = rows_per_t * table.T;
  std::vector<NbRegionData> regions(static_cast<std::size_t>(table.n_regions));
  for (int i = 0; i < table.n_regions; ++i) {
    auto& r = regions[static_cast<std::size_t>(i)];
    r.X.resize(m, design.n_cols());
    r.y.resize(m);
    r.time_idx.resize(m);
    int row = 0;
    for (int t = 0; t < table.T; ++t) {
      for (int code = 1; code <= rows_per_t; ++code, ++row) {
        r.X.row(row) = design.X.row(code - 1);
        r.y(row) = static_cast<double>(table.count(i, t, static_cast<std::uint32_t>(code)));
        r.time_idx(row) = t;
      }
    }
  }
  return regions;
}

UnseenEstimate estimate_unseen(const PosteriorChain& chain, const CrcDesign& design, int region,
                               int time_idx) {
  if (region < 0 || region >= chain.n_regions) {
    throw std::out_of_range("estimate_unseen: region not present in chain");
  }
  if (time_idx < 0 || time_idx >= chain.T) {
    throw std::out_of_range("estimate_unseen: time not present in chain");
  }
  int intercept_col = -1;
  for (std::size_t c = 0; c < design.column_members.size(); ++c) {
    if (design.column_members[c].empty()) {
      intercept_col = static_cast<int>(c);
      break;
    }
  }
  const std::vector<double> psi0 = chain.collect_zero_cell_psi(region, time_idx, intercept_col);
  if (psi0.empty()) throw std::runtime_error("estimate_unseen: chain has no draws");

  std::vector<double> p0(psi0.size());
  double mean_count = 0.0;
  double mean_psi = 0.0;
  for (std::size_t d = 0; d < psi0.size(); ++d) {
    p0[d] = sigmoid(psi0[d]);
    mean_count += chain.h * std::exp(psi0[d]);
    mean_psi += psi0[d];
  }
  mean_count /= static_cast<double>(psi0.size());
  mean_psi /= static_cast<double>(psi0.size());

  UnseenEstimate est;
  est.mean = mean_count;
  est.median = mixture_nb_quantile(p0, chain.h, 0.5);
  est.lo95 = mixture_nb_quantile(p0, chain.h, 0.025);
  est.hi95 = mixture_nb_quantile(p0, chain.h, 0.975);
  est.plugin = chain.h * std::exp(mean_psi);
  return est;
}

UnseenEstimate estimate_unseen_group(const PosteriorChain& chain, const CrcDesign& design,
                                     const std::vector<int>& regions, int time_idx, Rng& rng) {
  if (regions.empty()) throw std::invalid_argument("estimate_unseen_group: empty group");
  int intercept_col = -1;
  for (std::size_t c = 0; c < design.column_members.size(); ++c) {
    if (design.column_members[c].empty()) {
      intercept_col = static_cast<int>(c);
      break;
    }
  }
  std::vector<std::vector<double>> psi;
  psi.reserve(regions.size());
  for (int r : regions) psi.push_back(chain.collect_zero_cell_psi(r, time_idx, intercept_col));
  const std::size_t n_draws = psi.front().size();

  std::vector<double> sums(n_draws, 0.0);
  double mean_count = 0.0;
  for (std::size_t d = 0; d < n_draws; ++d) {
    double s = 0.0;
    for (std::size_t g = 0; g < regions.size(); ++g) {
      const double p = sigmoid(psi[g][d]);
      s += static_cast<double>(rng.neg_binomial(chain.h, p));
      mean_count += chain.h * std::exp(psi[g][d]);
    }
    sums[d] = s;
  }
  mean_count /= static_cast<double>(n_draws);

  UnseenEstimate est;
  est.mean = mean_count;
  est.median = quantile(sums, 0.5);
  est.lo95 = quantile(sums, 0.025);
  est.hi95 = quantile(sums, 0.975);
  est.plugin = mean_count;
  return est;
}

CrcEval evaluate_crc(const std::vector<UnseenEstimate>& estimates, const std::vector<double>& truth) {
  if (estimates.size() != truth.size()) throw std::invalid_argument("evaluate_crc: length mismatch");
  if (estimates.empty()) throw std::invalid_argument("evaluate_crc: no strata");
  const std::size_t n = estimates.size();
  std::vector<double> medians(n);
  long covered = 0;
  double sq = 0.0, abs_diff = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    medians[s] = estimates[s].median;
    if (truth[s] >= estimates[s].lo95 && truth[s] <= estimates[s].hi95) ++covered;
    sq += (medians[s] - truth[s]) * (medians[s] - truth[s]);
    abs_diff += std::fabs(medians[s] - truth[s]);
  }
  CrcEval eval;
  eval.coverage = static_cast<double>(covered) / static_cast<double>(n);
  eval.rmse = std::sqrt(sq / static_cast<double>(n));
  eval.mean_median_abs_diff = abs_diff / static_cast<double>(n);
  eval.correlation = pearson(truth, medians);  // NaN sentinel for constant truth
  return eval;
}

}  // namespace ssip
