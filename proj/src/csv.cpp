#include "ssip/csv.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "ssip/math_util.hpp"

namespace ssip {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool is_integer(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("cannot parse " + what + " value '" + s + "'");
  }
}

long parse_long(const std::string& s, const std::string& what) {
  if (!is_integer(s)) throw std::runtime_error("cannot parse " + what + " value '" + s + "'");
  return std::stol(s);
}

// Build the label mapping implied by a data column: integer ids index
// directly, otherwise sorted unique names.
RegionLabels labels_from_ids(const std::vector<std::string>& ids, int n_regions) {
  bool all_int = true;
  for (const auto& id : ids) {
    if (!is_integer(id)) {
      all_int = false;
      break;
    }
  }
  RegionLabels labels;
  if (all_int) {
    labels = RegionLabels::identity(n_regions);
    return labels;
  }
  std::set<std::string> unique(ids.begin(), ids.end());
  if (static_cast<int>(unique.size()) > n_regions) {
    throw std::runtime_error("more distinct region ids than graph regions");
  }
  labels.names.assign(unique.begin(), unique.end());
  while (static_cast<int>(labels.names.size()) < n_regions) {
    labels.names.push_back("region" + std::to_string(labels.names.size()));
  }
  return labels;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

RegionLabels RegionLabels::identity(int n) {
  RegionLabels labels;
  labels.names.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) labels.names.push_back(std::to_string(i));
  return labels;
}

RegionLabels RegionLabels::from_file(const std::string& path, int n_regions) {
  const CsvTable table = read_csv(path);
  const int name_col = table.column("region_id");
  const int idx_col = table.column("index");
  if (name_col < 0 || idx_col < 0) {
    throw std::runtime_error(path + ": labels file needs region_id and index columns");
  }
  RegionLabels labels;
  labels.names.assign(static_cast<std::size_t>(n_regions), "");
  for (const auto& row : table.rows) {
    const long idx = parse_long(row[static_cast<std::size_t>(idx_col)], "index");
    if (idx < 0 || idx >= n_regions) throw std::runtime_error(path + ": label index out of range");
    labels.names[static_cast<std::size_t>(idx)] = row[static_cast<std::size_t>(name_col)];
  }
  for (std::size_t i = 0; i < labels.names.size(); ++i) {
    if (labels.names[i].empty()) {
      throw std::runtime_error(path + ": no label for region index " + std::to_string(i));
    }
  }
  return labels;
}

int RegionLabels::resolve(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  if (is_integer(name)) {
    const long v = std::stol(name);
    if (v >= 0 && v < static_cast<long>(names.size())) return static_cast<int>(v);
  }
  throw std::runtime_error("unknown region id '" + name + "'");
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return static_cast<int>(c);
  }
  return -1;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable table;
  std::string line;
  while (true) {
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file (header row is mandatory)");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    break;
  }
  table.header = split_line(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    auto fields = split_line(line);
    if (fields.size() != table.header.size()) {
      throw std::runtime_error(path + ": row with " + std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

GaussianCsv load_gaussian_csv(const std::string& path, int n_regions, const RegionLabels* labels,
                              bool add_intercept) {
  const CsvTable table = read_csv(path);
  const int id_col = table.column("region_id");
  const int y_col = table.column("y");
  if (id_col < 0 || y_col < 0) throw std::runtime_error(path + ": need region_id and y columns");
  std::vector<int> x_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c].size() >= 2 && table.header[c][0] == 'x') x_cols.push_back(static_cast<int>(c));
  }
  if (table.rows.empty()) throw std::runtime_error(path + ": no data rows");

  GaussianCsv out;
  out.p_covariates = static_cast<int>(x_cols.size());
  if (labels) {
    out.labels = *labels;
  } else {
    std::vector<std::string> ids;
    for (const auto& row : table.rows) ids.push_back(row[static_cast<std::size_t>(id_col)]);
    out.labels = labels_from_ids(ids, n_regions);
  }

  const int p = out.p_covariates + (add_intercept ? 1 : 0);
  std::vector<std::vector<double>> ys(static_cast<std::size_t>(n_regions));
  std::vector<std::vector<double>> xs(static_cast<std::size_t>(n_regions));
  for (const auto& row : table.rows) {
    const int i = out.labels.resolve(row[static_cast<std::size_t>(id_col)]);
    ys[static_cast<std::size_t>(i)].push_back(parse_double(row[static_cast<std::size_t>(y_col)], "y"));
    if (add_intercept) xs[static_cast<std::size_t>(i)].push_back(1.0);
    for (int c : x_cols) {
      xs[static_cast<std::size_t>(i)].push_back(parse_double(row[static_cast<std::size_t>(c)], "x"));
    }
  }
  out.regions.resize(static_cast<std::size_t>(n_regions));
  for (int i = 0; i < n_regions; ++i) {
    const auto& yv = ys[static_cast<std::size_t>(i)];
    if (yv.empty()) {
      throw std::runtime_error(path + ": region '" + out.labels.label(i) + "' has no observations");
    }
    auto& r = out.regions[static_cast<std::size_t>(i)];
    const int m = static_cast<int>(yv.size());
    r.y = Eigen::Map<const Eigen::VectorXd>(yv.data(), m);
    r.X = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        xs[static_cast<std::size_t>(i)].data(), m, p);
  }
  return out;
}

NbCsv load_nb_csv(const std::string& path, int n_regions, const RegionLabels* labels, bool add_intercept) {
  const CsvTable table = read_csv(path);
  const int id_col = table.column("region_id");
  const int y_col = table.column("y");
  const int t_col = table.column("time");
  if (id_col < 0 || y_col < 0) throw std::runtime_error(path + ": need region_id and y columns");
  std::vector<int> x_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c].size() >= 2 && table.header[c][0] == 'x') x_cols.push_back(static_cast<int>(c));
  }
  if (table.rows.empty()) throw std::runtime_error(path + ": no data rows");

  NbCsv out;
  out.p_covariates = static_cast<int>(x_cols.size());
  if (labels) {
    out.labels = *labels;
  } else {
    std::vector<std::string> ids;
    for (const auto& row : table.rows) ids.push_back(row[static_cast<std::size_t>(id_col)]);
    out.labels = labels_from_ids(ids, n_regions);
  }

  std::set<long> tset;
  if (t_col >= 0) {
    for (const auto& row : table.rows) tset.insert(parse_long(row[static_cast<std::size_t>(t_col)], "time"));
  } else {
    tset.insert(0);
  }
  out.time_values.assign(tset.begin(), tset.end());
  auto t_index = [&](long v) {
    return static_cast<int>(std::lower_bound(out.time_values.begin(), out.time_values.end(), v) -
                            out.time_values.begin());
  };

  const int p = out.p_covariates + (add_intercept ? 1 : 0);
  std::vector<std::vector<double>> ys(static_cast<std::size_t>(n_regions));
  std::vector<std::vector<double>> xs(static_cast<std::size_t>(n_regions));
  std::vector<std::vector<int>> ts(static_cast<std::size_t>(n_regions));
  for (const auto& row : table.rows) {
    const int i = out.labels.resolve(row[static_cast<std::size_t>(id_col)]);
    const double y = parse_double(row[static_cast<std::size_t>(y_col)], "y");
    if (y < 0 || y != std::floor(y)) {
      throw std::runtime_error(path + ": counts must be nonnegative integers, got '" +
                               row[static_cast<std::size_t>(y_col)] + "'");
    }
    ys[static_cast<std::size_t>(i)].push_back(y);
    ts[static_cast<std::size_t>(i)].push_back(
        t_col >= 0 ? t_index(parse_long(row[static_cast<std::size_t>(t_col)], "time")) : 0);
    if (add_intercept) xs[static_cast<std::size_t>(i)].push_back(1.0);
    for (int c : x_cols) {
      xs[static_cast<std::size_t>(i)].push_back(parse_double(row[static_cast<std::size_t>(c)], "x"));
    }
  }
  out.regions.resize(static_cast<std::size_t>(n_regions));
  for (int i = 0; i < n_regions; ++i) {
    const auto& yv = ys[static_cast<std::size_t>(i)];
    if (yv.empty()) {
      throw std::runtime_error(path + ": region '" + out.labels.label(i) + "' has no observations");
    }
    auto& r = out.regions[static_cast<std::size_t>(i)];
    const int m = static_cast<int>(yv.size());
    r.y = Eigen::Map<const Eigen::VectorXd>(yv.data(), m);
    r.X = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        xs[static_cast<std::size_t>(i)].data(), m, p);
    r.time_idx = Eigen::Map<const Eigen::ArrayXi>(ts[static_cast<std::size_t>(i)].data(), m);
  }
  return out;
}

CaptureCsv load_capture_csv(const std::string& path, int n_regions, const RegionLabels* labels) {
  const CsvTable table = read_csv(path);
  const int id_col = table.column("region_id");
  const int pat_col = table.column("pattern");
  const int t_col = table.column("time");
  if (id_col < 0 || pat_col < 0) throw std::runtime_error(path + ": need region_id and pattern columns");
  if (table.rows.empty()) throw std::runtime_error(path + ": no data rows");

  CaptureCsv out;
  if (labels) {
    out.labels = *labels;
  } else {
    std::vector<std::string> ids;
    for (const auto& row : table.rows) ids.push_back(row[static_cast<std::size_t>(id_col)]);
    out.labels = labels_from_ids(ids, n_regions);
  }

  std::set<long> tset;
  if (t_col >= 0) {
    for (const auto& row : table.rows) tset.insert(parse_long(row[static_cast<std::size_t>(t_col)], "time"));
  } else {
    tset.insert(0);
  }
  out.time_values.assign(tset.begin(), tset.end());
  auto t_index = [&](long v) {
    return static_cast<int>(std::lower_bound(out.time_values.begin(), out.time_values.end(), v) -
                            out.time_values.begin());
  };

  out.K = static_cast<int>(table.rows.front()[static_cast<std::size_t>(pat_col)].size());
  for (const auto& row : table.rows) {
    const std::string& pat = row[static_cast<std::size_t>(pat_col)];
    if (static_cast<int>(pat.size()) != out.K) {
      throw std::runtime_error(path + ": inconsistent pattern width (K) across rows");
    }
    std::uint32_t code = 0;
    for (char ch : pat) {
      if (ch != '0' && ch != '1') throw std::runtime_error(path + ": pattern must be a 0/1 string");
      code = (code << 1) | static_cast<std::uint32_t>(ch - '0');
    }
    CaptureHistory hh;
    hh.region = out.labels.resolve(row[static_cast<std::size_t>(id_col)]);
    hh.time_idx = t_col >= 0 ? t_index(parse_long(row[static_cast<std::size_t>(t_col)], "time")) : 0;
    hh.pattern = code;
    out.histories.push_back(hh);
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_region_labels(const std::string& path, const RegionLabels& labels,
                         const std::string& config_hash) {
  auto out = open_out(path);
  if (!config_hash.empty()) out << "# config=" << config_hash << "\n";
  out << "region_id,index\n";
  for (int i = 0; i < labels.size(); ++i) out << labels.label(i) << "," << i << "\n";
}

void write_fit_summary(const std::string& path, const PosteriorChain& chain, const RegionLabels& labels) {
  auto out = open_out(path);
  if (!chain.config_digest.empty()) out << "# config=" << chain.config_digest << "\n";
  out << "region_id,covariate,incl_prob,beta_mean,beta_lo025,beta_hi975\n";
  for (int i = 0; i < chain.n_regions; ++i) {
    for (int j = 0; j < chain.p; ++j) {
      out << labels.label(i) << ",x" << j << "," << format_double(chain.inclusion_prob(i, j)) << ","
          << format_double(chain.beta_mean(i, j)) << ","
          << format_double(chain.beta_quantile_value(i, j, 0.025)) << ","
          << format_double(chain.beta_quantile_value(i, j, 0.975)) << "\n";
    }
  }
}

void write_inclusion_matrix(const std::string& path, const PosteriorChain& chain,
                            const RegionLabels& labels) {
  auto out = open_out(path);
  if (!chain.config_digest.empty()) out << "# config=" << chain.config_digest << "\n";
  out << "region_id";
  for (int j = 0; j < chain.p; ++j) out << ",x" << j;
  out << "\n";
  for (int i = 0; i < chain.n_regions; ++i) {
    out << labels.label(i);
    for (int j = 0; j < chain.p; ++j) out << "," << format_double(chain.inclusion_prob(i, j));
    out << "\n";
  }
}

void write_chain_dump(const std::string& path, const PosteriorChain& chain) {
  auto out = open_out(path);
  if (!chain.config_digest.empty()) out << "# config=" << chain.config_digest << "\n";
  out << "chain,draw,quantity,i,j,value\n";
  for (std::size_t c = 0; c < chain.chains.size(); ++c) {
    const auto& d = chain.chains[c];
    for (long k = 0; k < d.n_draws; ++k) {
      for (int i = 0; i < d.n; ++i) {
        for (int j = 0; j < d.p; ++j) {
          out << c << "," << k << ",beta," << i << "," << j << "," << format_double(d.beta_at(k, i, j))
              << "\n";
          out << c << "," << k << ",gamma," << i << "," << j << "," << d.gamma_at(k, i, j) << "\n";
          out << c << "," << k << ",z," << i << "," << j << "," << format_double(d.z_at(k, i, j)) << "\n";
        }
      }
      for (int i = 0; i < d.n; ++i) {
        out << c << "," << k << ",scale," << i << ",0,"
            << format_double(d.scale[static_cast<std::size_t>(k) * d.n + i]) << "\n";
      }
      for (int j = 0; j < d.p; ++j) {
        out << c << "," << k << ",mu,0," << j << ","
            << format_double(d.mu[static_cast<std::size_t>(k) * d.p + j]) << "\n";
        out << c << "," << k << ",tau2,0," << j << ","
            << format_double(d.tau2[static_cast<std::size_t>(k) * d.p + j]) << "\n";
      }
      out << c << "," << k << ",rho,0,0," << format_double(d.rho[static_cast<std::size_t>(k)]) << "\n";
      if (!d.alpha.empty()) {
        for (int i = 0; i < d.n; ++i) {
          out << c << "," << k << ",alpha," << i << ",0,"
              << format_double(d.alpha[static_cast<std::size_t>(k) * d.n + i]) << "\n";
        }
      }
      if (!d.zeta.empty()) {
        for (int t = 0; t < d.T; ++t) {
          out << c << "," << k << ",zeta," << t << ",0,"
              << format_double(d.zeta[static_cast<std::size_t>(k) * d.T + t]) << "\n";
        }
      }
    }
  }
}

void write_unseen_estimates(const std::string& path, const std::vector<UnseenRow>& rows,
                            const std::string& config_hash) {
  auto out = open_out(path);
  if (!config_hash.empty()) out << "# config=" << config_hash << "\n";
  out << "region_id,time,mean,median,lo95,hi95,plugin,flag_sparse\n";
  for (const auto& r : rows) {
    out << r.region << "," << r.time_value << "," << format_double(r.est.mean) << ","
        << format_double(r.est.median) << "," << format_double(r.est.lo95) << ","
        << format_double(r.est.hi95) << "," << format_double(r.est.plugin) << ","
        << (r.est.sparse ? 1 : 0) << "\n";
  }
}

void write_alpha_summary(const std::string& path, const PosteriorChain& chain, const RegionLabels& labels) {
  auto out = open_out(path);
  if (!chain.config_digest.empty()) out << "# config=" << chain.config_digest << "\n";
  out << "region_id,alpha_mean,alpha_lo025,alpha_hi975\n";
  for (int i = 0; i < chain.n_regions; ++i) {
    const auto draws = chain.collect_alpha(i);
    out << labels.label(i) << "," << format_double(mean(draws)) << ","
        << format_double(quantile(draws, 0.025)) << "," << format_double(quantile(draws, 0.975)) << "\n";
  }
}

void write_zeta_summary(const std::string& path, const PosteriorChain& chain,
                        const std::vector<long>& time_values) {
  auto out = open_out(path);
  if (!chain.config_digest.empty()) out << "# config=" << chain.config_digest << "\n";
  out << "time,zeta_mean,zeta_lo025,zeta_hi975\n";
  for (int t = 0; t < chain.T; ++t) {
    const auto draws = chain.collect_zeta(t);
    const long label = t < static_cast<int>(time_values.size()) ? time_values[static_cast<std::size_t>(t)]
                                                                : static_cast<long>(t);
    out << label << "," << format_double(mean(draws)) << "," << format_double(quantile(draws, 0.025))
        << "," << format_double(quantile(draws, 0.975)) << "\n";
  }
}

}  // namespace ssip
