#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixvar/data_model.hpp"
#include "mixvar/errors.hpp"
#include "mixvar/forecast.hpp"
#include "mixvar/model.hpp"
#include "mixvar/sampler.hpp"

namespace mixvar::io {

namespace fs = std::filesystem;

// --- CSV primitives ---------------------------------------------------------

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Plain comma splitting; fields may be wrapped in double quotes but may
// not contain commas.
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line;  // 1-based source line of each row

  std::string where(std::size_t r) const { return path + ":" + std::to_string(line[r]); }

  // Index of a header column, or -1.
  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
  int require(const std::string& name) const {
    const int c = column(name);
    if (c < 0) throw ConfigError(path + ": missing column '" + name + "'");
    return c;
  }
};

// Blank lines and lines starting with '#' are skipped.
inline CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  CsvTable t;
  t.path = path.string();
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    auto cells = split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() > t.header.size())
      throw ConfigError(t.path + ":" + std::to_string(no) + ": " + std::to_string(cells.size()) +
                        " fields, header has " + std::to_string(t.header.size()));
    cells.resize(t.header.size());
    t.rows.push_back(std::move(cells));
    t.line.push_back(no);
  }
  if (t.header.empty()) throw ConfigError(t.path + ": empty file");
  return t;
}

inline double parse_double(const std::string& cell, const std::string& where) {
  double v = 0.0;
  const char* b = cell.data();
  const char* e = b + cell.size();
  if (!cell.empty() && *b == '+') ++b;
  const auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) throw ConfigError(where + ": not a number: '" + cell + "'");
  return v;
}

inline long parse_int(const std::string& cell, const std::string& where) {
  long v = 0;
  const auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || p != cell.data() + cell.size()) throw ConfigError(where + ": not an integer: '" + cell + "'");
  return v;
}

// Shortest representation that reads back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

// --- variable metadata ---------------------------------------------------------

inline VariableKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "binary" || s == "b") return VariableKind::binary;
  if (s == "censored" || s == "c") return VariableKind::censored;
  if (s == "unrestricted" || s == "u") return VariableKind::unrestricted;
  throw ConfigError(where + ": unknown variable kind '" + s + "'");
}

/// Metadata CSV with columns code, kind, threshold, transform (0/1/2). An
/// empty threshold means 0.
inline std::vector<VariableSpec> read_metadata(const fs::path& path) {
  const CsvTable t = read_csv(path);
  const int c_code = t.require("code"), c_kind = t.require("kind"), c_thr = t.require("threshold"),
            c_tr = t.require("transform");
  std::vector<VariableSpec> specs;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    VariableSpec s;
    s.code = row[static_cast<std::size_t>(c_code)];
    if (s.code.empty()) throw ConfigError(t.where(r) + ": empty variable code");
    for (const auto& o : specs)
      if (o.code == s.code) throw ConfigError(t.where(r) + ": duplicate variable '" + s.code + "'");
    s.kind = parse_kind(row[static_cast<std::size_t>(c_kind)], t.where(r));
    const std::string& thr = row[static_cast<std::size_t>(c_thr)];
    s.threshold = thr.empty() ? 0.0 : parse_double(thr, t.where(r));
    const long tr = parse_int(row[static_cast<std::size_t>(c_tr)], t.where(r));
    if (tr < 0 || tr > 2) throw ConfigError(t.where(r) + ": transform code must be 0, 1 or 2");
    s.transform = static_cast<Transform>(tr);
    specs.push_back(s);
  }
  if (specs.empty()) throw ConfigError(t.path + ": no variables");
  return specs;
}

inline void write_metadata(const fs::path& path, const std::vector<VariableSpec>& specs) {
  auto out = open_out(path);
  out << "code,kind,threshold,transform\n";
  for (const auto& s : specs)
    out << s.code << ',' << to_string(s.kind) << ',' << format_double(s.threshold) << ','
        << static_cast<int>(s.transform) << '\n';
}

/// Stable reorder into binary, censored, unrestricted blocks.
inline std::vector<VariableSpec> order_by_kind(std::vector<VariableSpec> specs) {
  std::stable_sort(specs.begin(), specs.end(), [](const VariableSpec& a, const VariableSpec& b) {
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  return specs;
}

// --- panel data ------------------------------------------------------------------

/// Reads raw levels (date first, one column per code, empty = missing),
/// applies each variable's transform, orders columns by kind and recodes
/// censored entries at or below their threshold. Columns not listed in
/// the metadata are ignored.
inline MixedPanel read_panel(const fs::path& path, const std::vector<VariableSpec>& metadata) {
  const CsvTable t = read_csv(path);
  if (t.header.empty() || t.header.size() < 2) throw ConfigError(t.path + ": need a date column and variables");
  MixedPanel p;
  p.specs = order_by_kind(metadata);
  const Eigen::Index rows = static_cast<Eigen::Index>(t.rows.size()), n = p.n();
  p.values = Eigen::MatrixXd::Zero(rows, n);
  p.observed = BoolMatrix::Constant(rows, n, false);
  for (const auto& r : t.rows) p.dates.push_back(r[0]);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index i = 0; i < n; ++i) {
    const VariableSpec& s = p.specs[static_cast<std::size_t>(i)];
    const int c = t.column(s.code);
    if (c < 1) throw ConfigError(t.path + ": no column for variable '" + s.code + "'");
    Eigen::VectorXd raw(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const std::string& cell = t.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      raw[r] = cell.empty() || cell == "NA" || cell == "NaN" ? nan : parse_double(cell, t.where(static_cast<std::size_t>(r)));
    }
    Eigen::VectorXd x;
    try {
      x = apply_transform(s, raw);
    } catch (const NonPositiveLog& e) {
      throw ConfigError(t.path + ": " + e.what());
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (std::isnan(x[r])) continue;
      p.observed(r, i) = true;
      p.values(r, i) = x[r];
    }
  }
  p = recode_censored(p);
  p.validate();
  return p;
}

/// Writes a panel in the reader's layout with every transform code reset
/// to 0, so that reading back needs metadata from write_panel_metadata.
inline void write_panel(const fs::path& path, const MixedPanel& p) {
  auto out = open_out(path);
  out << "date";
  for (const auto& s : p.specs) out << ',' << s.code;
  out << '\n';
  for (Eigen::Index t = 0; t < p.rows(); ++t) {
    out << (static_cast<std::size_t>(t) < p.dates.size() ? p.dates[static_cast<std::size_t>(t)] : std::to_string(t + 1));
    for (Eigen::Index i = 0; i < p.n(); ++i) {
      out << ',';
      if (p.observed(t, i)) out << format_double(p.values(t, i));
    }
    out << '\n';
  }
}

inline void write_panel_metadata(const fs::path& path, const MixedPanel& p) {
  std::vector<VariableSpec> specs = p.specs;
  for (auto& s : specs) s.transform = Transform::level;
  write_metadata(path, specs);
}

inline void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& m, const std::vector<std::string>& header) {
  auto out = open_out(path);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_double(m(r, c));
    out << '\n';
  }
}

inline Eigen::MatrixXd read_matrix_csv(const fs::path& path, std::size_t skip_columns = 0) {
  const CsvTable t = read_csv(path);
  const Eigen::Index cols = static_cast<Eigen::Index>(t.header.size() - skip_columns);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.rows.size()), cols);
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), c) = parse_double(t.rows[r][skip_columns + static_cast<std::size_t>(c)], t.where(r));
  return m;
}

// --- restriction files --------------------------------------------------------------

/// One parsed restriction on variable `var` at horizon `h` (1-based).
struct RestrictionRow {
  Eigen::Index var = 0;
  Eigen::Index h = 1;
  std::string type;  // eq, le, ge, range
  double lo = 0.0, hi = 0.0;
};

/// Restriction CSV: variable, horizon, type, value, value2 and an optional
/// interp column. Rows of one (variable, type) marked interp=linear are
/// joined by linear interpolation over the horizons between them, which
/// turns annual scenario values into monthly paths. Values are in the
/// variable's transformed, unstandardized units. Rows beyond `horizon`
/// are an error.
inline std::vector<RestrictionRow> read_restriction_rows(const fs::path& path, const std::vector<VariableSpec>& specs,
                                                         Eigen::Index horizon) {
  const CsvTable t = read_csv(path);
  const int c_var = t.require("variable"), c_h = t.require("horizon"), c_type = t.require("type"),
            c_v = t.require("value");
  const int c_v2 = t.column("value2"), c_interp = t.column("interp");
  std::vector<RestrictionRow> rows;
  std::map<std::pair<Eigen::Index, std::string>, std::vector<RestrictionRow>> interp;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    RestrictionRow x;
    const std::string& code = row[static_cast<std::size_t>(c_var)];
    x.var = -1;
    for (std::size_t i = 0; i < specs.size(); ++i)
      if (specs[i].code == code) x.var = static_cast<Eigen::Index>(i);
    if (x.var < 0) throw ConfigError(t.where(r) + ": unknown variable '" + code + "'");
    x.h = parse_int(row[static_cast<std::size_t>(c_h)], t.where(r));
    if (x.h < 1 || x.h > horizon)
      throw ConfigError(t.where(r) + ": horizon " + std::to_string(x.h) + " outside 1.." + std::to_string(horizon));
    x.type = row[static_cast<std::size_t>(c_type)];
    const double v = parse_double(row[static_cast<std::size_t>(c_v)], t.where(r));
    if (x.type == "eq") {
      x.lo = x.hi = v;
    } else if (x.type == "le") {
      x.lo = -std::numeric_limits<double>::infinity();
      x.hi = v;
    } else if (x.type == "ge") {
      x.lo = v;
      x.hi = std::numeric_limits<double>::infinity();
    } else if (x.type == "range") {
      if (c_v2 < 0 || row[static_cast<std::size_t>(c_v2)].empty())
        throw ConfigError(t.where(r) + ": range needs value2");
      x.lo = v;
      x.hi = parse_double(row[static_cast<std::size_t>(c_v2)], t.where(r));
      if (!(x.lo < x.hi)) throw ConfigError(t.where(r) + ": range needs value < value2");
    } else {
      throw ConfigError(t.where(r) + ": unknown restriction type '" + x.type + "'");
    }
    const bool linear = c_interp >= 0 && row[static_cast<std::size_t>(c_interp)] == "linear";
    if (linear)
      interp[{x.var, x.type}].push_back(x);
    else
      rows.push_back(x);
  }
  for (auto& [key, pts] : interp) {
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.h < b.h; });
    for (std::size_t k = 0; k < pts.size(); ++k) {
      rows.push_back(pts[k]);
      if (k + 1 == pts.size()) break;
      const RestrictionRow& a = pts[k];
      const RestrictionRow& b = pts[k + 1];
      for (Eigen::Index h = a.h + 1; h < b.h; ++h) {
        const double w = static_cast<double>(h - a.h) / static_cast<double>(b.h - a.h);
        RestrictionRow x = a;
        x.h = h;
        if (std::isfinite(a.lo)) x.lo = a.lo + w * (b.lo - a.lo);
        if (std::isfinite(a.hi)) x.hi = a.hi + w * (b.hi - a.hi);
        rows.push_back(x);
      }
    }
  }
  return rows;
}

/// Builds selector rows on the horizon-major stacked forecast vector.
inline ForecastRestrictions build_restrictions(const std::vector<RestrictionRow>& rows, Eigen::Index n,
                                               Eigen::Index horizon) {
  const Eigen::Index dim = n * horizon;
  ForecastRestrictions res = ForecastRestrictions::none(dim);
  std::vector<RestrictionRow> hard, soft;
  for (const auto& r : rows) (r.type == "eq" ? hard : soft).push_back(r);
  res.hard = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(hard.size()), dim);
  res.values.resize(static_cast<Eigen::Index>(hard.size()));
  for (std::size_t k = 0; k < hard.size(); ++k) {
    res.hard(static_cast<Eigen::Index>(k), (hard[k].h - 1) * n + hard[k].var) = 1.0;
    res.values[static_cast<Eigen::Index>(k)] = hard[k].lo;
  }
  res.soft = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(soft.size()), dim);
  res.lower.resize(static_cast<Eigen::Index>(soft.size()));
  res.upper.resize(static_cast<Eigen::Index>(soft.size()));
  for (std::size_t k = 0; k < soft.size(); ++k) {
    res.soft(static_cast<Eigen::Index>(k), (soft[k].h - 1) * n + soft[k].var) = 1.0;
    res.lower[static_cast<Eigen::Index>(k)] = soft[k].lo;
    res.upper[static_cast<Eigen::Index>(k)] = soft[k].hi;
  }
  return res;
}

// --- posterior draws ------------------------------------------------------------------

/// One chain as stored on disk: draws in standardized units plus what is
/// needed to map them back.
struct StoredChain {
  MixedPanel panel;  // original units, after transforms and recoding
  std::vector<VariableSpec> standardized_specs;
  StandardizationState state;
  Eigen::Index lags = 1;
  PosteriorDraws draws;
};

namespace detail {

inline std::vector<std::string> draw_header(const std::vector<std::string>& names) {
  std::vector<std::string> h{"draw"};
  h.insert(h.end(), names.begin(), names.end());
  return h;
}

inline Eigen::MatrixXd with_draw_index(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out(m.rows(), m.cols() + 1);
  for (Eigen::Index r = 0; r < m.rows(); ++r) out(r, 0) = static_cast<double>(r);
  out.rightCols(m.cols()) = m;
  return out;
}

}  // namespace detail

/// Writes a chain directory: meta.csv, panel.csv, standardization.csv,
/// intercept/lags/sigma/horseshoe/expansion/outlier CSVs (one row per
/// retained draw), latent.bin (little-endian doubles, draw-major, each
/// draw a column-major (T + P) x n block) and diagnostics.csv.
inline void write_chain(const fs::path& dir, const StoredChain& c) {
  fs::create_directories(dir);
  const auto& specs = c.panel.specs;
  const Eigen::Index n = c.panel.n(), P = c.lags;
  const Eigen::Index S = static_cast<Eigen::Index>(c.draws.size());
  write_panel(dir / "panel.csv", c.panel);
  write_panel_metadata(dir / "meta.csv", c.panel);
  {
    auto out = open_out(dir / "standardization.csv");
    out << "code,center,scale,standardized_threshold\n";
    for (Eigen::Index i = 0; i < n; ++i)
      out << specs[static_cast<std::size_t>(i)].code << ',' << format_double(c.state.center[i]) << ','
          << format_double(c.state.scale[i]) << ','
          << format_double(c.standardized_specs[static_cast<std::size_t>(i)].threshold) << '\n';
  }
  std::vector<std::string> codes;
  for (const auto& s : specs) codes.push_back(s.code);
  std::vector<std::string> lag_names, sigma_names;
  for (Eigen::Index col = 0; col < n * P; ++col)
    for (Eigen::Index i = 0; i < n; ++i)
      lag_names.push_back("A" + std::to_string(col / n + 1) + "." + codes[static_cast<std::size_t>(i)] + "." +
                          codes[static_cast<std::size_t>(col % n)]);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      sigma_names.push_back("S." + codes[static_cast<std::size_t>(i)] + "." + codes[static_cast<std::size_t>(j)]);

  const Eigen::Index nb = c.panel.n_binary();
  const Eigen::Index T = c.panel.rows() - P;
  Eigen::MatrixXd intercept(S, n), lags(S, n * n * P), sigma(S, n * n), hs(S, 2 + 2 * n * n * P), expansion(S, nb),
      outlier(S, 1 + T);
  for (Eigen::Index s = 0; s < S; ++s) {
    const ModelParams& m = c.draws.params[static_cast<std::size_t>(s)];
    intercept.row(s) = m.intercept.transpose();
    lags.row(s) = m.lags.reshaped().transpose();
    sigma.row(s) = m.sigma.reshaped().transpose();
    hs(s, 0) = m.global_scale;
    hs(s, 1) = m.global_aux;
    hs.row(s).segment(2, n * n * P) = m.local_scale.reshaped().transpose();
    hs.row(s).tail(n * n * P) = m.local_aux.reshaped().transpose();
    expansion.row(s) = m.expansion.transpose();
    outlier(s, 0) = m.outlier_prob;
    outlier.row(s).tail(T) = m.outlier.transpose();
  }
  std::vector<std::string> hs_names{"tau", "tau_aux"}, exp_names, out_names{"outlier_prob"};
  for (const auto& l : lag_names) hs_names.push_back("lambda." + l);
  for (const auto& l : lag_names) hs_names.push_back("nu." + l);
  for (Eigen::Index i = 0; i < nb; ++i) exp_names.push_back("d." + codes[static_cast<std::size_t>(i)]);
  for (Eigen::Index t = 0; t < T; ++t) out_names.push_back("o." + std::to_string(t + 1));
  write_matrix_csv(dir / "intercept.csv", detail::with_draw_index(intercept), detail::draw_header(codes));
  write_matrix_csv(dir / "lags.csv", detail::with_draw_index(lags), detail::draw_header(lag_names));
  write_matrix_csv(dir / "sigma.csv", detail::with_draw_index(sigma), detail::draw_header(sigma_names));
  write_matrix_csv(dir / "horseshoe.csv", detail::with_draw_index(hs), detail::draw_header(hs_names));
  write_matrix_csv(dir / "expansion.csv", detail::with_draw_index(expansion), detail::draw_header(exp_names));
  write_matrix_csv(dir / "outlier.csv", detail::with_draw_index(outlier), detail::draw_header(out_names));
  {
    auto out = open_out(dir / "latent.bin");
    for (const auto& y : c.draws.latent)
      out.write(reinterpret_cast<const char*>(y.data()), static_cast<std::streamsize>(y.size() * sizeof(double)));
  }
  {
    auto out = open_out(dir / "diagnostics.csv");
    out << "sweep,hmc_events,travel_time,hmc_rejected,covariance_accepted\n";
    for (std::size_t k = 0; k < c.draws.diagnostics.size(); ++k) {
      const auto& d = c.draws.diagnostics[k];
      out << k << ',' << d.hmc_events << ',' << format_double(d.travel_time) << ',' << d.hmc_rejected << ','
          << d.covariance_accepted << '\n';
    }
  }
}

inline StoredChain read_chain(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("draws directory not found: " + dir.string());
  StoredChain c;
  c.panel = read_panel(dir / "panel.csv", read_metadata(dir / "meta.csv"));
  const Eigen::Index n = c.panel.n();
  {
    const CsvTable t = read_csv(dir / "standardization.csv");
    if (static_cast<Eigen::Index>(t.rows.size()) != n) throw ConfigError(t.path + ": wrong number of rows");
    c.state = StandardizationState::identity(n);
    c.standardized_specs = c.panel.specs;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      if (t.rows[r][0] != c.panel.specs[r].code) throw ConfigError(t.where(r) + ": variable order differs from meta.csv");
      c.state.center[static_cast<Eigen::Index>(r)] = parse_double(t.rows[r][1], t.where(r));
      c.state.scale[static_cast<Eigen::Index>(r)] = parse_double(t.rows[r][2], t.where(r));
      c.standardized_specs[r].threshold = parse_double(t.rows[r][3], t.where(r));
    }
  }
  const Eigen::MatrixXd intercept = read_matrix_csv(dir / "intercept.csv", 1);
  const Eigen::MatrixXd lags = read_matrix_csv(dir / "lags.csv", 1);
  const Eigen::MatrixXd sigma = read_matrix_csv(dir / "sigma.csv", 1);
  const Eigen::MatrixXd hs = read_matrix_csv(dir / "horseshoe.csv", 1);
  const Eigen::MatrixXd expansion = read_matrix_csv(dir / "expansion.csv", 1);
  const Eigen::MatrixXd outlier = read_matrix_csv(dir / "outlier.csv", 1);
  const Eigen::Index S = intercept.rows();
  if (lags.cols() % (n * n) != 0 || lags.cols() == 0) throw ConfigError(dir.string() + ": lags.csv has wrong width");
  c.lags = lags.cols() / (n * n);
  const Eigen::Index P = c.lags, T = c.panel.rows() - P;
  if (lags.rows() != S || sigma.rows() != S || hs.rows() != S || outlier.rows() != S || outlier.cols() != T + 1)
    throw ConfigError(dir.string() + ": draw files disagree in shape");
  std::ifstream bin(dir / "latent.bin", std::ios::binary);
  if (!bin) throw ConfigError("cannot open " + (dir / "latent.bin").string());
  for (Eigen::Index s = 0; s < S; ++s) {
    ModelParams m = ModelParams::zeros(n, P, T, c.panel.n_binary());
    m.intercept = intercept.row(s).transpose();
    m.lags = lags.row(s).reshaped(n, n * P);
    m.sigma = sigma.row(s).reshaped(n, n);
    m.global_scale = hs(s, 0);
    m.global_aux = hs(s, 1);
    m.local_scale = hs.row(s).segment(2, n * n * P).reshaped(n, n * P);
    m.local_aux = hs.row(s).tail(n * n * P).reshaped(n, n * P);
    if (expansion.cols() > 0) m.expansion = expansion.row(s).transpose();
    m.outlier_prob = outlier(s, 0);
    m.outlier = outlier.row(s).tail(T).transpose();
    c.draws.params.push_back(std::move(m));
    Eigen::MatrixXd y(c.panel.rows(), n);
    bin.read(reinterpret_cast<char*>(y.data()), static_cast<std::streamsize>(y.size() * sizeof(double)));
    if (!bin) throw ConfigError((dir / "latent.bin").string() + ": truncated");
    c.draws.latent.push_back(std::move(y));
  }
  return c;
}

}  // namespace mixvar::io
