// mixvar: batch front end for estimation, forecasting, GIRFs, simulation
// and forecast evaluation.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixvar/mixvar.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace mixvar;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
const std::vector<double> kQuantiles{0.05, 0.16, 0.50, 0.84, 0.95};

struct JobConfig {
  std::string command;
  std::string data, meta, out = "mixvar_out", draws, restrictions, scores;
  int lags = 5;
  bool het = true, probit = true, tobit = true;
  std::size_t iters = 12000, burn = 3000, thin = 3;
  int chains = 1;
  std::uint64_t seed = 1;
  std::string origin;
  int horizon = 24;
  std::size_t max_draws = 0;
  int paths = 1;
  std::string sampler = "zigzag";
  // girf
  std::string shock, ordering, origins = "all", sizes = "1,-1";
  bool per_origin = false, cumulate = true;
  // simulate
  int nb = 2, nc = 2, nu = 2, t_keep = 350, t_burn = 200;
  bool recover = false;
  // evaluate
  std::string benchmark = "VAR", estimator = "fair";
};

std::string sha256_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + p.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char b[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(b, sizeof b, "%02x", md[i]);
    hex += b;
  }
  return hex;
}

// Effective configuration as flat key=value pairs, in the format accepted by
// --config.
std::vector<std::pair<std::string, std::string>> config_pairs(const JobConfig& c) {
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {{"data", c.data},
          {"meta", c.meta},
          {"out", c.out},
          {"draws", c.draws},
          {"restrictions", c.restrictions},
          {"scores", c.scores},
          {"lags", std::to_string(c.lags)},
          {"het", b(c.het)},
          {"probit", b(c.probit)},
          {"tobit", b(c.tobit)},
          {"iters", std::to_string(c.iters)},
          {"burn", std::to_string(c.burn)},
          {"thin", std::to_string(c.thin)},
          {"chains", std::to_string(c.chains)},
          {"seed", std::to_string(c.seed)},
          {"origin", c.origin},
          {"horizon", std::to_string(c.horizon)},
          {"max-draws", std::to_string(c.max_draws)},
          {"paths", std::to_string(c.paths)},
          {"sampler", c.sampler},
          {"shock", c.shock},
          {"ordering", c.ordering},
          {"origins", c.origins},
          {"sizes", c.sizes},
          {"per-origin", b(c.per_origin)},
          {"cumulate", b(c.cumulate)},
          {"nb", std::to_string(c.nb)},
          {"nc", std::to_string(c.nc)},
          {"nu", std::to_string(c.nu)},
          {"t-keep", std::to_string(c.t_keep)},
          {"t-burn", std::to_string(c.t_burn)},
          {"recover", b(c.recover)},
          {"benchmark", c.benchmark},
          {"estimator", c.estimator}};
}

void write_manifest(const fs::path& dir, const JobConfig& c, json extra) {
  fs::create_directories(dir);
  json j;
  j["command"] = c.command;
  j["seed"] = c.seed;
  json cfg = json::object();
  for (const auto& [k, v] : config_pairs(c)) cfg[k] = v;
  j["config"] = cfg;
  json inputs = json::object();
  for (const auto& [key, path] : std::vector<std::pair<std::string, std::string>>{
           {"data", c.data}, {"meta", c.meta}, {"restrictions", c.restrictions}, {"scores", c.scores}})
    if (!path.empty() && fs::is_regular_file(path)) inputs[key] = {{"path", path}, {"sha256", sha256_file(path)}};
  j["inputs"] = inputs;
  for (auto& [k, v] : extra.items()) j[k] = v;
  std::ofstream(dir / "manifest.json") << j.dump(2) << '\n';
  std::ofstream ini(dir / "config.ini");
  ini << "# rerun with: mixvar " << c.command << " --config config.ini\n";
  for (const auto& [k, v] : config_pairs(c))
    if (!v.empty()) ini << k << "=\"" << v << "\"\n";
}

HmcSampler parse_sampler(const std::string& s) {
  if (s == "zigzag") return HmcSampler::zigzag;
  if (s == "harmonic") return HmcSampler::harmonic;
  throw ConfigError("unknown sampler '" + s + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string x;
  while (std::getline(ss, x, sep))
    if (!io::trim(x).empty()) out.push_back(io::trim(x));
  return out;
}

// --- estimate -----------------------------------------------------------------

// Applies the model-family flags: without the probit block binary
// variables are dropped, without the tobit block censored variables are
// treated as unrestricted.
MixedPanel apply_family(const MixedPanel& p, bool probit, bool tobit) {
  MixedPanel out;
  out.dates = p.dates;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < p.n(); ++i) {
    VariableSpec s = p.specs[static_cast<std::size_t>(i)];
    if (s.kind == VariableKind::binary && !probit) continue;
    if (s.kind == VariableKind::censored && !tobit) s.kind = VariableKind::unrestricted;
    out.specs.push_back(s);
    keep.push_back(i);
  }
  if (keep.empty()) throw ConfigError("no variables left after applying --probit/--tobit");
  out.values.resize(p.rows(), static_cast<Eigen::Index>(keep.size()));
  out.observed.resize(p.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.values.col(static_cast<Eigen::Index>(k)) = p.values.col(keep[k]);
    out.observed.col(static_cast<Eigen::Index>(k)) = p.observed.col(keep[k]);
  }
  return out;
}

// Drops leading rows in which every variable is missing (for example the
// first row of log-differenced series).
MixedPanel trim_leading(const MixedPanel& p) {
  Eigen::Index first = 0;
  while (first < p.rows() && !p.observed.row(first).any()) ++first;
  if (first == p.rows()) throw ConfigError("panel has no observations");
  MixedPanel out = p;
  out.values = p.values.bottomRows(p.rows() - first);
  out.observed = p.observed.bottomRows(p.rows() - first);
  out.dates.assign(p.dates.begin() + first, p.dates.end());
  return out;
}

ChainConfig chain_config(const JobConfig& c) {
  if (c.lags < 1) throw ConfigError("--lags must be at least 1");
  if (c.thin < 1) throw ConfigError("--thin must be at least 1");
  if (c.chains < 1) throw ConfigError("--chains must be at least 1");
  ChainConfig cfg;
  cfg.lags = c.lags;
  cfg.iterations = c.iters;
  cfg.burn_in = c.burn;
  cfg.thin = c.thin;
  cfg.seed = c.seed;
  cfg.heteroskedastic = c.het;
  cfg.hmc.sampler = parse_sampler(c.sampler);
  return cfg;
}

int cmd_estimate(const JobConfig& c) {
  if (c.meta.empty() || !fs::is_regular_file(c.meta)) throw ConfigError("metadata file not found: '" + c.meta + "'");
  if (c.data.empty() || !fs::is_regular_file(c.data)) throw ConfigError("data file not found: '" + c.data + "'");
  const ChainConfig base = chain_config(c);
  MixedPanel panel = trim_leading(apply_family(io::read_panel(c.data, io::read_metadata(c.meta)), c.probit, c.tobit));
  const StandardizedPanel sp = standardize(panel);

  std::vector<io::StoredChain> chains(static_cast<std::size_t>(c.chains));
  std::vector<std::exception_ptr> errors(chains.size());
  std::vector<std::uint64_t> seeds;
  std::vector<std::thread> workers;
  for (std::size_t k = 0; k < chains.size(); ++k) {
    ChainConfig cfg = base;
    cfg.seed = derive_seed(c.seed, k);
    seeds.push_back(cfg.seed);
    workers.emplace_back([&, k, cfg] {
      try {
        io::StoredChain& ch = chains[k];
        ch.panel = panel;
        ch.standardized_specs = sp.panel.specs;
        ch.state = sp.state;
        ch.lags = cfg.lags;
        ch.draws = run_chain(sp.panel, cfg);
        io::write_chain(fs::path(c.out) / ("chain_" + std::to_string(k + 1)), ch);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  json extra;
  extra["chain_seeds"] = seeds;
  extra["retained_per_chain"] = base.retained();
  extra["variables"] = json::array();
  for (const auto& s : panel.specs) extra["variables"].push_back({{"code", s.code}, {"kind", to_string(s.kind)}});
  extra["panel_sha256"] = sha256_file(fs::path(c.out) / "chain_1" / "panel.csv");
  json acc = json::array();
  for (const auto& ch : chains) acc.push_back(ch.draws.covariance_acceptance());
  extra["covariance_acceptance"] = acc;
  write_manifest(c.out, c, extra);
  std::cout << "estimate: " << chains.size() << " chain(s), " << base.retained() << " draws each -> " << c.out << '\n';
  return 0;
}

// --- shared loading for forecast / girf -------------------------------------------------

struct PooledDraws {
  io::StoredChain first;  // panel, specs, standardization
  std::vector<const ModelParams*> params;
  std::vector<const Eigen::MatrixXd*> latent;
  std::vector<io::StoredChain> chains;
};

PooledDraws load_draws(const JobConfig& c) {
  if (c.draws.empty()) throw ConfigError("--draws is required");
  fs::path root(c.draws);
  std::vector<fs::path> dirs;
  if (fs::exists(root / "latent.bin")) {
    dirs.push_back(root);
  } else {
    for (int k = 1; fs::is_directory(root / ("chain_" + std::to_string(k))); ++k)
      dirs.push_back(root / ("chain_" + std::to_string(k)));
  }
  if (dirs.empty()) throw ConfigError("no draws found under " + root.string());
  PooledDraws d;
  for (const auto& dir : dirs) d.chains.push_back(io::read_chain(dir));
  for (const auto& ch : d.chains)
    for (std::size_t s = 0; s < ch.draws.size(); ++s) {
      d.params.push_back(&ch.draws.params[s]);
      d.latent.push_back(&ch.draws.latent[s]);
    }
  if (d.params.empty()) throw ConfigError("draw directories contain no retained draws");
  // Evenly spaced subset.
  if (c.max_draws > 0 && d.params.size() > c.max_draws) {
    std::vector<const ModelParams*> p;
    std::vector<const Eigen::MatrixXd*> l;
    for (std::size_t k = 0; k < c.max_draws; ++k) {
      const std::size_t i = k * d.params.size() / c.max_draws;
      p.push_back(d.params[i]);
      l.push_back(d.latent[i]);
    }
    d.params = p;
    d.latent = l;
  }
  d.first.panel = d.chains.front().panel;
  d.first.standardized_specs = d.chains.front().standardized_specs;
  d.first.state = d.chains.front().state;
  d.first.lags = d.chains.front().lags;
  return d;
}

// Row index (0-based) of an origin given as a date or a 1-based row number.
Eigen::Index parse_origin(const std::string& s, const MixedPanel& p, Eigen::Index P) {
  Eigen::Index row = p.rows() - 1;
  if (!s.empty()) {
    const auto it = std::find(p.dates.begin(), p.dates.end(), s);
    if (it != p.dates.end())
      row = static_cast<Eigen::Index>(it - p.dates.begin());
    else
      row = io::parse_int(s, "--origin") - 1;
  }
  if (row < P - 1 || row >= p.rows())
    throw ConfigError("origin '" + s + "' outside the usable rows " + std::to_string(P) + ".." + std::to_string(p.rows()));
  return row;
}

void write_quantile_header(std::ostream& out) {
  out << "mean";
  for (double q : kQuantiles) {
    const int pct = static_cast<int>(q * 100 + 0.5);
    out << (pct < 10 ? ",q0" : ",q") << pct;
  }
}

void write_quantiles(std::ostream& out, std::vector<double> v) {
  double m = 0.0;
  for (double x : v) m += x;
  out << io::format_double(m / static_cast<double>(v.size()));
  for (double q : kQuantiles) out << ',' << io::format_double(empirical_quantile(v, q));
}

// --- forecast ----------------------------------------------------------------------

int cmd_forecast(const JobConfig& c) {
  if (c.horizon < 1) throw ConfigError("--horizon must be at least 1");
  if (c.paths < 1) throw ConfigError("--paths must be at least 1");
  const PooledDraws d = load_draws(c);
  const MixedPanel& panel = d.first.panel;
  const auto& specs = panel.specs;
  const Eigen::Index n = panel.n(), P = d.first.lags, H = c.horizon;
  const Eigen::Index origin = parse_origin(c.origin, panel, P);

  ForecastRestrictions res = ForecastRestrictions::none(n * H);
  if (!c.restrictions.empty())
    res = standardize_restrictions(io::build_restrictions(io::read_restriction_rows(c.restrictions, specs, H), n, H),
                                   d.first.state, H);
  const bool conditional = !res.empty();
  SoftForecastConfig soft;
  soft.hmc.sampler = parse_sampler(c.sampler);

  const std::size_t S = d.params.size();
  const Eigen::Index K = c.paths;
  std::vector<std::vector<double>> latent(static_cast<std::size_t>(n * H)), observed(latent.size()), prob(latent.size());
  for (std::size_t s = 0; s < S; ++s) {
    Rng rng(derive_seed(c.seed, s));
    const ModelParams& m = *d.params[s];
    const Eigen::MatrixXd hist = d.latent[s]->middleRows(origin - P + 1, P);
    const PredictiveMoments pm = predictive_moments(m, hist, H);
    Eigen::MatrixXd paths;
    Eigen::VectorXd p = Eigen::VectorXd::Constant(n * H, std::numeric_limits<double>::quiet_NaN());
    if (!conditional) {
      paths = draw_paths(pm, K, rng);
    } else if (res.soft.rows() == 0) {
      paths = conditional_forecast_hard(pm, res.hard, res.values, K, rng);
    } else {
      paths = conditional_forecast_soft(pm, res, K, rng, soft);
    }
    if (res.soft.rows() == 0) {
      const PredictiveMoments cm = conditional ? condition_moments(pm, res.hard, res.values) : pm;
      for (Eigen::Index j = 1; j <= H; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
          if (specs[static_cast<std::size_t>(i)].kind == VariableKind::binary)
            p[cm.index(i, j)] = recession_probability(cm, specs, i, j);
    } else {
      for (Eigen::Index r = 0; r < n * H; ++r)
        if (specs[static_cast<std::size_t>(r % n)].kind == VariableKind::binary)
          p[r] = (paths.row(r).array() > 0.0).cast<double>().mean();
    }
    for (Eigen::Index r = 0; r < n * H; ++r) {
      const Eigen::Index i = r % n;
      paths.row(r) = paths.row(r).array() * d.first.state.scale[i] + d.first.state.center[i];
    }
    const Eigen::MatrixXd obs = censor_paths(paths, specs);
    for (Eigen::Index r = 0; r < n * H; ++r) {
      for (Eigen::Index k = 0; k < K; ++k) {
        latent[static_cast<std::size_t>(r)].push_back(paths(r, k));
        observed[static_cast<std::size_t>(r)].push_back(obs(r, k));
      }
      if (!std::isnan(p[r])) prob[static_cast<std::size_t>(r)].push_back(p[r]);
    }
  }

  fs::create_directories(c.out);
  std::ofstream q(fs::path(c.out) / "forecast_quantiles.csv");
  q << "variable,horizon,scale,";
  write_quantile_header(q);
  q << '\n';
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 1; j <= H; ++j) {
      const auto r = static_cast<std::size_t>((j - 1) * n + i);
      q << specs[static_cast<std::size_t>(i)].code << ',' << j << ",latent,";
      write_quantiles(q, latent[r]);
      q << '\n';
      q << specs[static_cast<std::size_t>(i)].code << ',' << j << ",observed,";
      write_quantiles(q, observed[r]);
      q << '\n';
    }
  std::ofstream pr(fs::path(c.out) / "probabilities.csv");
  pr << "variable,horizon,";
  write_quantile_header(pr);
  pr << '\n';
  for (Eigen::Index i = 0; i < n; ++i) {
    if (specs[static_cast<std::size_t>(i)].kind != VariableKind::binary) continue;
    for (Eigen::Index j = 1; j <= H; ++j) {
      pr << specs[static_cast<std::size_t>(i)].code << ',' << j << ',';
      write_quantiles(pr, prob[static_cast<std::size_t>((j - 1) * n + i)]);
      pr << '\n';
    }
  }
  json extra;
  extra["mode"] = conditional ? "conditional" : "unconditional";
  extra["origin_row"] = origin + 1;
  if (static_cast<std::size_t>(origin) < panel.dates.size()) extra["origin_date"] = panel.dates[static_cast<std::size_t>(origin)];
  extra["draws_used"] = S;
  write_manifest(c.out, c, extra);
  std::cout << "forecast (" << extra["mode"].get<std::string>() << "): " << S << " draws, h=" << H << " -> " << c.out
            << '\n';
  return 0;
}

// --- girf ------------------------------------------------------------------------

// Origins as 1-based rows: "all", or a comma list of rows, dates and a:b
// ranges (dates allowed on either end).
std::vector<Eigen::Index> parse_origins(const std::string& spec, const MixedPanel& p, Eigen::Index P) {
  std::vector<Eigen::Index> rows;
  if (spec == "all" || spec.empty()) {
    for (Eigen::Index r = P - 1; r < p.rows(); ++r) rows.push_back(r);
    return rows;
  }
  for (const auto& part : split(spec, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) {
      rows.push_back(parse_origin(part, p, P));
    } else {
      const Eigen::Index a = parse_origin(part.substr(0, colon), p, P), b = parse_origin(part.substr(colon + 1), p, P);
      if (b < a) throw ConfigError("origin range '" + part + "' is reversed");
      for (Eigen::Index r = a; r <= b; ++r) rows.push_back(r);
    }
  }
  return rows;
}

int cmd_girf(const JobConfig& c) {
  if (c.horizon < 0) throw ConfigError("--horizon must be non-negative");
  const PooledDraws d = load_draws(c);
  const MixedPanel& panel = d.first.panel;
  const auto& specs = panel.specs;
  const Eigen::Index n = panel.n(), P = d.first.lags, H = c.horizon;
  auto index_of = [&](const std::string& code) {
    for (Eigen::Index i = 0; i < n; ++i)
      if (specs[static_cast<std::size_t>(i)].code == code) return i;
    throw ConfigError("unknown variable '" + code + "'");
  };
  const Eigen::Index shock = c.shock.empty() ? 0 : index_of(c.shock);
  std::vector<Eigen::Index> ordering;
  for (const auto& code : split(c.ordering, ',')) ordering.push_back(index_of(code));
  std::vector<double> sizes;
  for (const auto& s : split(c.sizes, ',')) sizes.push_back(io::parse_double(s, "--sizes"));
  if (sizes.empty()) throw ConfigError("--sizes is empty");
  const std::vector<Eigen::Index> origins = parse_origins(c.origins, panel, P);
  const std::vector<bool> cum = c.cumulate ? cumulate_mask(specs) : std::vector<bool>{};
  const auto& sc = d.first.state.scale;

  fs::create_directories(c.out);
  std::ofstream ape(fs::path(c.out) / "girf_ape.csv");
  ape << "size,draw,horizon,variable,scale,response\n";
  std::ofstream per;
  if (c.per_origin) {
    per.open(fs::path(c.out) / "girf_origins.csv");
    per << "size,draw,tau,horizon,variable,scale,response\n";
  }
  std::ofstream peak(fs::path(c.out) / "girf_peak.csv");
  peak << "size,draw,variable,horizon,response\n";
  // (size, variable, horizon, scale) -> responses over draws
  std::map<std::tuple<std::size_t, Eigen::Index, Eigen::Index, int>, std::vector<double>> summary;
  const char* scale_name[3] = {"latent", "probability", "censored"};

  // Original-unit responses, cumulated for log-differenced variables.
  auto to_original = [&](GirfResult g) {
    for (Eigen::Index i = 0; i < n; ++i) {
      g.latent.row(i) *= sc[i];
      g.censored.row(i) *= sc[i];
      if (!cum.empty() && cum[static_cast<std::size_t>(i)])
        for (Eigen::Index j = 1; j <= H; ++j) g.latent(i, j) += g.latent(i, j - 1);
    }
    return g;
  };
  auto emit = [&](std::ostream& out, const std::string& prefix, const GirfResult& g) {
    for (Eigen::Index j = 0; j <= H; ++j)
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::MatrixXd* mats[3] = {&g.latent, &g.probability, &g.censored};
        for (int k = 0; k < 3; ++k) {
          const double v = (*mats[k])(i, j) + 0.0;
          if (std::isnan(v)) continue;
          out << prefix << j << ',' << specs[static_cast<std::size_t>(i)].code << ',' << scale_name[k] << ','
              << io::format_double(v) << '\n';
        }
      }
  };

  for (std::size_t z = 0; z < sizes.size(); ++z) {
    const std::string size = io::format_double(sizes[z]);
    for (std::size_t s = 0; s < d.params.size(); ++s) {
      const ModelParams& m = *d.params[s];
      const ShockImpact delta = cholesky_shock(m.sigma, ordering, shock, sizes[z]);
      std::vector<GirfResult> gs;
      for (Eigen::Index tau : origins) {
        gs.push_back(girf_at(m, d.latent[s]->middleRows(tau - P + 1, P), delta.delta, H, d.first.standardized_specs));
        if (c.per_origin)
          emit(per, size + "," + std::to_string(s) + "," + std::to_string(tau + 1) + ",", to_original(gs.back()));
      }
      const GirfResult a = to_original(average_partial_effect(gs));
      emit(ape, size + "," + std::to_string(s) + ",", a);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (specs[static_cast<std::size_t>(i)].kind == VariableKind::binary) {
          const auto [h, v] = peak_girf(a, i, 1);
          peak << size << ',' << s << ',' << specs[static_cast<std::size_t>(i)].code << ',' << h << ','
               << io::format_double(v) << '\n';
        }
        for (Eigen::Index j = 0; j <= H; ++j) {
          summary[{z, i, j, 0}].push_back(a.latent(i, j));
          if (!std::isnan(a.probability(i, j))) summary[{z, i, j, 1}].push_back(a.probability(i, j));
          if (!std::isnan(a.censored(i, j))) summary[{z, i, j, 2}].push_back(a.censored(i, j));
        }
      }
    }
  }
  std::ofstream sum(fs::path(c.out) / "girf_summary.csv");
  sum << "size,variable,horizon,scale,";
  write_quantile_header(sum);
  sum << '\n';
  for (const auto& [key, v] : summary) {
    const auto& [z, i, j, k] = key;
    sum << io::format_double(sizes[z]) << ',' << specs[static_cast<std::size_t>(i)].code << ',' << j << ','
        << scale_name[k] << ',';
    write_quantiles(sum, v);
    sum << '\n';
  }
  json extra;
  extra["shock"] = specs[static_cast<std::size_t>(shock)].code;
  extra["origins"] = origins.size();
  extra["draws_used"] = d.params.size();
  write_manifest(c.out, c, extra);
  std::cout << "girf: shock " << specs[static_cast<std::size_t>(shock)].code << ", " << origins.size() << " origins, "
            << d.params.size() << " draws -> " << c.out << '\n';
  return 0;
}

// --- simulate ------------------------------------------------------------------------

int cmd_simulate(const JobConfig& c) {
  DgpSpec spec;
  spec.n_binary = c.nb;
  spec.n_censored = c.nc;
  spec.n_unrestricted = c.nu;
  spec.lags = c.lags;
  spec.t_keep = c.t_keep;
  spec.t_burn = c.t_burn;
  spec.seed = c.seed;
  if (c.nb < 0 || c.nc < 0 || c.nu < 0) throw ConfigError("variable counts must be non-negative");
  const SyntheticData data = generate_dgp(spec);
  const fs::path out(c.out);
  MixedPanel panel = data.panel;
  for (Eigen::Index t = 0; t < panel.rows(); ++t) panel.dates.push_back(std::to_string(t + 1));
  io::write_panel(out / "panel.csv", panel);
  io::write_metadata(out / "meta.csv", panel.specs);
  std::vector<std::string> codes;
  for (const auto& s : panel.specs) codes.push_back(s.code);
  std::vector<std::string> lag_names;
  for (Eigen::Index p = 1; p <= spec.lags; ++p)
    for (const auto& code : codes) lag_names.push_back("A" + std::to_string(p) + "." + code);
  std::vector<std::string> eq{"equation"};
  eq.insert(eq.end(), lag_names.begin(), lag_names.end());
  {
    std::ofstream f(out / "truth_lags.csv");
    for (std::size_t k = 0; k < eq.size(); ++k) f << (k ? "," : "") << eq[k];
    f << '\n';
    for (Eigen::Index i = 0; i < data.truth.n(); ++i) {
      f << codes[static_cast<std::size_t>(i)];
      for (Eigen::Index k = 0; k < data.truth.lags.cols(); ++k) f << ',' << io::format_double(data.truth.lags(i, k));
      f << '\n';
    }
  }
  io::write_matrix_csv(out / "truth_sigma.csv", data.truth.sigma, codes);
  io::write_matrix_csv(out / "truth_latent.csv", data.latent, codes);
  json extra;
  extra["dgp"] = {{"n_binary", spec.n_binary},         {"n_censored", spec.n_censored},
                  {"n_unrestricted", spec.n_unrestricted}, {"lags", spec.lags},
                  {"t_keep", spec.t_keep},             {"t_burn", spec.t_burn},
                  {"zero_prob_base", spec.zero_prob_base}, {"zero_prob_step", spec.zero_prob_step},
                  {"coef_scale", spec.coef_scale},     {"target_radius", spec.target_radius},
                  {"companion_radius", companion_radius(data.truth)}};
  if (c.recover) {
    ChainConfig cfg = chain_config(c);
    cfg.seed = derive_seed(c.seed, 1);
    const RecoveryReport r = run_recovery(data, cfg);
    extra["recovery"] = {{"draws", r.draws},
                         {"coefficient_coverage_90", r.coefficient_coverage},
                         {"coefficients", r.coefficients},
                         {"censored_band_coverage_90", r.censored_band_coverage},
                         {"at_bound_points", r.at_bound_points},
                         {"latent_correlation", r.latent_correlation},
                         {"covariance_acceptance", r.acceptance}};
    std::cout << "recovery: coefficient coverage " << r.coefficient_coverage << ", censored band coverage "
              << r.censored_band_coverage << '\n';
  }
  write_manifest(out, c, extra);
  std::cout << "simulate: " << panel.rows() << " rows x " << panel.n() << " variables -> " << c.out << '\n';
  return 0;
}

// --- evaluate ----------------------------------------------------------------------------

int cmd_evaluate(const JobConfig& c) {
  if (c.scores.empty()) throw ConfigError("--scores is required");
  if (c.estimator != "fair" && c.estimator != "plain") throw ConfigError("--estimator must be fair or plain");
  const io::CsvTable t = io::read_csv(c.scores);
  const int c_model = t.require("model"), c_data = t.require("dataset"), c_var = t.require("variable"),
            c_h = t.require("horizon"), c_sub = t.require("subsample");
  const int c_score = t.column("score"), c_out = t.column("outcome"), c_prob = t.column("probability"),
            c_draws = t.column("draws");
  auto key = [&](std::size_t r) {
    ScoreRecord s;
    s.model = t.rows[r][static_cast<std::size_t>(c_model)];
    s.dataset = t.rows[r][static_cast<std::size_t>(c_data)];
    s.variable = t.rows[r][static_cast<std::size_t>(c_var)];
    s.horizon = static_cast<int>(io::parse_int(t.rows[r][static_cast<std::size_t>(c_h)], t.where(r)));
    s.subsample = t.rows[r][static_cast<std::size_t>(c_sub)];
    return s;
  };
  std::vector<ScoreRecord> records;
  std::string metric;
  if (c_score >= 0) {
    metric = "score";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      ScoreRecord s = key(r);
      s.score = io::parse_double(t.rows[r][static_cast<std::size_t>(c_score)], t.where(r));
      records.push_back(s);
    }
  } else if (c_draws >= 0 && c_out >= 0) {
    metric = "crps";
    const CrpsEstimator est = c.estimator == "fair" ? CrpsEstimator::fair : CrpsEstimator::plain;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      ScoreRecord s = key(r);
      std::vector<double> draws;
      for (const auto& x : split(t.rows[r][static_cast<std::size_t>(c_draws)], ' '))
        draws.push_back(io::parse_double(x, t.where(r)));
      try {
        s.score = crps_sample(draws, io::parse_double(t.rows[r][static_cast<std::size_t>(c_out)], t.where(r)), est);
      } catch (const TooFewDraws& e) {
        throw ConfigError(t.where(r) + ": " + e.what());
      }
      records.push_back(s);
    }
  } else if (c_prob >= 0 && c_out >= 0) {
    // One AUC per cell; AUC is oriented so that higher is better, so the
    // table reports 1 - AUC as the loss.
    metric = "one_minus_auc";
    std::map<std::tuple<std::string, std::string, std::string, int, std::string>,
             std::pair<std::vector<double>, std::vector<int>>>
        cells;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const ScoreRecord s = key(r);
      auto& cell = cells[{s.model, s.dataset, s.variable, s.horizon, s.subsample}];
      const double p = io::parse_double(t.rows[r][static_cast<std::size_t>(c_prob)], t.where(r));
      if (p < 0.0 || p > 1.0) throw ConfigError(t.where(r) + ": probability outside [0, 1]");
      const double o = io::parse_double(t.rows[r][static_cast<std::size_t>(c_out)], t.where(r));
      if (o != 0.0 && o != 1.0) throw ConfigError(t.where(r) + ": outcome must be 0 or 1");
      cell.first.push_back(p);
      cell.second.push_back(static_cast<int>(o));
    }
    for (const auto& [k, v] : cells) {
      ScoreRecord s{std::get<0>(k), std::get<1>(k), std::get<2>(k), std::get<3>(k), std::get<4>(k), 0.0};
      try {
        s.score = 1.0 - roc_auc(v.first, v.second);
      } catch (const SingleClass& e) {
        throw ConfigError(std::string(e.what()) + " in cell " + s.model + "/" + s.variable + "/h" +
                          std::to_string(s.horizon));
      }
      records.push_back(s);
    }
  } else {
    throw ConfigError(t.path + ": need a score column, outcome+draws, or outcome+probability");
  }
  const auto table = score_table(records, c.benchmark);
  fs::create_directories(c.out);
  std::ofstream f(fs::path(c.out) / "score_table.csv");
  f << "model,dataset,variable,horizon,subsample,metric,count,mean,ratio\n";
  for (const auto& cell : table)
    f << cell.model << ',' << cell.dataset << ',' << cell.variable << ',' << cell.horizon << ',' << cell.subsample
      << ',' << metric << ',' << cell.count << ',' << io::format_double(cell.mean) << ','
      << io::format_double(cell.ratio) << '\n';
  write_manifest(c.out, c, json{{"metric", metric}, {"cells", table.size()}});
  std::cout << "evaluate: " << table.size() << " cells (" << metric << ") -> " << c.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  JobConfig c;
  CLI::App app{"Bayesian VAR for mixed binary, censored and continuous data"};
  app.set_config("--config", "", "key=value configuration file (command-line flags take precedence)");
  app.add_option("command", c.command, "estimate | forecast | girf | simulate | evaluate")
      ->required()
      ->check(CLI::IsMember({"estimate", "forecast", "girf", "simulate", "evaluate"}));
  app.add_option("--data", c.data, "panel CSV (date column first, empty cells missing)");
  app.add_option("--meta", c.meta, "variable metadata CSV (code, kind, threshold, transform)");
  app.add_option("--out", c.out, "output directory")->capture_default_str();
  app.add_option("--draws", c.draws, "directory written by estimate");
  app.add_option("--restrictions", c.restrictions, "forecast restriction CSV");
  app.add_option("--scores", c.scores, "evaluation input CSV");
  app.add_option("--lags", c.lags, "VAR lag order P")->capture_default_str();
  app.add_option("--het", c.het, "outlier-adjusted heteroskedasticity on/off")->capture_default_str();
  app.add_option("--probit", c.probit, "keep binary variables (probit block) on/off")->capture_default_str();
  app.add_option("--tobit", c.tobit, "treat censored variables as censored on/off")->capture_default_str();
  app.add_option("--iters", c.iters, "Gibbs sweeps per chain")->capture_default_str();
  app.add_option("--burn", c.burn, "burn-in sweeps")->capture_default_str();
  app.add_option("--thin", c.thin, "keep every k-th sweep")->capture_default_str();
  app.add_option("--chains", c.chains, "independent chains")->capture_default_str();
  app.add_option("--seed", c.seed, "root seed")->capture_default_str();
  app.add_option("--origin", c.origin, "forecast origin: date or 1-based row (default: last row)");
  app.add_option("--horizon", c.horizon, "forecast / response horizon")->capture_default_str();
  app.add_option("--max-draws", c.max_draws, "use at most this many posterior draws (0: all)")->capture_default_str();
  app.add_option("--paths", c.paths, "forecast paths per posterior draw")->capture_default_str();
  app.add_option("--sampler", c.sampler, "truncated Gaussian sampler: zigzag | harmonic")->capture_default_str();
  app.add_option("--shock", c.shock, "variable code of the shocked variable (default: first)");
  app.add_option("--ordering", c.ordering, "comma-separated recursive ordering (default: panel order)");
  app.add_option("--origins", c.origins, "GIRF origins: all, or rows/dates and a:b ranges")->capture_default_str();
  app.add_option("--sizes", c.sizes, "shock sizes in SDs")->capture_default_str();
  app.add_option("--per-origin", c.per_origin, "also write per-origin GIRFs")->capture_default_str();
  app.add_option("--cumulate", c.cumulate, "cumulate responses of log-differenced variables")->capture_default_str();
  app.add_option("--nb", c.nb, "simulate: binary variables")->capture_default_str();
  app.add_option("--nc", c.nc, "simulate: censored variables")->capture_default_str();
  app.add_option("--nu", c.nu, "simulate: unrestricted variables")->capture_default_str();
  app.add_option("--t-keep", c.t_keep, "simulate: kept periods")->capture_default_str();
  app.add_option("--t-burn", c.t_burn, "simulate: discarded periods")->capture_default_str();
  app.add_option("--recover", c.recover, "simulate: also run the recovery experiment")->capture_default_str();
  app.add_option("--benchmark", c.benchmark, "evaluate: benchmark model")->capture_default_str();
  app.add_option("--estimator", c.estimator, "evaluate: CRPS estimator fair | plain")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  try {
    if (c.command == "estimate") return cmd_estimate(c);
    if (c.command == "forecast") return cmd_forecast(c);
    if (c.command == "girf") return cmd_girf(c);
    if (c.command == "simulate") return cmd_simulate(c);
    return cmd_evaluate(c);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const mixvar::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
