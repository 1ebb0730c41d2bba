#include "z2lab/experiment.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "z2lab/cluster.hpp"
#include "z2lab/constants.hpp"
#include "z2lab/exact.hpp"
#include "z2lab/free.hpp"

#ifndef Z2LAB_BUILD_ID
#define Z2LAB_BUILD_ID "unknown"
#endif

namespace z2lab {

const char* build_id() { return Z2LAB_BUILD_ID; }

namespace {

constexpr const char* kKindNames[] = {"verify", "constants", "exact", "mc", "scan", "cluster", "free-report"};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end || v.empty()) throw ParseError(key + ": expected an integer, got '" + v + "'");
  return x;
}

int to_int32(const std::string& key, const std::string& v) {
  const long long x = to_int(key, v);
  if (x < -2147483647LL || x > 2147483647LL) throw ParseError(key + ": out of range");
  return static_cast<int>(x);
}

double to_double(const std::string& key, const std::string& v) {
  if (v.empty()) throw ParseError(key + ": expected a number");
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || !std::isfinite(x)) throw ParseError(key + ": expected a number, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ParseError(key + ": expected a boolean, got '" + v + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split(v, ',')) out.push_back(to_double(key, s));
  if (out.empty()) throw ParseError(key + ": empty list");
  return out;
}

std::vector<int> to_ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& s : split(v, ',')) out.push_back(to_int32(key, s));
  if (out.empty()) throw ParseError(key + ": empty list");
  return out;
}

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& xs, const std::string& sep, F f) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? sep : "") + f(xs[i]);
  return s;
}

Lattice make_lattice(const ExperimentConfig& c) {
  if (c.lattice == "box") return Lattice::box(c.m, c.N);
  if (c.lattice == "single_edge") return tiny::single_edge();
  if (c.lattice == "single_plaquette") return tiny::single_plaquette();
  if (c.lattice == "cube2") return tiny::cube2();
  if (c.lattice == "slab") return tiny::slab();
  throw ParseError("lattice: unknown '" + c.lattice + "'");
}

// Configured walk, or lo -> lo + e0 -> lo + e0 + e1 (as far as the box allows).
Path config_path(const Lattice& lat, const ExperimentConfig& c) {
  if (!c.path.empty()) return Path::walk(lat, c.path);
  std::vector<Point> w{lat.lo()};
  for (int a = 0; a < std::min(2, lat.dim()); ++a) {
    Point x = w.back();
    x[a] += 1;
    if (lat.contains(x)) w.push_back(x);
  }
  return Path::walk(lat, w);
}

Value b(bool x) { return Value{x}; }
Value d(double x) { return Value{x}; }
Value i(long long x) { return Value{x}; }
Value s(std::string x) { return Value{std::move(x)}; }

Table verify_table(const ExperimentConfig& c) {
  const TinyLattice tl(make_lattice(c));
  const Path g = config_path(tl.lattice(), c);
  Table t;
  t.columns = {"lattice", "beta", "kappa", "identity", "discrepancy", "pass"};
  const std::pair<IdentityKind, const char*> kinds[] = {{IdentityKind::UnitaryGauge, "unitary_gauge"},
                                                        {IdentityKind::HighTempConf, "high_temp_conf"},
                                                        {IdentityKind::HighTempFree, "high_temp_free"}};
  for (const auto& p : c.grid())
    for (const auto& [k, name] : kinds) {
      const double disc = verify_identity(k, tl, p, g);
      t.rows.push_back({s(c.lattice), d(p.beta), d(p.kappa), s(name), d(disc), b(disc <= 1e-10)});
    }
  return t;
}

Table constants_table(const ExperimentConfig& c) {
  const auto k = compute_constants(c.m, c.d0_exponent);
  const auto rep = ceps_report(k, c.eps);
  Table t;
  t.columns = {"m",  "M0", "M1", "M2", "M3", "alpha", "kappa0", "beta0_conf", "D0", "d0_exponent",
               "eps", "ceps", "ceps_closed_form", "ceps_closed_form_divergent"};
  t.rows.push_back({i(k.m), i(k.M0), i(k.M1), i(k.M2), i(k.M3), d(k.alpha_higgs), d(k.kappa0_higgs), d(k.beta0_conf),
                    d(k.D0), i(k.d0_exponent), d(c.eps), d(rep.rigorous), d(rep.closed_form),
                    b(rep.closed_form_divergent)});
  return t;
}

Table exact_table(const ExperimentConfig& c) {
  const TinyLattice tl(make_lattice(c));
  const Lattice& lat = tl.lattice();
  Table t;
  t.columns = {"lattice", "beta", "kappa", "R", "T", "w1", "w2", "w12", "rho", "log_rho"};
  for (const auto& p : c.grid())
    for (auto [R, T] : c.sizes) {
      auto [g1, g2] = build_line_pair(lat, R, T);
      const auto w = exact_expectations(tl, p, {g1, g2, g1 + g2}, Ensemble::Unitary, c.run.threads);
      const auto r = exact_mf_ratio(tl, p, g1, g2);
      t.rows.push_back({s(c.lattice), d(p.beta), d(p.kappa), i(R), i(T), d(w[0].mean), d(w[1].mean), d(w[2].mean),
                        d(r.ratio), d(r.log_ratio)});
    }
  return t;
}

Table mc_table(const ExperimentConfig& c) {
  const Lattice lat = make_lattice(c);
  const auto grid = c.grid();
  Table t;
  if (c.observable == "correlation") {
    t.columns = {"beta", "kappa", "separation", "distance", "cov", "cov_stderr", "resolved", "rate", "fitted"};
    int perp = (c.axis + 1) % lat.dim();
    Point x(lat.dim(), 0), y = x;
    for (int a = 0; a < lat.dim(); ++a) x[a] = y[a] = std::clamp(0, lat.lo()[a], lat.hi()[a]);
    if (y[perp] + 1 > lat.hi()[perp]) --x[perp]; else ++y[perp];
    const Path templ = c.path.empty() ? Path::walk(lat, {x, y}) : Path::walk(lat, c.path);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      RunConfig rc = c.run;
      rc.seed = c.run.seed + k;
      const auto tab = correlation_decay(lat, grid[k], templ, c.axis, c.separations, rc);
      for (const auto& pt : tab.points)
        t.rows.push_back({d(grid[k].beta), d(grid[k].kappa), i(pt.separation), i(pt.distance), d(pt.cov.mean),
                          d(pt.cov.stderr_), b(pt.resolved), d(tab.rate), i(tab.fitted)});
    }
    return t;
  }
  if (c.observable != "ratio") throw ParseError("observable: expected ratio or correlation");
  t.columns = {"beta", "kappa", "m", "N", "R", "T", "rho", "rho_stderr", "log_rho", "log_rho_stderr",
               "w1", "w1_stderr", "w2", "w2_stderr", "w12", "w12_stderr", "translates", "flag", "sweeps", "seed"};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    RunConfig rc = c.run;
    rc.seed = c.run.seed + k;
    const auto res = estimate_mf_ratios(lat, grid[k], c.sizes, rc);
    for (std::size_t j = 0; j < c.sizes.size(); ++j) {
      const auto& r = res[j];
      t.rows.push_back({d(grid[k].beta), d(grid[k].kappa), i(lat.dim()), i(lat.radius()), i(c.sizes[j].first),
                        i(c.sizes[j].second), d(r.rho.mean), d(r.rho.stderr_), d(r.log_rho.mean), d(r.log_rho.stderr_),
                        d(r.w1.mean), d(r.w1.stderr_), d(r.w2.mean), d(r.w2.stderr_), d(r.w12.mean), d(r.w12.stderr_),
                        i(r.translates), s(ratio_flag_name(r.flag)), i(rc.sweeps), i(static_cast<long long>(rc.seed))});
    }
  }
  return t;
}

Table scan_table(const ExperimentConfig& c) {
  Table t;
  t.columns = split(scan_csv_header(), ',');
  for (const auto& r : scan(c.m, c.N, c.grid(), c.sizes, c.run))
    t.rows.push_back({d(r.params.beta), d(r.params.kappa), i(r.m), i(r.N), i(r.R), i(r.T), d(r.result.rho.mean),
                      d(r.result.rho.stderr_), d(r.result.log_rho.mean), d(r.result.log_rho.stderr_),
                      s(ratio_flag_name(r.result.flag)), i(r.sweeps), i(static_cast<long long>(r.seed))});
  return t;
}

Table cluster_table(const ExperimentConfig& c) {
  const Lattice lat = make_lattice(c);
  Phase phase;
  if (c.phase == "higgs")
    phase = Phase::Higgs;
  else if (c.phase == "confinement")
    phase = Phase::Confinement;
  else
    throw ParseError("phase: expected higgs or confinement");
  SeriesMode mode;
  if (c.mode == "logz") mode = SeriesMode::LogZ;
  else if (c.mode == "logwilson") mode = SeriesMode::LogWilson;
  else if (c.mode == "logrho") mode = SeriesMode::LogRho;
  else if (c.mode == "covariance") mode = SeriesMode::Covariance;
  else throw ParseError("mode: expected logz, logwilson, logrho or covariance");
  const auto k = compute_constants(lat.dim(), c.d0_exponent);
  Table t;
  t.columns = {"phase", "mode", "beta", "kappa", "m", "N", "R", "T", "value", "tail", "tail_valid", "clusters", "note"};
  for (const auto& p : c.grid())
    for (auto [R, T] : c.sizes) {
      auto [g1, g2] = build_line_pair(lat, R, T);
      const auto r = truncated_series(lat, phase, mode, p, {g1, g2}, Truncation{c.n_max, c.size_max}, k, c.eps, c.slack);
      t.rows.push_back({s(c.phase), s(c.mode), d(p.beta), d(p.kappa), i(lat.dim()), i(lat.radius()), i(R), i(T),
                        d(r.value), d(r.tail), b(r.tail_valid), i(static_cast<long long>(r.clusters)), s(r.note)});
    }
  return t;
}

Table free_table(const ExperimentConfig& c) {
  const Lattice lat = make_lattice(c);
  FreeReportOptions o;
  o.alpha = c.alpha;
  o.eps = c.eps;
  o.rows = c.rows;
  o.enumerate_max = c.enumerate_max;
  o.exact = c.exact;
  o.require_admissible = c.require_admissible;
  Table t;
  t.columns = {"beta", "kappa", "R", "T", "admissible", "length", "count_ceiling", "count_connected", "enumerated",
               "weight", "a0", "a1", "a2", "contribution", "sqrt_rho_upper", "rho_upper", "divergent",
               "rho_upper_connected", "divergent_connected", "gamma0_term4_ok", "exact_ratio", "exact_max_rel_error"};
  for (const auto& p : c.grid())
    for (auto [R, T] : c.sizes) {
      const auto rep = mf_ratio_free_report(lat, p, R, T, o);
      const Value ex = rep.exact ? d(rep.exact->ratio_reference) : s("");
      const Value ee = rep.exact ? d(rep.exact->max_rel_error) : s("");
      for (const auto& r : rep.rows)
        t.rows.push_back({d(p.beta), d(p.kappa), i(R), i(T), b(rep.admissible), i(r.length), d(r.count_ceiling),
                          d(r.count_connected), i(r.enumerated), d(r.weight), d(r.a0), d(r.a1), d(r.a2),
                          d(r.contribution), d(rep.sqrt_rho_upper), d(rep.rho_upper), b(rep.divergent),
                          d(rep.rho_upper_connected), b(rep.divergent_connected), b(rep.gamma0_term4_ok), ex, ee});
    }
  return t;
}

nlohmann::ordered_json to_json(const Value& v) {
  return std::visit([](const auto& x) { return nlohmann::ordered_json(x); }, v);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace

ExperimentKind parse_experiment_kind(const std::string& v) {
  for (int k = 0; k < 7; ++k)
    if (v == kKindNames[k]) return static_cast<ExperimentKind>(k);
  throw ParseError("kind: unknown experiment '" + v + "'");
}

const char* experiment_kind_name(ExperimentKind k) { return kKindNames[static_cast<int>(k)]; }

std::vector<ModelParams> ExperimentConfig::grid() const {
  std::vector<ModelParams> g;
  for (double bt : betas)
    for (double kp : kappas) g.push_back({bt, kp});
  return g;
}

std::map<std::string, std::string> ExperimentConfig::resolved() const {
  auto dl = [](const std::vector<double>& v) { return join(v, ",", fmt_double); };
  auto il = [](const std::vector<int>& v) { return join(v, ",", [](int x) { return std::to_string(x); }); };
  auto bl = [](bool x) { return std::string(x ? "true" : "false"); };
  std::map<std::string, std::string> r;
  r["kind"] = experiment_kind_name(kind);
  r["m"] = std::to_string(m);
  r["N"] = std::to_string(N);
  r["lattice"] = lattice;
  r["beta"] = dl(betas);
  r["kappa"] = dl(kappas);
  r["sizes"] = join(sizes, ",", [](const auto& p) { return std::to_string(p.first) + ":" + std::to_string(p.second); });
  r["path"] = join(path, ";", il);
  r["sweeps"] = std::to_string(run.sweeps);
  r["burn_in"] = std::to_string(run.burn());
  r["measure_every"] = std::to_string(run.measure_every);
  r["bins"] = std::to_string(run.bins);
  r["seed"] = std::to_string(run.seed);
  r["update"] = run.update == UpdateKind::HeatBath ? "heatbath" : "metropolis";
  r["vertex_moves"] = bl(run.vertex_moves);
  r["rao_blackwell"] = bl(run.rao_blackwell);
  r["translate"] = bl(run.translate);
  r["margin"] = std::to_string(run.margin);
  r["chains"] = std::to_string(run.chains);
  r["threads"] = std::to_string(run.threads);
  r["observable"] = observable;
  r["separations"] = il(separations);
  r["axis"] = std::to_string(axis);
  r["phase"] = phase;
  r["mode"] = mode;
  r["n_max"] = std::to_string(n_max);
  r["size_max"] = std::to_string(size_max);
  r["eps"] = fmt_double(eps);
  r["slack"] = fmt_double(slack);
  r["alpha"] = fmt_double(alpha);
  r["rows"] = std::to_string(rows);
  r["enumerate_max"] = std::to_string(enumerate_max);
  r["exact"] = bl(exact);
  r["require_admissible"] = bl(require_admissible);
  r["d0_exponent"] = std::to_string(d0_exponent);
  r["out"] = out.empty() ? experiment_kind_name(kind) : out;
  return r;
}

std::string ExperimentConfig::canonical() const {
  std::string s;
  for (const auto& [k, v] : resolved()) s += k + "=" + v + "\n";
  return s;
}

std::uint64_t ExperimentConfig::hash() const {
  // FNV-1a over everything that can change the results
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : resolved()) {
    if (k == "out" || k == "threads") continue;
    for (char ch : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(ch);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& v) {
  if (key == "kind") c.kind = parse_experiment_kind(v);
  else if (key == "m") c.m = to_int32(key, v);
  else if (key == "N") c.N = to_int32(key, v);
  else if (key == "lattice") c.lattice = v;
  else if (key == "beta") c.betas = to_doubles(key, v);
  else if (key == "kappa") c.kappas = to_doubles(key, v);
  else if (key == "sizes") {
    c.sizes.clear();
    for (const auto& item : split(v, ',')) {
      const auto rt = split(item, ':');
      if (rt.size() != 2) throw ParseError("sizes: expected R:T pairs, got '" + item + "'");
      c.sizes.emplace_back(to_int32(key, rt[0]), to_int32(key, rt[1]));
    }
    if (c.sizes.empty()) throw ParseError("sizes: empty list");
  } else if (key == "path") {
    c.path.clear();
    if (!v.empty())
      for (const auto& pt : split(v, ';')) c.path.push_back(to_ints(key, pt));
  } else if (key == "sweeps") c.run.sweeps = static_cast<long>(to_int(key, v));
  else if (key == "burn_in") c.run.burn_in = static_cast<long>(to_int(key, v));
  else if (key == "measure_every") c.run.measure_every = to_int32(key, v);
  else if (key == "bins") c.run.bins = to_int32(key, v);
  else if (key == "seed") {
    const long long x = to_int(key, v);
    if (x < 0) throw ParseError("seed: must be non-negative");
    c.run.seed = static_cast<std::uint64_t>(x);
  } else if (key == "update") {
    if (v == "heatbath") c.run.update = UpdateKind::HeatBath;
    else if (v == "metropolis") c.run.update = UpdateKind::Metropolis;
    else throw ParseError("update: expected heatbath or metropolis");
  } else if (key == "vertex_moves") c.run.vertex_moves = to_bool(key, v);
  else if (key == "rao_blackwell") c.run.rao_blackwell = to_bool(key, v);
  else if (key == "translate") c.run.translate = to_bool(key, v);
  else if (key == "margin") c.run.margin = to_int32(key, v);
  else if (key == "chains") c.run.chains = to_int32(key, v);
  else if (key == "threads") c.run.threads = to_int32(key, v);
  else if (key == "observable") c.observable = v;
  else if (key == "separations") c.separations = to_ints(key, v);
  else if (key == "axis") c.axis = to_int32(key, v);
  else if (key == "phase") c.phase = v;
  else if (key == "mode") c.mode = v;
  else if (key == "n_max") c.n_max = to_int32(key, v);
  else if (key == "size_max") c.size_max = to_int32(key, v);
  else if (key == "eps") c.eps = to_double(key, v);
  else if (key == "slack") c.slack = to_double(key, v);
  else if (key == "alpha") c.alpha = to_double(key, v);
  else if (key == "rows") c.rows = to_int32(key, v);
  else if (key == "enumerate_max") c.enumerate_max = to_int32(key, v);
  else if (key == "exact") c.exact = to_bool(key, v);
  else if (key == "require_admissible") c.require_admissible = to_bool(key, v);
  else if (key == "d0_exponent") c.d0_exponent = to_int32(key, v);
  else if (key == "out") c.out = v;
  else throw ParseError("unknown key '" + key + "'");
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ParseError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    try {
      set_config_value(base, key, value);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot read config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string format_value(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double>) return fmt_double(x);
        else if constexpr (std::is_same_v<T, long long>) return std::to_string(x);
        else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        else return x;
      },
      v);
}

std::string to_csv(const Table& t) {
  std::string out = join(t.columns, ",", [](const std::string& x) { return x; }) + "\n";
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size()) throw std::logic_error("row width does not match the header");
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::string cell = format_value(row[k]);
      if (cell.find_first_of(",\"\n") != std::string::npos) {
        std::string q = "\"";
        for (char ch : cell) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        cell = q + "\"";
      }
      out += (k ? "," : "") + cell;
    }
    out += "\n";
  }
  return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text, std::vector<std::string>* header) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false, any = false;
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char ch = text[k];
    if (quoted) {
      if (ch == '"' && k + 1 < text.size() && text[k + 1] == '"') {
        cell += '"';
        ++k;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
      any = true;
    } else if (ch == ',') {
      row.push_back(cell);
      cell.clear();
    } else if (ch == '\n') {
      row.push_back(cell);
      rows.push_back(row);
      row.clear();
      cell.clear();
      any = false;
    } else {
      cell += ch;
      any = true;
    }
  }
  if (any || !row.empty()) {
    row.push_back(cell);
    rows.push_back(row);
  }
  if (rows.empty()) throw ParseError("empty CSV");
  if (header) *header = rows.front();
  rows.erase(rows.begin());
  return rows;
}

Table run_table(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::Verify: return verify_table(cfg);
    case ExperimentKind::Constants: return constants_table(cfg);
    case ExperimentKind::Exact: return exact_table(cfg);
    case ExperimentKind::MonteCarlo: return mc_table(cfg);
    case ExperimentKind::Scan: return scan_table(cfg);
    case ExperimentKind::Cluster: return cluster_table(cfg);
    case ExperimentKind::FreeReport: return free_table(cfg);
  }
  throw ParseError("unknown experiment kind");
}

RunArtifacts emit_report(const ExperimentConfig& cfg, const Table& t) {
  if (t.rows.empty()) throw std::runtime_error("no results to report");
  const std::string prefix = cfg.resolved().at("out");
  RunArtifacts a;
  a.csv_path = prefix + ".csv";
  a.json_path = prefix + ".json";
  a.table = t;

  nlohmann::ordered_json j;
  j["kind"] = experiment_kind_name(cfg.kind);
  j["build_id"] = build_id();
  j["seed"] = cfg.run.seed;
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(cfg.hash()));
  j["config_hash"] = hex;
  nlohmann::ordered_json conf = nlohmann::ordered_json::object();
  for (const auto& [k, v] : cfg.resolved()) conf[k] = v;
  j["config"] = conf;
  j["csv"] = a.csv_path.substr(a.csv_path.find_last_of('/') + 1);
  j["columns"] = t.columns;
  j["rows"] = t.rows.size();
  nlohmann::ordered_json sum = nlohmann::ordered_json::object();
  for (const auto& [k, v] : t.summary) sum[k] = to_json(v);
  j["summary"] = sum;

  write_file(a.csv_path, to_csv(t));
  write_file(a.json_path, j.dump(2) + "\n");
  return a;
}

RunArtifacts run(const ExperimentConfig& cfg) { return emit_report(cfg, run_table(cfg)); }

}  // namespace z2lab
