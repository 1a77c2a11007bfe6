#ifndef ZEROTEMP_EXPERIMENTS_HPP
#define ZEROTEMP_EXPERIMENTS_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "zerotemp/coupling.hpp"
#include "zerotemp/dynamics.hpp"
#include "zerotemp/geometry.hpp"
#include "zerotemp/random.hpp"
#include "zerotemp/rejection_free.hpp"
#include "zerotemp/statistics.hpp"

namespace zerotemp {

/// Runs f(0..n-1) on up to `jobs` threads (0 = hardware concurrency). Rethrows the first failure.
template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& f) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex m;
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < n;) {
      try {
        f(k);
      } catch (...) {
        std::lock_guard lock(m);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Simulation-time cap as a function of L.
struct TcapRule {
  enum class Kind { automatic, cube, times_l2, fixed };
  Kind kind = Kind::automatic;
  double value = 0;

  static TcapRule parse(const std::string& s) {
    if (s == "auto") return {};
    if (s == "L3") return {Kind::cube, 0};
    try {
      if (s.size() > 2 && s.substr(s.size() - 2) == "L2") return {Kind::times_l2, std::stod(s.substr(0, s.size() - 2))};
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size() && v > 0) return {Kind::fixed, v};
    } catch (const std::exception&) {
    }
    throw InvalidParameter("bad tcap rule '" + s + "' (auto | L3 | <k>L2 | <number>)");
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::automatic: return "auto";
      case Kind::cube: return "L3";
      case Kind::times_l2: return format_double(value) + "L2";
      case Kind::fixed: return format_double(value);
    }
    return "auto";
  }

  double eval(int L, bool cylinder) const {
    const double l = L;
    switch (kind) {
      case Kind::automatic: {
        if (cylinder) return l * l * l;
        const double lg = std::log(l);
        return 20.0 * l * l * std::max(1.0, lg * lg);
      }
      case Kind::cube: return l * l * l;
      case Kind::times_l2: return value * l * l;
      case Kind::fixed: return value;
    }
    return l * l * l;
  }
};

/// A hitting-time campaign: R replicas per L of the all-minus start.
struct CampaignConfig {
  std::string id = "campaign";
  int d = 2;
  std::vector<int> Ls;
  std::string preset = "hypercube";  // hypercube | layered | cylinder | cylinder-plus
  int replicas = 1;
  std::uint64_t seed = 1;
  Engine engine = Engine::rejection_free;
  TcapRule tcap;
  double c0 = 10.0;
  double c1 = 6.6;
  double c2 = 1.5;
  LogBase log_base = LogBase::natural;
  double layer_factor = 1.0;  // layered preset: layer j frozen until (j-1) * layer_factor * L^2
  bool timing = false;        // record wall time (breaks byte-identical output)

  bool cylinder_preset() const { return preset == "cylinder" || preset == "cylinder-plus"; }

  void validate() const {
    if (replicas < 1) throw InvalidParameter("replicas must be >= 1");
    if (Ls.empty()) throw InvalidParameter("Ls must list at least one side length");
    auto sorted = Ls;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw InvalidParameter("Ls must be distinct");
    for (int L : Ls)
      if (L < 1) throw InvalidParameter("side lengths must be >= 1");
    if (d < 1 || d > kMaxDim) throw InvalidParameter("dim must be in [1, 6]");
    if (!(c1 > 6.5)) throw InvalidParameter("c1 must exceed 13/2");
    if (!(c0 > c1 + 2 * c2)) throw InvalidParameter("c0 must exceed c1 + 2 c2");
    if (preset != "hypercube" && preset != "layered" && !cylinder_preset())
      throw InvalidParameter("unknown preset '" + preset + "'");
    if (cylinder_preset())
      for (int L : Ls) GeometryParams{L, d, c2, log_base}.validate();
    if (preset == "layered" && !(layer_factor >= 0)) throw InvalidParameter("layer_factor must be >= 0");
  }

  std::string canonical() const {
    std::ostringstream os;
    os << "id=" << id << "\ndim=" << d << "\nLs=";
    for (std::size_t k = 0; k < Ls.size(); ++k) os << (k ? "," : "") << Ls[k];
    os << "\npreset=" << preset << "\nreplicas=" << replicas << "\nseed=" << seed << "\nengine=" << to_string(engine)
       << "\ntcap=" << tcap.to_string() << "\nc0=" << format_double(c0) << "\nc1=" << format_double(c1)
       << "\nc2=" << format_double(c2) << "\nlogbase=" << to_string(log_base)
       << "\nlayer_factor=" << format_double(layer_factor) << "\ntiming=" << (timing ? 1 : 0) << "\n";
    return os.str();
  }

  std::string hash() const {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_bytes(canonical())));
    return buf;
  }

  /// Plain key=value text; '#' starts a comment.
  static CampaignConfig parse(std::string_view text) {
    CampaignConfig c;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw InvalidParameter("config line " + std::to_string(lineno) + ": expected key=value");
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      try {
        if (key == "id") c.id = val;
        else if (key == "dim") c.d = std::stoi(val);
        else if (key == "Ls") {
          c.Ls.clear();
          std::istringstream ls(val);
          for (std::string tok; std::getline(ls, tok, ',');) c.Ls.push_back(std::stoi(trim(tok)));
        } else if (key == "preset") c.preset = val;
        else if (key == "replicas") c.replicas = std::stoi(val);
        else if (key == "seed") c.seed = std::stoull(val);
        else if (key == "engine") c.engine = parse_engine(val);
        else if (key == "tcap") c.tcap = TcapRule::parse(val);
        else if (key == "c0") c.c0 = std::stod(val);
        else if (key == "c1") c.c1 = std::stod(val);
        else if (key == "c2") c.c2 = std::stod(val);
        else if (key == "logbase") c.log_base = parse_log_base(val);
        else if (key == "layer_factor") c.layer_factor = std::stod(val);
        else if (key == "timing") c.timing = val == "1" || val == "true";
        else throw InvalidParameter("unknown config key '" + key + "'");
      } catch (const InvalidParameter&) {
        throw;
      } catch (const std::exception&) {
        throw InvalidParameter("config line " + std::to_string(lineno) + ": bad value for '" + key + "'");
      }
    }
    c.validate();
    return c;
  }
};

struct HittingRecord {
  int d = 0;
  int L = 0;
  std::uint64_t replica = 0;
  std::uint64_t seed = 0;
  std::optional<double> t_plus;
  std::uint64_t events = 0;
  double wall_ms = 0;
  bool timeout() const { return !t_plus; }
  friend bool operator==(const HittingRecord&, const HittingRecord&) = default;
};

inline constexpr std::string_view kCsvHeader = "d,L,replica,seed,t_plus,timeout,events,wall_ms";

inline std::string csv_row(const HittingRecord& r) {
  std::ostringstream os;
  os << r.d << ',' << r.L << ',' << r.replica << ',' << r.seed << ',' << (r.t_plus ? format_double(*r.t_plus) : "")
     << ',' << (r.timeout() ? 1 : 0) << ',' << r.events << ',' << format_double(r.wall_ms);
  return os.str();
}

inline HittingRecord parse_csv_row(const std::string& line) {
  std::vector<std::string> f;
  std::istringstream is(line);
  for (std::string tok; std::getline(is, tok, ',');) f.push_back(tok);
  if (line.size() && line.back() == ',') f.emplace_back();
  if (f.size() != 8) throw InvalidInput("malformed CSV row '" + line + "'");
  HittingRecord r;
  try {
    r.d = std::stoi(f[0]);
    r.L = std::stoi(f[1]);
    r.replica = std::stoull(f[2]);
    r.seed = std::stoull(f[3]);
    const bool timeout = f[5] == "1";
    if (!timeout) r.t_plus = std::stod(f[4]);
    r.events = std::stoull(f[6]);
    r.wall_ms = std::stod(f[7]);
  } catch (const std::exception&) {
    throw InvalidInput("malformed CSV row '" + line + "'");
  }
  return r;
}

inline std::string csv_document(const std::string& comment, const std::vector<HittingRecord>& records) {
  std::string out = "# " + comment + "\n" + std::string(kCsvHeader) + "\n";
  for (const auto& r : records) out += csv_row(r) + "\n";
  return out;
}

inline std::vector<HittingRecord> read_csv(std::istream& in) {
  std::vector<HittingRecord> out;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kCsvHeader) throw InvalidInput("unexpected CSV header '" + line + "'");
      header = true;
      continue;
    }
    out.push_back(parse_csv_row(line));
  }
  if (!header) throw InvalidInput("CSV header missing");
  return out;
}

inline std::vector<HittingRecord> read_csv_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw InvalidParameter("cannot open " + p.string());
  return read_csv(in);
}

/// Writes through a temporary file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& p, const std::string& content) {
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidParameter("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw InvalidParameter("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, p);
}

/// Initial state for one L of a campaign: region, boundary and filters (all minus start).
struct ReplicaTemplate {
  std::shared_ptr<const Topology> topology;
  BoundaryCondition bc;
  std::vector<UpdateFilter> filters;
};

inline ReplicaTemplate make_replica_template(const CampaignConfig& cfg, int L) {
  ReplicaTemplate t;
  if (cfg.cylinder_preset()) {
    const GeometryParams gp{L, cfg.d, cfg.c2, cfg.log_base};
    Region cyl = cylinder(gp);
    t.bc = cfg.preset == "cylinder" ? eta0(gp, cyl) : BoundaryCondition::uniform(cyl, kPlus);
    t.topology = Topology::build(std::move(cyl));
    return t;
  }
  Region cube = hypercube(L, cfg.d);
  t.bc = BoundaryCondition::uniform(cube, kPlus);
  t.topology = Topology::build(std::move(cube));
  if (cfg.preset == "layered") {
    // Layer j (last coordinate) is blocked until (j - 1) * layer time.
    const double layer_time = cfg.layer_factor * L * L;
    const auto& reg = t.topology->region();
    for (int j = 2; j <= L; ++j) {
      FreezeRegion f{std::vector<std::uint8_t>(reg.size(), 0), (j - 1) * layer_time};
      for (std::size_t k = 0; k < reg.size(); ++k) f.mask[k] = reg.coord(k, cfg.d - 1) == j;
      t.filters.push_back(std::move(f));
    }
  }
  return t;
}

inline StreamLabel replica_label(const CampaignConfig& cfg, int L, std::uint64_t replica) {
  return {cfg.id + "/d=" + std::to_string(cfg.d) + "/L=" + std::to_string(L), replica, "events"};
}

/// One replica from all minus; engine and filters as configured.
inline HittingRecord run_replica(const CampaignConfig& cfg, const ReplicaTemplate& tpl, int L, std::uint64_t replica) {
  HittingRecord rec;
  rec.d = cfg.d;
  rec.L = L;
  rec.replica = replica;
  rec.seed = derive_seed(cfg.seed, replica_label(cfg, L, replica));
  const double t_cap = cfg.tcap.eval(L, cfg.cylinder_preset());
  const auto start = std::chrono::steady_clock::now();
  DynamicsState st(tpl.topology, tpl.bc, SpinField(tpl.topology->size(), kMinus), cfg.engine);
  for (const auto& f : tpl.filters) st.add_filter(f);
  AbsorptionResult res;
  if (cfg.engine == Engine::graphical) {
    EventStream stream(rec.seed, tpl.topology->size());
    res = run_to_absorption(st, stream, t_cap);
  } else {
    RejectionFreeEngine rf(st, rec.seed);
    res = rf.run_to_absorption(t_cap);
  }
  rec.t_plus = res.t_plus;
  rec.events = res.events;
  if (cfg.timing)
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

/// All replicas for all L; records come back sorted by (L order in config, replica).
/// `on_record` is called (serialised) as each replica completes, in completion order.
inline std::vector<HittingRecord> run_campaign(const CampaignConfig& cfg, unsigned jobs = 0,
                                               const std::function<void(const HittingRecord&)>& on_record = {}) {
  cfg.validate();
  std::vector<HittingRecord> out(cfg.Ls.size() * static_cast<std::size_t>(cfg.replicas));
  std::mutex m;
  for (std::size_t li = 0; li < cfg.Ls.size(); ++li) {
    const int L = cfg.Ls[li];
    const ReplicaTemplate tpl = make_replica_template(cfg, L);
    parallel_for(static_cast<std::size_t>(cfg.replicas), jobs, [&](std::size_t r) {
      auto rec = run_replica(cfg, tpl, L, r);
      out[li * static_cast<std::size_t>(cfg.replicas) + r] = rec;
      if (on_record) {
        std::lock_guard lock(m);
        on_record(rec);
      }
    });
  }
  return out;
}

/// Campaign with a crash-safe journal: rows are appended to `<csv>.partial` as they finish;
/// the sorted CSV replaces it atomically at the end.
inline std::vector<HittingRecord> run_campaign_to_csv(const CampaignConfig& cfg, const std::filesystem::path& csv,
                                                      unsigned jobs = 0) {
  auto partial = csv;
  partial += ".partial";
  std::ofstream journal(partial, std::ios::trunc);
  if (!journal) throw InvalidParameter("cannot write " + partial.string());
  journal << "# journal config_hash=" << cfg.hash() << " seed=" << cfg.seed << "\n" << kCsvHeader << "\n";
  journal.flush();
  auto recs = run_campaign(cfg, jobs, [&](const HittingRecord& r) { journal << csv_row(r) << "\n" << std::flush; });
  journal.close();
  write_file_atomic(csv, csv_document("config_hash=" + cfg.hash() + " seed=" + std::to_string(cfg.seed), recs));
  std::filesystem::remove(partial);
  return recs;
}

struct TmixEstimate {
  int L = 0;
  double value = 0;
  double ci_low = 0;
  double ci_high = 0;  // +inf when the upper rank falls on a timeout
  std::size_t samples = 0;
  std::size_t timeouts = 0;
};

/// 75th percentile of T+ (linear interpolation), with a 95% order-statistic interval.
/// Timeouts count as +inf; refused when more than a quarter time out.
inline TmixEstimate estimate_tmix(std::span<const HittingRecord> recs, std::size_t min_samples = 20) {
  TmixEstimate est;
  std::vector<double> v;
  for (const auto& r : recs) {
    if (r.timeout()) ++est.timeouts;
    else v.push_back(*r.t_plus);
  }
  if (!recs.empty()) est.L = recs.front().L;
  est.samples = recs.size();
  if (v.size() < min_samples)
    throw InsufficientData("T_mix needs at least " + std::to_string(min_samples) + " completed samples, have " +
                           std::to_string(v.size()));
  if (4 * est.timeouts > recs.size())
    throw InsufficientData("more than 25% of samples timed out; the 75th percentile is censored");
  std::sort(v.begin(), v.end());
  v.insert(v.end(), est.timeouts, std::numeric_limits<double>::infinity());
  est.value = stats::quantile_sorted(v, 0.75);
  if (std::isinf(est.value)) throw InsufficientData("75th percentile falls on a timeout");
  const auto [r, s] = stats::order_statistic_ci_ranks(v.size(), 0.75);
  est.ci_low = v[r - 1];
  est.ci_high = v[s - 1];
  return est;
}

/// Records grouped by L, in increasing L.
inline std::map<int, std::vector<HittingRecord>> group_by_L(std::span<const HittingRecord> recs) {
  std::map<int, std::vector<HittingRecord>> g;
  for (const auto& r : recs) g[r.L].push_back(r);
  return g;
}

enum class ScalingModel { pure, polylog, polylog_fixed };

struct ScalingPoint {
  double L = 0;
  double T = 0;
};

struct ScalingFit {
  ScalingModel model = ScalingModel::pure;
  double exponent = 0;
  double amplitude = 0;
  std::optional<double> polylog_power;
  double exponent_se = 0;
  double ci_low = 0;
  double ci_high = 0;  // NaN when no residual degrees of freedom remain
  std::vector<double> residuals;  // in log T
};

/// Least squares on log T = log a + b log L [+ c log log L].
inline ScalingFit fit_scaling(std::span<const ScalingPoint> pts, ScalingModel model = ScalingModel::pure,
                              double fixed_power = 0.0) {
  if (pts.size() < 3) throw InsufficientData("scaling fit needs at least 3 L values");
  bool distinct = false;
  for (const auto& p : pts) {
    if (!(p.L > 0) || !(p.T > 0)) throw InvalidInput("scaling fit needs positive L and T");
    if (model != ScalingModel::pure && !(p.L > 1)) throw InvalidInput("polylog fit needs L > 1");
    distinct = distinct || p.L != pts.front().L;
  }
  if (!distinct) throw InvalidInput("degenerate design: all L equal");
  const int cols = model == ScalingModel::polylog ? 3 : 2;
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd X(n, cols);
  Eigen::VectorXd y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& p = pts[static_cast<std::size_t>(k)];
    const double ll = std::log(p.L);
    X(k, 0) = 1.0;
    X(k, 1) = ll;
    y(k) = std::log(p.T);
    if (model == ScalingModel::polylog) X(k, 2) = std::log(ll);
    if (model == ScalingModel::polylog_fixed) y(k) -= fixed_power * std::log(ll);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < cols) throw InvalidInput("degenerate design matrix");
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd res = y - X * beta;

  ScalingFit fit;
  fit.model = model;
  fit.amplitude = std::exp(beta(0));
  fit.exponent = beta(1);
  if (model == ScalingModel::polylog) fit.polylog_power = beta(2);
  if (model == ScalingModel::polylog_fixed) fit.polylog_power = fixed_power;
  fit.residuals.assign(res.data(), res.data() + res.size());
  const auto dof = n - cols;
  if (dof > 0) {
    const double sigma2 = res.squaredNorm() / static_cast<double>(dof);
    const Eigen::MatrixXd cov = sigma2 * (X.transpose() * X).inverse();
    fit.exponent_se = std::sqrt(std::max(0.0, cov(1, 1)));
    const boost::math::students_t_distribution<double> t(static_cast<double>(dof));
    const double q = boost::math::quantile(boost::math::complement(t, 0.025));
    fit.ci_low = fit.exponent - q * fit.exponent_se;
    fit.ci_high = fit.exponent + q * fit.exponent_se;
  } else {
    fit.exponent_se = std::numeric_limits<double>::quiet_NaN();
    fit.ci_low = fit.ci_high = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

/// Per-L T_mix estimates followed by a scaling fit.
inline std::vector<TmixEstimate> tmix_by_L(std::span<const HittingRecord> recs, std::size_t min_samples = 20) {
  std::vector<TmixEstimate> out;
  for (const auto& [L, group] : group_by_L(recs)) out.push_back(estimate_tmix(group, min_samples));
  return out;
}

struct LowerBoundReport {
  std::vector<ScalingPoint> points;  // (L, 5th percentile of T+)
  ScalingFit fit;
  bool pass = false;  // fitted exponent >= 1
};

/// Growth exponent of the 5th percentile of T+ in L; the path argument forces it to be >= 1.
inline LowerBoundReport linear_lower_sanity(std::span<const HittingRecord> recs) {
  LowerBoundReport rep;
  for (const auto& [L, group] : group_by_L(recs)) {
    std::vector<double> v;
    for (const auto& r : group) v.push_back(r.t_plus.value_or(std::numeric_limits<double>::infinity()));
    if (v.empty()) continue;
    const double q = stats::quantile(v, 0.05);
    if (std::isinf(q)) throw InsufficientData("5th percentile at L=" + std::to_string(L) + " is a timeout");
    rep.points.push_back({static_cast<double>(L), q});
  }
  if (rep.points.size() < 3) throw InsufficientData("lower-bound check needs at least 3 L values");
  rep.fit = fit_scaling(rep.points);
  rep.pass = rep.fit.exponent >= 1.0 - 1e-9;
  return rep;
}

struct EnvelopeConfig {
  GeometryParams gp;
  int replicas = 10;
  std::uint64_t seed = 1;
  double c0 = 10.0;
  Engine engine = Engine::rejection_free;
  std::string id = "envelope";
};

struct EnvelopeRow {
  int i = 0;
  double time = 0;
  int violations = 0;
  int replicas = 0;
  double fraction() const { return replicas ? static_cast<double>(violations) / replicas : 0.0; }
};

struct EnvelopeReport {
  double checkpoint_unit = 0;  // L (log L)^c0
  int absorbed = 0;
  std::vector<EnvelopeRow> rows;
};

/// Cylinder under eta0 from all minus: at t_i = i L (log L)^c0, is any minus outside C^(i)?
inline EnvelopeReport envelope_check(const EnvelopeConfig& cfg, unsigned jobs = 0) {
  const auto& gp = cfg.gp;
  gp.validate();
  if (cfg.replicas < 1) throw InvalidParameter("replicas must be >= 1");
  Region cyl = cylinder(gp);
  const BoundaryCondition bc = eta0(gp, cyl);
  std::vector<std::int16_t> level(cyl.size());
  for (std::size_t k = 0; k < cyl.size(); ++k) level[k] = static_cast<std::int16_t>(shrink_level(gp, cyl.site(k)));
  const auto topo = Topology::build(std::move(cyl));

  EnvelopeReport rep;
  rep.checkpoint_unit = gp.L * std::pow(log_in_base(gp.L, gp.log_base), cfg.c0);
  const int imax = gp.max_shrink();
  rep.rows.resize(static_cast<std::size_t>(imax + 1));
  for (int i = 0; i <= imax; ++i) rep.rows[static_cast<std::size_t>(i)] = {i, i * rep.checkpoint_unit, 0, cfg.replicas};

  std::vector<std::vector<std::uint8_t>> viol(static_cast<std::size_t>(cfg.replicas));
  std::vector<std::uint8_t> absorbed(static_cast<std::size_t>(cfg.replicas), 0);
  parallel_for(static_cast<std::size_t>(cfg.replicas), jobs, [&](std::size_t r) {
    const auto seed = derive_seed(cfg.seed, {cfg.id + "/L=" + std::to_string(gp.L), r, "events"});
    DynamicsState st(topo, bc, SpinField(topo->size(), kMinus), cfg.engine);
    std::optional<RejectionFreeEngine> rf;
    std::optional<EventStream> stream;
    if (cfg.engine == Engine::rejection_free) rf.emplace(st, seed);
    else stream.emplace(seed, topo->size());
    auto& v = viol[r];
    v.assign(static_cast<std::size_t>(imax + 1), 0);
    for (int i = 0; i <= imax; ++i) {
      if (!st.field().all_plus()) {
        const double t = i * rep.checkpoint_unit;
        if (rf) rf->run_until(t);
        else run_until(st, *stream, t);
      }
      if (st.field().all_plus()) continue;
      int min_level = std::numeric_limits<int>::max();
      for (std::size_t k = 0; k < st.field().size(); ++k)
        if (st.field()[k] == kMinus) min_level = std::min<int>(min_level, level[k]);
      v[static_cast<std::size_t>(i)] = min_level < i;
    }
    absorbed[r] = st.field().all_plus();
  });
  for (int r = 0; r < cfg.replicas; ++r) {
    rep.absorbed += absorbed[static_cast<std::size_t>(r)];
    for (int i = 0; i <= imax; ++i) rep.rows[static_cast<std::size_t>(i)].violations += viol[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)];
  }
  return rep;
}

}  // namespace zerotemp

#endif  // ZEROTEMP_EXPERIMENTS_HPP
