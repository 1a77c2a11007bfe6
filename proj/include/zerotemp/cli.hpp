#ifndef ZEROTEMP_CLI_HPP
#define ZEROTEMP_CLI_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "zerotemp/coupling.hpp"
#include "zerotemp/dynamics.hpp"
#include "zerotemp/experiments.hpp"
#include "zerotemp/geometry.hpp"
#include "zerotemp/rejection_free.hpp"

#ifndef ZEROTEMP_VERSION
#define ZEROTEMP_VERSION "0.0.0"
#endif

namespace zerotemp::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kUsage = 1, kViolation = 2, kInsufficient = 3 };

namespace detail {

inline std::string hex64(std::uint64_t x) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

// Config echo plus its hash, so every output can be traced back to the exact invocation.
inline Json with_config(const std::string& command, Json config) {
  Json out;
  out["command"] = command;
  out["version"] = ZEROTEMP_VERSION;
  out["config"] = config;
  out["config_hash"] = hex64(hash_bytes(config.dump()));
  return out;
}

inline Json opt_double(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline unsigned resolve_jobs(unsigned jobs) {
  if (jobs > 0) return jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

inline Json fit_json(const ScalingFit& f) {
  Json j;
  j["model"] = f.model == ScalingModel::pure ? "pure" : (f.model == ScalingModel::polylog ? "polylog" : "polylog-fixed");
  j["exponent"] = f.exponent;
  j["exponent_se"] = f.exponent_se;
  j["ci95"] = Json::array({f.ci_low, f.ci_high});
  j["amplitude"] = f.amplitude;
  j["polylog_power"] = opt_double(f.polylog_power);
  j["residuals"] = f.residuals;
  return j;
}

inline Json tmix_json(const TmixEstimate& e) {
  Json j;
  j["L"] = e.L;
  j["tmix"] = e.value;
  j["ci95"] = Json::array({e.ci_low, e.ci_high});
  j["samples"] = e.samples;
  j["timeouts"] = e.timeouts;
  return j;
}

// T_mix per L, pure fit, polylog diagnostic and lower-bound sanity; refusals are reported in place.
inline Json summarize(std::span<const HittingRecord> recs, std::size_t min_samples, ScalingModel model, double power) {
  Json s;
  Json per_L = Json::array();
  std::vector<ScalingPoint> pts;
  Json refused = Json::array();
  for (const auto& [L, group] : group_by_L(recs)) {
    try {
      const auto e = estimate_tmix(group, min_samples);
      per_L.push_back(tmix_json(e));
      pts.push_back({static_cast<double>(L), e.value});
    } catch (const InsufficientData& ex) {
      refused.push_back(Json{{"L", L}, {"reason", ex.what()}});
    }
  }
  s["tmix"] = per_L;
  s["refused"] = refused;
  try {
    s["fit"] = fit_json(fit_scaling(pts, model, power));
  } catch (const std::exception& ex) {
    s["fit"] = nullptr;
    s["fit_error"] = ex.what();
  }
  if (model == ScalingModel::pure && pts.size() >= 4) {
    try {
      s["polylog_diagnostic"] = fit_json(fit_scaling(pts, ScalingModel::polylog));
    } catch (const std::exception&) {
    }
  }
  try {
    const auto lb = linear_lower_sanity(recs);
    s["lower_bound"] = Json{{"exponent", lb.fit.exponent}, {"pass", lb.pass}};
  } catch (const std::exception& ex) {
    s["lower_bound"] = Json{{"error", ex.what()}};
  }
  return s;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Histogram of squared norms of the ball of the given radius, for closed-form shrunk-set sizes.
class BallCounter {
 public:
  explicit BallCounter(double r) {
    zerotemp::detail::for_each_ball_point(r, [&](int, int, int, std::int64_t n) { norms_.push_back(n); });
    std::sort(norms_.begin(), norms_.end());
  }
  std::size_t count(double r) const {
    return static_cast<std::size_t>(std::partition_point(norms_.begin(), norms_.end(),
                                                         [&](std::int64_t n) { return zerotemp::detail::in_ball(n, r); }) -
                                    norms_.begin());
  }

 private:
  std::vector<std::int64_t> norms_;
};

}  // namespace detail

struct SimulateOptions {
  int d = 2;
  int L = 16;
  std::string geometry = "hypercube";
  std::string boundary;  // default depends on geometry
  std::string init = "minus";
  int slab = 0;
  double shell_r = 8, shell_l = 4;
  std::string engine = "rejection-free";
  std::uint64_t seed = 1;
  std::uint64_t replica = 0;
  std::string tcap = "auto";
  std::vector<std::string> filters;
  double c2 = 1.5;
  std::string log_base = "natural";
  bool timing = false;
};

inline Json simulate(const SimulateOptions& o) {
  Json cfg{{"d", o.d},          {"L", o.L},         {"geometry", o.geometry}, {"boundary", o.boundary},
           {"init", o.init},    {"slab", o.slab},   {"shell_r", o.shell_r},   {"shell_l", o.shell_l},
           {"engine", o.engine}, {"seed", o.seed},  {"replica", o.replica},   {"tcap", o.tcap},
           {"filters", o.filters}, {"c2", o.c2},    {"logbase", o.log_base},  {"timing", o.timing}};
  const Engine engine = parse_engine(o.engine);
  const GeometryParams gp{o.L, o.d, o.c2, parse_log_base(o.log_base)};

  Region region;
  std::optional<BoundaryCondition> bc;
  std::string boundary = o.boundary;
  const bool cyl_like = o.geometry == "cylinder" || o.geometry == "slab";
  if (o.geometry == "hypercube") {
    if (o.d < 1 || o.d > kMaxDim) throw InvalidParameter("dimension must be in [1, 6]");
    if (o.L < 1) throw InvalidParameter("L must be >= 1");
    region = hypercube(o.L, o.d);
    if (boundary.empty()) boundary = "plus";
  } else if (o.geometry == "cylinder") {
    gp.validate();
    region = cylinder(gp);
    if (boundary.empty()) boundary = "eta0";
  } else if (o.geometry == "slab") {
    Slab s = eta_slab(gp, o.slab);
    region = std::move(s.region);
    bc = std::move(s.bc);
    if (boundary.empty()) boundary = "eta-slab";
    if (boundary != "eta-slab") throw InvalidParameter("slab geometry takes the eta-slab boundary");
  } else if (o.geometry == "shell") {
    Shell s = shell3(o.shell_r, o.shell_l);
    region = std::move(s.region);
    bc = std::move(s.bc);
    if (boundary.empty()) boundary = "shell";
    if (boundary != "shell") throw InvalidParameter("shell geometry takes the shell boundary");
  } else {
    throw InvalidParameter("unknown geometry '" + o.geometry + "' (hypercube | cylinder | shell | slab)");
  }
  cfg["boundary"] = boundary;
  if (!bc) {
    if (boundary == "plus") bc = BoundaryCondition::uniform(region, kPlus);
    else if (boundary == "eta0" && o.geometry == "cylinder") bc = eta0(gp, region);
    else throw InvalidParameter("boundary '" + boundary + "' does not fit geometry '" + o.geometry + "'");
  }

  const std::uint64_t stream_seed = derive_seed(o.seed, {"simulate", o.replica, "events"});
  std::vector<Spin> init(region.size(), kMinus);
  if (o.init == "plus") std::fill(init.begin(), init.end(), kPlus);
  else if (o.init == "random") {
    CounterRng rng(derive_seed(o.seed, {"simulate", o.replica, "init"}));
    for (auto& s : init) s = rng.next_coin();
  } else if (o.init != "minus") {
    throw InvalidParameter("unknown init '" + o.init + "' (minus | plus | random)");
  }

  DynamicsState st(Topology::build(region), *bc, SpinField(std::move(init)), engine);
  for (const auto& spec : o.filters) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    try {
      if (parts.size() == 2 && parts[0] == "freeze-layers" && o.geometry == "hypercube") {
        const double factor = std::stod(parts[1]);
        for (int j = 2; j <= o.L; ++j) {
          std::vector<std::uint8_t> mask(region.size(), 0);
          for (std::size_t k = 0; k < region.size(); ++k) mask[k] = region.coord(k, o.d - 1) == j;
          st.add_filter(FreezeRegion{std::move(mask), (j - 1) * factor * o.L * o.L});
        }
      } else if (parts.size() == 2 && parts[0] == "block-outside" && cyl_like) {
        st.add_filter(block_minus_outside(region, shrunk_set(gp, std::stoi(parts[1]))));
      } else if (parts.size() == 3 && parts[0] == "freeze" && cyl_like) {
        st.add_filter(freeze_region(region, shrunk_set(gp, std::stoi(parts[1])), std::stod(parts[2])));
      } else {
        throw InvalidParameter("");
      }
    } catch (const std::logic_error&) {
      throw InvalidParameter("bad filter '" + spec +
                             "' (freeze-layers:<factor> | block-outside:<i> | freeze:<i>:<until>)");
    }
  }

  const double t_cap = TcapRule::parse(o.tcap).eval(o.L, o.geometry == "cylinder");
  const auto start = std::chrono::steady_clock::now();
  AbsorptionResult res;
  if (engine == Engine::rejection_free) {
    RejectionFreeEngine rf(st, stream_seed);
    res = rf.run_to_absorption(t_cap);
  } else {
    EventStream stream(stream_seed, region.size());
    res = run_to_absorption(st, stream, t_cap);
  }
  const double wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  Json out = detail::with_config("simulate", cfg);
  out["stream_seed"] = stream_seed;
  out["sites"] = region.size();
  out["t_cap"] = t_cap;
  out["t_plus"] = detail::opt_double(res.t_plus);
  out["timeout"] = res.timeout();
  out["events"] = res.events;
  out["minus_remaining"] = st.field().minus_count();
  out["wall_ms"] = o.timing ? wall : 0.0;
  return out;
}

struct GeometryOptions {
  int d = 4;
  int L = 3;
  double c2 = 1.5;
  std::string log_base = "natural";
  bool check_bdecop = false;
};

inline Json geometry_report(const GeometryOptions& o, bool& ok) {
  const GeometryParams gp{o.L, o.d, o.c2, parse_log_base(o.log_base)};
  gp.validate();
  Json cfg{{"d", o.d}, {"L", o.L}, {"c2", o.c2}, {"logbase", o.log_base}, {"check_bdecop", o.check_bdecop}};
  Json out = detail::with_config("geometry", cfg);
  out["unit"] = gp.unit();
  out["cylinder_radius"] = gp.cylinder_radius();
  out["max_shrink"] = gp.max_shrink();

  const detail::BallCounter balls(gp.cylinder_radius());
  const auto heights = zerotemp::detail::height_vectors(gp.heights(), 1, gp.L);
  out["ball_sites"] = balls.count(gp.cylinder_radius());
  out["cylinder_sites"] = balls.count(gp.cylinder_radius()) * heights.size();
  Json shrunk = Json::array();
  for (int i = 0; i <= gp.max_shrink(); ++i) {
    std::size_t n = 0;
    for (const auto& h : heights) n += balls.count(gp.shrink_radius(gp.slice_index(i, zerotemp::detail::l1(h))));
    shrunk.push_back(Json{{"i", i}, {"sites", n}});
  }
  out["shrunk_sets"] = shrunk;
  ok = true;
  if (o.check_bdecop) {
    const Region cyl = cylinder(gp);
    const bool c0_equal = shrunk_set(gp, 0) == cyl;
    out["cylinder_boundary"] = boundary(cyl).size();
    out["c0_equals_cylinder"] = c0_equal;
    ok = ok && c0_equal;
    Json parts = Json::array();
    for (int i = 0; i <= gp.max_shrink() - 2; ++i) {
      const auto r = check_slab_partition(gp, i);
      parts.push_back(Json{{"i", r.i},
                           {"slab_sites", r.slab_size},
                           {"boundary_sites", r.boundary_size},
                           {"above", r.above},
                           {"below", r.below},
                           {"inner_first", r.inner_first},
                           {"rest", r.rest},
                           {"disjoint", r.disjoint},
                           {"covers", r.covers},
                           {"rest_matches_explicit", r.rest_matches_explicit},
                           {"ok", r.ok()}});
      ok = ok && r.ok();
    }
    out["partition"] = parts;
    out["ok"] = ok;
  }
  return out;
}

struct CoupleOptions {
  std::string mode = "domination";
  std::vector<int> dims{2, 3, 4};
  int max_L = 8;
  int runs = 100;
  double t_max = 20;
  std::uint64_t seed = 1;
  bool inject_fault = false;
};

inline Json couple_check(const CoupleOptions& o, bool& ok) {
  if (o.mode != "domination" && o.mode != "censoring")
    throw InvalidParameter("unknown mode '" + o.mode + "' (domination | censoring)");
  if (o.runs < 1 || o.max_L < 1 || !(o.t_max > 0) || o.dims.empty())
    throw InvalidParameter("couple-check needs runs >= 1, L >= 1, tmax > 0 and at least one dimension");
  for (int d : o.dims)
    if (d < 1 || d > kMaxDim) throw InvalidParameter("dimension must be in [1, 6]");
  Json cfg{{"mode", o.mode},   {"dims", o.dims},   {"max_L", o.max_L},
           {"runs", o.runs},   {"tmax", o.t_max},  {"seed", o.seed},
           {"inject_fault", o.inject_fault}};
  Json out = detail::with_config("couple-check", cfg);
  std::uint64_t events = 0, violations = 0, cancellations = 0;
  Json witnesses = Json::array();
  for (int r = 0; r < o.runs; ++r) {
    const std::uint64_t run_seed = derive_seed(o.seed, {"couple-check", static_cast<std::uint64_t>(r), "run"});
    const int d = o.dims[static_cast<std::size_t>(r) % o.dims.size()];
    const int L = 1 + static_cast<int>(CounterRng(run_seed).at(7) % static_cast<std::uint64_t>(o.max_L));
    std::vector<Violation> v;
    bool prefix_ok = true;
    if (o.mode == "domination") {
      auto rep = random_domination_run(d, L, run_seed, o.t_max, o.inject_fault);
      events += rep.events;
      v = std::move(rep.violations);
    } else {
      auto rep = random_censoring_run(d, L, run_seed, o.t_max);
      events += rep.events;
      cancellations += rep.cancellations;
      prefix_ok = rep.equal_before_first_cancel;
      v = std::move(rep.violations);
    }
    violations += v.size() + (prefix_ok ? 0 : 1);
    if ((!v.empty() || !prefix_ok) && witnesses.size() < 10) {
      Json w{{"run", r}, {"d", d}, {"L", L}, {"seed", run_seed}};
      if (!v.empty()) {
        w["event_index"] = v.front().event_index;
        w["time"] = v.front().event.time;
        w["site"] = v.front().site;
      } else {
        w["reason"] = "censored copy diverged before its first cancellation";
      }
      witnesses.push_back(w);
    }
  }
  out["runs"] = o.runs;
  out["events"] = events;
  if (o.mode == "censoring") out["cancellations"] = cancellations;
  out["violations"] = violations;
  out["witnesses"] = witnesses;
  ok = violations == 0;
  out["ok"] = ok;
  return out;
}

struct SliceOptions {
  int d = 4;
  int L = 3;
  int i = 0;
  bool first_layer = false;
  std::uint64_t events = 0;  // 0: max(1e4, 2N)
  std::uint64_t seed = 1;
  double c2 = 1.5;
  std::string log_base = "natural";
};

inline Json slice_check(const SliceOptions& o, bool& ok) {
  const GeometryParams gp{o.L, o.d, o.c2, parse_log_base(o.log_base)};
  gp.validate();
  Json cfg{{"d", o.d},           {"L", o.L},         {"i", o.first_layer ? Json(nullptr) : Json(o.i)},
           {"first_layer", o.first_layer}, {"events", o.events}, {"seed", o.seed},
           {"c2", o.c2},         {"logbase", o.log_base}};
  const Slab slab = o.first_layer ? first_layer(gp) : eta_slab(gp, o.i);
  const std::uint64_t events = o.events ? o.events : std::max<std::uint64_t>(10000, 2 * slab.region.size());
  const auto rep = zerotemp::detail::check_slices(gp, slab, o.first_layer ? -1 : o.i, events, o.seed);
  Json out = detail::with_config("slice-check", cfg);
  out["slab_sites"] = rep.slab_size;
  out["events"] = rep.events;
  out["height_cancellation"] = rep.cancellation_ok;
  Json slices = Json::array();
  for (const auto& s : rep.slices) {
    Json j{{"heights", s.heights},
           {"sites", s.sites},
           {"flips", s.flips},
           {"boundary_agrees", s.boundary_agrees},
           {"trajectory_matches", s.trajectory_matches}};
    if (s.witness_site) {
      j["witness_site"] = slab.region.site(static_cast<std::size_t>(*s.witness_site)).to_string();
      j["witness_time"] = detail::opt_double(s.witness_time);
    }
    slices.push_back(j);
  }
  out["slices"] = slices;
  ok = rep.ok();
  out["ok"] = ok;
  return out;
}

struct CampaignOptions {
  std::string config;
  std::string out_csv;
  std::string summary;
  unsigned jobs = 0;
  std::size_t min_samples = 20;
};

inline Json campaign(const CampaignOptions& o) {
  const auto cfg = CampaignConfig::parse(detail::read_text(o.config));
  const std::string csv = o.out_csv.empty() ? cfg.id + ".csv" : o.out_csv;
  const std::string summary_path = o.summary.empty() ? csv + ".summary.json" : o.summary;
  const auto recs = run_campaign_to_csv(cfg, csv, detail::resolve_jobs(o.jobs));
  Json out;
  out["command"] = "campaign";
  out["version"] = ZEROTEMP_VERSION;
  out["config"] = cfg.canonical();
  out["config_hash"] = cfg.hash();
  out["seed"] = cfg.seed;
  out["csv"] = csv;
  out["records"] = recs.size();
  out["summary"] = detail::summarize(recs, o.min_samples, ScalingModel::pure, 0);
  write_file_atomic(summary_path, out.dump(2) + "\n");
  return out;
}

struct FitOptions {
  std::string in;
  std::string model = "pure";
  double power = 0;
  std::string emit_plot;
  std::size_t min_samples = 20;
};

inline Json fit(const FitOptions& o) {
  ScalingModel model;
  if (o.model == "pure") model = ScalingModel::pure;
  else if (o.model == "polylog") model = ScalingModel::polylog;
  else if (o.model == "polylog-fixed") model = ScalingModel::polylog_fixed;
  else throw InvalidParameter("unknown model '" + o.model + "' (pure | polylog | polylog-fixed)");

  const std::string text = detail::read_text(o.in);
  std::string header_comment;
  if (text.rfind("# ", 0) == 0) header_comment = text.substr(2, text.find('\n') - 2);
  std::istringstream in(text);
  const auto recs = read_csv(in);
  if (recs.empty()) throw InsufficientData("no records in " + o.in);

  Json cfg{{"in", o.in}, {"model", o.model}, {"power", o.power}, {"min_samples", o.min_samples}};
  Json out = detail::with_config("fit", cfg);
  out["source"] = header_comment;
  const auto tm = tmix_by_L(recs, o.min_samples);
  std::vector<ScalingPoint> pts;
  Json per_L = Json::array();
  for (const auto& e : tm) {
    per_L.push_back(detail::tmix_json(e));
    pts.push_back({static_cast<double>(e.L), e.value});
  }
  out["tmix"] = per_L;
  out["fit"] = detail::fit_json(fit_scaling(pts, model, o.power));
  try {
    const auto lb = linear_lower_sanity(recs);
    out["lower_bound"] = Json{{"exponent", lb.fit.exponent}, {"pass", lb.pass}};
  } catch (const std::exception& ex) {
    out["lower_bound"] = Json{{"error", ex.what()}};
  }
  if (!o.emit_plot.empty()) {
    std::ostringstream plot;
    plot << "# " << header_comment << "\n# L  Tmix\n";
    for (const auto& p : pts) plot << format_double(p.L) << "  " << format_double(p.T) << "\n";
    write_file_atomic(o.emit_plot, plot.str());
  }
  return out;
}

inline std::string version_text() {
  std::ostringstream os;
  os << "zerotemp " << ZEROTEMP_VERSION << " (built " << __DATE__ << ", " << __VERSION__ << ")\n"
     << "defaults: c0=10 c1=6.6 c2=1.5 logbase=natural engine=rejection-free\n";
  return os.str();
}

/// Parses argv and runs one subcommand. JSON goes to `out`, diagnostics to `err`.
inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Zero-temperature majority dynamics: simulation, verification and campaigns", "zerotemp"};
  app.set_version_flag("--version", version_text());
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* c_sim = app.add_subcommand("simulate", "Run one replica to absorption and print a JSON record");
  c_sim->add_option("--d", sim.d, "Dimension");
  c_sim->add_option("--L", sim.L, "Side length");
  c_sim->add_option("--geometry", sim.geometry, "hypercube | cylinder | shell | slab");
  c_sim->add_option("--boundary", sim.boundary, "plus | eta0 | eta-slab | shell (default fits the geometry)");
  c_sim->add_option("--init", sim.init, "minus | plus | random");
  c_sim->add_option("--i", sim.slab, "Slab index for --geometry slab");
  c_sim->add_option("--r", sim.shell_r, "Shell outer radius");
  c_sim->add_option("--l", sim.shell_l, "Shell thickness");
  c_sim->add_option("--engine", sim.engine, "graphical | rejection-free");
  c_sim->add_option("--seed", sim.seed, "Base seed");
  c_sim->add_option("--replica", sim.replica, "Replica index");
  c_sim->add_option("--tcap", sim.tcap, "auto | L3 | <k>L2 | <number>");
  c_sim->add_option("--filter", sim.filters, "freeze-layers:<f> | block-outside:<i> | freeze:<i>:<until>");
  c_sim->add_option("--c2", sim.c2, "Exponent of the length unit (log L)^c2");
  c_sim->add_option("--logbase", sim.log_base, "natural | 2 | 10");
  c_sim->add_flag("--timing", sim.timing, "Record wall time");

  CampaignOptions camp;
  auto* c_camp = app.add_subcommand("campaign", "Run a hitting-time campaign from a key=value config");
  c_camp->add_option("--config", camp.config, "Config file")->required();
  c_camp->add_option("--out", camp.out_csv, "CSV output (default <id>.csv)");
  c_camp->add_option("--summary", camp.summary, "Summary JSON (default <csv>.summary.json)");
  c_camp->add_option("--jobs", camp.jobs, "Worker threads (default: all cores)");
  c_camp->add_option("--min-samples", camp.min_samples, "Completed samples needed per L");

  CoupleOptions cpl;
  auto* c_cpl = app.add_subcommand("couple-check", "Randomised monotone-coupling or censoring check");
  c_cpl->add_option("--mode", cpl.mode, "domination | censoring");
  c_cpl->add_option("--dims", cpl.dims, "Dimensions to cycle through");
  c_cpl->add_option("--max-L", cpl.max_L, "Largest side length");
  c_cpl->add_option("--runs", cpl.runs, "Number of runs");
  c_cpl->add_option("--tmax", cpl.t_max, "Time horizon of each run");
  c_cpl->add_option("--seed", cpl.seed, "Base seed");
  c_cpl->add_flag("--inject-fault", cpl.inject_fault, "Break the coupling on purpose");

  SliceOptions sl;
  auto* c_sl = app.add_subcommand("slice-check", "Compare slab slices with 3-d shell dynamics");
  c_sl->add_option("--d", sl.d, "Dimension (>= 4)");
  c_sl->add_option("--L", sl.L, "Side length");
  c_sl->add_option("--i", sl.i, "Slab index");
  c_sl->add_flag("--first-layer", sl.first_layer, "Check the first layer under eta0 instead of a slab");
  c_sl->add_option("--events", sl.events, "Events to run (default max(1e4, 2N))");
  c_sl->add_option("--seed", sl.seed, "Seed");
  c_sl->add_option("--c2", sl.c2, "Exponent of the length unit");
  c_sl->add_option("--logbase", sl.log_base, "natural | 2 | 10");

  GeometryOptions geo;
  auto* c_geo = app.add_subcommand("geometry", "Region sizes and boundary partition checks");
  c_geo->add_option("--d", geo.d, "Dimension (>= 4)");
  c_geo->add_option("--L", geo.L, "Side length");
  c_geo->add_option("--c2", geo.c2, "Exponent of the length unit");
  c_geo->add_option("--logbase", geo.log_base, "natural | 2 | 10");
  c_geo->add_flag("--check-bdecop", geo.check_bdecop, "Enumerate every slab boundary split");

  FitOptions ft;
  auto* c_fit = app.add_subcommand("fit", "Estimate T_mix per L from a campaign CSV and fit the exponent");
  c_fit->add_option("--in", ft.in, "Campaign CSV")->required();
  c_fit->add_option("--model", ft.model, "pure | polylog | polylog-fixed");
  c_fit->add_option("--power", ft.power, "Fixed polylog power for polylog-fixed");
  c_fit->add_option("--emit-plot", ft.emit_plot, "Write a two-column 'L Tmix' file");
  c_fit->add_option("--min-samples", ft.min_samples, "Completed samples needed per L");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "zerotemp: " << e.what() << "\n";
    return kUsage;
  }

  try {
    bool ok = true;
    Json result;
    if (c_sim->parsed()) result = simulate(sim);
    else if (c_camp->parsed()) result = campaign(camp);
    else if (c_cpl->parsed()) result = couple_check(cpl, ok);
    else if (c_sl->parsed()) result = slice_check(sl, ok);
    else if (c_geo->parsed()) result = geometry_report(geo, ok);
    else if (c_fit->parsed()) result = fit(ft);
    out << result.dump(2) << "\n";
    if (!ok) {
      err << "zerotemp: verification violation\n";
      return kViolation;
    }
    return kOk;
  } catch (const InsufficientData& e) {
    err << "zerotemp: insufficient data: " << e.what() << "\n";
    return kInsufficient;
  } catch (const std::exception& e) {
    err << "zerotemp: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace zerotemp::cli

#endif  // ZEROTEMP_CLI_HPP
