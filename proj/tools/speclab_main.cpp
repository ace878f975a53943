// speclab: command-line front end over the library modules.  A run resolves
// one subcommand's configuration (JSON document + flag overrides), dispatches
// the mapped operations, and serializes the results as JSON/CSV artifacts plus
// optional SVG plots under --out.  Exit codes: 0 success, 1 input error,
// 2 numerical failure.
#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "speclab/andrade.hpp"
#include "speclab/barrier.hpp"
#include "speclab/discretize.hpp"
#include "speclab/eigensolve.hpp"
#include "speclab/hausdorff.hpp"
#include "speclab/io.hpp"
#include "speclab/labyrinth.hpp"
#include "speclab/patch.hpp"
#include "speclab/pointcloud.hpp"
#include "speclab/radial.hpp"
#include "speclab/spectral.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace speclab;

namespace {

// ---------------------------------------------------------------------------
// Value parsing: flags accept decimals, fractions ("1/256"), powers ("2^-8").

double parse_number(const std::string& text) {
  const auto full = [&](const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    require(end == s.c_str() + s.size() && !s.empty(), ("not a number: '" + text + "'").c_str());
    return v;
  };
  if (const auto slash = text.find('/'); slash != std::string::npos) {
    const double den = full(text.substr(slash + 1));
    require(den != 0.0, ("zero denominator in '" + text + "'").c_str());
    return full(text.substr(0, slash)) / den;
  }
  if (const auto caret = text.find('^'); caret != std::string::npos)
    return std::pow(full(text.substr(0, caret)), full(text.substr(caret + 1)));
  return full(text);
}

// "2^-4..2^-10" expands to the halving schedule; otherwise a comma list.
std::vector<double> parse_delta_schedule(const std::string& text) {
  std::vector<double> out;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const std::string lo = text.substr(0, dots), hi = text.substr(dots + 2);
    require(lo.rfind("2^", 0) == 0 && hi.rfind("2^", 0) == 0,
            "delta range must use the form 2^-A..2^-B");
    const double a = -parse_number(lo.substr(2)), b = -parse_number(hi.substr(2));
    require(a == std::floor(a) && b == std::floor(b) && a < b,
            "delta range must run from a coarse 2^-A to a finer 2^-B");
    for (double k = a; k <= b; k += 1.0) out.push_back(std::pow(2.0, -k));
    return out;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string tok = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    require(!tok.empty(), "empty entry in delta schedule");
    out.push_back(parse_number(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  require(!out.empty(), "empty delta schedule");
  return out;
}

std::vector<std::pair<double, double>> parse_points(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto semi = text.find(';', pos);
    const std::string tok = text.substr(pos, semi == std::string::npos ? semi : semi - pos);
    const auto comma = tok.find(',');
    require(comma != std::string::npos, "points must be 'u,v' pairs separated by ';'");
    out.emplace_back(parse_number(tok.substr(0, comma)), parse_number(tok.substr(comma + 1)));
    if (semi == std::string::npos) break;
    pos = semi + 1;
  }
  require(!out.empty(), "empty point list");
  return out;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// SVG line plot: a standalone figure with the data table embedded in <desc>.

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

void write_svg_plot(const fs::path& path, const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, const std::vector<double>& xs,
                    const std::vector<double>& ys, bool logx = false, bool logy = false) {
  require(xs.size() == ys.size() && !xs.empty(), "plot needs matching nonempty series");
  auto tx = [&](double v) {
    if (!logx) return v;
    require(v > 0, "log-x plot needs positive abscissae");
    return std::log10(v);
  };
  auto ty = [&](double v) {
    if (!logy) return v;
    require(v > 0, "log-y plot needs positive ordinates");
    return std::log10(v);
  };
  double x0 = tx(xs[0]), x1 = x0, y0 = ty(ys[0]), y1 = y0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    x0 = std::min(x0, tx(xs[i]));
    x1 = std::max(x1, tx(xs[i]));
    y0 = std::min(y0, ty(ys[i]));
    y1 = std::max(y1, ty(ys[i]));
  }
  if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
  if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
  const double W = 640, H = 420, L = 72, R = 24, T = 46, B = 56;
  auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - T - B); };

  std::ofstream out(path);
  require_numeric(out.good(), "cannot open output file");
  out.precision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  out << "<title>" << xml_escape(title) << "</title>\n<desc>" << xml_escape(xlabel) << ','
      << xml_escape(ylabel) << '\n';
  for (std::size_t i = 0; i < xs.size(); ++i)
    out << format_double(xs[i]) << ',' << format_double(ys[i]) << '\n';
  out << "</desc>\n";
  out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << xml_escape(title) << "</text>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  char label[32];
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double fy = y0 + (y1 - y0) * i / 4.0;
    const double gx = L + (W - L - R) * i / 4.0;
    const double gy = H - B - (H - T - B) * i / 4.0;
    std::snprintf(label, sizeof(label), "%.4g", logx ? std::pow(10.0, fx) : fx);
    out << "<line x1=\"" << gx << "\" y1=\"" << H - B << "\" x2=\"" << gx << "\" y2=\""
        << H - B + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << gx << "\" y=\"" << H - B + 20
        << "\" text-anchor=\"middle\" font-size=\"11\">" << label << "</text>\n";
    std::snprintf(label, sizeof(label), "%.4g", logy ? std::pow(10.0, fy) : fy);
    out << "<line x1=\"" << L - 5 << "\" y1=\"" << gy << "\" x2=\"" << L << "\" y2=\"" << gy
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << L - 8 << "\" y=\"" << gy + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << label << "</text>\n";
  }
  out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 14
      << "\" text-anchor=\"middle\" font-size=\"12\">" << xml_escape(xlabel) << "</text>\n";
  out << "<text x=\"18\" y=\"" << (T + H - B) / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 18 "
      << (T + H - B) / 2 << ")\">" << xml_escape(ylabel) << "</text>\n";
  out << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) out << px(xs[i]) << ',' << py(ys[i]) << ' ';
  out << "\"/>\n";
  if (xs.size() <= 200)
    for (std::size_t i = 0; i < xs.size(); ++i)
      out << "<circle cx=\"" << px(xs[i]) << "\" cy=\"" << py(ys[i])
          << "\" r=\"2.5\" fill=\"#1f6fb2\"/>\n";
  out << "</svg>\n";
  require_numeric(out.good(), "write failed");
}

// ---------------------------------------------------------------------------
// Run plumbing: config resolution, dry-run plans, manifest + metadata.

struct Bindings {
  std::map<std::string, std::pair<CLI::Option*, std::function<void(const json&)>>> setters;
};

double json_number(const json& v) {
  if (v.is_string()) return parse_number(v.get<std::string>());
  require(v.is_number(), "config value must be a number or numeric string");
  return v.get<double>();
}

template <typename T>
void assign_value(T& target, const json& v) {
  if constexpr (std::is_same_v<T, std::string>) {
    require(v.is_string(), "config value must be a string");
    target = v.get<std::string>();
  } else if constexpr (std::is_same_v<T, bool>) {
    require(v.is_boolean(), "config value must be a boolean");
    target = v.get<bool>();
  } else if constexpr (std::is_floating_point_v<T>) {
    target = static_cast<T>(json_number(v));
  } else {
    const double num = json_number(v);
    require(num == std::floor(num), "config value must be an integer");
    target = static_cast<T>(num);
  }
}

template <typename T>
CLI::Option* bind_option(CLI::App* cmd, Bindings& b, const std::string& name, T& target,
                         const std::string& desc) {
  CLI::Option* opt = cmd->add_option("--" + name, target, desc);
  b.setters[name] = {opt, [&target, name](const json& v) {
                       try {
                         assign_value(target, v);
                       } catch (const std::invalid_argument& e) {
                         throw std::invalid_argument("config field '" + name + "': " + e.what());
                       }
                     }};
  return opt;
}

CLI::Option* bind_flag(CLI::App* cmd, Bindings& b, const std::string& name, bool& target,
                       const std::string& desc) {
  CLI::Option* opt = cmd->add_flag("--" + name, target, desc);
  b.setters[name] = {opt, [&target, name](const json& v) {
                       try {
                         assign_value(target, v);
                       } catch (const std::invalid_argument& e) {
                         throw std::invalid_argument("config field '" + name + "': " + e.what());
                       }
                     }};
  return opt;
}

// Flags given on the command line win over config-file fields.
void apply_config(const std::string& cfg_path, const Bindings& b) {
  std::ifstream in(cfg_path);
  require(in.good(), ("cannot open config file '" + cfg_path + "'").c_str());
  const json doc = json::parse(in);  // parse_error carries line/byte diagnostics
  require(doc.is_object(), "config document must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    const auto it = b.setters.find(key);
    if (it == b.setters.end())
      throw std::invalid_argument("config: unknown key '" + key + "'");
    if (it->second.first->count() == 0) it->second.second(value);
  }
}

std::string iso8601_utc(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/** Output sink for one run: collects artifact names, resolves the plan for
 *  --dry-run, and finalizes manifest.json (files + config hash) plus
 *  run_meta.json.  Timestamps live only in run_meta.json so every other
 *  artifact is byte-identical across reruns of the same config. */
struct RunSink {
  std::string subcommand;
  fs::path dir;
  bool dry = false;
  json config;
  std::vector<std::string> files;
  std::chrono::system_clock::time_point started = std::chrono::system_clock::now();

  fs::path emit(const std::string& name) {
    files.push_back(name);
    return dir / name;
  }

  void emit_json(const std::string& name, const json& payload) {
    std::ofstream out(emit(name));
    require_numeric(out.good(), "cannot open output file");
    out << payload.dump(2) << '\n';
    require_numeric(out.good(), "write failed");
  }

  bool plan_or_start(const std::vector<std::string>& planned) {
    if (dry) {
      json plan;
      plan["subcommand"] = subcommand;
      plan["out"] = dir.string();
      plan["config"] = config;
      plan["config_hash"] = fnv1a_hex(config.dump());
      plan["would_write"] = planned;
      std::cout << plan.dump(2) << '\n';
      return false;
    }
    fs::create_directories(dir);
    return true;
  }

  void finish() {
    json meta;
    meta["started_utc"] = iso8601_utc(started);
    const auto now = std::chrono::system_clock::now();
    meta["finished_utc"] = iso8601_utc(now);
    meta["wall_seconds"] = std::chrono::duration<double>(now - started).count();
    {
      std::ofstream out(emit("run_meta.json"));
      require_numeric(out.good(), "cannot open output file");
      out << meta.dump(2) << '\n';
    }
    json manifest;
    manifest["subcommand"] = subcommand;
    manifest["config"] = config;
    manifest["config_hash"] = fnv1a_hex(config.dump());
    std::sort(files.begin(), files.end());
    manifest["files"] = files;
    std::ofstream out(dir / "manifest.json");
    require_numeric(out.good(), "cannot open output file");
    out << manifest.dump(2) << '\n';
    require_numeric(out.good(), "write failed");
    std::cout << "wrote " << files.size() + 1 << " artifacts to " << dir.string() << '\n';
  }
};

// ---------------------------------------------------------------------------
// Patch selection shared by the spectral subcommands.

struct PatchChoice {
  std::string kind = "flat-disk";
  double R = 1.0;
  double eps = 0.01;
  int index = 1;
  double r1 = 1.0;
  double r2 = 1.6180339887498949;
  double u_half = 1.0;
  double v_extent = 8.0;
};

void add_patch_flags(CLI::App* cmd, Bindings& b, PatchChoice& pc) {
  bind_option(cmd, b, "patch", pc.kind,
              "patch kind: flat-disk | hyperbolic-disk | andrade | labyrinth");
  bind_option(cmd, b, "R", pc.R, "flat disk radius");
  bind_option(cmd, b, "eps", pc.eps, "hyperbolic disk truncation");
  bind_option(cmd, b, "index", pc.index, "labyrinth annulus index n");
  bind_option(cmd, b, "r1", pc.r1, "Andrade inner radius");
  bind_option(cmd, b, "r2", pc.r2, "Andrade outer radius");
  bind_option(cmd, b, "u-half", pc.u_half, "Andrade strip half-width");
  bind_option(cmd, b, "v-extent", pc.v_extent, "Andrade strip half-length");
}

ConformalPatch build_patch(const PatchChoice& pc) {
  if (pc.kind == "flat-disk") return flat_disk(pc.R);
  if (pc.kind == "hyperbolic-disk") return hyperbolic_disk(pc.eps);
  if (pc.kind == "andrade")
    return andrade_surface(AndradeParams{pc.r1, pc.r2}, pc.u_half, pc.v_extent);
  if (pc.kind == "labyrinth") return labyrinth_patch(LabyrinthParams::from_index(pc.index));
  throw std::invalid_argument("unknown patch kind '" + pc.kind + "'");
}

json patch_config_json(const PatchChoice& pc) {
  json j;
  j["patch"] = pc.kind;
  if (pc.kind == "flat-disk") j["R"] = pc.R;
  if (pc.kind == "hyperbolic-disk") j["eps"] = pc.eps;
  if (pc.kind == "labyrinth") j["index"] = pc.index;
  if (pc.kind == "andrade") {
    j["r1"] = pc.r1;
    j["r2"] = pc.r2;
    j["u-half"] = pc.u_half;
    j["v-extent"] = pc.v_extent;
  }
  return j;
}

CurvatureBound parse_curvature(const std::string& spec, double t_max) {
  if (spec.rfind("const:", 0) == 0)
    return CurvatureBound::constant(parse_number(spec.substr(6)), t_max);
  throw std::invalid_argument("unsupported curvature spec '" + spec +
                              "' (expected const:<value>)");
}

json eigen_config_json(int k, double tol, int max_iter, int refine, std::uint64_t seed) {
  json j;
  j["k"] = k;
  j["tol"] = tol;
  j["max-iter"] = max_iter;
  j["refine"] = refine;
  j["seed"] = seed;
  return j;
}

// ---------------------------------------------------------------------------
// Subcommand handlers.

struct CommonOpts {
  std::string out = "speclab_out";
  std::string config;
  bool dry_run = false;
};

void add_common_flags(CLI::App* cmd, Bindings& b, CommonOpts& c) {
  bind_option(cmd, b, "out", c.out, "output directory");
  cmd->add_option("--config", c.config, "JSON config document (flags override fields)");
  cmd->add_flag("--dry-run", c.dry_run, "validate config and print the plan without computing");
}

void run_model(const CommonOpts& common, const std::string& g_spec, double t_max,
               const std::string& step_text, int m, bool plot) {
  const double step = parse_number(step_text);
  require(t_max > 0.0, "tmax must be positive");
  require(step > 0.0 && step <= t_max, "step must lie in (0, tmax]");
  require(m >= 2, "dimension m must be >= 2");

  RunSink sink;
  sink.subcommand = "model";
  sink.dir = common.out;
  sink.dry = common.dry_run;
  sink.config = {{"G", g_spec}, {"tmax", t_max}, {"step", step}, {"m", m}, {"plot", plot}};
  std::vector<std::string> planned{"model.json", "model_h.csv", "model_dh.csv"};
  if (plot) planned.push_back("model_h.svg");
  if (!sink.plan_or_start(planned)) return;

  const CurvatureBound bound = parse_curvature(g_spec, t_max);
  const RadialModel model = solve_h(bound, t_max, step);

  json j;
  j["G"] = g_spec;
  j["t_max"] = t_max;
  j["step"] = step;
  j["h2_ok"] = model.h2_ok;
  if (std::isfinite(model.first_failure_time))
    j["first_failure_time"] = model.first_failure_time;
  j["h_at_tmax"] = model.h.back();
  j["dh_at_tmax"] = model.dh.back();
  const DecayCheck decay = check_curvature_decay(bound);
  j["curvature_decay"] = {{"ok", decay.ok}, {"worst_ratio", decay.worst_ratio}};
  if (model.h2_ok) {
    j["a_bar"] = a_bar_of(model);
    j["mu_at_tmax"] = mu(model, t_max);
    if (t_max > 1.0) {
      const NonparabolicityReport np = nonparabolicity_check(model, m);
      j["nonparabolicity"] = {{"verdict", to_string(np.verdict)},
                              {"integral", np.integral},
                              {"tail_estimate", np.tail_estimate},
                              {"fit_kind", np.fit_kind}};
    }
  }
  sink.emit_json("model.json", j);
  write_model_csv(model, sink.dir, "model");
  sink.files.push_back("model_h.csv");
  sink.files.push_back("model_dh.csv");
  if (plot) write_svg_plot(sink.emit("model_h.svg"), "comparison profile h", "t", "h(t)",
                           model.t, model.h);
  std::cout << "h(" << format_double(t_max) << ") = " << format_double(model.h.back()) << '\n';
  sink.finish();
}

void run_subharmonic(const CommonOpts& common, double theta, double a, double R, double t_max,
                     const std::string& g_spec, const std::string& step_text, bool plot) {
  const double step = parse_number(step_text);
  if (t_max <= 0.0) t_max = R;
  require(theta > 0.0, "theta must be positive");
  require(a > 0.0 && R > 0.0 && t_max >= R, "need 0 < a, 0 < R <= tmax");
  require(step > 0.0, "step must be positive");

  RunSink sink;
  sink.subcommand = "subharmonic";
  sink.dir = common.out;
  sink.dry = common.dry_run;
  sink.config = {{"theta", theta}, {"a", a},       {"R", R},
                 {"tmax", t_max},  {"G", g_spec},  {"step", step},
                 {"plot", plot}};
  std::vector<std::string> planned{"barrier.json", "barrier.csv"};
  if (plot) planned.push_back("barrier.svg");
  if (!sink.plan_or_start(planned)) return;

  const RadialModel model = solve_h(parse_curvature(g_spec, t_max), t_max, step);
  const BarrierProfile profile = build_barrier(model, theta, a, default_gauge_S(theta), R);
  const SupBoundCertificate cert = sup_bound_certificate(profile);

  json j;
  j["theta"] = theta;
  j["a"] = a;
  j["R"] = R;
  j["a_bar"] = profile.a_bar;
  j["h_a"] = profile.h_a;
  j["sup_bound"] = profile.sup_bound;
  j["s_hat"] = profile.s_hat_value;
  j["s_star"] = profile.s_star_value;
  j["certificate"] = {{"regime", cert.regime},
                      {"gauge_value", cert.gauge_value},
                      {"ratio", cert.ratio},
                      {"superg_rhs", cert.superg_rhs}};
  sink.emit_json("barrier.json", j);
  write_barrier_csv(profile, sink.emit("barrier.csv"));
  if (plot)
    write_svg_plot(sink.emit("barrier.svg"), "barrier g(t)", "t", "g", profile.t, profile.g);
  std::cout << "sup_bound = " << format_double(profile.sup_bound) << " (" << cert.regime
            << ")\n";
  sink.finish();
}

void run_surface(const CommonOpts& common, const PatchChoice& pc, int samples,
                 std::size_t limit_count, double margin, std::uint64_t seed) {
  require(samples >= 2, "samples must be >= 2");

  RunSink sink;
  sink.subcommand = "surface";
  sink.dir = common.out;
  sink.dry = common.dry_run;
  sink.config = patch_config_json(pc);
  sink.config["samples"] = samples;
  sink.config["limit-set"] = limit_count;
  sink.config["margin"] = margin;
  sink.config["seed"] = seed;
  std::vector<std::string> planned{"surface.json", "patch.csv"};
  if (limit_count > 0) planned.push_back("limitset.csv");
  if (!sink.plan_or_start(planned)) return;

  const ConformalPatch patch = build_patch(pc);
  json j;
  j["descriptor"] = patch.descriptor;
  j["domain"] = {{"u0", patch.domain.u0},
                 {"u1", patch.domain.u1},
                 {"v0", patch.domain.v0},
                 {"v1", patch.domain.v1}};
  for (const auto& [k, v] : patch.metadata) j["metadata"][k] = v;
  j["area"] = patch_area(patch, patch.domain.width() / 256.0);

  if (patch.has_immersion()) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pu(patch.domain.u0, patch.domain.u1);
    std::uniform_real_distribution<double> pv(patch.domain.v0, patch.domain.v1);
    std::vector<std::pair<double, double>> pts;
    const double pad = 1e-3 * patch.domain.diameter();
    while (pts.size() < 200) {
      const double u = pu(rng), v = pv(rng);
      if (patch.inside(u, v) && patch.inside(u + pad, v + pad) && patch.inside(u - pad, v - pad))
        pts.emplace_back(u, v);
    }
    const MetricConsistency mc = metric_consistency(patch, pts);
    j["metric"] = {{"max_scale_dev", mc.max_scale_dev}, {"max_cross", mc.max_cross}};
  }
  if (pc.kind == "andrade") {
    const AndradeParams params{pc.r1, pc.r2};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pu(-pc.u_half, pc.u_half);
    std::uniform_real_distribution<double> pv(-pc.v_extent, pc.v_extent);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i)
      worst = std::max(worst, andrade_conformality_residual(params, pu(rng), pv(rng)));
    const AndradeCurvatureFit fit = fit_andrade_curvature(params, pc.u_half);
    j["andrade"] = {{"conformality_residual", worst},
                    {"curvature_fit",
                     {{"c1", fit.c1},
                      {"c2", fit.c2},
                      {"p", fit.p},
                      {"q", fit.q},
                      {"max_rel_residual", fit.max_rel_residual}}},
                    {"lambda_floor", andrade_lambda_floor(params, -pc.u_half)}};
  }
  if (pc.kind == "labyrinth") {
    const LabyrinthParams params = LabyrinthParams::from_index(pc.index);
    j["labyrinth"] = {{"C_n", labyrinth_Cn(params)},
                      {"crossing_bound", labyrinth_crossing_bound(params)},
                      {"intrinsic_width", labyrinth_intrinsic_width(params)}};
  }
  sink.emit_json("surface.json", j);
  write_patch_csv(patch, static_cast<std::size_t>(samples), static_cast<std::size_t>(samples),
                  sink.emit("patch.csv"));
  if (limit_count > 0) {
    const double m = margin > 0.0 ? margin : 0.05 * patch.domain.diameter();
    const PointCloud cloud = limit_set_sample(patch, m, limit_count, seed);
    std::vector<std::vector<double>> rows;
    rows.reserve(cloud.count());
    for (std::size_t i = 0; i < cloud.count(); ++i)
      rows.push_back({cloud.coord(i, 0), cloud.coord(i, 1), cloud.coord(i, 2)});
    write_csv(sink.emit("limitset.csv"), {"x", "y", "z"}, rows);
  }
  std::cout << patch.descriptor << ": area = " << format_double(j["area"].get<double>())
            << '\n';
  sink.finish();
}

void run_spectrum(const CommonOpts& common, const PatchChoice& pc, const std::string& dx_text,
                  int k, double tol, int max_iter, int refine, std::uint64_t seed, bool plot,
                  bool dump_problem) {
  const double dx = parse_number(dx_text);
  require(dx > 0.0, "dx must be positive");
  require(k >= 1 && tol > 0.0 && max_iter >= 1 && refine >= 0, "invalid solver parameters");

  RunSink sink;
  sink.subcommand = "spectrum";
  sink.dir = common.out;
  sink.dry = common.dry_run;
  sink.config = patch_config_json(pc);
  sink.config["dx"] = dx;
  sink.config.update(eigen_config_json(k, tol, max_iter, refine, seed));
  sink.config["plot"] = plot;
  sink.config["dump-problem"] = dump_problem;
  std::vector<std::string> planned{"spectrum.json", "eigenvalues.csv"};
  if (plot) planned.push_back("spectrum.svg");
  if (dump_problem) {
    planned.push_back("problem_stiffness.mtx");
    planned.push_back("problem_mass.csv");
  }
  if (!sink.plan_or_start(planned)) return;

  const ConformalPatch patch = build_patch(pc);
  const GridDiscretization dis = discretize(patch, dx);
  EigenOptions opt;
  opt.k = k;
  opt.tol = tol;
  opt.max_iter = max_iter;
  opt.refine_steps = refine;
  opt.seed = seed;
  const EigenResult res = smallest_eigs(dis, opt);
  require_numeric(res.converged, "eigensolver did not converge within max-iter");

  json j;
  j["descriptor"] = patch.descriptor;
  j["dx"] = dis.dx;
  j["nodes"] = dis.n();
  j["iterations"] = res.iterations;
  j["eigenvalues"] = res.values;
  j["residuals"] = res.residuals;
  sink.emit_json("spectrum.json", j);

  std::vector<std::vector<double>> rows;
  std::vector<double> index;
  for (std::size_t i = 0; i < res.values.size(); ++i) {
    rows.push_back({static_cast<double>(i + 1), res.values[i], res.residuals[i]});
    index.push_back(static_cast<double>(i + 1));
  }
  write_csv(sink.emit("eigenvalues.csv"), {"index", "eigenvalue", "residual"}, rows);
  if (plot)
    write_svg_plot(sink.emit("spectrum.svg"), "eigenvalues: " + patch.descriptor, "index",
                   "eigenvalue", index, res.values);
  if (dump_problem) {
    write_problem(dis, sink.dir, "problem");
    sink.files.push_back("problem_stiffness.mtx");
    sink.files.push_back("problem_mass.csv");
  }
  std::cout << "mu_1 = " << format_double(res.values.front()) << " (" << dis.n() << " nodes, "
            << res.iterations << " iterations)\n";
  sink.finish();
}

void run_persson(const CommonOpts& common, const PatchChoice& pc, const std::string& dx_text,
                 int levels, double tol, int max_iter, std::uint64_t seed, bool plot) {
  const double dx = parse_number(dx_text);
  require(dx > 0.0, "dx must be positive");
  require(levels >= 1 && levels <= 16, "levels must lie in [1, 16]");
  require(tol > 0.0 && max_iter >= 1, "invalid solver parameters");

  RunSink sink;
  sink.subcommand = "persson";
  sink.dir = common.out;
  sink.dry = common.dry_run;
  sink.config = patch_config_json(pc);
  sink.config["dx"] = dx;
  sink.config["levels"] = levels;
  sink.config.update(eigen_config_json(1, tol, max_iter, 0, seed));
  sink.config.erase("k");
  sink.config.erase("refine");
  sink.config["plot"] = plot;
  std::vector<std::string> planned{"persson.json", "persson.csv"};
  if (plot) planned.push_back("persson.svg");
  if (!sink.plan_or_start(planned)) return;

  const ConformalPatch patch = build_patch(pc);
  std::vector<RegionPredicate> exhaustion;
  for (int l = 1; l <= levels; ++l) {
    if (pc.kind == "flat-disk") {
      const double rho = pc.R * (1.0 - std::pow(2.0, -l));
      exhaustion.push_back([rho](double u, double v) { return u * u + v * v <= rho * rho; });
    } else if (pc.kind == "hyperbolic-disk") {
      const double rho = 1.0 - pc.eps - std::pow(2.0, -l);
      require(rho > 0.0, "exhaustion level is empty; raise eps or lower levels");
      exhaustion.push_back([rho](double u, double v) { return u * u + v * v <= rho * rho; });
    } else if (pc.kind == "andrade") {
      require(static_cast<double>(levels) < pc.v_extent,
              "exhaustion exceeds the strip; raise v-extent");
      const double half = static_cast<double>(l);
      exhaustion.push_back([half](double, double v) { return std::abs(v) <= half; });
    } else {
      throw std::invalid_argument("persson: unsupported patch kind '" + pc.kind + "'");
    }
  }
  EigenOptions opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  opt.seed = seed;
  const PerssonReport rep = persson_sweep(patch, dx, exhaustion, opt);

  json j;
  j["descriptor"] = patch.descriptor;
  j["dx"] = dx;
  j["lambda_star"] = rep.lambda_star;
  j["running_sup"] = rep.running_sup;
  j["nodes"] = rep.nodes;
  sink.emit_json("persson.json", j);
  std::vector<std::vector<double>> rows;
  std::vector<double> index;
  for (std::size_t i = 0; i < rep.lambda_star.size(); ++i) {
    rows.push_back({static_cast<double>(i + 1), rep.lambda_star[i], rep.running_sup[i],
                    static_cast<double>(rep.nodes[i])});
    index.push_back(static_cast<double>(i + 1));
  }
  write_csv(sink.emit("persson.csv"), {"level", "lambda_star", "running_sup", "nodes"}, rows);
  if (plot)
    write_svg_plot(sink.emit("persson.svg"), "Persson sweep: " + patch.descriptor,
                   "exhaustion index", "lambda*", index, rep.lambda_star);
  std::cout << "running sup lambda* = " << format_double(rep.running_sup.back()) << " after "
            << levels << " levels\n";
  sink.finish();
}

void run_barta(const CommonOpts& common, const PatchChoice& pc, const std::string& dx_text,
               double tol, int max_iter, int refine, std::uint64_t seed) {
  const double dx = parse_number(dx_text);
  require(dx > 0.0, "dx must be positive");
  require(tol > 0.0 && max_iter >= 1 && refine >= 0, "invalid solver parameters");

  RunSink sink;
  sink.subcommand = "barta";
  sink.dir = common.out;
  sink.dry = common.dry_run;
  sink.config = patch_config_json(pc);
  sink.config["dx"] = dx;
  sink.config.update(eigen_config_json(1, tol, max_iter, refine, seed));
  sink.config.erase("k");
  if (!sink.plan_or_start({"barta.json"})) return;

  const ConformalPatch patch = build_patch(pc);
  const GridDiscretization dis = discretize(patch, dx);
  EigenOptions opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  opt.refine_steps = refine;
  opt.seed = seed;
  const EigenResult res = smallest_eigs(dis, opt);
  require_numeric(res.converged, "eigensolver did not converge within max-iter");
  Eigen::VectorXd w = res.vectors.col(0);
  if (w.sum() < 0) w = -w;
  const BartaReport rep = barta_bound(dis, w);

  json j;
  j["descriptor"] = patch.descriptor;
  j["dx"] = dis.dx;
  j["nodes"] = rep.nodes;
  j["mu_1"] = res.values.front();
  j["min_ratio"] = rep.min_ratio;
  j["max_ratio"] = rep.max_ratio;
  j["equality_gap"] = res.values.front() - rep.min_ratio;
  j["argmin"] = {{"u", rep.arg_u}, {"v", rep.arg_v}};
  sink.emit_json("barta.json", j);
  std::cout << "barta bound = " << format_double(rep.min_ratio)
            << ", mu_1 = " << format_double(res.values.front()) << '\n';
  sink.finish();
}

void run_witness(const CommonOpts& common, const std::string& r1_text, int balls,
                 const std::string& dx_text, double rho_max, double theta,
                 const std::string& model_step_text) {
  const double r1 = parse_number(r1_text);
  require(r1 > 0.0 && r1 < 1.0, "r1 must lie in (0, 1)");
  require(balls >= 2, "need at least 2 cover balls");
  const double dx = dx_text.empty() ? 0.5 * r1 : parse_number(dx_text);
  require(dx > 0.0, "dx must be positive");
  const double model_step = parse_number(model_step_text);
  require(model_step >= 0.0, "model-step must be nonnegative");
  require(rho_max > 2.0, "rho-max must exceed the diameter of the unit disk");
  require(theta > 0.0, "theta must be positive");

  RunSink sink;
  sink.subcommand = "witness";
  sink.dir = common.out;
  sink.dry = common.dry_run;
  sink.config = {{"r1", r1},           {"balls", balls}, {"dx", dx},
                 {"rho-max", rho_max}, {"theta", theta}, {"model-step", model_step}};
  if (!sink.plan_or_start({"witness.json"})) return;

  // Flat unit disk inside D = B_1 in R^3, token cover of rim balls.
  const ConformalPatch patch = flat_disk(1.0);
  WitnessConfig cfg;
  cfg.r1 = r1;
  const double pi = std::acos(-1.0);
  for (int jj = 0; jj < balls; ++jj) {
    const double phi = 2.0 * pi * jj / balls;
    cfg.cover.push_back({Eigen::Vector3d(std::cos(phi), std::sin(phi), 0.0), r1});
  }
  cfg.F = [](const Eigen::Vector3d& x) { return 0.5 * (x.squaredNorm() - 1.0); };
  cfg.boundary_distance = [](const Eigen::Vector3d& x) { return 1.0 - x.norm(); };
  cfg.convexity_c = 1.0;
  cfg.theta = theta;
  cfg.gauge = default_gauge_S(theta);
  cfg.rho_max = rho_max;
  cfg.curvature_B = 0.0;
  cfg.model_step = model_step;
  const WitnessReport rep = barta_witness(patch, dx, cfg);

  json j;
  j["r1"] = rep.r1;
  j["b1"] = rep.b1;
  j["k1"] = rep.k1;
  j["gauge_sum"] = rep.gauge_sum;
  j["min_ratio"] = rep.min_ratio;
  j["max_ratio"] = rep.max_ratio;
  j["order_constant"] = rep.order_constant;
  j["w1_min"] = rep.w1_min;
  j["region_nodes"] = rep.region_nodes;
  j["u_sup"] = rep.u_sup;
  j["argmin"] = {{"u", rep.arg_u}, {"v", rep.arg_v}};
  sink.emit_json("witness.json", j);
  std::cout << "witness ratio inf = " << format_double(rep.min_ratio) << " over "
            << rep.region_nodes << " nodes\n";
  sink.finish();
}

void run_ballprop(const CommonOpts& common, const PatchChoice& pc, const std::string& dx_text,
                  double ball_R, double delta, const std::string& centers_text) {
  const double dx = parse_number(dx_text);
  require(dx > 0.0, "dx must be positive");
  require(ball_R > 0.0, "ball-radius must be positive");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  const auto centers = parse_points(centers_text);

  RunSink sink;
  sink.subcommand = "ballprop";
  sink.dir = common.out;
  sink.dry = common.dry_run;
  sink.config = patch_config_json(pc);
  sink.config["dx"] = dx;
  sink.config["ball-radius"] = ball_R;
  sink.config["delta"] = delta;
  sink.config["centers"] = centers_text;
  if (!sink.plan_or_start({"ballprop.json"})) return;

  const ConformalPatch patch = build_patch(pc);
  const GridDiscretization dis = discretize(patch, dx);
  const BallPropertyReport rep = ball_property_check(dis, centers, ball_R, delta);

  json j;
  j["descriptor"] = patch.descriptor;
  j["R"] = rep.R;
  j["delta"] = rep.delta;
  j["ratio"] = rep.ratio;
  j["vol_small"] = rep.vol_small;
  j["vol_big"] = rep.vol_big;
  j["C"] = rep.C;
  j["bound"] = rep.bound;
  j["negativity_threshold"] = rep.negativity_threshold;
  const double probe = 1.1 * rep.bound;
  j["lambda_probe"] = probe;
  std::vector<double> i_vals;
  for (std::size_t c = 0; c < rep.ratio.size(); ++c) i_vals.push_back(rep.i_lambda(c, probe));
  j["i_lambda_at_probe"] = i_vals;
  sink.emit_json("ballprop.json", j);
  std::cout << "C = " << format_double(rep.C)
            << ", bound = " << format_double(rep.bound) << '\n';
  sink.finish();
}

void run_hausdorff(const CommonOpts& common, const std::string& set, std::size_t count,
                   std::uint64_t seed, const std::string& gauge_text, double delta0,
                   const std::string& deltas_text, const std::string& strategy_text,
                   double volume, bool keep_balls, double margin, double v_extent, bool plot) {
  require(count > 0, "count must be positive");
  require(volume >= 0.0, "volume must be nonnegative");
  const std::vector<double> deltas = parse_delta_schedule(deltas_text);

  CoverGauge gauge = CoverGauge::square();
  if (gauge_text == "square") {
    gauge = CoverGauge::square(delta0 > 0.0 ? delta0 : 1.0);
  } else if (gauge_text == "square-log") {
    gauge = CoverGauge::square_log(delta0 > 0.0 ? delta0 : 0.25);
  } else if (gauge_text.rfind("power:", 0) == 0) {
    gauge = CoverGauge::power(parse_number(gauge_text.substr(6)), delta0 > 0.0 ? delta0 : 1.0);
  } else {
    throw std::invalid_argument("unknown gauge '" + gauge_text +
                                "' (square | square-log | power:<theta>)");
  }
  MeasureOptions opt;
  if (strategy_text == "grid") opt.strategy = CoverStrategy::grid;
  else if (strategy_text == "greedy") opt.strategy = CoverStrategy::greedy;
  else throw std::invalid_argument("unknown strategy '" + strategy_text + "'");
  opt.reference_volume = volume;
  opt.keep_balls = keep_balls;

  RunSink sink;
  sink.subcommand = "hausdorff";
  sink.dir = common.out;
  sink.dry = common.dry_run;
  sink.config = {{"set", set},         {"count", count},       {"seed", seed},
                 {"gauge", gauge_text}, {"delta0", delta0},    {"deltas", deltas_text},
                 {"strategy", strategy_text}, {"volume", volume}, {"keep-balls", keep_balls},
                 {"margin", margin},   {"v-extent", v_extent}, {"plot", plot}};
  std::vector<std::string> planned{"hausdorff.json", "cover.csv"};
  if (keep_balls) planned.push_back("cover_balls.csv");
  if (plot) planned.push_back("hausdorff.svg");
  if (!sink.plan_or_start(planned)) return;

  PointCloud cloud;
  if (set == "segment") {
    cloud = sample_unit_segment(count, seed);
  } else if (set == "square") {
    cloud = sample_unit_square(count, seed);
  } else if (set == "andrade-limit") {
    require(margin > 0.0, "margin must be positive");
    const ConformalPatch patch = andrade_surface(AndradeParams{}, 1.0, v_extent);
    cloud = limit_set_sample(patch, margin, count, seed);
  } else {
    throw std::invalid_argument("unknown set '" + set +
                                "' (segment | square | andrade-limit)");
  }
  const CoverReport rep = measure_limit(cloud, gauge, deltas, opt);

  json j;
  j["set"] = set;
  j["count"] = count;
  j["gauge"] = rep.gauge;
  j["strategy"] = rep.strategy;
  j["verdict"] = to_string(rep.verdict);
  j["slope"] = rep.slope;
  j["density_ok"] = rep.density_ok;
  j["deltas"] = rep.deltas;
  j["sums"] = rep.sums;
  j["envelope"] = rep.envelope;
  j["cardinality"] = rep.cardinality;
  j["occupancy"] = rep.occupancy;
  j["packing_bound"] = rep.packing_bound;
  sink.emit_json("hausdorff.json", j);
  write_cover_csv(rep, (sink.emit("cover.csv")).string());
  if (keep_balls) write_cover_balls_csv(rep.covers.back(), (sink.emit("cover_balls.csv")).string());
  if (plot)
    write_svg_plot(sink.emit("hausdorff.svg"), "covering sums: " + set, "delta",
                   "sum Psi(diam)", rep.deltas, rep.sums, true, true);
  std::cout << "verdict: " << to_string(rep.verdict) << '\n';
  sink.finish();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speclab: numerical toolkit for spectral discreteness of bounded immersions"};
  app.require_subcommand(1);

  // model ---------------------------------------------------------------
  auto* c_model = app.add_subcommand("model", "solve the comparison ODE h'' = G h");
  Bindings b_model;
  CommonOpts common_model;
  struct {
    std::string G = "const:0";
    double tmax = 5.0;
    std::string step = "1e-3";
    int m = 2;
    bool plot = false;
  } mo;
  bind_option(c_model, b_model, "G", mo.G, "curvature bound, const:<value>");
  bind_option(c_model, b_model, "tmax", mo.tmax, "solve horizon");
  bind_option(c_model, b_model, "step", mo.step, "RK4 step (number or fraction)");
  bind_option(c_model, b_model, "m", mo.m, "dimension for the parabolicity test");
  bind_flag(c_model, b_model, "plot", mo.plot, "emit SVG of h(t)");
  add_common_flags(c_model, b_model, common_model);
  c_model->callback([&] {
    if (!common_model.config.empty()) apply_config(common_model.config, b_model);
    run_model(common_model, mo.G, mo.tmax, mo.step, mo.m, mo.plot);
  });

  // subharmonic -----------------------------------------------------------
  auto* c_sub = app.add_subcommand("subharmonic", "build the radial barrier g and certificates");
  Bindings b_sub;
  CommonOpts common_sub;
  struct {
    double theta = 1.0, a = 0.25, R = 1.0, tmax = 0.0;
    std::string G = "const:0";
    std::string step = "1/512";
    bool plot = false;
  } so;
  bind_option(c_sub, b_sub, "theta", so.theta, "mean-curvature margin theta");
  bind_option(c_sub, b_sub, "a", so.a, "anchor radius a");
  bind_option(c_sub, b_sub, "R", so.R, "barrier range R");
  bind_option(c_sub, b_sub, "tmax", so.tmax, "model horizon (0 = R)");
  bind_option(c_sub, b_sub, "G", so.G, "curvature bound, const:<value>");
  bind_option(c_sub, b_sub, "step", so.step, "ODE step");
  bind_flag(c_sub, b_sub, "plot", so.plot, "emit SVG of g(t)");
  add_common_flags(c_sub, b_sub, common_sub);
  c_sub->callback([&] {
    if (!common_sub.config.empty()) apply_config(common_sub.config, b_sub);
    run_subharmonic(common_sub, so.theta, so.a, so.R, so.tmax, so.G, so.step, so.plot);
  });

  // surface ---------------------------------------------------------------
  auto* c_surf = app.add_subcommand("surface", "report a conformal patch and sample it");
  Bindings b_surf;
  CommonOpts common_surf;
  PatchChoice pc_surf;
  struct {
    int samples = 64;
    std::size_t limit_set = 0;
    double margin = 0.0;
    std::uint64_t seed = 20260815u;
  } fo;
  add_patch_flags(c_surf, b_surf, pc_surf);
  bind_option(c_surf, b_surf, "samples", fo.samples, "CSV sample grid per side");
  bind_option(c_surf, b_surf, "limit-set", fo.limit_set, "limit-set sample count (0 = off)");
  bind_option(c_surf, b_surf, "margin", fo.margin, "escape margin (0 = 5% of diameter)");
  bind_option(c_surf, b_surf, "seed", fo.seed, "sampling seed");
  add_common_flags(c_surf, b_surf, common_surf);
  c_surf->callback([&] {
    if (!common_surf.config.empty()) apply_config(common_surf.config, b_surf);
    run_surface(common_surf, pc_surf, fo.samples, fo.limit_set, fo.margin, fo.seed);
  });

  // spectrum ----------------------------------------------------------------
  auto* c_spec = app.add_subcommand("spectrum", "smallest Dirichlet eigenvalues of a patch");
  Bindings b_spec;
  CommonOpts common_spec;
  PatchChoice pc_spec;
  struct {
    std::string dx = "1/64";
    int k = 5;
    double tol = 1e-10;
    int max_iter = 300;
    int refine = 0;
    std::uint64_t seed = 12345u;
    bool plot = false;
    bool dump_problem = false;
  } eo;
  add_patch_flags(c_spec, b_spec, pc_spec);
  bind_option(c_spec, b_spec, "dx", eo.dx, "grid spacing (number or fraction)");
  bind_option(c_spec, b_spec, "k", eo.k, "eigenvalue count");
  bind_option(c_spec, b_spec, "tol", eo.tol, "residual tolerance");
  bind_option(c_spec, b_spec, "max-iter", eo.max_iter, "iteration cap");
  bind_option(c_spec, b_spec, "refine", eo.refine, "post-convergence refinement steps");
  bind_option(c_spec, b_spec, "seed", eo.seed, "subspace seed");
  bind_flag(c_spec, b_spec, "plot", eo.plot, "emit SVG of index vs eigenvalue");
  bind_flag(c_spec, b_spec, "dump-problem", eo.dump_problem, "export stiffness/mass");
  add_common_flags(c_spec, b_spec, common_spec);
  c_spec->callback([&] {
    if (!common_spec.config.empty()) apply_config(common_spec.config, b_spec);
    run_spectrum(common_spec, pc_spec, eo.dx, eo.k, eo.tol, eo.max_iter, eo.refine, eo.seed,
                 eo.plot, eo.dump_problem);
  });

  // persson -----------------------------------------------------------------
  auto* c_pers = app.add_subcommand("persson", "fundamental tones along a nested exhaustion");
  Bindings b_pers;
  CommonOpts common_pers;
  PatchChoice pc_pers;
  struct {
    std::string dx = "1/64";
    int levels = 6;
    double tol = 1e-8;
    int max_iter = 300;
    std::uint64_t seed = 12345u;
    bool plot = false;
  } po;
  add_patch_flags(c_pers, b_pers, pc_pers);
  bind_option(c_pers, b_pers, "dx", po.dx, "grid spacing");
  bind_option(c_pers, b_pers, "levels", po.levels, "exhaustion depth");
  bind_option(c_pers, b_pers, "tol", po.tol, "residual tolerance");
  bind_option(c_pers, b_pers, "max-iter", po.max_iter, "iteration cap");
  bind_option(c_pers, b_pers, "seed", po.seed, "subspace seed");
  bind_flag(c_pers, b_pers, "plot", po.plot, "emit SVG of lambda* vs level");
  add_common_flags(c_pers, b_pers, common_pers);
  c_pers->callback([&] {
    if (!common_pers.config.empty()) apply_config(common_pers.config, b_pers);
    run_persson(common_pers, pc_pers, po.dx, po.levels, po.tol, po.max_iter, po.seed, po.plot);
  });

  // barta ---------------------------------------------------------------------
  auto* c_barta = app.add_subcommand("barta", "Barta bound with the computed ground state");
  Bindings b_barta;
  CommonOpts common_barta;
  PatchChoice pc_barta;
  struct {
    std::string dx = "1/64";
    double tol = 1e-9;
    int max_iter = 300;
    int refine = 10;
    std::uint64_t seed = 12345u;
  } bo;
  add_patch_flags(c_barta, b_barta, pc_barta);
  bind_option(c_barta, b_barta, "dx", bo.dx, "grid spacing");
  bind_option(c_barta, b_barta, "tol", bo.tol, "residual tolerance");
  bind_option(c_barta, b_barta, "max-iter", bo.max_iter, "iteration cap");
  bind_option(c_barta, b_barta, "refine", bo.refine, "ground-pair refinement steps");
  bind_option(c_barta, b_barta, "seed", bo.seed, "subspace seed");
  add_common_flags(c_barta, b_barta, common_barta);
  c_barta->callback([&] {
    if (!common_barta.config.empty()) apply_config(common_barta.config, b_barta);
    run_barta(common_barta, pc_barta, bo.dx, bo.tol, bo.max_iter, bo.refine, bo.seed);
  });

  // witness ---------------------------------------------------------------------
  auto* c_wit = app.add_subcommand("witness", "first-step Barta witness on the flat unit disk");
  Bindings b_wit;
  CommonOpts common_wit;
  struct {
    std::string r1 = "1/256";
    int balls = 12;
    std::string dx;
    double rho_max = 2.05;
    double theta = 1.0;
    std::string model_step = "0";
  } wo;
  bind_option(c_wit, b_wit, "r1", wo.r1, "step scale r1 (number or fraction)");
  bind_option(c_wit, b_wit, "balls", wo.balls, "rim cover ball count");
  bind_option(c_wit, b_wit, "dx", wo.dx, "grid spacing (default r1/2)");
  bind_option(c_wit, b_wit, "rho-max", wo.rho_max, "ambient distance cap for barriers");
  bind_option(c_wit, b_wit, "theta", wo.theta, "barrier theta");
  bind_option(c_wit, b_wit, "model-step", wo.model_step, "barrier ODE step (0 = r1/16)");
  add_common_flags(c_wit, b_wit, common_wit);
  c_wit->callback([&] {
    if (!common_wit.config.empty()) apply_config(common_wit.config, b_wit);
    run_witness(common_wit, wo.r1, wo.balls, wo.dx, wo.rho_max, wo.theta, wo.model_step);
  });

  // ballprop ----------------------------------------------------------------------
  auto* c_ball = app.add_subcommand("ballprop", "volume-doubling ball-property report");
  Bindings b_ball;
  CommonOpts common_ball;
  PatchChoice pc_ball;
  struct {
    std::string dx = "1/48";
    double ball_R = 0.5;
    double delta = 0.5;
    std::string centers = "0,0";
  } go;
  add_patch_flags(c_ball, b_ball, pc_ball);
  bind_option(c_ball, b_ball, "dx", go.dx, "grid spacing");
  bind_option(c_ball, b_ball, "ball-radius", go.ball_R, "intrinsic ball radius R");
  bind_option(c_ball, b_ball, "delta", go.delta, "inner radius fraction delta");
  bind_option(c_ball, b_ball, "centers", go.centers, "centers 'u,v;u,v;...'");
  add_common_flags(c_ball, b_ball, common_ball);
  c_ball->callback([&] {
    if (!common_ball.config.empty()) apply_config(common_ball.config, b_ball);
    run_ballprop(common_ball, pc_ball, go.dx, go.ball_R, go.delta, go.centers);
  });

  // hausdorff ----------------------------------------------------------------------
  auto* c_haus = app.add_subcommand("hausdorff", "gauge covering sums of a sampled set");
  Bindings b_haus;
  CommonOpts common_haus;
  struct {
    std::string set = "segment";
    std::size_t count = 10000;
    std::uint64_t seed = 7u;
    std::string gauge = "square-log";
    double delta0 = 0.0;
    std::string deltas = "2^-4..2^-10";
    std::string strategy = "grid";
    double volume = 0.0;
    bool keep_balls = false;
    double margin = 0.8;
    double v_extent = 400.0;
    bool plot = false;
  } ho;
  bind_option(c_haus, b_haus, "set", ho.set, "segment | square | andrade-limit");
  bind_option(c_haus, b_haus, "count", ho.count, "sample size");
  bind_option(c_haus, b_haus, "seed", ho.seed, "sampling seed");
  bind_option(c_haus, b_haus, "gauge", ho.gauge, "square | square-log | power:<theta>");
  bind_option(c_haus, b_haus, "delta0", ho.delta0, "gauge validity radius (0 = default)");
  bind_option(c_haus, b_haus, "deltas", ho.deltas, "schedule: 2^-A..2^-B or comma list");
  bind_option(c_haus, b_haus, "strategy", ho.strategy, "grid | greedy");
  bind_option(c_haus, b_haus, "volume", ho.volume, "reference volume for the packing bound");
  bind_flag(c_haus, b_haus, "keep-balls", ho.keep_balls, "export the finest realized cover");
  bind_option(c_haus, b_haus, "margin", ho.margin, "escape margin for andrade-limit");
  bind_option(c_haus, b_haus, "v-extent", ho.v_extent, "strip half-length for andrade-limit");
  bind_flag(c_haus, b_haus, "plot", ho.plot, "emit log-log SVG of sum vs delta");
  add_common_flags(c_haus, b_haus, common_haus);
  c_haus->callback([&] {
    if (!common_haus.config.empty()) apply_config(common_haus.config, b_haus);
    run_hausdorff(common_haus, ho.set, ho.count, ho.seed, ho.gauge, ho.delta0, ho.deltas,
                  ho.strategy, ho.volume, ho.keep_balls, ho.margin, ho.v_extent, ho.plot);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const json::parse_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
