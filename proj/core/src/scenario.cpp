#include "qbnf/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "qbnf/error.hpp"

namespace qbnf {
namespace {

using json = nlohmann::ordered_json;

template <class T>
T required(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw ConfigError(where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class T>
T optional(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  return required<T>(j, key, where);
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (std::none_of(keys.begin(), keys.end(), [&](const char* s) { return k == s; }))
      throw ConfigError(where + ": unknown key '" + k + "'");
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

TauSeries tau_series(const json& j, const char* key, const std::string& where) {
  const auto c = required<std::vector<double>>(j, key, where);
  if (c.empty()) throw ConfigError(where + "." + key + ": needs at least one coefficient");
  std::vector<Complex> cc(c.begin(), c.end());
  return TauSeries(cc, static_cast<int>(cc.size()) - 1);
}

json tau_json(const TauSeries& s) {
  json a = json::array();
  for (Complex c : s.coeffs()) a.push_back(c.real());
  return a;
}

int max_term_grade(const json& terms, bool cylinder) {
  int g = 2;
  for (const auto& t : terms) {
    int deg = 0;
    if (cylinder) {
      deg = t.value("x", 0) + t.value("xi", 0);
    } else {
      for (int i = 0; i < 2; ++i) deg += t.at("x").at(i).get<int>() + t.at("xi").at(i).get<int>();
    }
    g = std::max(g, deg + 2 * t.value("j", 0));
  }
  return g;
}

CylinderModel parse_cylinder(const json& j) {
  const std::string w = "model";
  reject_unknown(j, {"kind", "orientable", "S", "E0", "f", "mu", "terms"}, w);
  CylinderModel m;
  m.orientable = required<bool>(j, "orientable", w);
  m.action = optional<double>(j, "S", w, 0.0);
  m.energy = optional<double>(j, "E0", w, 0.0);
  m.f = tau_series(j, "f", w);
  m.mu = tau_series(j, "mu", w);
  const json terms = optional<json>(j, "terms", w, json::array());
  if (!terms.is_array()) throw ConfigError("model.terms: expected an array");
  int tau_max = 0;
  for (const auto& t : terms) tau_max = std::max(tau_max, t.value("a", 0));
  m.perturbation = FormalSymbol(PhaseSpec::cylinder(max_term_grade(terms, true), m.orientable, tau_max));
  std::size_t i = 0;
  for (const auto& t : terms) {
    const std::string tw = "model.terms[" + std::to_string(i++) + "]";
    reject_unknown(t, {"m", "a", "x", "xi", "j", "re", "im"}, tw);
    const double mode = optional<double>(t, "m", tw, 0.0);
    const double twice = 2.0 * mode;
    if (std::abs(twice - std::round(twice)) > 1e-12)
      throw ConfigError(tw + ".m: Fourier mode must be an integer or half-integer");
    Monomial mo;
    mo.twice_mode = static_cast<int>(std::lround(twice));
    mo.tau_power = optional<int>(t, "a", tw, 0);
    mo.x_pow = {optional<int>(t, "x", tw, 0), 0};
    mo.xi_pow = {optional<int>(t, "xi", tw, 0), 0};
    mo.h_power = optional<int>(t, "j", tw, 0);
    const Complex c{optional<double>(t, "re", tw, 0.0), optional<double>(t, "im", tw, 0.0)};
    try {
      m.perturbation.add(mo, c);
    } catch (const SpecError& e) {
      throw ConfigError(tw + ": " + e.what());
    }
  }
  return m;
}

SaddleModel parse_saddle(const json& j) {
  const std::string w = "model";
  reject_unknown(j, {"kind", "E0", "lambda1", "lambda2", "terms"}, w);
  SaddleModel m;
  m.energy = optional<double>(j, "E0", w, 0.0);
  m.lambda1 = required<double>(j, "lambda1", w);
  m.lambda2 = required<double>(j, "lambda2", w);
  const json terms = optional<json>(j, "terms", w, json::array());
  if (!terms.is_array()) throw ConfigError("model.terms: expected an array");
  std::size_t i = 0;
  for (const auto& t : terms) {
    const std::string tw = "model.terms[" + std::to_string(i++) + "]";
    reject_unknown(t, {"x", "xi", "j", "re", "im"}, tw);
    required<std::array<int, 2>>(t, "x", tw);
    required<std::array<int, 2>>(t, "xi", tw);
  }
  m.higher = FormalSymbol(PhaseSpec::plane(2, max_term_grade(terms, false)));
  i = 0;
  for (const auto& t : terms) {
    const std::string tw = "model.terms[" + std::to_string(i++) + "]";
    Monomial mo;
    const auto x = required<std::array<int, 2>>(t, "x", tw);
    const auto xi = required<std::array<int, 2>>(t, "xi", tw);
    mo.x_pow = x;
    mo.xi_pow = xi;
    mo.h_power = optional<int>(t, "j", tw, 0);
    const Complex c{optional<double>(t, "re", tw, 0.0), optional<double>(t, "im", tw, 0.0)};
    try {
      m.higher.add(mo, c);
    } catch (const SpecError& e) {
      throw ConfigError(tw + ": " + e.what());
    }
  }
  return m;
}

json model_json(const Model& model) {
  json j;
  if (const auto* c = std::get_if<CylinderModel>(&model)) {
    j["kind"] = "cylinder";
    j["orientable"] = c->orientable;
    j["S"] = c->action;
    j["E0"] = c->energy;
    j["f"] = tau_json(c->f);
    j["mu"] = tau_json(c->mu);
    json terms = json::array();
    for (const auto& [m, v] : c->perturbation.terms())
      terms.push_back({{"m", m.mode()}, {"a", m.tau_power}, {"x", m.x_pow[0]}, {"xi", m.xi_pow[0]},
                       {"j", m.h_power}, {"re", v.real()}, {"im", v.imag()}});
    j["terms"] = terms;
  } else {
    const auto& s = std::get<SaddleModel>(model);
    j["kind"] = "saddle";
    j["E0"] = s.energy;
    j["lambda1"] = s.lambda1;
    j["lambda2"] = s.lambda2;
    json terms = json::array();
    for (const auto& [m, v] : s.higher.terms())
      terms.push_back({{"x", m.x_pow}, {"xi", m.xi_pow}, {"j", m.h_power}, {"re", v.real()},
                       {"im", v.imag()}});
    j["terms"] = terms;
  }
  return j;
}

std::string kind_name(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const DegeneracyError*>(&e)) return "degeneracy";
  if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
  if (dynamic_cast<const ConvergenceError*>(&e)) return "convergence";
  if (dynamic_cast<const SpecError*>(&e)) return "phase_space";
  return "internal";
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + p.string());
  os << text;
}

json nf_json(const NormalFormPoly& nf) {
  json j;
  j["kind"] = nf.kind == NormalFormKind::ClosedOrbit ? "closed_orbit" : "equilibrium";
  j["variables"] = nf.kind == NormalFormKind::ClosedOrbit ? json::array({"tau", "iota", "h"})
                                                          : json::array({"iota1", "iota2", "h"});
  j["order"] = nf.order;
  j["S"] = num(nf.action);
  j["E0"] = num(nf.energy);
  j["orientable"] = nf.orientable;
  json c = json::array();
  for (const auto& [k, v] : nf.coeffs)
    c.push_back({{"powers", k}, {"grade", nf.grade(k)}, {"re", num(v.real())}, {"im", num(v.imag())}});
  j["coefficients"] = c;
  return j;
}

int stage_rank(Stage s) {
  switch (s) {
    case Stage::Bnf: return 0;
    case Stage::Lattice: return 1;
    case Stage::Direct: return 2;
    case Stage::Compare: return 3;
    case Stage::Sweep: return 4;
    case Stage::Run: return 5;
  }
  return 5;
}

struct PerH {
  ResonanceLattice lattice;
  std::optional<DirectSpectrum> direct;
  std::optional<MatchReport> report;
};

}  // namespace

BasisSpec ScenarioConfig::basis_for(double h) const {
  if (const auto* c = std::get_if<CylinderModel>(&model))
    return BasisSpec::cylinder(compute.k_min, compute.k_max, compute.levels, h, c->action, c->orientable);
  return BasisSpec::saddle(compute.levels1, compute.levels2, h);
}

void validate(const ScenarioConfig& config) {
  if (config.schema_version != ScenarioConfig::kSchemaVersion)
    throw ConfigError("schema_version: unsupported version " + std::to_string(config.schema_version));
  std::visit([](const auto& m) { validate(m); }, config.model);
  const ComputeConfig& c = config.compute;
  if (c.N < 2) throw ConfigError("compute.N: must be at least 2");
  if (c.h.empty()) throw ConfigError("compute.h: needs at least one value");
  for (std::size_t i = 0; i < c.h.size(); ++i) {
    if (!(c.h[i] > 0.0)) throw ConfigError("compute.h: values must be positive");
    if (i > 0 && !(c.h[i] < c.h[i - 1])) throw ConfigError("compute.h: values must be strictly descending");
  }
  c.window.validate();
  if (!(c.stability_tol > 0.0)) throw ConfigError("compute.stability_tol: must be positive");
  if (c.max_level < 0) throw ConfigError("compute.max_level: must be nonnegative");
  for (const auto& f : config.output.formats)
    if (f != "csv" && f != "json") throw ConfigError("output.formats: unknown format '" + f + "'");
  for (double h : c.h) config.basis_for(h).validate();
}

static ScenarioConfig parse_document(const std::string& text);

ScenarioConfig parse_scenario(const std::string& text) {
  try {
    return parse_document(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

static ScenarioConfig parse_document(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: not valid JSON: ") + e.what());
  }
  reject_unknown(j, {"schema_version", "name", "model", "compute", "output"}, "scenario");
  ScenarioConfig cfg;
  cfg.schema_version = required<int>(j, "schema_version", "scenario");
  cfg.name = optional<std::string>(j, "name", "scenario", "");
  const json& m = j.contains("model") ? j.at("model") : throw ConfigError("scenario: missing key 'model'");
  const auto kind = required<std::string>(m, "kind", "model");
  if (kind == "cylinder") {
    cfg.model = parse_cylinder(m);
  } else if (kind == "saddle") {
    cfg.model = parse_saddle(m);
  } else {
    throw ConfigError("model.kind: expected 'cylinder' or 'saddle', got '" + kind + "'");
  }
  const json c = optional<json>(j, "compute", "scenario", json::object());
  reject_unknown(c, {"N", "K_tau", "grade_slack", "h", "window", "basis", "direct", "match",
                     "stability_tol", "max_level"},
                 "compute");
  ComputeConfig& cc = cfg.compute;
  cc.N = optional<int>(c, "N", "compute", cc.N);
  cc.tau_max = optional<int>(c, "K_tau", "compute", -1);
  cc.grade_slack = optional<int>(c, "grade_slack", "compute", cc.grade_slack);
  cc.h = optional<std::vector<double>>(c, "h", "compute", cc.h);
  const json w = optional<json>(c, "window", "compute", json::object());
  reject_unknown(w, {"eps0", "eps1"}, "compute.window");
  cc.window.half_width = optional<double>(w, "eps0", "compute.window", cc.window.half_width);
  cc.window.depth = optional<double>(w, "eps1", "compute.window", cc.window.depth);
  const json b = optional<json>(c, "basis", "compute", json::object());
  reject_unknown(b, {"k_min", "k_max", "L_max", "L1", "L2"}, "compute.basis");
  cc.k_min = optional<int>(b, "k_min", "compute.basis", cc.k_min);
  cc.k_max = optional<int>(b, "k_max", "compute.basis", cc.k_max);
  cc.levels = optional<int>(b, "L_max", "compute.basis", cc.levels);
  cc.levels1 = optional<int>(b, "L1", "compute.basis", cc.levels1);
  cc.levels2 = optional<int>(b, "L2", "compute.basis", cc.levels2);
  cc.direct = optional<bool>(c, "direct", "compute", cc.direct);
  const json mt = optional<json>(c, "match", "compute", json::object());
  reject_unknown(mt, {"max_k", "max_l"}, "compute.match");
  cc.match_max_k = optional<int>(mt, "max_k", "compute.match", cc.match_max_k);
  cc.match_max_l = optional<int>(mt, "max_l", "compute.match", cc.match_max_l);
  cc.stability_tol = optional<double>(c, "stability_tol", "compute", cc.stability_tol);
  cc.max_level = optional<int>(c, "max_level", "compute", cc.max_level);
  std::visit([&](const auto& model) { cc.window.center = model.energy; }, cfg.model);
  const json o = optional<json>(j, "output", "scenario", json::object());
  reject_unknown(o, {"directory", "formats"}, "output");
  cfg.output.directory = optional<std::string>(o, "directory", "output", cfg.output.directory);
  cfg.output.formats = optional<std::vector<std::string>>(o, "formats", "output", cfg.output.formats);
  validate(cfg);
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read scenario file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_scenario(ss.str());
}

std::string serialize_scenario(const ScenarioConfig& config) {
  json j;
  j["schema_version"] = config.schema_version;
  j["name"] = config.name;
  j["model"] = model_json(config.model);
  const ComputeConfig& c = config.compute;
  json cj;
  cj["N"] = c.N;
  cj["K_tau"] = c.tau_max < 0 ? json(nullptr) : json(c.tau_max);
  cj["grade_slack"] = c.grade_slack;
  cj["h"] = c.h;
  cj["window"] = {{"eps0", c.window.half_width}, {"eps1", c.window.depth}};
  if (std::holds_alternative<CylinderModel>(config.model))
    cj["basis"] = {{"k_min", c.k_min}, {"k_max", c.k_max}, {"L_max", c.levels}};
  else
    cj["basis"] = {{"L1", c.levels1}, {"L2", c.levels2}};
  cj["direct"] = c.direct;
  cj["match"] = {{"max_k", c.match_max_k}, {"max_l", c.match_max_l}};
  cj["stability_tol"] = c.stability_tol;
  cj["max_level"] = c.max_level;
  j["compute"] = cj;
  j["output"] = {{"directory", config.output.directory}, {"formats", config.output.formats}};
  return j.dump(2) + "\n";
}

Stage parse_stage(const std::string& name) {
  if (name == "bnf") return Stage::Bnf;
  if (name == "lattice") return Stage::Lattice;
  if (name == "direct") return Stage::Direct;
  if (name == "compare") return Stage::Compare;
  if (name == "sweep") return Stage::Sweep;
  if (name == "run") return Stage::Run;
  throw ConfigError("unknown stage '" + name + "'");
}

std::string lattice_csv(const ResonanceLattice& lattice) {
  std::string s = "k,l,re_z,im_z\n";
  for (const auto& e : lattice.entries)
    s += std::to_string(e.k) + "," + std::to_string(e.l) + "," + num(e.z.real()) + "," + num(e.z.imag()) + "\n";
  return s;
}

std::string spectrum_csv(const DirectSpectrum& spectrum, const Window& window) {
  std::string s = "re_z,im_z,residual\n";
  const auto& ev = spectrum.spectrum.eigenvalues;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < ev.size(); ++i)
    if (spectrum.stable[i] && window.contains(ev[i])) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::make_pair(ev[a].real(), ev[a].imag()) < std::make_pair(ev[b].real(), ev[b].imag());
  });
  for (std::size_t i : order)
    s += num(ev[i].real()) + "," + num(ev[i].imag()) + "," + num(spectrum.spectrum.residuals[i]) + "\n";
  return s;
}

std::string match_csv(const MatchReport& report) {
  std::string s = "k,l,re_pred,im_pred,re_comp,im_comp,abs_err\n";
  for (const auto& p : report.pairs)
    s += std::to_string(p.k) + "," + std::to_string(p.l) + "," + num(p.predicted.real()) + "," +
         num(p.predicted.imag()) + "," + num(p.computed.real()) + "," + num(p.computed.imag()) + "," +
         num(p.error) + "\n";
  return s;
}

std::string emit_plot_data(const ResonanceLattice& lattice, const MatchReport* report) {
  std::string s = "re,im,k,l,source,pair_id\n";
  auto pair_of = [&](const LatticeEntry& e) -> int {
    if (!report) return -1;
    for (std::size_t i = 0; i < report->pairs.size(); ++i)
      if (report->pairs[i].k == e.k && report->pairs[i].l == e.l) return static_cast<int>(i);
    return -1;
  };
  for (const auto& e : lattice.entries)
    s += num(e.z.real()) + "," + num(e.z.imag()) + "," + std::to_string(e.k) + "," +
         std::to_string(e.l) + ",predicted," + std::to_string(pair_of(e)) + "\n";
  if (report) {
    for (std::size_t i = 0; i < report->pairs.size(); ++i) {
      const auto& p = report->pairs[i];
      s += num(p.computed.real()) + "," + num(p.computed.imag()) + "," + std::to_string(p.k) + "," +
           std::to_string(p.l) + ",computed," + std::to_string(i) + "\n";
    }
    for (Complex z : report->unmatched_computed)
      s += num(z.real()) + "," + num(z.imag()) + ",,,computed,-1\n";
  }
  return s;
}

RunOutcome run_scenario(const ScenarioConfig& config, Stage stage,
                        const std::filesystem::path& out_dir, int threads) {
  validate(config);
  const std::filesystem::path dir = out_dir.empty() ? std::filesystem::path(config.output.directory) : out_dir;
  std::filesystem::create_directories(dir);
  const bool csv = std::find(config.output.formats.begin(), config.output.formats.end(), "csv") !=
                   config.output.formats.end();
  const bool js = std::find(config.output.formats.begin(), config.output.formats.end(), "json") !=
                  config.output.formats.end();
  const ComputeConfig& cc = config.compute;
  const int rank = stage_rank(stage);
  RunOutcome out;
  auto emit = [&](const std::string& name, const std::string& text) {
    write_file(dir / name, text);
    out.artifacts.push_back(dir / name);
  };
  try {
    BnfOptions bopts;
    bopts.grade_slack = cc.grade_slack;
    bopts.tau_max = cc.tau_max;
    const BnfResult bnf = normal_form(config.model, cc.N, bopts);
    if (js) emit("normal_form.json", nf_json(bnf.normal_form).dump(2) + "\n");

    if (rank >= 1) {
      LatticeOptions lopts;
      lopts.max_level = cc.max_level;
      DirectOptions dopts;
      dopts.stability_tol = cc.stability_tol;
      const bool want_direct = rank >= 2 && cc.direct;
      auto work = [&](double h) {
        PerH r{model_lattice(config.model, bnf.normal_form, h, cc.window, lopts), {}, {}};
        if (want_direct) {
          r.direct = direct_spectrum(config.model, config.basis_for(h), dopts);
          if (rank >= 3) {
            const double radius = default_match_radius(r.lattice);
            MatchReport rep = match_lattices(r.lattice, r.direct->in_window(cc.window.grown(radius)), radius);
            rep.N = cc.N;
            r.report = std::move(rep);
          }
        }
        return r;
      };
      std::vector<PerH> results(cc.h.size());
      const int workers = std::max(1, threads);
      for (std::size_t start = 0; start < cc.h.size(); start += static_cast<std::size_t>(workers)) {
        std::vector<std::future<PerH>> batch;
        for (std::size_t i = start; i < std::min(cc.h.size(), start + static_cast<std::size_t>(workers)); ++i)
          batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, work, cc.h[i]));
        for (std::size_t i = 0; i < batch.size(); ++i) results[start + i] = batch[i].get();
      }

      json report = json::array();
      for (std::size_t i = 0; i < results.size(); ++i) {
        const std::string tag = "_h" + std::to_string(i);
        const PerH& r = results[i];
        if (csv) emit("lattice" + tag + ".csv", lattice_csv(r.lattice));
        if (r.direct && csv) emit("spectrum" + tag + ".csv", spectrum_csv(*r.direct, cc.window));
        if (r.report) {
          if (csv) {
            emit("match" + tag + ".csv", match_csv(*r.report));
            emit("plot" + tag + ".csv", emit_plot_data(r.lattice, &*r.report));
          }
          std::size_t unstable = std::count(r.direct->stable.begin(), r.direct->stable.end(), false);
          double worst_residual = 0.0;
          for (double v : r.direct->spectrum.residuals) worst_residual = std::max(worst_residual, v);
          report.push_back({{"h", num(cc.h[i])},
                            {"N", cc.N},
                            {"radius", num(r.report->radius)},
                            {"pairs", r.report->pairs.size()},
                            {"unmatched_predicted", r.report->unmatched_predicted.size()},
                            {"unmatched_computed", r.report->unmatched_computed.size()},
                            {"max_err", num(r.report->max_err)},
                            {"mean_err", num(r.report->mean_err)},
                            {"unstable_eigenvalues", unstable},
                            {"max_residual", num(worst_residual)},
                            {"matrix_norm", num(r.direct->spectrum.norm)}});
        } else if (csv && rank >= 3 && !cc.direct) {
          emit("plot" + tag + ".csv", emit_plot_data(r.lattice));
        }
      }
      if (rank >= 3 && js && cc.direct) emit("report.json", report.dump(2) + "\n");

      if (rank >= 4 && cc.direct && cc.h.size() >= 3) {
        std::vector<double> errs;
        for (const auto& r : results) {
          double e = 0.0;
          for (const auto& p : r.report->pairs)
            if (std::abs(p.k) <= cc.match_max_k && p.l <= cc.match_max_l) e = std::max(e, p.error);
          errs.push_back(e);
        }
        const SweepResult fit = fit_convergence(cc.h, errs);
        json cj;
        cj["N"] = cc.N;
        cj["h"] = json::array();
        cj["errors"] = json::array();
        for (std::size_t i = 0; i < cc.h.size(); ++i) {
          cj["h"].push_back(num(cc.h[i]));
          cj["errors"].push_back(num(errs[i]));
        }
        cj["slope"] = num(fit.slope);
        cj["exact"] = fit.exact;
        cj["discarded_largest"] = fit.discarded_largest;
        if (js) emit("convergence.json", cj.dump(2) + "\n");
      }
    }
    out.complete = true;
  } catch (const std::exception& e) {
    out.complete = false;
    out.error_kind = kind_name(e);
    out.error_message = e.what();
  }
  json manifest;
  manifest["scenario"] = config.name;
  manifest["status"] = out.complete ? "complete" : "incomplete";
  json files = json::array();
  for (const auto& p : out.artifacts) files.push_back(p.filename().string());
  manifest["artifacts"] = files;
  if (!out.complete) manifest["error"] = {{"kind", out.error_kind}, {"message", out.error_message}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  out.artifacts.push_back(dir / "manifest.json");
  return out;
}

}  // namespace qbnf
