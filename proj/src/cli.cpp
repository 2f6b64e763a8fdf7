#include "ustar/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ustar/gallery.hpp"
#include "ustar/hkqk.hpp"
#include "ustar/probe.hpp"
#include "ustar/qk2ustar.hpp"

namespace ustar {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string("cannot read ") + what + " '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<Point> samples_of(const GalleryEntry& e, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back(e.sample(rng));
  return pts;
}

std::optional<double> family_parameter(const std::string& id, const std::string& prefix) {
  if (id == prefix) return 0.0;
  if (id.rfind(prefix + "_c", 0) != 0) return std::nullopt;
  return std::stod(id.substr(prefix.size() + 2));
}

}  // namespace

// ---------------------------------------------------------------------------
// Manifest and constants

std::vector<ManifestEntry> parse_manifest(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("manifest must be a JSON object");
  if (!doc.contains("schema_version") || doc["schema_version"] != 1) {
    throw ConfigError("manifest schema_version must be 1");
  }
  if (!doc.contains("entries") || !doc["entries"].is_array()) {
    throw ConfigError("manifest needs an 'entries' array");
  }
  std::vector<ManifestEntry> out;
  std::set<std::string> seen;
  for (std::size_t k = 0; k < doc["entries"].size(); ++k) {
    const json& row = doc["entries"][k];
    const std::string where = "manifest entry " + std::to_string(k);
    if (!row.is_object()) throw ConfigError(where + " is not an object");
    ManifestEntry m;
    try {
      m.id = row.at("id").get<std::string>();
      m.chart = row.at("chart").get<std::string>();
      m.dim = row.at("dim").get<int>();
      m.domain = row.at("domain").get<std::string>();
      m.invariants = row.at("invariants").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw ConfigError(where + ": " + e.what());
    }
    if (m.dim <= 0) throw ConfigError(where + ": dim must be positive");
    if (!seen.insert(m.id).second) throw ConfigError(where + ": duplicate id '" + m.id + "'");
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  return parse_manifest(read_file(path, "manifest"));
}

void validate_manifest(const std::vector<ManifestEntry>& entries) {
  for (const ManifestEntry& m : entries) {
    GalleryEntry e;
    try {
      e = make_entry(m.id);
    } catch (const GeometryError&) {
      throw ConfigError("manifest lists unknown entry '" + m.id + "'");
    }
    if (e.chart->dim != m.dim || e.chart->name != m.chart) {
      throw ConfigError("manifest row '" + m.id + "' disagrees with the gallery chart " +
                        e.chart->name + " (dim " + std::to_string(e.chart->dim) + ")");
    }
  }
}

std::string gallery_list_json(const std::vector<ManifestEntry>& entries) {
  json rows = json::array();
  for (const ManifestEntry& m : entries) {
    rows.push_back({{"id", m.id},
                    {"chart", m.chart},
                    {"dim", m.dim},
                    {"domain", m.domain},
                    {"invariants", m.invariants}});
  }
  json doc = {{"schema_version", Report::kSchemaVersion}, {"kind", "gallery_list"}, {"entries", rows}};
  return doc.dump(2) + "\n";
}

std::string gallery_list_csv(const std::vector<ManifestEntry>& entries) {
  std::ostringstream os;
  os << "id,dim,chart,domain\n";
  for (const ManifestEntry& m : entries) {
    os << m.id << "," << m.dim << "," << m.chart << ",\"" << m.domain << "\"\n";
  }
  return os.str();
}

std::map<std::string, double> load_constants(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path, "regression constants"));
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("constants file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("constants") || !doc["constants"].is_object()) {
    throw ConfigError("constants file needs a 'constants' object");
  }
  std::map<std::string, double> out;
  for (const auto& [k, v] : doc["constants"].items()) {
    if (!v.is_object() || !v.contains("value") || !v["value"].is_number()) {
      throw ConfigError("constant '" + k + "' needs a numeric 'value'");
    }
    out[k] = v["value"].get<double>();
  }
  return out;
}

namespace {

double constant(const std::map<std::string, double>& cs, const std::string& name) {
  const auto it = cs.find(name);
  if (it == cs.end()) throw ConfigError("regression constant '" + name + "' is missing");
  return it->second;
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

// The QK -> U*(2m) construction needs an Einstein metric with nonzero scalar curvature.
bool quaternion_kahler_at(const GalleryEntry& e, const Point& x) {
  const auto [lambda, res] = einstein_fit(e.metric, x);
  return std::abs(lambda) > 1e-8 && res <= 1e-6 * std::max(1.0, std::abs(lambda) * max_abs(e.metric.value(x)));
}

bool flat_at(const GalleryEntry& e, const Point& x) { return max_abs(riemann(e.metric, x)) <= 1e-12; }

}  // namespace

std::vector<std::string> available_checks(const std::string& id) {
  const GalleryEntry e = make_entry(id);
  std::vector<std::string> out = {"self_test", "metric_symmetric"};
  if (e.killing) out.push_back("killing");
  if (id == "s4") {
    out.insert(out.end(), {"constant_curvature", "einstein", "swann"});
  } else if (id == "s4_scalarflat") {
    out.insert(out.end(), {"scalar_flat", "kahler"});
  } else if (starts_with(id, "scalflat")) {
    out.insert(out.end(), {"scalar_flat", "kahler", "ricci_asd"});
  } else if (starts_with(id, "bergman")) {
    out.push_back("einstein");
    if (id == "bergman") out.push_back("swann");
  } else if (starts_with(id, "flat_hk_")) {
    out.insert(out.end(), {"hyperkahler", "haydys"});
  } else if (id == "flat4") {
    out.push_back("flat");
  }
  return out;
}

// ---------------------------------------------------------------------------
// verify

namespace {

struct Suite {
  const GalleryEntry& e;
  const std::vector<Point>& pts;
  const std::map<std::string, double>& constants;
  Report& rep;
};

Check run_check(const std::string& name, const Suite& s) {
  Check c;
  c.name = name;
  const GalleryEntry& e = s.e;
  auto each = [&](double tol, auto&& residual) {
    c.tolerance = tol;
    for (const Point& x : s.pts) c.observe(residual(x), x);
  };
  if (name == "self_test") {
    c.tolerance = 0.0;
    const auto failed = self_test(e);
    c.max_residual = static_cast<double>(failed.size());
    for (const auto& f : failed) c.note += (c.note.empty() ? "" : ",") + f;
  } else if (name == "metric_symmetric") {
    each(1e-12, [&](const Point& x) {
      const TensorD G = e.metric.value(x);
      return max_abs_diff(G, transpose(G));
    });
  } else if (name == "killing") {
    each(1e-8, [&](const Point& x) { return killing_residual(e.metric, *e.killing, x); });
  } else if (name == "constant_curvature") {
    each(1e-8, [&](const Point& x) { return constant_curvature_fit(e.metric, x).second; });
  } else if (name == "einstein") {
    // relative residual of Ric - lambda g, plus drift of lambda from its regression value
    std::optional<double> expected;
    if (const auto it = s.constants.find("einstein_lambda_" + e.id); it != s.constants.end()) {
      expected = it->second;
    }
    each(1e-6, [&](const Point& x) {
      const auto [lambda, res] = einstein_fit(e.metric, x);
      const double scale = std::max(1.0, max_abs(e.metric.value(x)) * std::abs(lambda));
      double r = res / scale;
      if (expected) r = std::max(r, std::abs(lambda - *expected));
      return r;
    });
    if (expected) c.note = "lambda regression value " + format_double(*expected);
  } else if (name == "scalar_flat") {
    each(1e-6, [&](const Point& x) { return std::abs(ricci_scalar(e.metric, x)); });
  } else if (name == "kahler") {
    each(1e-7, [&](const Point& x) {
      const auto k = kahler_check(e.metric, *e.complex_structure, x);
      return std::max(k.hermitian, k.closure);
    });
  } else if (name == "ricci_asd") {
    const double cpar = *family_parameter(e.id, "scalflat");
    const ComplexChartMetric h = scalflat_w_hermitian(cpar);
    const MetricField g = to_real_metric(h);
    each(1e-6, [&](const Point& x) {
      const Point w = scalflat_w_from_coords(x, cpar);
      const TensorD rho = ricci_form(h, w);
      return max_abs(sd_split(g.value(w), rho).first) / std::max(1.0, max_abs(rho));
    });
  } else if (name == "hyperkahler") {
    const HyperkahlerData hk = hyperkahler_data(e);
    each(1e-10, [&](const Point& x) {
      const auto r = hyperkahler_residuals(hk, x);
      return std::max({r.closure, r.quaternion, r.compatible});
    });
  } else if (name == "haydys") {
    const HyperkahlerData hk = hyperkahler_data(e);
    const ScalarField mu = flat_hk_moment(e.chart, e.quaternionic_dim);
    const FormField F = haydys_form(hk, mu);
    each(1e-7, [&](const Point& x) {
      const TensorD f = haydys_form(hk, mu, x);
      double r = max_abs(ext_d(F, x));
      for (const TensorD& J : hk.triple.value(x)) r = std::max(r, type11_test(f, J));
      return r;
    });
  } else if (name == "flat") {
    each(1e-12, [&](const Point& x) { return max_abs(riemann(e.metric, x)); });
  } else if (name == "swann") {
    const SwannChart sc(e.metric, s.pts);
    const MomentSection4d ms = moment_section_4d(e.metric, *e.killing, s.pts);
    const LiftedField lf = lifted_field(sc, ms);
    const std::array<double, 3> euler = {0.3, 1.1, -0.4};
    const double expected = constant(s.constants, "swann_c_" + e.id);
    each(1e-7, [&](const Point& x) {
      const Point p = sc.lift_point(x, SwannChart::frame(euler), 1.0);
      return std::max({sc.curvature_residual(p), lf.residual(p), std::abs(sc.c() - expected)});
    });
    s.rep.set("swann_c", sc.c());
    s.rep.set("swann_frame", std::string("R = Rz(psi1) Ry(psi2) Rz(psi3), psi2 in (0.1, pi - 0.1)"));
  } else {
    throw ConfigError("unknown check '" + name + "' for entry " + e.id);
  }
  c.finish();
  return c;
}

}  // namespace

Report cmd_verify(const SuiteConfig& cfg) {
  const GalleryEntry e = make_entry(cfg.entry);
  if (cfg.samples <= 0) throw ConfigError("--samples must be positive");
  if (cfg.tol && !(*cfg.tol > 0.0)) throw ConfigError("--tol must be positive");
  const auto available = available_checks(cfg.entry);
  std::vector<std::string> names = cfg.checks.empty() ? available : cfg.checks;
  for (const auto& n : names) {
    if (std::find(available.begin(), available.end(), n) == available.end()) {
      throw ConfigError("check '" + n + "' is not available for entry " + cfg.entry);
    }
  }
  const auto constants = load_constants(cfg.constants_path);
  const auto pts = samples_of(e, cfg.samples, cfg.seed);
  Report rep;
  rep.kind = "verify";
  rep.set("entry", e.id);
  rep.set("samples", static_cast<long long>(cfg.samples));
  rep.set("seed", static_cast<long long>(cfg.seed));
  const Suite suite{e, pts, constants, rep};
  for (const auto& n : names) {
    Check c = run_check(n, suite);
    if (cfg.tol) {
      c.tolerance = *cfg.tol;
      c.finish();
    }
    rep.checks.push_back(std::move(c));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// transform

Report cmd_transform(const SuiteConfig& cfg) {
  const GalleryEntry e = make_entry(cfg.entry);
  if (!e.killing) {
    throw GeometryError(ErrorKind::NoKillingField, "entry '" + e.id + "' has no Killing field");
  }
  if (!quaternion_kahler_at(e, e.basepoint)) {
    throw GeometryError(ErrorKind::InvalidInput,
                        "entry '" + e.id + "' is not Einstein with nonzero scalar curvature");
  }
  if (cfg.samples <= 0) throw ConfigError("--samples must be positive");
  const auto pts = samples_of(e, cfg.samples, cfg.seed);
  const UStarConstruction c = qk_to_ustar(e.metric, *e.killing, pts);
  std::vector<Point> eval_pts = pts;
  if (e.degenerate_points) {
    for (const Point& p : e.degenerate_points()) eval_pts.push_back(p);
  }
  VerifyOptions opt;
  if (cfg.tol) opt.tol = *cfg.tol;
  Report rep = verify_ustar(c, eval_pts, opt);
  rep.kind = "transform";
  rep.set("entry", e.id);
  rep.set("seed", static_cast<long long>(cfg.seed));

  const int n = e.metric.dim();
  const MetricField rescaled = rescaled_metric(e.metric, c.mu1);
  Table gam{"christoffel", {}, {}};
  Table resc{"rescaled_metric", {}, {}};
  for (int i = 0; i < n; ++i) {
    gam.columns.push_back("x" + std::to_string(i));
    resc.columns.push_back("x" + std::to_string(i));
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      resc.columns.push_back("g" + std::to_string(k) + std::to_string(i));
      for (int j = 0; j < n; ++j) {
        gam.columns.push_back("G" + std::to_string(k) + "_" + std::to_string(i) + std::to_string(j));
      }
    }
  std::optional<Check> match;
  std::optional<MetricField> scalflat;
  double ratio = 0.0;
  if (e.id == "bergman") {
    const auto constants = load_constants(cfg.constants_path);
    ratio = constant(constants, "rescaled_ratio_bergman");
    scalflat = make_entry("scalflat").metric;
    match.emplace();
    match->name = "rescaled_matches_scalflat";
    match->tolerance = cfg.tol.value_or(1e-6);
    match->note = "mu1^-2 g compared with " + format_double(ratio) + " times the scalflat metric";
  }
  for (const Point& x : pts) {
    TensorD G, T;
    try {
      T = values(c.connection.eval(x, 0));
      G = rescaled.value(x);
    } catch (const GeometryError& err) {
      if (err.kind() == ErrorKind::ZeroMoment) continue;
      throw;
    }
    std::vector<double> row(x.begin(), x.end()), row2 = row;
    row.insert(row.end(), T.data().begin(), T.data().end());
    row2.insert(row2.end(), G.data().begin(), G.data().end());
    gam.rows.push_back(std::move(row));
    resc.rows.push_back(std::move(row2));
    if (match) {
      const TensorD S = scalflat->value(x);
      double r = 0.0;
      for (std::size_t k = 0; k < S.size(); ++k) {
        r = std::max(r, std::abs(G.data()[k] - ratio * S.data()[k]) / std::max(1.0, std::abs(G.data()[k])));
      }
      match->observe(r, x);
    }
  }
  if (match) {
    match->finish();
    rep.checks.push_back(*match);
  }
  rep.tables.push_back(std::move(gam));
  rep.tables.push_back(std::move(resc));
  return rep;
}

// ---------------------------------------------------------------------------
// holonomy

Report cmd_holonomy(const SuiteConfig& cfg) {
  const GalleryEntry e = make_entry(cfg.entry);
  if (!e.triple) throw ConfigError("entry '" + e.id + "' has no quaternionic triple");
  if (cfg.loops < 0) throw ConfigError("--loops must be non-negative");
  SurveyOptions opt;
  if (cfg.tol) opt.membership_tol = *cfg.tol;
  Report rep;
  if (e.killing && quaternion_kahler_at(e, e.basepoint)) {
    const auto pts = samples_of(e, std::max(cfg.samples, 4), cfg.seed);
    const UStarConstruction c = qk_to_ustar(e.metric, *e.killing, pts);
    rep = holonomy_survey(c.connection, e.metric, c.I, *e.triple, e.basepoint, cfg.loops, cfg.seed, opt);
    rep.set("connection", std::string("modified"));
  } else if (flat_at(e, e.basepoint)) {
    const int n = e.metric.dim();
    auto zero = [n](const Point&, int) { return TensorJ(n, 1); };
    const ConnectionField flat = modified_connection(levi_civita(e.metric), zero, *e.triple);
    rep = holonomy_survey(flat, e.metric, e.triple->component(0), *e.triple, e.basepoint, cfg.loops,
                          cfg.seed, opt);
    rep.set("connection", std::string("levi_civita, alpha = 0"));
  } else {
    throw GeometryError(ErrorKind::InvalidInput,
                        "entry '" + e.id + "' is neither quaternion-Kaehler with a Killing field nor flat");
  }
  rep.set("entry", e.id);
  return rep;
}

std::string render(const Report& r, const std::string& format) {
  if (format == "json") return r.to_json();
  if (format == "csv") return r.to_csv();
  throw ConfigError("unknown format '" + format + "' (json or csv)");
}

}  // namespace ustar
