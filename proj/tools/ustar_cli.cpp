#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ustar/cli.hpp"
#include "ustar/errors.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kCheckFailure = 1;
constexpr int kUsage = 2;

int usage_kind(ustar::ErrorKind k) {
  switch (k) {
    case ustar::ErrorKind::UnknownEntry:
    case ustar::ErrorKind::NoKillingField:
    case ustar::ErrorKind::InvalidInput:
      return kUsage;
    default:
      return kCheckFailure;
  }
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw ustar::ConfigError("cannot write '" + out + "'");
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quaternionic-Kaehler to U*(2m) geometry checks"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key = value file; command-line flags take precedence");

  std::string manifest = std::string(USTAR_DATA_DIR) + "/gallery_manifest.json";
  std::string format = "json";
  std::string out;
  ustar::SuiteConfig cfg;
  cfg.constants_path = std::string(USTAR_DATA_DIR) + "/regression_constants.json";

  app.add_option("--manifest", manifest, "gallery manifest (JSON)");
  app.add_option("--constants", cfg.constants_path, "regression constants (JSON)");
  app.add_option("--format", format, "json or csv");
  app.add_option("--out", out, "report path, '-' for stdout");

  auto* gallery = app.add_subcommand("gallery", "gallery manifest");
  gallery->require_subcommand(1);
  auto* list = gallery->add_subcommand("list", "list the gallery entries");

  auto add_suite = [&](CLI::App* sub) {
    sub->add_option("--entry", cfg.entry, "gallery entry id")->required();
    sub->add_option("--samples", cfg.samples, "number of seeded sample points");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--tol", cfg.tol, "override every check tolerance");
  };
  auto* verify = app.add_subcommand("verify", "run the check suite of an entry");
  add_suite(verify);
  verify->add_option("--check", cfg.checks, "restrict to the named check (repeatable)");
  auto* transform = app.add_subcommand("transform", "QK -> U*(2m) connection and its residuals");
  add_suite(transform);
  auto* holonomy = app.add_subcommand("holonomy", "holonomy membership survey");
  add_suite(holonomy);
  holonomy->add_option("--loops", cfg.loops, "number of random loops");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kPass : kUsage;
  }

  try {
    if (list->parsed()) {
      const auto entries = ustar::load_manifest(manifest);
      ustar::validate_manifest(entries);
      if (format == "json") {
        emit(ustar::gallery_list_json(entries), out);
      } else if (format == "csv") {
        emit(ustar::gallery_list_csv(entries), out);
      } else {
        throw ustar::ConfigError("unknown format '" + format + "' (json or csv)");
      }
      return kPass;
    }
    ustar::Report rep;
    if (verify->parsed()) {
      rep = ustar::cmd_verify(cfg);
    } else if (transform->parsed()) {
      rep = ustar::cmd_transform(cfg);
    } else {
      rep = ustar::cmd_holonomy(cfg);
    }
    emit(ustar::render(rep, format), out);
    if (!rep.all_pass()) {
      for (const auto& c : rep.checks) {
        if (!c.pass) {
          std::cerr << "FAIL " << c.name << ": " << ustar::format_double(c.max_residual) << " > "
                    << ustar::format_double(c.tolerance) << "\n";
        }
      }
      return kCheckFailure;
    }
    return kPass;
  } catch (const ustar::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ustar::GeometryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage_kind(e.kind());
  }
}
