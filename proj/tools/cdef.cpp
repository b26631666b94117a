// Command-line front end: runs manifests and the built-in gallery.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "cdef/builtins.hpp"
#include "cdef/errors.hpp"
#include "cdef/manifest.hpp"

namespace {

struct Flags {
  double tolerance = 0.0;
  std::uint64_t seed = 0;
  int region = -1;
  std::string csv;
  std::string output;
  bool serial = false;
};

void add_run_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--tolerance", f.tolerance, "rank tolerance, in (0, 1e-3]");
  cmd->add_option("--seed", f.seed, "seed for randomized searches");
  cmd->add_option("--region", f.region, "report only this region id");
  cmd->add_option("--csv-dump", f.csv, "write the per-point table to this file");
  cmd->add_option("--output,-o", f.output, "write the report here instead of stdout");
  cmd->add_flag("--serial", f.serial, "disable OpenMP kernels");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cdef::ManifestError(path + ": cannot write");
  out << text;
}

int run(const cdef::Json& manifest, const Flags& f, const CLI::App& cmd) {
  cdef::RunOverrides o;
  if (cmd.count("--tolerance")) o.tolerance = f.tolerance;
  if (cmd.count("--seed")) o.seed = f.seed;
  if (cmd.count("--region")) o.region = f.region;
  if (f.serial) o.exec = cdef::Exec::serial;
  const cdef::RunResult r = cdef::run_manifest(manifest, o);
  const std::string text = cdef::render_report(r.report);

  std::string report_path = f.output, csv_path = f.csv;
  if (manifest.contains("output")) {
    const cdef::Json& out = manifest["output"];
    if (report_path.empty() && out.contains("report")) report_path = out["report"].get<std::string>();
    if (csv_path.empty() && out.contains("csv")) csv_path = out["csv"].get<std::string>();
  }
  if (report_path.empty()) std::cout << text;
  else write_file(report_path, text);
  if (!csv_path.empty()) write_file(csv_path, r.csv);

  int failed = 0;
  for (const auto& c : r.report["checks"])
    if (!c["pass"].get<bool>()) {
      ++failed;
      std::cerr << "check failed: " << c["name"].get<std::string>() << " = " << c["value"].dump() << " (want "
                << c["op"].get<std::string>() << " " << c["threshold"].dump() << ")\n";
    }
  std::cerr << r.report["name"].get<std::string>() << ": " << r.report["checks"].size() - failed << "/"
            << r.report["checks"].size() << " checks passed\n";
  return r.passed ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Isometric and conformal deformation analysis of submanifolds"};
  app.set_version_flag("--version", std::string(cdef::version_string()));
  app.require_subcommand(1);

  Flags flags;
  std::string manifest_path;
  auto* analyze = app.add_subcommand("analyze", "run a JSON manifest");
  analyze->add_option("manifest", manifest_path, "manifest file")->required();
  add_run_flags(analyze, flags);

  auto* gallery = app.add_subcommand("gallery", "built-in manifests and immersions");
  gallery->require_subcommand(1);
  auto* list = gallery->add_subcommand("list", "list gallery manifests and builtin immersions");
  std::string name;
  auto* show = gallery->add_subcommand("show", "print a gallery manifest");
  show->add_option("name", name)->required();
  auto* grun = gallery->add_subcommand("run", "run a gallery manifest");
  grun->add_option("name", name)->required();
  add_run_flags(grun, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (analyze->parsed()) return run(cdef::load_manifest(manifest_path), flags, *analyze);
    if (list->parsed()) {
      std::cout << "manifests:\n";
      for (const auto& m : cdef::gallery()) std::printf("  %-28s %s\n", m.name.c_str(), m.summary.c_str());
      std::cout << "builtin immersions:\n";
      for (const auto& b : cdef::builtin_catalog())
        std::printf("  %-28s %s  [%s]\n", b.name.c_str(), b.description.c_str(), b.parameters.c_str());
      return 0;
    }
    if (show->parsed()) {
      std::cout << cdef::gallery_entry(name).text << "\n";
      return 0;
    }
    if (grun->parsed()) {
      const auto& entry = cdef::gallery_entry(name);
      return run(cdef::parse_manifest(entry.text, "gallery:" + name), flags, *grun);
    }
  } catch (const cdef::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
