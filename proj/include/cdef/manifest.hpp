#pragma once

// JSON manifests: immersion specs, grids, analysis dispatch and the
// deterministic report every front end prints.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cdef/jets.hpp"

namespace cdef {

using Json = nlohmann::ordered_json;

/// Parses manifest text; syntax errors become ManifestError with line and column.
Json parse_manifest(const std::string& text, const std::string& origin = "<manifest>");
Json load_manifest(const std::string& path);

/// Immersion from a spec object. `path` is the JSON pointer used in diagnostics.
ImmersionPtr immersion_from_json(const Json& spec, const std::string& path = "");
Grid grid_from_json(const Json& spec, const std::string& path = "");
ScalarProduct ambient_from_json(const Json& spec, const std::string& path = "");

struct RunOverrides {
  std::optional<double> tolerance;
  std::optional<std::uint64_t> seed;
  std::optional<int> region;   ///< restrict per-region output to one region id
  std::optional<Exec> exec;
};

struct RunResult {
  Json report;
  std::string csv;      ///< per-point table, fixed column order
  bool passed = false;  ///< every check passed
};

/// Runs the analysis named by the manifest. Throws ManifestError on schema
/// problems; library errors propagate with their kind.
RunResult run_manifest(const Json& manifest, const RunOverrides& overrides = {});

/// Canonical report text: two-space indent, trailing newline.
std::string render_report(const Json& report);

std::uint64_t fnv1a64(const std::string& bytes);
const char* version_string();

struct GalleryManifest {
  std::string name;
  std::string summary;
  std::string text;
};
const std::vector<GalleryManifest>& gallery();
/// Throws ManifestError for an unknown name.
const GalleryManifest& gallery_entry(const std::string& name);

} // namespace cdef
