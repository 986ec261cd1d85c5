#pragma once

#include <optional>
#include <string>
#include <vector>

namespace spectraldip {

struct ManifestEntry {
  std::string image_path;
  std::optional<std::string> clean_path;
  std::optional<int> width_label;               // 32 / 64 / 128
  std::optional<std::string> texture_class;     // "coarse" | "fine" | ...
};

/// CSV dataset manifest (header: image_path,clean_path,width_label,
/// texture_class; later columns optional). Relative paths are resolved
/// against the manifest's directory and must exist at load time.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  static DatasetManifest load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace spectraldip
