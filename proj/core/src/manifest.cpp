#include "spectraldip/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spectraldip {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute()) return path.string();
  return (base / path).lexically_normal().string();
}

}  // namespace

DatasetManifest DatasetManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest '" + path + "'");
  const fs::path base = fs::path(path).parent_path();

  DatasetManifest m;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("image_path", 0) != 0)
        throw std::runtime_error("manifest '" + path +
                                 "': first column must be image_path");
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.empty() || fields[0].empty())
      throw std::runtime_error("manifest '" + path + "': entry without image_path");
    ManifestEntry e;
    e.image_path = resolve(base, fields[0]);
    if (fields.size() > 1 && !fields[1].empty())
      e.clean_path = resolve(base, fields[1]);
    if (fields.size() > 2 && !fields[2].empty()) {
      const int w = std::stoi(fields[2]);
      if (w != 32 && w != 64 && w != 128)
        throw std::runtime_error("manifest '" + path +
                                 "': width_label must be 32, 64 or 128");
      e.width_label = w;
    }
    if (fields.size() > 3 && !fields[3].empty()) e.texture_class = fields[3];

    if (!fs::exists(e.image_path))
      throw std::runtime_error("manifest '" + path + "': missing image '" +
                               e.image_path + "'");
    if (e.clean_path && !fs::exists(*e.clean_path))
      throw std::runtime_error("manifest '" + path + "': missing clean image '" +
                               *e.clean_path + "'");
    m.entries.push_back(std::move(e));
  }
  if (m.entries.empty())
    throw std::runtime_error("manifest '" + path + "' has no entries");
  return m;
}

void DatasetManifest::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest '" + path + "'");
  out << "# spectraldip-manifest v1\n";
  out << "image_path,clean_path,width_label,texture_class\n";
  for (const auto& e : entries) {
    out << e.image_path << ',' << e.clean_path.value_or("") << ',';
    if (e.width_label) out << *e.width_label;
    out << ',' << e.texture_class.value_or("") << '\n';
  }
}

}  // namespace spectraldip
