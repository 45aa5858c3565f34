#pragma once

#include <map>
#include <string>
#include <vector>

#include "skynow/features.hpp"

namespace skynow {

struct ManifestDay {
  std::string date;  // YYYY-MM-DD
  Split split = Split::Train;
  int frames = 0;
  std::string regime;  // clear | overcast | broken | "" for real data
};

/// Day inventory and split assignment. The split must be chronological:
/// every test day strictly after every train/val day.
struct DatasetManifest {
  int cadence_s = kCadenceSeconds;
  std::vector<ManifestDay> days;

  std::map<std::string, Split> split_map() const;
  void validate() const;

  static DatasetManifest load(const std::string& path);
  void save(const std::string& path) const;
};

std::string split_name(Split s);
Split split_from_name(const std::string& name);

}  // namespace skynow
