#include "skynow/manifest.hpp"

#include <json.hpp>

#include <fstream>

namespace skynow {

using nlohmann::json;

std::string split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

Split split_from_name(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  throw DataError("unknown split name: " + name);
}

std::map<std::string, Split> DatasetManifest::split_map() const {
  std::map<std::string, Split> m;
  for (const auto& d : days) m[d.date] = d.split;
  return m;
}

void DatasetManifest::validate() const {
  if (days.empty()) throw DataError("manifest has no days");
  std::string max_fit, min_test;
  for (const auto& d : days) {
    if (d.date.size() != 10) throw DataError("bad manifest date: " + d.date);
    if (d.split == Split::Test) {
      if (min_test.empty() || d.date < min_test) min_test = d.date;
    } else {
      if (d.date > max_fit) max_fit = d.date;
    }
  }
  // chronological split: testing happens on days in the future
  if (!min_test.empty() && !max_fit.empty() && min_test <= max_fit)
    throw DataError("manifest split is not chronological: test day " +
                    min_test + " does not postdate train/val day " + max_fit);
}

DatasetManifest DatasetManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("malformed manifest JSON: " + path);
  DatasetManifest m;
  m.cadence_s = j.value("cadence_s", kCadenceSeconds);
  if (m.cadence_s != kCadenceSeconds)
    throw DataError("unsupported cadence in manifest");
  for (const auto& dj : j.at("days")) {
    ManifestDay d;
    d.date = dj.at("date").get<std::string>();
    d.split = split_from_name(dj.at("split").get<std::string>());
    d.frames = dj.value("frames", 0);
    d.regime = dj.value("regime", "");
    m.days.push_back(std::move(d));
  }
  m.validate();
  return m;
}

void DatasetManifest::save(const std::string& path) const {
  validate();
  json j;
  j["version"] = 1;
  j["cadence_s"] = cadence_s;
  j["days"] = json::array();
  for (const auto& d : days) {
    json dj = {{"date", d.date},
               {"split", split_name(d.split)},
               {"frames", d.frames}};
    if (!d.regime.empty()) dj["regime"] = d.regime;
    j["days"].push_back(dj);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write manifest: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace skynow
