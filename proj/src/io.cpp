#include "skynow/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace skynow {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               const std::string& expect_header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV: " + path);
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
    line.pop_back();
  if (!expect_header.empty() && line != expect_header)
    throw DataError("unexpected CSV header in " + path + ": " + line);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

namespace {

double to_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("malformed number in CSV: '" + s + "'");
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  return out;
}

}  // namespace

void write_ghi_csv(const std::string& path, const IrradianceSeries& series) {
  auto out = open_out(path);
  out << "timestamp,ghi_wm2\n";
  for (const auto& s : series.samples)
    out << format_iso8601(s.timestamp) << "," << format_double(s.ghi_wm2)
        << "\n";
}

IrradianceSeries read_ghi_csv(const std::string& path) {
  IrradianceSeries series;
  for (const auto& row : read_csv(path, "timestamp,ghi_wm2")) {
    if (row.size() != 2) throw DataError("bad GHI row in " + path);
    series.samples.push_back({parse_iso8601(row[0]), to_double(row[1])});
  }
  series.validate();
  return series;
}

void write_lens_table_csv(const std::string& path,
                          const std::vector<LensTableRow>& rows) {
  auto out = open_out(path);
  out << "radius_norm,angle_deg\n";
  for (const auto& r : rows)
    out << format_double(r.radius_norm) << "," << format_double(r.angle_deg)
        << "\n";
}

std::vector<LensTableRow> read_lens_table_csv(const std::string& path) {
  std::vector<LensTableRow> rows;
  for (const auto& row : read_csv(path, "radius_norm,angle_deg")) {
    if (row.size() != 2) throw DataError("bad lens table row in " + path);
    rows.push_back({to_double(row[0]), to_double(row[1])});
  }
  return rows;
}

const char* kFeatureCsvHeader =
    "timestamp,cs_cam1,cs_cam2,cmv_u1,cmv_v1,cmv_u2,cmv_v2,median_cbh_m,"
    "zenith_deg,azimuth_deg,ghi_clear_wm2";

void write_features_csv(const std::string& path,
                        const std::vector<FeatureSeriesRow>& rows) {
  auto out = open_out(path);
  out << kFeatureCsvHeader << "\n";
  for (const auto& r : rows) {
    out << format_iso8601(r.timestamp) << "," << format_double(r.cs_cam1)
        << "," << format_double(r.cs_cam2) << "," << format_double(r.cmv_u1)
        << "," << format_double(r.cmv_v1) << "," << format_double(r.cmv_u2)
        << "," << format_double(r.cmv_v2) << ","
        << format_double(r.median_cbh_m) << "," << format_double(r.zenith_deg)
        << "," << format_double(r.azimuth_deg) << ","
        << format_double(r.ghi_clear_wm2) << "\n";
  }
}

std::vector<FeatureSeriesRow> read_features_csv(const std::string& path) {
  std::vector<FeatureSeriesRow> rows;
  for (const auto& row : read_csv(path, kFeatureCsvHeader)) {
    if (row.size() != 11) throw DataError("bad feature row in " + path);
    FeatureSeriesRow r;
    r.timestamp = parse_iso8601(row[0]);
    r.cs_cam1 = to_double(row[1]);
    r.cs_cam2 = to_double(row[2]);
    r.cmv_u1 = to_double(row[3]);
    r.cmv_v1 = to_double(row[4]);
    r.cmv_u2 = to_double(row[5]);
    r.cmv_v2 = to_double(row[6]);
    r.median_cbh_m = to_double(row[7]);
    r.zenith_deg = to_double(row[8]);
    r.azimuth_deg = to_double(row[9]);
    r.ghi_clear_wm2 = to_double(row[10]);
    rows.push_back(r);
  }
  return rows;
}

void write_cmv_csv(const std::string& path, const std::vector<CmvCsvRow>& rows) {
  auto out = open_out(path);
  out << "timestamp,cmv_u1,cmv_v1,cmv_u2,cmv_v2,filled_by_locf,empty_mask1,"
         "empty_mask2\n";
  for (const auto& r : rows)
    out << format_iso8601(r.timestamp) << "," << format_double(r.u1) << ","
        << format_double(r.v1) << "," << format_double(r.u2) << ","
        << format_double(r.v2) << "," << (r.locf ? 1 : 0) << ","
        << (r.empty1 ? 1 : 0) << "," << (r.empty2 ? 1 : 0) << "\n";
}

std::vector<CmvCsvRow> read_cmv_csv(const std::string& path) {
  std::vector<CmvCsvRow> rows;
  for (const auto& row : read_csv(
           path,
           "timestamp,cmv_u1,cmv_v1,cmv_u2,cmv_v2,filled_by_locf,empty_mask1,"
           "empty_mask2")) {
    if (row.size() != 8) throw DataError("bad CMV row in " + path);
    CmvCsvRow r;
    r.timestamp = parse_iso8601(row[0]);
    r.u1 = to_double(row[1]);
    r.v1 = to_double(row[2]);
    r.u2 = to_double(row[3]);
    r.v2 = to_double(row[4]);
    r.locf = row[5] == "1";
    r.empty1 = row[6] == "1";
    r.empty2 = row[7] == "1";
    rows.push_back(r);
  }
  return rows;
}

void write_forecasts_csv(const std::string& path,
                         const std::vector<ForecastRecord>& records) {
  auto out = open_out(path);
  out << "timestamp,method";
  for (int h = 1; h <= kHorizonSteps; ++h) out << ",h" << h * kCadenceSeconds;
  out << "\n";
  for (const auto& rec : records) {
    out << format_iso8601(rec.issue_time) << "," << rec.method;
    for (double v : rec.ghi_wm2) out << "," << format_double(v);
    out << "\n";
  }
}

std::vector<ForecastRecord> read_forecasts_csv(const std::string& path) {
  std::ostringstream header;
  header << "timestamp,method";
  for (int h = 1; h <= kHorizonSteps; ++h)
    header << ",h" << h * kCadenceSeconds;
  std::vector<ForecastRecord> records;
  for (const auto& row : read_csv(path, header.str())) {
    if (row.size() != 2 + kHorizonSteps)
      throw DataError("bad forecast row in " + path);
    ForecastRecord rec;
    rec.issue_time = parse_iso8601(row[0]);
    rec.method = row[1];
    for (int h = 0; h < kHorizonSteps; ++h)
      rec.ghi_wm2[static_cast<std::size_t>(h)] =
          to_double(row[static_cast<std::size_t>(h + 2)]);
    records.push_back(rec);
  }
  return records;
}

void write_metrics_csv(const std::string& path, const MetricTable& table) {
  auto out = open_out(path);
  out << "day,horizon_s,rmse,mae,ss,model\n";
  for (const auto& c : table.cells) {
    out << c.day << "," << c.horizon_s << "," << format_double(c.rmse) << ","
        << format_double(c.mae) << ",";
    if (c.ss) out << format_double(*c.ss);
    out << "," << c.model << "\n";
  }
}

void write_pi_csv(const std::string& path, const std::vector<PiCell>& cells) {
  auto out = open_out(path);
  out << "feature,feature_index,bucket_start_s,bucket_end_s,delta_mae,mae_ref,"
         "repetitions\n";
  for (const auto& c : cells)
    out << c.feature << "," << c.feature_index << "," << c.bucket_start_s
        << "," << c.bucket_end_s << "," << format_double(c.delta_mae) << ","
        << format_double(c.mae_ref) << "," << c.repetitions << "\n";
}

namespace {

void write_f32_le(std::ofstream& out, const float* data, std::size_t n) {
  // byte order is little-endian on every supported target
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(n * sizeof(float)));
}

void read_f32_le(std::ifstream& in, float* data, std::size_t n,
                 const std::string& path) {
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(n * sizeof(float)));
  if (!in) throw DataError("truncated payload in " + path);
}

}  // namespace

void write_tensor(const std::string& path, const nn::TensorF32& t) {
  auto out = open_out(path);
  json header = {{"version", 1}, {"dtype", "f32"}, {"shape", t.shape}};
  out << header.dump() << "\n";
  write_f32_le(out, t.data.data(), t.data.size());
}

nn::TensorF32 read_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open tensor: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("missing tensor header: " + path);
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("dtype", "") != "f32")
    throw DataError("bad tensor header in " + path);
  nn::TensorF32 t;
  t.shape = header.at("shape").get<std::vector<int>>();
  t.data.resize(nn::TensorF32::count(t.shape));
  read_f32_le(in, t.data.data(), t.data.size(), path);
  return t;
}

void write_weights(const std::string& path,
                   const std::vector<NamedTensor>& params) {
  auto out = open_out(path);
  json names = json::array();
  for (const auto& p : params)
    names.push_back({{"name", p.name}, {"shape", p.tensor.shape}});
  json header = {{"version", 1}, {"dtype", "f32"}, {"parameters", names}};
  out << header.dump() << "\n";
  for (const auto& p : params)
    write_f32_le(out, p.tensor.data.data(), p.tensor.data.size());
}

std::vector<NamedTensor> read_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open weights: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw DataError("missing weights header: " + path);
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("dtype", "") != "f32")
    throw DataError("bad weights header in " + path);
  std::vector<NamedTensor> params;
  for (const auto& item : header.at("parameters")) {
    NamedTensor p;
    p.name = item.at("name").get<std::string>();
    p.tensor.shape = item.at("shape").get<std::vector<int>>();
    p.tensor.data.resize(nn::TensorF32::count(p.tensor.shape));
    read_f32_le(in, p.tensor.data.data(), p.tensor.data.size(), path);
    params.push_back(std::move(p));
  }
  return params;
}

void write_text_file(const std::string& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace skynow
