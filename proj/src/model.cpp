#include "skynow/model.hpp"

#include <sstream>

namespace skynow {

ArchitectureSpec ArchitectureSpec::for_method(char method) {
  ArchitectureSpec s;
  s.method = method;
  switch (method) {
    case 'A':
      s.input_channels = 3;
      s.dropout = 0.05;
      s.learning_rate = 1.5e-5;
      s.batch_size = 128;
      break;
    case 'B':
      s.input_channels = 9;
      s.dropout = 0.05;
      s.learning_rate = 1.5e-5;
      s.batch_size = 128;
      break;
    case 'C':
      s.input_channels = kMethodCChannels;
      s.dropout = 0.0;
      s.learning_rate = 2e-4;
      s.batch_size = 1024;
      break;
    default:
      throw ConfigError(std::string("unknown method: ") + method);
  }
  return s;
}

void ArchitectureSpec::validate() const {
  if (method != 'A' && method != 'B' && method != 'C')
    throw ConfigError("architecture method must be A, B or C");
  if (lstm_units.size() != 2) throw ConfigError("expected 2 LSTM layers");
  if (uses_cnn() && conv_filters.empty())
    throw ConfigError("CNN methods need conv filters");
  if (lookback < 1 || dense_units < 1) throw ConfigError("bad architecture");
}

ForecastRecord smart_persistence(
    double ghi_now, double ghi_clear_now,
    const std::array<double, kHorizonSteps>& ghi_clear_future,
    UtcTime issue_time) {
  if (ghi_clear_now <= 1.0)
    throw DataError("smart_persistence: clear-sky GHI at issue time <= 1");
  const double k = ghi_now / ghi_clear_now;
  ForecastRecord rec;
  rec.issue_time = issue_time;
  rec.method = "persistence";
  for (int h = 0; h < kHorizonSteps; ++h)
    rec.ghi_wm2[static_cast<std::size_t>(h)] =
        k * ghi_clear_future[static_cast<std::size_t>(h)];
  return rec;
}

std::string model_summary(const std::vector<LayerInfo>& infos,
                          const ArchitectureSpec& spec,
                          std::int64_t total_params) {
  std::ostringstream os;
  os << "Method " << spec.method << " forecaster\n";
  os << "lookback " << spec.lookback << " steps, horizons " << spec.dense_units
     << ", dropout " << spec.dropout << ", lr " << spec.learning_rate
     << ", batch " << spec.batch_size << "\n";
  for (const auto& li : infos)
    os << "  " << li.name << "  out " << li.output_shape << "  params "
       << li.params << "\n";
  os << "total parameters: " << total_params << "\n";
  return os.str();
}

}  // namespace skynow
