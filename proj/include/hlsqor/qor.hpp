#pragma once

#include <cstdint>

#include <json.hpp>

namespace hlsqor {

// The four prediction targets. Integer-valued when produced by the reference
// model; model predictions are stored as reals.
struct QoR {
  long latency_cycles = 0;
  long lut = 0;
  long dsp = 0;
  long ff = 0;

  bool operator==(const QoR&) const = default;
};

struct PredictedQoR {
  double latency_cycles = 0;
  double lut = 0;
  double dsp = 0;
  double ff = 0;
};

inline nlohmann::json qor_to_json(const QoR& q) {
  return {{"latency", q.latency_cycles}, {"lut", q.lut}, {"dsp", q.dsp}, {"ff", q.ff}};
}

inline nlohmann::json qor_to_json(const PredictedQoR& q) {
  return {{"latency", q.latency_cycles}, {"lut", q.lut}, {"dsp", q.dsp}, {"ff", q.ff}};
}

inline QoR qor_from_json(const nlohmann::json& j) {
  QoR q;
  q.latency_cycles = j.value("latency", 0L);
  q.lut = j.value("lut", 0L);
  q.dsp = j.value("dsp", 0L);
  q.ff = j.value("ff", 0L);
  return q;
}

}  // namespace hlsqor
