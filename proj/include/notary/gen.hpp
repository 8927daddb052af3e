// Copyright 2026 The Notary Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <functional>

#include "notary/model.hpp"

namespace notary::gen {

// Synthetic WiFi association workload: diurnal rate curve, time-sorted,
// fully determined by the seed.
struct GenConfig {
    uint32_t days = 1;
    uint32_t sensors = 490;
    uint32_t devices = 5000;
    uint64_t events_per_day = 600000;
    uint64_t seed = 1;
    uint64_t start_time = 1767225600;  // 2026-01-01T00:00:00Z
    uint32_t params_bytes = 0;         // synthetic trap payload attached per event
};

model::DeviceId device_id_for(uint64_t seed, uint32_t index);
model::SensorId sensor_id_for(uint32_t index);

// Emits events in non-decreasing time order.
void generate(const GenConfig& cfg, const std::function<void(const model::SensorReading&)>& sink);

// Event file: one `device_hex,sensor_id,epoch_seconds` line per event.
void write_event_file(const std::filesystem::path& path, const GenConfig& cfg);
size_t read_event_file(const std::filesystem::path& path,
                       const std::function<void(model::SensorReading&&)>& sink);

// Deterministic filler standing in for the SNMP trap varbinds that ride
// along with an association event.
Bytes synth_params(const model::SensorReading& r, uint32_t params_bytes);

}  // namespace notary::gen
