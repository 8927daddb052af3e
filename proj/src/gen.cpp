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

#include "notary/gen.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <random>

namespace notary::gen {

model::DeviceId device_id_for(uint64_t seed, uint32_t index) {
    // Locally administered MAC: 02:SS:ii:ii:ii:ii with a seed-derived octet.
    Bytes b(6);
    b[0] = 0x02;
    b[1] = uint8_t(seed & 0xff);
    b[2] = uint8_t(index >> 24);
    b[3] = uint8_t(index >> 16);
    b[4] = uint8_t(index >> 8);
    b[5] = uint8_t(index);
    return model::DeviceId{std::move(b)};
}

model::SensorId sensor_id_for(uint32_t index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "ap-%u", index);
    return model::SensorId{to_bytes(buf)};
}

// Relative event rate per half-hour slot: quiet overnight, ramping through
// the morning, peak over working hours.
static double slot_weight(uint32_t slot) {
    uint32_t hour = slot / 2;
    if (hour < 6) return 0.15;
    if (hour < 8) return 0.6;
    if (hour < 20) return 2.0;
    if (hour < 22) return 0.8;
    return 0.3;
}

void generate(const GenConfig& cfg, const std::function<void(const model::SensorReading&)>& sink) {
    std::mt19937_64 rng(cfg.seed);
    constexpr uint32_t kSlots = 48;
    constexpr uint32_t kSlotSeconds = 1800;

    double total_weight = 0;
    for (uint32_t s = 0; s < kSlots; ++s) total_weight += slot_weight(s);

    std::uniform_int_distribution<uint32_t> pick_sensor(0, cfg.sensors - 1);
    std::uniform_int_distribution<uint32_t> pick_device(0, cfg.devices - 1);
    std::uniform_int_distribution<uint32_t> pick_offset(0, kSlotSeconds - 1);

    for (uint32_t day = 0; day < cfg.days; ++day) {
        uint64_t day_start = cfg.start_time + uint64_t(day) * 86400;
        uint64_t remaining = cfg.events_per_day;
        double weight_left = total_weight;
        for (uint32_t slot = 0; slot < kSlots; ++slot) {
            uint64_t n = slot == kSlots - 1
                             ? remaining
                             : uint64_t(double(remaining) * slot_weight(slot) / weight_left + 0.5);
            n = std::min(n, remaining);
            remaining -= n;
            weight_left -= slot_weight(slot);

            std::vector<uint32_t> offsets(n);
            for (auto& o : offsets) o = pick_offset(rng);
            std::sort(offsets.begin(), offsets.end());

            model::SensorReading r;
            for (uint64_t i = 0; i < n; ++i) {
                r.device = device_id_for(cfg.seed, pick_device(rng));
                r.sensor = sensor_id_for(pick_sensor(rng));
                r.state = model::SensorState::active;
                r.time.epoch_seconds = day_start + uint64_t(slot) * kSlotSeconds + offsets[i];
                if (cfg.params_bytes > 0) r.params = synth_params(r, cfg.params_bytes);
                sink(r);
            }
        }
    }
}

void write_event_file(const std::filesystem::path& path, const GenConfig& cfg) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    generate(cfg, [&](const model::SensorReading& r) {
        out << hex_encode(r.device.bytes) << ',' << to_string(r.sensor.bytes) << ','
            << r.time.epoch_seconds << '\n';
    });
    if (!out) throw FormatError("write failed: " + path.string());
}

size_t read_event_file(const std::filesystem::path& path,
                       const std::function<void(model::SensorReading&&)>& sink) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    std::string line;
    size_t count = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        size_t c1 = line.find(',');
        size_t c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw FormatError("bad event line: " + line);
        model::SensorReading r;
        r.device.bytes = hex_decode(line.substr(0, c1));
        r.sensor.bytes = to_bytes(line.substr(c1 + 1, c2 - c1 - 1));
        r.time.epoch_seconds = std::stoull(line.substr(c2 + 1));
        r.state = model::SensorState::active;
        sink(std::move(r));
        ++count;
    }
    return count;
}

Bytes synth_params(const model::SensorReading& r, uint32_t params_bytes) {
    // Shaped like the varbind text of an association trap; repeatable.
    char head[128];
    int n = std::snprintf(head, sizeof head,
                          "ssid=campus;rssi=-%" PRIu64 ";snr=%" PRIu64 ";vlan=%" PRIu64 ";",
                          30 + r.time.epoch_seconds % 50, 10 + r.time.epoch_seconds % 30,
                          100 + r.time.epoch_seconds % 800);
    Bytes out;
    out.reserve(params_bytes);
    for (uint32_t i = 0; i < params_bytes; ++i) out.push_back(uint8_t(head[i % size_t(n)]));
    return out;
}

}  // namespace notary::gen
