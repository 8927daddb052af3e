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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "notary/gen.hpp"
#include "notary/keys.hpp"

using namespace notary;
namespace fs = std::filesystem;

TEST_CASE("setup with 10 devices yields 13 keypairs and a loadable registry") {
    fs::path dir = fs::temp_directory_path() / "notary-keys-test";
    fs::remove_all(dir);

    auto result = keys::setup(dir, 10, false);
    CHECK(result.keypairs == 13);  // enclave, notifier, auditor, 10 devices
    CHECK(result.devices.size() == 10);

    // Rerun without force refuses to overwrite.
    CHECK_THROWS(keys::setup(dir, 10, false));
    CHECK_NOTHROW(keys::setup(dir, 2, true));

    keys::Registry reg = keys::load_registry(dir / "registry.json");
    CHECK(reg.devices.size() == 2);
    CHECK(reg.verifiers.entries.size() == 3);  // auditor + 2 users
    CHECK(reg.verifiers.find("auditor-1") != nullptr);
    CHECK(reg.verifiers.find("nobody") == nullptr);

    // Keys on disk round-trip and sign correctly.
    auto enclave = keys::load_keypair(dir, "enclave");
    Bytes msg = to_bytes("probe");
    CHECK(crypto::verify_sig(enclave.public_key, msg, crypto::sign(enclave.secret_key, msg)));

    // Secret key files are owner-only.
    auto perms = fs::status(dir / "enclave.sk").permissions();
    CHECK((perms & fs::perms::group_read) == fs::perms::none);
    CHECK((perms & fs::perms::others_read) == fs::perms::none);
    fs::remove_all(dir);
}

TEST_CASE("generator: deterministic, time-sorted, sized to the configuration") {
    gen::GenConfig cfg;
    cfg.days = 1;
    cfg.sensors = 490;
    cfg.devices = 5000;
    cfg.events_per_day = 600000;
    cfg.seed = 12;

    size_t count = 0;
    uint64_t prev = 0;
    std::set<Bytes> sensors;
    gen::generate(cfg, [&](const model::SensorReading& r) {
        ++count;
        CHECK(r.time.epoch_seconds >= prev);
        prev = r.time.epoch_seconds;
        if (sensors.size() < 600) sensors.insert(r.sensor.bytes);
    });
    CHECK(count == 600000);
    CHECK(sensors.size() > 400);  // most of the 490 sensors appear

    fs::path a = fs::temp_directory_path() / "notary-gen-a.csv";
    fs::path b = fs::temp_directory_path() / "notary-gen-b.csv";
    cfg.events_per_day = 5000;
    gen::write_event_file(a, cfg);
    gen::write_event_file(b, cfg);
    std::ifstream fa(a), fb(b);
    std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);  // same seed, identical files

    size_t read_back = 0;
    gen::read_event_file(a, [&](model::SensorReading&&) { ++read_back; });
    CHECK(read_back == 5000);
    fs::remove(a);
    fs::remove(b);
}

TEST_CASE("event file parser rejects malformed lines") {
    fs::path p = fs::temp_directory_path() / "notary-gen-bad.csv";
    std::ofstream(p) << "0200aabbccdd,ap-1\n";
    CHECK_THROWS_AS(gen::read_event_file(p, [](model::SensorReading&&) {}), FormatError);
    fs::remove(p);
}

TEST_CASE("params synthesis is deterministic and sized") {
    model::SensorReading r;
    r.device = gen::device_id_for(1, 2);
    r.sensor = gen::sensor_id_for(3);
    r.time.epoch_seconds = 1767225600;
    Bytes a = gen::synth_params(r, 256);
    Bytes b = gen::synth_params(r, 256);
    CHECK(a == b);
    CHECK(a.size() == 256);
}
