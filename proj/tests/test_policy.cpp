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

#include <random>

#include "notary/policy.hpp"
#include "support/policy_oracle.hpp"

using namespace notary;
using policy::DataCaptureRule;
using policy::Polarity;

namespace {

model::SensorReading reading(const Bytes& dev, const Bytes& sensor, uint64_t t) {
    model::SensorReading r;
    r.device.bytes = dev;
    r.sensor.bytes = sensor;
    r.time.epoch_seconds = t;
    return r;
}

constexpr uint64_t kDay0 = 1767225600;  // midnight

}  // namespace

TEST_CASE("default opt-out with zero rules filters everything") {
    auto rs = policy::make_ruleset(Polarity::opt_out, {});
    CHECK(policy::evaluate(rs, nullptr, reading({0x02, 1}, to_bytes("ap-1"), kDay0 + 100)) ==
          model::SensorState::passive);
}

TEST_CASE("user-time-based opt-out rule") {
    // Do not capture a specific device between two daily times.
    DataCaptureRule rule;
    rule.rule_id = 1;
    rule.polarity = Polarity::opt_out;
    rule.devices = std::set<Bytes>{{0x02, 0x01}};
    rule.daily = policy::DailyWindow{3600, 7200};
    rule.valid_from = model::Timestamp{kDay0};
    rule.valid_until = model::Timestamp{kDay0 + 40 * 86400};
    auto rs = policy::make_ruleset(Polarity::opt_in, {rule});

    CHECK(policy::evaluate(rs, nullptr, reading({0x02, 0x01}, to_bytes("ap-1"), kDay0 + 3600)) ==
          model::SensorState::passive);
    // Different device: predicate mismatch, captured.
    CHECK(policy::evaluate(rs, nullptr, reading({0x02, 0x02}, to_bytes("ap-1"), kDay0 + 3600)) ==
          model::SensorState::active);
    // Same device outside the window.
    CHECK(policy::evaluate(rs, nullptr, reading({0x02, 0x01}, to_bytes("ap-1"), kDay0 + 7200)) ==
          model::SensorState::active);
    // Expired validity: the rule stops filtering.
    CHECK(policy::evaluate(rs, nullptr,
                           reading({0x02, 0x01}, to_bytes("ap-1"), kDay0 + 41 * 86400 + 3600)) ==
          model::SensorState::active);
}

TEST_CASE("wrapping daily window covers the overnight span") {
    policy::DailyWindow w{75600, 32400};  // 21:00 .. 09:00
    CHECK(w.contains(kDay0 + 75600));
    CHECK(w.contains(kDay0 + 2 * 3600));
    CHECK(!w.contains(kDay0 + 12 * 3600));
}

TEST_CASE("opt-out beats opt-in when both match") {
    DataCaptureRule grant;
    grant.rule_id = 1;
    grant.polarity = Polarity::opt_in;
    grant.valid_from = model::Timestamp{0};
    grant.valid_until = model::Timestamp{UINT64_MAX};
    DataCaptureRule deny = grant;
    deny.rule_id = 2;
    deny.polarity = Polarity::opt_out;
    auto rs = policy::make_ruleset(Polarity::opt_out, {grant, deny});
    CHECK(policy::evaluate(rs, nullptr, reading({0x02, 1}, to_bytes("ap-1"), kDay0)) ==
          model::SensorState::passive);
}

TEST_CASE("stale ruleset digest is an integrity error") {
    DataCaptureRule rule;
    rule.rule_id = 9;
    rule.polarity = Polarity::opt_in;
    rule.valid_from = model::Timestamp{0};
    rule.valid_until = model::Timestamp{UINT64_MAX};
    auto rs = policy::make_ruleset(Polarity::opt_out, {rule});
    rs.rules[0].rule_id = 10;  // rules-at-rest modified behind the digest
    CHECK_THROWS_AS(policy::evaluate(rs, nullptr, reading({0x02, 1}, to_bytes("ap-1"), kDay0)),
                    policy::PolicyIntegrityError);
}

TEST_CASE("ruleset digest detects single-bit modification of any rule") {
    std::mt19937_64 rng(3);
    DataCaptureRule rule;
    rule.rule_id = 77;
    rule.polarity = Polarity::opt_out;
    rule.devices = std::set<Bytes>{{0x02, 0x11}, {0x02, 0x12}};
    rule.sensors = std::set<Bytes>{to_bytes("ap-4")};
    rule.daily = policy::DailyWindow{100, 900};
    rule.valid_from = model::Timestamp{kDay0};
    rule.valid_until = model::Timestamp{kDay0 + 86400};
    Bytes enc = policy::encode_rule(rule);
    for (size_t i = 0; i < enc.size(); ++i) {
        Bytes bad = enc;
        bad[i] ^= uint8_t(1u << (rng() % 8));
        // Either decoding fails structurally or the digest moves.
        try {
            DataCaptureRule r2 = policy::decode_rule(bad);
            CHECK(policy::rule_digest(r2) != policy::rule_digest(rule));
        } catch (const FormatError&) {
        }
    }
}

TEST_CASE("notice bundle round trip and tampering") {
    auto enclave = crypto::sign_keygen();
    auto notifier = crypto::sign_keygen();
    DataCaptureRule rule;
    rule.rule_id = 4;
    rule.polarity = Polarity::opt_out;
    rule.sensors = std::set<Bytes>{to_bytes("ap-9")};
    rule.valid_from = model::Timestamp{kDay0};
    rule.valid_until = model::Timestamp{kDay0 + 86400};

    policy::NoticeBundle bundle = policy::seal_notice(rule, enclave, notifier.public_key);
    CHECK(crypto::verify_sig(enclave.public_key, bundle.ciphertext, bundle.signature));

    auto broadcast = policy::open_notice_and_broadcast(bundle, enclave.public_key, notifier);
    REQUIRE(broadcast.has_value());
    auto delivered = policy::read_broadcast(*broadcast, notifier.public_key);
    REQUIRE(delivered.has_value());
    CHECK(*delivered == rule);  // byte-identical rule after the round trip

    // SP flips ciphertext bits: the notifier must reject.
    for (int i = 0; i < 50; ++i) {
        policy::NoticeBundle bad = bundle;
        bad.ciphertext[size_t(i) * 13 % bad.ciphertext.size()] ^= 0x01;
        CHECK_FALSE(
            policy::open_notice_and_broadcast(bad, enclave.public_key, notifier).has_value());
    }
}

TEST_CASE("notice-and-ack: only acknowledged devices are captured") {
    auto device_keys = crypto::sign_keygen();
    model::DeviceId device{{0x02, 0xAA}};
    DataCaptureRule rule;
    rule.rule_id = 21;
    rule.polarity = Polarity::opt_in;
    rule.valid_from = model::Timestamp{0};
    rule.valid_until = model::Timestamp{UINT64_MAX};
    auto rs = policy::make_ruleset(Polarity::opt_out, {rule});

    policy::AckRegistry acks;
    model::SensorReading r = reading(device.bytes, to_bytes("ap-1"), kDay0);
    CHECK(policy::evaluate(rs, &acks, r) == model::SensorState::passive);

    policy::Acknowledgment ack = policy::ack_rule(device_keys, device, rule);
    CHECK(acks.register_ack(rs, ack, device_keys.public_key));
    CHECK(policy::evaluate(rs, &acks, r) == model::SensorState::active);

    // Unacknowledged device stays filtered.
    CHECK(policy::evaluate(rs, &acks, reading({0x02, 0xBB}, to_bytes("ap-1"), kDay0)) ==
          model::SensorState::passive);
}

TEST_CASE("forged acknowledgments are rejected") {
    auto device_keys = crypto::sign_keygen();
    auto wrong_keys = crypto::sign_keygen();
    model::DeviceId device{{0x02, 0xAA}};
    DataCaptureRule rule;
    rule.rule_id = 5;
    rule.polarity = Polarity::opt_in;
    rule.valid_from = model::Timestamp{0};
    rule.valid_until = model::Timestamp{UINT64_MAX};
    auto rs = policy::make_ruleset(Polarity::opt_out, {rule});

    policy::AckRegistry acks;
    policy::Acknowledgment forged = policy::ack_rule(wrong_keys, device, rule);
    CHECK_FALSE(acks.register_ack(rs, forged, device_keys.public_key));
    CHECK(acks.size() == 0);
    // Unknown rule id is rejected too.
    policy::Acknowledgment ack = policy::ack_rule(device_keys, device, rule);
    ack.rule_id = 999;
    CHECK_FALSE(acks.register_ack(rs, ack, device_keys.public_key));
}

TEST_CASE("rule file round trip") {
    DataCaptureRule r1;
    r1.rule_id = 1;
    r1.polarity = Polarity::opt_out;
    r1.devices = std::set<Bytes>{{0x02, 0x01, 0x02, 0x03, 0x04, 0x05}};
    r1.daily = policy::DailyWindow{75600, 32400};
    r1.valid_from = model::Timestamp{kDay0};
    r1.valid_until = model::Timestamp{kDay0 + 40 * 86400};
    DataCaptureRule r2;
    r2.rule_id = 2;
    r2.polarity = Polarity::opt_out;
    r2.sensors = std::set<Bytes>{to_bytes("ap-1"), to_bytes("ap-2")};
    r2.absolute = {model::Timestamp{kDay0}, model::Timestamp{kDay0 + 3600}};
    r2.valid_from = model::Timestamp{kDay0};
    r2.valid_until = model::Timestamp{kDay0 + 86400};

    auto rs = policy::make_ruleset(Polarity::opt_in, {r1, r2});
    std::string text = policy::write_rule_file(rs);
    policy::RuleSet back = policy::parse_rule_file(text);
    CHECK(back.default_polarity == rs.default_polarity);
    REQUIRE(back.rules.size() == 2);
    CHECK(back.rules[0] == r1);
    CHECK(back.rules[1] == r2);
    CHECK(back.digest == rs.digest);
}

TEST_CASE("evaluator agrees with the brute-force oracle on randomized cases") {
    std::mt19937_64 rng(42);
    auto rand_device = [&] { return Bytes{0x02, uint8_t(rng() % 16)}; };
    auto rand_sensor = [&] { return to_bytes("ap-" + std::to_string(rng() % 12)); };

    // Rule families: time-based, user-location, user-time, time-location,
    // plus unconstrained grants.
    auto rand_rule = [&](uint64_t id) {
        DataCaptureRule rule;
        rule.rule_id = id;
        uint32_t family = uint32_t(rng() % 5);
        rule.polarity = family == 4 ? Polarity::opt_in : Polarity::opt_out;
        switch (family) {
            case 0:  // time-based: daily window only
                rule.daily = policy::DailyWindow{uint32_t(rng() % 86400), uint32_t(rng() % 86400)};
                break;
            case 1:  // user-location: devices + sensors
                rule.devices = std::set<Bytes>{rand_device(), rand_device()};
                rule.sensors = std::set<Bytes>{rand_sensor(), rand_sensor()};
                break;
            case 2:  // user-time: devices + daily window
                rule.devices = std::set<Bytes>{rand_device()};
                rule.daily = policy::DailyWindow{uint32_t(rng() % 86400), uint32_t(rng() % 86400)};
                break;
            case 3:  // time-location: sensors + daily window
                rule.sensors = std::set<Bytes>{rand_sensor()};
                rule.daily = policy::DailyWindow{uint32_t(rng() % 86400), uint32_t(rng() % 86400)};
                break;
            default:  // broad opt-in grant, sometimes device-scoped
                if (rng() % 2) rule.devices = std::set<Bytes>{rand_device(), rand_device()};
                break;
        }
        // Short validity windows so expiry cases are exercised.
        uint64_t start = kDay0 + (rng() % 10) * 86400;
        rule.valid_from = model::Timestamp{start};
        rule.valid_until = model::Timestamp{start + (1 + rng() % 5) * 86400};
        if (rng() % 8 == 0) rule.absolute = {model::Timestamp{start}, model::Timestamp{start + 7200}};
        return rule;
    };

    int checked = 0;
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<DataCaptureRule> rules;
        uint64_t n_rules = rng() % 6;
        for (uint64_t i = 0; i < n_rules; ++i) rules.push_back(rand_rule(i + 1));
        auto rs = policy::make_ruleset(rng() % 2 ? Polarity::opt_in : Polarity::opt_out,
                                       std::move(rules));
        for (int j = 0; j < 50; ++j) {
            auto r = reading(rand_device(), rand_sensor(), kDay0 + rng() % (12 * 86400));
            CHECK(policy::evaluate(rs, nullptr, r) == testsupport::oracle_evaluate(rs, r));
            ++checked;
        }
    }
    CHECK(checked == 10000);
}
