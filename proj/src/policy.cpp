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

#include "notary/policy.hpp"

#include <algorithm>
#include <sstream>

namespace notary::policy {

constexpr uint32_t kSecondsPerDay = 86400;

bool DailyWindow::contains(uint64_t epoch_seconds) const {
    uint32_t sod = uint32_t(epoch_seconds % kSecondsPerDay);
    if (from_sec == to_sec) return false;  // empty window
    if (from_sec < to_sec) return sod >= from_sec && sod < to_sec;
    return sod >= from_sec || sod < to_sec;  // wraps midnight
}

bool DataCaptureRule::matches(const model::SensorReading& r) const {
    uint64_t t = r.time.epoch_seconds;
    if (t < valid_from.epoch_seconds || t >= valid_until.epoch_seconds) return false;
    if (devices && !devices->count(r.device.bytes)) return false;
    if (sensors && !sensors->count(r.sensor.bytes)) return false;
    if (daily && !daily->contains(t)) return false;
    if (absolute && !(t >= absolute->first.epoch_seconds && t < absolute->second.epoch_seconds))
        return false;
    return true;
}

Bytes encode_rule(const DataCaptureRule& rule) {
    ByteWriter w;
    w.u64(rule.rule_id);
    w.u8(uint8_t(rule.polarity));
    auto write_id_set = [&](const std::optional<std::set<Bytes>>& ids) {
        w.u8(ids ? 1 : 0);
        if (!ids) return;
        w.u32(uint32_t(ids->size()));
        for (const Bytes& id : *ids) w.field(id);
    };
    write_id_set(rule.devices);
    write_id_set(rule.sensors);
    w.u8(rule.daily ? 1 : 0);
    if (rule.daily) {
        w.u32(rule.daily->from_sec);
        w.u32(rule.daily->to_sec);
    }
    w.u8(rule.absolute ? 1 : 0);
    if (rule.absolute) {
        w.u64(rule.absolute->first.epoch_seconds);
        w.u64(rule.absolute->second.epoch_seconds);
    }
    w.u64(rule.valid_from.epoch_seconds);
    w.u64(rule.valid_until.epoch_seconds);
    return w.take();
}

DataCaptureRule decode_rule(ByteView bytes) {
    ByteReader r(bytes);
    DataCaptureRule rule;
    rule.rule_id = r.u64();
    uint8_t pol = r.u8();
    if (pol > 1) throw FormatError("bad polarity");
    rule.polarity = Polarity(pol);
    // Strict flags: the encoding is canonical so that decode(encode(x))
    // round-trips and any byte change moves the digest.
    auto read_flag = [&]() {
        uint8_t f = r.u8();
        if (f > 1) throw FormatError("bad presence flag");
        return f == 1;
    };
    auto read_id_set = [&]() -> std::optional<std::set<Bytes>> {
        if (!read_flag()) return std::nullopt;
        uint32_t n = r.u32();
        std::set<Bytes> ids;
        for (uint32_t i = 0; i < n; ++i) ids.insert(r.field());
        return ids;
    };
    rule.devices = read_id_set();
    rule.sensors = read_id_set();
    if (read_flag()) {
        DailyWindow dw;
        dw.from_sec = r.u32();
        dw.to_sec = r.u32();
        rule.daily = dw;
    }
    if (read_flag()) {
        model::Timestamp a{r.u64()}, b{r.u64()};
        rule.absolute = {a, b};
    }
    rule.valid_from.epoch_seconds = r.u64();
    rule.valid_until.epoch_seconds = r.u64();
    r.expect_done();
    return rule;
}

Digest rule_digest(const DataCaptureRule& rule) {
    return crypto::sha256(encode_rule(rule));
}

Digest ruleset_digest(Polarity default_polarity, const std::vector<DataCaptureRule>& rules) {
    ByteWriter w;
    w.u8(uint8_t(default_polarity));
    w.u32(uint32_t(rules.size()));
    for (const auto& rule : rules) w.field(encode_rule(rule));
    return crypto::sha256(w.bytes());
}

RuleSet make_ruleset(Polarity default_polarity, std::vector<DataCaptureRule> rules) {
    RuleSet rs;
    rs.default_polarity = default_polarity;
    rs.rules = std::move(rules);
    rs.digest = ruleset_digest(rs.default_polarity, rs.rules);
    return rs;
}

Acknowledgment ack_rule(const crypto::SigningKeyPair& device_keys, const model::DeviceId& device,
                        const DataCaptureRule& rule) {
    Acknowledgment ack;
    ack.device = device;
    ack.rule_id = rule.rule_id;
    Digest rd = rule_digest(rule);
    ack.signature = crypto::sign(device_keys.secret_key, model::encode_id_pair(device.bytes, rd));
    return ack;
}

bool AckRegistry::register_ack(const RuleSet& rules, const Acknowledgment& ack,
                               ByteView device_public_key) {
    auto it = std::find_if(rules.rules.begin(), rules.rules.end(),
                           [&](const DataCaptureRule& r) { return r.rule_id == ack.rule_id; });
    if (it == rules.rules.end()) return false;
    Digest rd = rule_digest(*it);
    if (!crypto::verify_sig(device_public_key, model::encode_id_pair(ack.device.bytes, rd),
                            ack.signature)) {
        return false;
    }
    acks_[ack.device.bytes].insert(ack.rule_id);
    return true;
}

bool AckRegistry::acknowledged(const model::DeviceId& device, uint64_t rule_id) const {
    auto it = acks_.find(device.bytes);
    return it != acks_.end() && it->second.count(rule_id) > 0;
}

model::SensorState evaluate(const RuleSet& rules, const AckRegistry* acks,
                            const model::SensorReading& reading) {
    if (ruleset_digest(rules.default_polarity, rules.rules) != rules.digest)
        throw PolicyIntegrityError("rule set digest mismatch");

    bool opted_out = false;
    bool granted = false;
    for (const auto& rule : rules.rules) {
        if (!rule.matches(reading)) continue;
        if (rule.polarity == Polarity::opt_out) {
            opted_out = true;
        } else if (!acks || acks->acknowledged(reading.device, rule.rule_id)) {
            granted = true;
        }
    }
    if (!acks && rules.default_polarity == Polarity::opt_in) granted = true;
    // An opt-out match beats any grant.
    return (granted && !opted_out) ? model::SensorState::active : model::SensorState::passive;
}

NoticeBundle seal_notice(const DataCaptureRule& rule, const crypto::SigningKeyPair& trusted_keys,
                         ByteView notifier_public_key) {
    NoticeBundle b;
    b.ciphertext = crypto::pk_encrypt(notifier_public_key, encode_rule(rule));
    b.signature = crypto::sign(trusted_keys.secret_key, b.ciphertext);
    return b;
}

std::optional<Bytes> open_notice_and_broadcast(const NoticeBundle& bundle,
                                               ByteView trusted_public_key,
                                               const crypto::SigningKeyPair& notifier_keys) {
    if (!crypto::verify_sig(trusted_public_key, bundle.ciphertext, bundle.signature))
        return std::nullopt;
    auto rule_bytes = crypto::pk_decrypt(notifier_keys, bundle.ciphertext);
    if (!rule_bytes) return std::nullopt;
    ByteWriter w;
    w.field(*rule_bytes);
    w.field(crypto::sign(notifier_keys.secret_key, *rule_bytes));
    return w.take();
}

std::optional<DataCaptureRule> read_broadcast(ByteView broadcast, ByteView notifier_public_key) {
    try {
        ByteReader r(broadcast);
        Bytes rule_bytes = r.field();
        Bytes sig = r.field();
        r.expect_done();
        if (!crypto::verify_sig(notifier_public_key, rule_bytes, sig)) return std::nullopt;
        return decode_rule(rule_bytes);
    } catch (const FormatError&) {
        return std::nullopt;
    }
}

Bytes serialize_notice(const NoticeBundle& b) {
    ByteWriter w;
    w.field(b.ciphertext);
    w.field(b.signature);
    return w.take();
}

NoticeBundle parse_notice(ByteView bytes) {
    ByteReader r(bytes);
    NoticeBundle b;
    b.ciphertext = r.field();
    b.signature = r.field();
    r.expect_done();
    return b;
}

Bytes serialize_ack(const Acknowledgment& a) {
    ByteWriter w;
    w.field(a.device.bytes);
    w.u64(a.rule_id);
    w.field(a.signature);
    return w.take();
}

Acknowledgment parse_ack(ByteView bytes) {
    ByteReader r(bytes);
    Acknowledgment a;
    a.device.bytes = r.field();
    a.rule_id = r.u64();
    a.signature = r.field();
    r.expect_done();
    return a;
}

namespace {

std::string ids_to_csv(const std::set<Bytes>& ids) {
    std::string out;
    for (const Bytes& id : ids) {
        if (!out.empty()) out.push_back(',');
        out += hex_encode(id);
    }
    return out;
}

std::set<Bytes> csv_to_ids(const std::string& csv) {
    std::set<Bytes> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.insert(hex_decode(item));
    }
    return out;
}

}  // namespace

std::string write_rule_file(const RuleSet& rules) {
    std::ostringstream out;
    out << "default=" << (rules.default_polarity == Polarity::opt_in ? "opt_in" : "opt_out")
        << "\n";
    for (const auto& r : rules.rules) {
        out << "rule_id=" << r.rule_id
            << " polarity=" << (r.polarity == Polarity::opt_in ? "opt_in" : "opt_out");
        if (r.devices) out << " devices=" << ids_to_csv(*r.devices);
        if (r.sensors) out << " sensors=" << ids_to_csv(*r.sensors);
        if (r.daily) out << " daily=" << r.daily->from_sec << "-" << r.daily->to_sec;
        if (r.absolute)
            out << " absolute=" << r.absolute->first.epoch_seconds << "-"
                << r.absolute->second.epoch_seconds;
        out << " valid=" << r.valid_from.epoch_seconds << "-" << r.valid_until.epoch_seconds
            << "\n";
    }
    return out.str();
}

RuleSet parse_rule_file(const std::string& text) {
    Polarity default_polarity = Polarity::opt_out;
    std::vector<DataCaptureRule> rules;
    std::istringstream in(text);
    std::string line;
    auto parse_range = [](const std::string& v) -> std::pair<uint64_t, uint64_t> {
        size_t dash = v.find('-');
        if (dash == std::string::npos) throw FormatError("bad range: " + v);
        return {std::stoull(v.substr(0, dash)), std::stoull(v.substr(dash + 1))};
    };
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tok;
        DataCaptureRule rule;
        bool is_rule = false;
        while (ls >> tok) {
            size_t eq = tok.find('=');
            if (eq == std::string::npos) throw FormatError("bad token: " + tok);
            std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
            if (key == "default") {
                default_polarity = val == "opt_in" ? Polarity::opt_in : Polarity::opt_out;
            } else if (key == "rule_id") {
                rule.rule_id = std::stoull(val);
                is_rule = true;
            } else if (key == "polarity") {
                rule.polarity = val == "opt_in" ? Polarity::opt_in : Polarity::opt_out;
            } else if (key == "devices") {
                rule.devices = csv_to_ids(val);
            } else if (key == "sensors") {
                rule.sensors = csv_to_ids(val);
            } else if (key == "daily") {
                auto [a, b] = parse_range(val);
                rule.daily = DailyWindow{uint32_t(a), uint32_t(b)};
            } else if (key == "absolute") {
                auto [a, b] = parse_range(val);
                rule.absolute = {model::Timestamp{a}, model::Timestamp{b}};
            } else if (key == "valid") {
                auto [a, b] = parse_range(val);
                rule.valid_from = model::Timestamp{a};
                rule.valid_until = model::Timestamp{b};
            } else {
                throw FormatError("unknown rule key: " + key);
            }
        }
        if (is_rule) rules.push_back(std::move(rule));
    }
    return make_ruleset(default_polarity, std::move(rules));
}

}  // namespace notary::policy
