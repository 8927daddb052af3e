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

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "notary/crypto.hpp"
#include "notary/model.hpp"

namespace notary::policy {

class PolicyIntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Polarity : uint8_t { opt_in = 0, opt_out = 1 };

// Daily window [from,to) in seconds of day; wraps midnight when from > to.
struct DailyWindow {
    uint32_t from_sec = 0;
    uint32_t to_sec = 0;

    bool contains(uint64_t epoch_seconds) const;
    bool operator==(const DailyWindow&) const = default;
};

struct DataCaptureRule {
    uint64_t rule_id = 0;
    Polarity polarity = Polarity::opt_out;
    std::optional<std::set<Bytes>> devices;  // no value = any device
    std::optional<std::set<Bytes>> sensors;  // no value = any sensor
    std::optional<DailyWindow> daily;
    std::optional<std::pair<model::Timestamp, model::Timestamp>> absolute;  // [from,to)
    model::Timestamp valid_from;
    model::Timestamp valid_until;  // exclusive

    bool matches(const model::SensorReading& r) const;
    bool operator==(const DataCaptureRule&) const = default;
};

Bytes encode_rule(const DataCaptureRule& rule);
DataCaptureRule decode_rule(ByteView bytes);
Digest rule_digest(const DataCaptureRule& rule);

struct RuleSet {
    Polarity default_polarity = Polarity::opt_out;
    std::vector<DataCaptureRule> rules;
    Digest digest{};  // over the canonical encoding; guards rules at rest
};

Digest ruleset_digest(Polarity default_polarity, const std::vector<DataCaptureRule>& rules);
RuleSet make_ruleset(Polarity default_polarity, std::vector<DataCaptureRule> rules);

struct Acknowledgment {
    model::DeviceId device;
    uint64_t rule_id = 0;
    Bytes signature;  // by the device key over (device id, rule digest)
};

Acknowledgment ack_rule(const crypto::SigningKeyPair& device_keys, const model::DeviceId& device,
                        const DataCaptureRule& rule);

class AckRegistry {
public:
    // Admits only signature-valid acknowledgments; returns false otherwise.
    bool register_ack(const RuleSet& rules, const Acknowledgment& ack, ByteView device_public_key);
    bool acknowledged(const model::DeviceId& device, uint64_t rule_id) const;
    size_t size() const { return acks_.size(); }

private:
    std::map<Bytes, std::set<uint64_t>> acks_;
};

// Evaluates one reading to its sensor state. With an AckRegistry present
// (notice-and-ack model) an opt-in rule only grants capture to devices that
// acknowledged that rule. Throws PolicyIntegrityError on a stale digest.
model::SensorState evaluate(const RuleSet& rules, const AckRegistry* acks,
                            const model::SensorReading& reading);

// Notice bundle produced inside the trusted component for the notifier:
// the rule encrypted to the notifier's key, signed by the trusted key.
struct NoticeBundle {
    Bytes ciphertext;
    Bytes signature;
};

NoticeBundle seal_notice(const DataCaptureRule& rule, const crypto::SigningKeyPair& trusted_keys,
                         ByteView notifier_public_key);

// Notifier side: verify provenance, decrypt, and emit the signed broadcast
// record users consume. Empty on any verification/decryption failure.
std::optional<Bytes> open_notice_and_broadcast(const NoticeBundle& bundle,
                                               ByteView trusted_public_key,
                                               const crypto::SigningKeyPair& notifier_keys);
std::optional<DataCaptureRule> read_broadcast(ByteView broadcast, ByteView notifier_public_key);

Bytes serialize_notice(const NoticeBundle& b);
NoticeBundle parse_notice(ByteView bytes);
Bytes serialize_ack(const Acknowledgment& a);
Acknowledgment parse_ack(ByteView bytes);

// Rule file: one `key=value ...` line per rule, `default=` header line.
std::string write_rule_file(const RuleSet& rules);
RuleSet parse_rule_file(const std::string& text);

}  // namespace notary::policy
