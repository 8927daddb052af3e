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
#include <set>

#include "notary/ake.hpp"
#include "notary/gen.hpp"
#include "notary/sealing.hpp"
#include "notary/verify.hpp"

using namespace notary;

namespace {

namespace fs = std::filesystem;

ake::LogQuery any_query() {
    ake::LogQuery q;
    q.kind = ake::LogQuery::Kind::time_range;
    q.from = 0;
    q.to = UINT64_MAX;
    return q;
}

struct Peers {
    ake::VerifierRegistry registry;
    crypto::SigningKeyPair user_keys = crypto::sign_keygen();
    model::DeviceId device{hex_decode("020011223344")};

    Peers() {
        registry.entries.push_back({"auditor-1", ake::Role::auditor, std::nullopt, {}});
        registry.entries.push_back(
            {"user-020011223344", ake::Role::user, device, user_keys.public_key});
    }
};

// Drives one full handshake in memory. Returns false at the first abort.
struct Run {
    ake::Initiator initiator;
    ake::Responder responder;
    bool completed = false;
    std::string err;

    Run(const Peers& p, const std::string& v_id,
        std::optional<crypto::SigningKeyPair> dkeys = std::nullopt,
        const std::function<Bytes(Bytes)>& mangle_msg1 = {},
        const std::function<Bytes(Bytes)>& mangle_msg2 = {},
        const std::function<Bytes(Bytes)>& mangle_msg3 = {})
        : initiator(v_id, std::move(dkeys)), responder("notary-sp", &p.registry) {
        Bytes m1 = initiator.msg1();
        if (mangle_msg1) m1 = mangle_msg1(std::move(m1));
        auto m2 = responder.on_msg1(m1, &err);
        if (!m2) return;
        Bytes m2b = *m2;
        if (mangle_msg2) m2b = mangle_msg2(std::move(m2b));
        if (auto e = initiator.on_msg2(m2b)) {
            err = *e;
            return;
        }
        Bytes m3 = initiator.msg3(any_query());
        if (mangle_msg3) m3 = mangle_msg3(std::move(m3));
        auto res = responder.on_msg3(m3, &err);
        if (!res) return;
        completed = true;
    }
};

// Field surgery on msg2 = [g^y field][SP_id field][mac field].
Bytes replace_msg2_field(const Bytes& payload, int which, const Bytes& replacement) {
    ByteReader r(payload);
    Bytes gy = r.field();
    Bytes sp = r.field();
    Bytes mac = r.field();
    ByteWriter w;
    w.field(which == 0 ? replacement : gy);
    w.field(which == 1 ? replacement : sp);
    w.field(which == 2 ? replacement : mac);
    return w.take();
}

}  // namespace

TEST_CASE("honest runs agree on session keys; keys are fresh per run") {
    Peers p;
    std::set<Digest> session_keys;
    for (int i = 0; i < 1000; ++i) {
        Run run(p, "auditor-1");
        REQUIRE(run.completed);
        CHECK(run.initiator.keys().e == run.responder.keys().e);
        CHECK(run.initiator.keys().mac_key == run.responder.keys().mac_key);
        CHECK(session_keys.insert(run.initiator.keys().e).second);  // forward secrecy: no reuse
    }
}

TEST_CASE("two msg1 emissions use distinct non-identity exponents") {
    ake::Initiator a("auditor-1"), b("auditor-1");
    Bytes m1 = a.msg1(), m2 = b.msg1();
    CHECK(m1 != m2);
    ByteReader r(m1);
    Bytes gx = r.field();
    REQUIRE(gx.size() == 32);
    Digest d{};
    std::copy(gx.begin(), gx.end(), d.begin());
    CHECK(crypto::valid_group_element(d));
}

TEST_CASE("substituting the initiator exponent aborts at the initiator") {
    Peers p;
    auto fresh = crypto::dh_keygen();
    Run run(p, "auditor-1", std::nullopt, [&](Bytes) {
        ByteWriter w;
        w.field(fresh.element);
        return w.take();
    });
    CHECK_FALSE(run.completed);
    CHECK(run.err == "msg2 mac mismatch");
}

TEST_CASE("substituting g^y or SP_id in msg2 aborts before msg3") {
    Peers p;
    auto fresh = crypto::dh_keygen();
    Run sub_gy(p, "auditor-1", std::nullopt, {}, [&](Bytes m2) {
        return replace_msg2_field(m2, 0, Bytes(fresh.element.begin(), fresh.element.end()));
    });
    CHECK_FALSE(sub_gy.completed);

    Run sub_sp(p, "auditor-1", std::nullopt, {}, [&](Bytes m2) {
        return replace_msg2_field(m2, 1, to_bytes("evil-sp"));
    });
    CHECK_FALSE(sub_sp.completed);
    CHECK(sub_sp.err == "msg2 mac mismatch");

    Run sub_mac(p, "auditor-1", std::nullopt, {}, [&](Bytes m2) {
        return replace_msg2_field(m2, 2, Bytes(32, 0));
    });
    CHECK_FALSE(sub_mac.completed);
}

TEST_CASE("tampering msg3 aborts at the responder") {
    Peers p;
    Run run(p, "auditor-1", std::nullopt, {}, {}, [&](Bytes m3) {
        m3[m3.size() / 2] ^= 0x01;
        return m3;
    });
    CHECK_FALSE(run.completed);
    CHECK(run.err == "msg3 authentication failed");
}

TEST_CASE("unknown verifier id is refused") {
    Peers p;
    Run run(p, "auditor-999");
    CHECK_FALSE(run.completed);
    CHECK(run.err == "unknown verifier");
}

TEST_CASE("user role requires a valid transcript signature") {
    Peers p;
    // Correct device key: completes.
    Run ok(p, "user-020011223344", p.user_keys);
    CHECK(ok.completed);
    // Wrong key: refused.
    Run bad(p, "user-020011223344", crypto::sign_keygen());
    CHECK_FALSE(bad.completed);
    CHECK(bad.err == "transcript signature invalid");
    // Missing signature: refused.
    Run none(p, "user-020011223344");
    CHECK_FALSE(none.completed);
}

TEST_CASE("verifier identity never crosses the wire in cleartext") {
    Peers p;
    const std::string v_id = "user-020011223344";
    Bytes transcript;

    ake::Initiator initiator(v_id, p.user_keys);
    ake::Responder responder("notary-sp", &p.registry);
    Bytes m1 = initiator.msg1();
    transcript.insert(transcript.end(), m1.begin(), m1.end());
    auto m2 = responder.on_msg1(m1);
    REQUIRE(m2.has_value());
    transcript.insert(transcript.end(), m2->begin(), m2->end());
    REQUIRE_FALSE(initiator.on_msg2(*m2).has_value());
    Bytes m3 = initiator.msg3(any_query());
    transcript.insert(transcript.end(), m3.begin(), m3.end());
    auto res = responder.on_msg3(m3);
    REQUIRE(res.has_value());
    Bytes resp = responder.make_response(to_bytes("payload"));
    transcript.insert(transcript.end(), resp.begin(), resp.end());

    Bytes needle = to_bytes(v_id);
    CHECK(std::search(transcript.begin(), transcript.end(), needle.begin(), needle.end()) ==
          transcript.end());
    // The responder's identity is in the clear (responder privacy is not a
    // goal); it still reached the initiator intact.
    CHECK(initiator.sp_id() == "notary-sp");
}

TEST_CASE("response frames decrypt in order and reject replays") {
    Peers p;
    Run run(p, "auditor-1");
    REQUIRE(run.completed);
    Bytes r1 = run.responder.make_response(to_bytes("first"));
    Bytes r2 = run.responder.make_response(to_bytes("second"));
    auto p1 = run.initiator.open_response(r1);
    REQUIRE(p1.has_value());
    CHECK(to_string(*p1) == "first");
    // Replay of the same frame fails: the sequence number is bound.
    CHECK_FALSE(run.initiator.open_response(r1).has_value());
}

TEST_CASE("frame round trip and bounds") {
    Bytes f = ake::frame(ake::MsgType::msg2, to_bytes("hello"));
    ake::Frame back = ake::parse_frame(f);
    CHECK(back.type == ake::MsgType::msg2);
    CHECK(to_string(back.payload) == "hello");
    Bytes bad = f;
    bad[4] = 0x7F;  // unknown type
    CHECK_THROWS_AS(ake::parse_frame(bad), FormatError);
    CHECK_THROWS_AS(ake::parse_frame(Bytes{0, 0, 0, 0}), FormatError);
}

TEST_CASE("query serialization round trip") {
    ake::LogQuery q;
    q.kind = ake::LogQuery::Kind::chunk_ids;
    q.stream = "s0003";
    q.from = 100;
    q.to = 900;
    q.ids = {{"main", 2}, {"s0003", 7}};
    q.device = hex_decode("0200aabbccdd");
    ake::LogQuery back = ake::parse_query(ake::serialize_query(q));
    CHECK(back.kind == q.kind);
    CHECK(*back.stream == *q.stream);
    CHECK(back.ids.size() == 2);
    CHECK(back.ids[1].index == 7);
    CHECK(back.device == q.device);
}

TEST_CASE("retrieval service end to end: auditor gets chunks, user gets views, rogue gets nothing") {
    auto dir = fs::temp_directory_path() / "notary-ake-server";
    fs::remove_all(dir);
    store::ChunkStore st(dir);
    auto keys = crypto::sign_keygen();
    crypto::SystemRandom rng;
    sealing::ChunkPolicy cp;
    cp.max_age_sec = 600;
    auto rules = policy::make_ruleset(policy::Polarity::opt_in, {});
    sealing::Sealer sealer(keys, cp, rules, false, st, rng);

    Peers p;
    uint64_t t = 1767225600;
    for (int i = 0; i < 50; ++i) {
        model::SensorReading r;
        r.device = i % 5 == 0 ? p.device : gen::device_id_for(2, uint32_t(i));
        r.sensor = gen::sensor_id_for(uint32_t(i % 4));
        r.time.epoch_seconds = t++;
        sealer.ingest_reading(r, r.time.epoch_seconds);
    }
    sealer.flush(t);

    ake::RetrievalServer server(st, p.registry, "notary-sp");
    uint16_t port = server.start(0);

    // Auditor: full chunks with neighbor strings; they verify.
    auto res = ake::fetch("127.0.0.1", port, "auditor-1", std::nullopt, any_query());
    REQUIRE(res.ok());
    auto chunks = ake::parse_auditor_payload(res.payload);
    REQUIRE(chunks.size() == 1);
    CHECK(verify::verify_range(chunks, keys.public_key).pass());

    // User: digest views only, no record bytes, presence verifiable.
    auto ures = ake::fetch("127.0.0.1", port, "user-020011223344", p.user_keys, any_query());
    REQUIRE(ures.ok());
    auto views = ake::parse_user_payload(ures.payload);
    REQUIRE(views.size() == 1);
    auto rep = verify::verify_user(views[0], keys.public_key, p.device);
    CHECK(rep.integrity.pass());
    CHECK(rep.matched.size() == 10);

    // A user may not request full chunks.
    ake::LogQuery ids_query;
    ids_query.kind = ake::LogQuery::Kind::chunk_ids;
    ids_query.ids = {{"main", 0}};
    auto forbidden = ake::fetch("127.0.0.1", port, "user-020011223344", p.user_keys, ids_query);
    CHECK_FALSE(forbidden.ok());

    // Rogue verifier: refused with zero payload bytes.
    auto rogue = ake::fetch("127.0.0.1", port, "nobody", std::nullopt, any_query());
    CHECK_FALSE(rogue.ok());
    CHECK(rogue.payload.empty());

    server.stop();
    fs::remove_all(dir);
}

TEST_CASE("replayed msg1 completes but yields different session keys") {
    Peers p;
    ake::Initiator original("auditor-1");
    Bytes m1 = original.msg1();

    ake::Responder first("notary-sp", &p.registry);
    ake::Responder second("notary-sp", &p.registry);
    auto m2a = first.on_msg1(m1);
    auto m2b = second.on_msg1(m1);  // replay
    REQUIRE(m2a.has_value());
    REQUIRE(m2b.has_value());
    // The responder cannot tell a replay apart, but its fresh y makes the
    // derived keys differ, so the replayer gains nothing.
    CHECK(first.keys().e != second.keys().e);
}
