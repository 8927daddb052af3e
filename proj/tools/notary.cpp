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

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bench.hpp"
#include "notary/ake.hpp"
#include "notary/gen.hpp"
#include "notary/keys.hpp"
#include "notary/sealing.hpp"
#include "notary/verify.hpp"

namespace fs = std::filesystem;
using namespace notary;
using nlohmann::json;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v ? v : fallback;
}

Bytes read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw FormatError("cannot open " + p.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& p, ByteView data) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
    if (!out) throw FormatError("cannot write " + p.string());
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw FormatError("cannot open " + p.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

model::SealMode mode_from(const std::string& s) {
    if (s == "entire") return model::SealMode::entire;
    if (s == "mixed") return model::SealMode::mixed;
    if (s == "per-sensor") return model::SealMode::per_sensor;
    if (s == "per-user") return model::SealMode::per_user;
    throw CLI::ValidationError("mode", "unknown mode " + s);
}

std::pair<std::string, uint16_t> split_addr(const std::string& addr) {
    size_t colon = addr.rfind(':');
    if (colon == std::string::npos) throw CLI::ValidationError("addr", "expected host:port");
    return {addr.substr(0, colon), uint16_t(std::stoul(addr.substr(colon + 1)))};
}

// Feed file: a sequence of length-prefixed sealed-box ciphertexts.
size_t for_each_feed_record(const fs::path& p, const std::function<void(Bytes&&)>& fn) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw FormatError("cannot open " + p.string());
    size_t count = 0;
    for (;;) {
        uint8_t head[4];
        in.read(reinterpret_cast<char*>(head), 4);
        if (in.gcount() == 0) break;
        if (in.gcount() != 4) throw FormatError("truncated feed file");
        uint32_t len = (uint32_t(head[0]) << 24) | (uint32_t(head[1]) << 16) |
                       (uint32_t(head[2]) << 8) | uint32_t(head[3]);
        Bytes ct(len);
        in.read(reinterpret_cast<char*>(ct.data()), len);
        if (size_t(in.gcount()) != len) throw FormatError("truncated feed file");
        fn(std::move(ct));
        ++count;
    }
    return count;
}

int cmd_setup(const std::string& keydir, size_t devices, bool force) {
    auto result = keys::setup(keydir, devices, force);
    std::cout << "generated " << result.keypairs << " keypairs under " << keydir << "\n";
    for (const auto& d : result.devices) std::cout << "device " << hex_encode(d.bytes) << "\n";
    return 0;
}

int cmd_gen(const std::string& out, const gen::GenConfig& cfg) {
    gen::write_event_file(out, cfg);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_feed(const std::string& keydir, const std::string& in, const std::string& out,
             uint32_t params_bytes) {
    Bytes enclave_pk = keys::load_public_key(keydir, "enclave");
    std::ofstream os(out, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("cannot write " + out);

    // Encrypt in parallel batches; ciphertexts stay in arrival order.
    std::vector<model::SensorReading> batch;
    size_t total = 0;
    auto flush_batch = [&] {
        std::vector<Bytes> cts(batch.size());
        const auto n = static_cast<ptrdiff_t>(batch.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (ptrdiff_t i = 0; i < n; ++i)
            cts[size_t(i)] = sealing::encrypt_reading(enclave_pk, batch[size_t(i)]);
        for (const Bytes& ct : cts) {
            uint8_t head[4] = {uint8_t(ct.size() >> 24), uint8_t(ct.size() >> 16),
                               uint8_t(ct.size() >> 8), uint8_t(ct.size())};
            os.write(reinterpret_cast<char*>(head), 4);
            os.write(reinterpret_cast<const char*>(ct.data()), std::streamsize(ct.size()));
        }
        total += batch.size();
        batch.clear();
    };
    gen::read_event_file(in, [&](model::SensorReading&& r) {
        if (params_bytes > 0) r.params = gen::synth_params(r, params_bytes);
        batch.push_back(std::move(r));
        if (batch.size() >= 8192) flush_batch();
    });
    flush_batch();
    std::cout << "encrypted " << total << " readings -> " << out << "\n";
    return 0;
}

int cmd_notify(const std::string& keydir, const std::string& rule_file, const std::string& model,
               const std::string& outdir) {
    policy::RuleSet rules = policy::parse_rule_file(read_text(rule_file));
    crypto::SigningKeyPair enclave = keys::load_keypair(keydir, "enclave");
    Bytes notifier_pk = keys::load_public_key(keydir, "notifier");
    fs::create_directories(outdir);
    for (const auto& rule : rules.rules) {
        policy::NoticeBundle bundle = policy::seal_notice(rule, enclave, notifier_pk);
        fs::path bundle_path = fs::path(outdir) / ("notice-" + std::to_string(rule.rule_id) + ".bundle");
        write_file(bundle_path, policy::serialize_notice(bundle));
        if (model == "nom") {
            // The trusted notifier decrypts and re-signs for broadcast.
            crypto::SigningKeyPair notifier = keys::load_keypair(keydir, "notifier");
            auto broadcast =
                policy::open_notice_and_broadcast(bundle, enclave.public_key, notifier);
            if (!broadcast) throw std::runtime_error("notifier rejected the bundle");
            write_file(fs::path(outdir) / ("broadcast-" + std::to_string(rule.rule_id) + ".bin"),
                       *broadcast);
        }
        std::cout << "rule " << rule.rule_id << " notified (" << model << ")\n";
    }
    return 0;
}

int cmd_ack(const std::string& keydir, const std::string& rule_file, const std::string& device_hex,
            uint64_t rule_id, const std::string& out) {
    policy::RuleSet rules = policy::parse_rule_file(read_text(rule_file));
    model::DeviceId device{hex_decode(device_hex)};
    auto it = std::find_if(rules.rules.begin(), rules.rules.end(),
                           [&](const auto& r) { return r.rule_id == rule_id; });
    if (it == rules.rules.end()) throw std::runtime_error("no such rule id");
    crypto::SigningKeyPair dkeys = keys::load_keypair(keydir, keys::device_key_name(device));
    policy::Acknowledgment ack = policy::ack_rule(dkeys, device, *it);
    write_file(out, policy::serialize_ack(ack));
    std::cout << "ack for rule " << rule_id << " by " << device_hex << " -> " << out << "\n";
    return 0;
}

struct SealArgs {
    std::string keydir, rule_file, store_dir, feed_file, events_file;
    std::string mode = "mixed";
    uint64_t chunk_bytes = 5 * 1024 * 1024;
    uint64_t chunk_age = 1800;
    uint32_t buckets = 490;
    uint32_t params_bytes = 0;
    std::vector<std::string> ack_files;
    bool nam = false;
};

int cmd_seal(const SealArgs& a) {
    crypto::SigningKeyPair enclave = keys::load_keypair(a.keydir, "enclave");
    policy::RuleSet rules = policy::parse_rule_file(read_text(a.rule_file));
    store::ChunkStore st(a.store_dir);
    crypto::SystemRandom rng;
    sealing::ChunkPolicy cp;
    cp.mode = mode_from(a.mode);
    cp.max_bytes = a.chunk_bytes;
    cp.max_age_sec = a.chunk_age;
    cp.bucket_count = a.buckets;
    sealing::Sealer sealer(enclave, cp, rules, a.nam, st, rng);

    if (a.nam) {
        keys::Registry registry = keys::load_registry(fs::path(a.keydir) / "registry.json");
        for (const auto& f : a.ack_files) {
            policy::Acknowledgment ack = policy::parse_ack(read_file(f));
            const auto* dev = registry.find_device(ack.device);
            if (!dev || !sealer.register_ack(ack, dev->sign_public_key))
                std::cerr << "rejected ack " << f << "\n";
        }
    }

    uint64_t last_time = 0;
    if (!a.feed_file.empty()) {
        std::vector<Bytes> batch;
        auto drain = [&] {
            sealer.ingest_ciphertext_batch(batch, 0);
            batch.clear();
            sealer.tick(sealer.stats().latest_time);
        };
        for_each_feed_record(a.feed_file, [&](Bytes&& ct) {
            batch.push_back(std::move(ct));
            if (batch.size() >= 4096) drain();
        });
        drain();
        last_time = sealer.stats().latest_time;
    } else if (!a.events_file.empty()) {
        // Trusted direct path: plaintext events straight into the sealer.
        size_t since_tick = 0;
        gen::read_event_file(a.events_file, [&](model::SensorReading&& r) {
            if (a.params_bytes > 0) r.params = gen::synth_params(r, a.params_bytes);
            last_time = r.time.epoch_seconds;
            sealer.ingest_reading(r, last_time);
            if (++since_tick == 4096) {
                sealer.tick(last_time);
                since_tick = 0;
            }
        });
    } else {
        throw std::runtime_error("need --feed or --events");
    }
    sealer.flush(last_time + 1);

    const auto& s = sealer.stats();
    std::cout << "accepted " << s.accepted << " readings, stored " << s.stored_active
              << " active, " << s.tombstones << " tombstones, dropped " << s.dropped_passive
              << " filtered, rejected " << s.rejected_decrypt + s.rejected_malformed
              << "; sealed " << s.chunks_sealed << " chunks -> " << a.store_dir << "\n";
    return 0;
}

int cmd_serve(const std::string& keydir, const std::string& store_dir, const std::string& listen) {
    keys::Registry registry = keys::load_registry(fs::path(keydir) / "registry.json");
    store::ChunkStore st(store_dir, false);
    ake::RetrievalServer server(st, registry.verifiers, registry.sp_id);
    auto [host, port] = split_addr(listen);
    (void)host;  // loopback service
    uint16_t bound = server.start(port);
    std::cout << "serving " << store_dir << " on 127.0.0.1:" << bound << "\n";
    std::cout << "press enter to stop\n";
    std::cin.get();
    server.stop();
    return 0;
}

ake::LogQuery time_query(uint64_t from, uint64_t to, const std::string& stream) {
    ake::LogQuery q;
    q.kind = ake::LogQuery::Kind::time_range;
    q.from = from;
    q.to = to;
    if (!stream.empty()) q.stream = stream;
    return q;
}

int cmd_fetch(const std::string& server, const std::string& keydir, std::string v_id,
              const std::string& role, const std::string& device_hex, uint64_t from, uint64_t to,
              const std::string& out) {
    auto [host, port] = split_addr(server);
    std::optional<crypto::SigningKeyPair> dkeys;
    if (role == "user") {
        if (device_hex.empty()) throw std::runtime_error("user role needs --device");
        model::DeviceId device{hex_decode(device_hex)};
        dkeys = keys::load_keypair(keydir, keys::device_key_name(device));
        if (v_id == "auditor-1") v_id = "user-" + device_hex;  // registry naming from setup
    }
    ake::FetchResult res = ake::fetch(host, port, v_id, dkeys, time_query(from, to, ""));
    if (!res.ok()) {
        std::cerr << "fetch failed: " << res.error << "\n";
        return 2;
    }
    write_file(out, res.payload);
    std::cout << "wrote " << res.payload.size() << " bytes -> " << out << "\n";
    return 0;
}

json result_json(const model::ChunkId& id, const verify::Result& r) {
    json j;
    j["chunk"] = id.stream_tag + "-" + std::to_string(id.index);
    j["result"] = r.pass() ? "pass" : "fail";
    if (!r.pass()) {
        j["kind"] = verify::fail_kind_name(r.failure->kind);
        j["index"] = r.failure->index;
        if (!r.failure->detail.empty()) j["detail"] = r.failure->detail;
    }
    return j;
}

int cmd_audit(const std::string& keydir, const std::string& store_dir, const std::string& server,
              uint64_t from, uint64_t to, const std::string& stream, bool serial) {
    Bytes enclave_pk = keys::load_public_key(keydir, "enclave");
    std::vector<store::RetrievedChunk> chunks;
    if (!server.empty()) {
        auto [host, port] = split_addr(server);
        ake::FetchResult res = ake::fetch(host, port, "auditor-1", std::nullopt,
                                          time_query(from, to, stream));
        if (!res.ok()) {
            std::cerr << "fetch failed: " << res.error << "\n";
            return 2;
        }
        chunks = ake::parse_auditor_payload(res.payload);
    } else {
        store::ChunkStore st(store_dir, false);
        chunks = st.get_time_range(stream.empty() ? std::nullopt
                                                  : std::optional<std::string>(stream),
                                   from, to);
    }

    auto outcome = verify::verify_range(
        chunks, enclave_pk,
        serial ? sealing::Parallelism::serial : sealing::Parallelism::parallel);

    json report;
    report["chunks"] = json::array();
    for (const auto& [id, res] : outcome.per_chunk) report["chunks"].push_back(result_json(id, res));
    if (outcome.range_failure)
        report["range"] = {{"result", "fail"},
                           {"kind", verify::fail_kind_name(outcome.range_failure->kind)},
                           {"index", outcome.range_failure->index}};
    else
        report["range"] = {{"result", "pass"}};
    report["verdict"] = outcome.pass() ? "pass" : "fail";
    std::cout << report.dump(2) << "\n";
    return outcome.pass() ? 0 : 2;
}

int cmd_verify_user(const std::string& keydir, const std::string& store_dir,
                    const std::string& server, const std::string& device_hex, uint64_t from,
                    uint64_t to, const std::string& claim) {
    Bytes enclave_pk = keys::load_public_key(keydir, "enclave");
    model::DeviceId device{hex_decode(device_hex)};

    std::vector<store::UserChunkView> views;
    if (!server.empty()) {
        auto [host, port] = split_addr(server);
        crypto::SigningKeyPair dkeys = keys::load_keypair(keydir, keys::device_key_name(device));
        ake::FetchResult res = ake::fetch(host, port, "user-" + hex_encode(device.bytes), dkeys,
                                          time_query(from, to, ""));
        if (!res.ok()) {
            std::cerr << "fetch failed: " << res.error << "\n";
            return 2;
        }
        views = ake::parse_user_payload(res.payload);
    } else {
        store::ChunkStore st(store_dir, false);
        std::optional<std::string> stream;
        auto meta = st.meta();
        if (meta && meta->mode == model::SealMode::per_user)
            stream = sealing::bucket_stream_tag(
                model::SealMode::per_user,
                sealing::bucket_index(device.bytes, meta->bucket_count));
        for (const auto& rc : st.get_time_range(stream, from, to))
            views.push_back(store::user_view_of(rc));
    }

    json report;
    report["chunks"] = json::array();
    bool all_integrity = true;
    std::vector<uint64_t> matched;
    for (const auto& v : views) {
        verify::UserReport r = verify::verify_user(v, enclave_pk, device);
        all_integrity = all_integrity && r.integrity.pass();
        json j = result_json(v.id, r.integrity);
        j["matches"] = json::array();
        for (const auto& t : r.matched) {
            j["matches"].push_back(t.epoch_seconds);
            matched.push_back(t.epoch_seconds);
        }
        report["chunks"].push_back(std::move(j));
    }
    report["integrity"] = all_integrity ? "pass" : "fail";
    report["matches"] = matched.size();
    bool ok = all_integrity;
    if (claim == "present") {
        report["claim"] = "present";
        ok = all_integrity && !matched.empty();
    } else if (claim == "absent") {
        report["claim"] = "absent";
        ok = all_integrity && matched.empty();
    }
    report["verdict"] = ok ? "pass" : "fail";
    std::cout << report.dump(2) << "\n";
    return ok ? 0 : 2;
}

int cmd_store_ls(const std::string& store_dir) {
    store::ChunkStore st(store_dir, false);
    for (const auto& e : st.scan_index()) {
        std::cout << e.id.stream_tag << "-" << e.id.index << "  t=[" << e.t_min << "," << e.t_max
                  << "]\n";
    }
    return 0;
}

int cmd_store_cat(const std::string& store_dir, const std::string& stream, uint64_t index) {
    store::ChunkStore st(store_dir, false);
    auto rc = st.get_chunk(model::ChunkId{stream, index});
    if (!rc) {
        std::cerr << "no such chunk\n";
        return 2;
    }
    const auto& c = rc->chunk;
    json j;
    j["stream"] = c.id.stream_tag;
    j["index"] = c.id.index;
    j["mode"] = int(c.mode);
    j["records"] = c.records.size();
    j["pad_count"] = c.pi.pad_count;
    j["g"] = hex_encode(c.pi.g);
    j["g_prev"] = rc->g_prev ? hex_encode(*rc->g_prev) : "missing";
    j["g_next"] = rc->g_next ? hex_encode(*rc->g_next) : "missing";
    json recs = json::array();
    for (const auto& r : c.records) {
        json e;
        e["kind"] = r.kind == model::RecordKind::full ? "full" : "tombstone";
        if (r.kind == model::RecordKind::full) e["device"] = hex_encode(r.device.bytes);
        e["sensor"] = hex_encode(r.sensor.bytes);
        e["time"] = r.time.epoch_seconds;
        recs.push_back(std::move(e));
    }
    j["record_list"] = std::move(recs);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_store_tamper(const std::string& store_dir, const std::string& stream, uint64_t index,
                     const std::string& kind_name, bool allow) {
    if (!allow) {
        std::cerr << "tamper is a test-harness operation; pass --i-am-the-adversary\n";
        return 2;
    }
    static const std::map<std::string, store::TamperKind> kinds = {
        {"modify-record", store::TamperKind::modify_record},
        {"insert-record", store::TamperKind::insert_record},
        {"delete-record", store::TamperKind::delete_record},
        {"truncate-record", store::TamperKind::truncate_record},
        {"edit-chain-digest", store::TamperKind::edit_chain_digest},
        {"edit-user-digest", store::TamperKind::edit_user_digest},
        {"edit-proof", store::TamperKind::edit_proof},
        {"truncate-file", store::TamperKind::truncate_file},
        {"delete-chunk", store::TamperKind::delete_chunk},
    };
    auto it = kinds.find(kind_name);
    if (it == kinds.end()) {
        std::cerr << "unknown tamper kind\n";
        return 2;
    }
    store::ChunkStore st(store_dir, false);
    crypto::SystemRandom rng;
    if (!store::tamper(st.chunk_path(model::ChunkId{stream, index}), it->second, rng)) {
        std::cerr << "edit not applicable to this chunk\n";
        return 2;
    }
    std::cout << "applied " << kind_name << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    crypto::init();
    CLI::App app{"tamper-evident sensor-data logging and attestation"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string keydir = env_or("NOTARY_KEYDIR", "keys");
    app.add_option("--keys", keydir, "key directory (or NOTARY_KEYDIR)")->capture_default_str();

    // setup
    auto* setup = app.add_subcommand("setup", "generate keys and the registry");
    size_t n_devices = 10;
    bool force = false;
    setup->add_option("--devices", n_devices, "number of user devices");
    setup->add_flag("--force", force, "overwrite an existing key directory");

    // gen
    auto* geng = app.add_subcommand("gen", "generate a synthetic event file");
    gen::GenConfig gc;
    std::string gen_out = "events.csv";
    geng->add_option("--out", gen_out);
    geng->add_option("--days", gc.days);
    geng->add_option("--sensors", gc.sensors);
    geng->add_option("--devices", gc.devices);
    geng->add_option("--events-per-day", gc.events_per_day);
    geng->add_option("--seed", gc.seed);
    geng->add_option("--start-time", gc.start_time);

    // feed
    auto* feed = app.add_subcommand("feed", "encrypt events under the trusted component key");
    std::string feed_in = "events.csv", feed_out = "feed.bin";
    uint32_t feed_params = 256;
    feed->add_option("--in", feed_in);
    feed->add_option("--out", feed_out);
    feed->add_option("--params-bytes", feed_params, "synthetic trap payload per event");

    // notify / ack
    auto* notify = app.add_subcommand("notify", "publish data-capture rules");
    std::string rule_file = "rules.txt", notify_model = "nom", notify_out = "notices";
    notify->add_option("--rule", rule_file)->required();
    notify->add_option("--model", notify_model)->check(CLI::IsMember({"nom", "nam"}));
    notify->add_option("--out-dir", notify_out);

    auto* ack = app.add_subcommand("ack", "acknowledge a rule from a device");
    std::string ack_device, ack_out = "ack.bin", ack_rules;
    uint64_t ack_rule_id = 0;
    ack->add_option("--rule", ack_rules)->required();
    ack->add_option("--rule-id", ack_rule_id)->required();
    ack->add_option("--device", ack_device)->required();
    ack->add_option("--out", ack_out);

    // seal
    auto* seal = app.add_subcommand("seal", "run the trusted sealing component over a feed");
    SealArgs sa;
    seal->add_option("--rule", sa.rule_file)->required();
    seal->add_option("--store", sa.store_dir)->required();
    seal->add_option("--feed", sa.feed_file, "encrypted feed file");
    seal->add_option("--events", sa.events_file, "plaintext event file (trusted direct path)");
    seal->add_option("--mode", sa.mode)->check(CLI::IsMember({"entire", "mixed", "per-sensor", "per-user"}));
    seal->add_option("--chunk-bytes", sa.chunk_bytes);
    seal->add_option("--chunk-age", sa.chunk_age);
    seal->add_option("--buckets", sa.buckets);
    seal->add_option("--params-bytes", sa.params_bytes, "attach synthetic params (direct path)");
    seal->add_option("--ack", sa.ack_files, "acknowledgment files (notice-and-ack model)");
    seal->add_flag("--nam", sa.nam, "ack-gated evaluation");

    // serve / fetch
    auto* serve = app.add_subcommand("serve", "run the retrieval service");
    std::string serve_store, listen = "127.0.0.1:7441";
    serve->add_option("--store", serve_store)->required();
    serve->add_option("--listen", listen);

    auto* fetch = app.add_subcommand("fetch", "retrieve logs over an authenticated session");
    std::string fetch_server, fetch_vid = "auditor-1", fetch_role = "auditor", fetch_device,
                fetch_out = "payload.bin";
    uint64_t q_from = 0, q_to = UINT64_MAX;
    fetch->add_option("--server", fetch_server)->required();
    fetch->add_option("--v-id", fetch_vid);
    fetch->add_option("--role", fetch_role)->check(CLI::IsMember({"auditor", "user"}));
    fetch->add_option("--device", fetch_device);
    fetch->add_option("--from", q_from);
    fetch->add_option("--to", q_to);
    fetch->add_option("--out", fetch_out);

    // audit / verify-user
    auto* audit = app.add_subcommand("audit", "auditor verification over a range");
    std::string audit_store, audit_server, audit_stream;
    uint64_t a_from = 0, a_to = UINT64_MAX;
    bool audit_serial = false;
    audit->add_option("--store", audit_store);
    audit->add_option("--server", audit_server);
    audit->add_option("--stream", audit_stream);
    audit->add_option("--from", a_from);
    audit->add_option("--to", a_to);
    audit->add_flag("--serial", audit_serial, "disable parallel chunk verification");

    auto* vuser = app.add_subcommand("verify-user", "user presence/absence verification");
    std::string vu_store, vu_server, vu_device, vu_claim;
    uint64_t u_from = 0, u_to = UINT64_MAX;
    vuser->add_option("--store", vu_store);
    vuser->add_option("--server", vu_server);
    vuser->add_option("--device", vu_device)->required();
    vuser->add_option("--from", u_from);
    vuser->add_option("--to", u_to);
    vuser->add_option("--claim", vu_claim)->check(CLI::IsMember({"present", "absent"}));

    // store
    auto* store_cmd = app.add_subcommand("store", "inspect or tamper with a chunk store");
    store_cmd->require_subcommand(1);
    std::string st_dir, st_stream = "main", st_kind = "modify-record";
    uint64_t st_index = 0;
    bool st_allow = false;
    auto* st_ls = store_cmd->add_subcommand("ls", "list chunks");
    st_ls->add_option("--store", st_dir)->required();
    auto* st_cat = store_cmd->add_subcommand("cat", "dump one chunk");
    st_cat->add_option("--store", st_dir)->required();
    st_cat->add_option("--stream", st_stream);
    st_cat->add_option("--index", st_index);
    auto* st_tamper = store_cmd->add_subcommand("tamper", "apply an adversarial edit");
    st_tamper->add_option("--store", st_dir)->required();
    st_tamper->add_option("--stream", st_stream);
    st_tamper->add_option("--index", st_index);
    st_tamper->add_option("--kind", st_kind);
    st_tamper->add_flag("--i-am-the-adversary", st_allow);

    // bench
    auto* bench = app.add_subcommand("bench", "measure sealing/verification against references");
    BenchOptions bo;
    bo.workdir = "bench-work";
    bench->add_option("--workdir", bo.workdir);
    bench->add_option("--chunk-bytes", bo.chunk_bytes);
    bench->add_option("--chunks", bo.chunks);
    bench->add_option("--params-bytes", bo.params_bytes);
    bench->add_option("--seed", bo.seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (setup->parsed()) return cmd_setup(keydir, n_devices, force);
        if (geng->parsed()) return cmd_gen(gen_out, gc);
        if (feed->parsed()) return cmd_feed(keydir, feed_in, feed_out, feed_params);
        if (notify->parsed()) return cmd_notify(keydir, rule_file, notify_model, notify_out);
        if (ack->parsed()) return cmd_ack(keydir, ack_rules, ack_device, ack_rule_id, ack_out);
        if (seal->parsed()) {
            sa.keydir = keydir;
            return cmd_seal(sa);
        }
        if (serve->parsed()) return cmd_serve(keydir, serve_store, listen);
        if (fetch->parsed())
            return cmd_fetch(fetch_server, keydir, fetch_vid, fetch_role, fetch_device, q_from,
                             q_to, fetch_out);
        if (audit->parsed())
            return cmd_audit(keydir, audit_store, audit_server, a_from, a_to, audit_stream,
                             audit_serial);
        if (vuser->parsed())
            return cmd_verify_user(keydir, vu_store, vu_server, vu_device, u_from, u_to, vu_claim);
        if (store_cmd->parsed()) {
            if (st_ls->parsed()) return cmd_store_ls(st_dir);
            if (st_cat->parsed()) return cmd_store_cat(st_dir, st_stream, st_index);
            if (st_tamper->parsed())
                return cmd_store_tamper(st_dir, st_stream, st_index, st_kind, st_allow);
        }
        if (bench->parsed()) return run_bench(bo);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
