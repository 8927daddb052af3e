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

#include "notary/keys.hpp"

#include <sys/stat.h>

#include <fstream>

#include <json.hpp>

namespace notary::keys {

namespace fs = std::filesystem;
using nlohmann::json;

const Registry::Device* Registry::find_device(const model::DeviceId& id) const {
    for (const auto& d : devices)
        if (d.id == id) return &d;
    return nullptr;
}

void save_registry(const fs::path& path, const Registry& r) {
    json j;
    j["sp_id"] = r.sp_id;
    j["devices"] = json::array();
    for (const auto& d : r.devices) {
        j["devices"].push_back(
            {{"id", hex_encode(d.id.bytes)}, {"sign_pk", hex_encode(d.sign_public_key)}});
    }
    j["verifiers"] = json::array();
    for (const auto& v : r.verifiers.entries) {
        json e = {{"v_id", v.v_id},
                  {"role", v.role == ake::Role::auditor ? "auditor" : "user"},
                  {"sign_pk", hex_encode(v.sign_public_key)}};
        if (v.device) e["device"] = hex_encode(v.device->bytes);
        j["verifiers"].push_back(std::move(e));
    }
    std::ofstream out(path, std::ios::trunc);
    out << j.dump(2) << "\n";
    if (!out) throw FormatError("cannot write " + path.string());
}

Registry load_registry(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    json j = json::parse(in);
    Registry r;
    r.sp_id = j.value("sp_id", std::string(kDefaultSpId));
    for (const auto& d : j.at("devices")) {
        r.devices.push_back({model::DeviceId{hex_decode(d.at("id").get<std::string>())},
                             hex_decode(d.at("sign_pk").get<std::string>())});
    }
    for (const auto& v : j.at("verifiers")) {
        ake::VerifierEntry e;
        e.v_id = v.at("v_id").get<std::string>();
        e.role = v.at("role").get<std::string>() == "auditor" ? ake::Role::auditor
                                                              : ake::Role::user;
        e.sign_public_key = hex_decode(v.at("sign_pk").get<std::string>());
        if (v.contains("device"))
            e.device = model::DeviceId{hex_decode(v.at("device").get<std::string>())};
        r.verifiers.entries.push_back(std::move(e));
    }
    return r;
}

void save_keypair(const fs::path& dir, const std::string& name,
                  const crypto::SigningKeyPair& kp) {
    fs::create_directories(dir);
    {
        std::ofstream pk(dir / (name + ".pk"), std::ios::binary | std::ios::trunc);
        pk.write(reinterpret_cast<const char*>(kp.public_key.data()),
                 std::streamsize(kp.public_key.size()));
    }
    fs::path sk_path = dir / (name + ".sk");
    {
        std::ofstream sk(sk_path, std::ios::binary | std::ios::trunc);
        sk.write(reinterpret_cast<const char*>(kp.secret_key.data()),
                 std::streamsize(kp.secret_key.size()));
    }
    ::chmod(sk_path.c_str(), 0600);
}

static Bytes read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw FormatError("cannot open key file " + p.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

crypto::SigningKeyPair load_keypair(const fs::path& dir, const std::string& name) {
    crypto::SigningKeyPair kp;
    kp.public_key = read_all(dir / (name + ".pk"));
    kp.secret_key = read_all(dir / (name + ".sk"));
    if (kp.public_key.size() != crypto::kSignPublicBytes ||
        kp.secret_key.size() != crypto::kSignSecretBytes)
        throw FormatError("bad key file size for " + name);
    return kp;
}

Bytes load_public_key(const fs::path& dir, const std::string& name) {
    Bytes pk = read_all(dir / (name + ".pk"));
    if (pk.size() != crypto::kSignPublicBytes) throw FormatError("bad key file size for " + name);
    return pk;
}

std::string device_key_name(const model::DeviceId& id) {
    return "device-" + hex_encode(id.bytes);
}

SetupResult setup(const fs::path& dir, size_t n_devices, bool force) {
    fs::path registry_path = dir / "registry.json";
    if (fs::exists(registry_path) && !force)
        throw std::runtime_error("key directory already initialized; pass force to overwrite");
    fs::create_directories(dir);

    SetupResult result;
    Registry registry;

    auto gen_named = [&](const std::string& name) {
        crypto::SigningKeyPair kp = crypto::sign_keygen();
        // Self-test at creation: a key store that cannot sign is useless.
        Bytes probe = to_bytes("key-self-test:" + name);
        if (!crypto::verify_sig(kp.public_key, probe, crypto::sign(kp.secret_key, probe)))
            throw crypto::CryptoError("keypair self-test failed for " + name);
        save_keypair(dir, name, kp);
        ++result.keypairs;
        return kp;
    };

    gen_named("enclave");
    gen_named("notifier");
    crypto::SigningKeyPair auditor = gen_named("auditor");
    registry.verifiers.entries.push_back(
        {"auditor-1", ake::Role::auditor, std::nullopt, auditor.public_key});

    for (size_t i = 0; i < n_devices; ++i) {
        // Locally administered MAC-style ids: 02:00:xx:xx:xx:xx.
        Bytes id_bytes = crypto::random_bytes(6);
        id_bytes[0] = 0x02;
        id_bytes[1] = 0x00;
        model::DeviceId id{id_bytes};
        crypto::SigningKeyPair kp = gen_named(device_key_name(id));
        registry.devices.push_back({id, kp.public_key});
        registry.verifiers.entries.push_back(
            {"user-" + hex_encode(id.bytes), ake::Role::user, id, kp.public_key});
        result.devices.push_back(id);
    }

    save_registry(registry_path, registry);
    return result;
}

}  // namespace notary::keys
