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

#include "notary/ake.hpp"
#include "notary/crypto.hpp"
#include "notary/model.hpp"

namespace notary::keys {

constexpr const char* kDefaultSpId = "notary-sp";

// Public registry distributed at setup: device signing keys plus the
// registered verifiers and their roles.
struct Registry {
    std::string sp_id = kDefaultSpId;
    struct Device {
        model::DeviceId id;
        Bytes sign_public_key;
    };
    std::vector<Device> devices;
    ake::VerifierRegistry verifiers;

    const Device* find_device(const model::DeviceId& id) const;
};

void save_registry(const std::filesystem::path& path, const Registry& r);
Registry load_registry(const std::filesystem::path& path);

// One keypair per file pair (<name>.pk / <name>.sk); secret files are 0600.
void save_keypair(const std::filesystem::path& dir, const std::string& name,
                  const crypto::SigningKeyPair& kp);
crypto::SigningKeyPair load_keypair(const std::filesystem::path& dir, const std::string& name);
Bytes load_public_key(const std::filesystem::path& dir, const std::string& name);

std::string device_key_name(const model::DeviceId& id);

struct SetupResult {
    size_t keypairs = 0;
    std::vector<model::DeviceId> devices;
};

// Generates enclave, notifier, and auditor keys plus one keypair per
// device, and writes registry.json. Refuses to overwrite without force.
SetupResult setup(const std::filesystem::path& dir, size_t n_devices, bool force);

}  // namespace notary::keys
