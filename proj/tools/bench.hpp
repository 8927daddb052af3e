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

#include <cstdint>
#include <string>

struct BenchOptions {
    std::string workdir;
    uint64_t chunk_bytes = 5 * 1024 * 1024;
    uint32_t params_bytes = 256;
    uint32_t chunks = 60;     // workload size for the store measurements
    uint64_t seed = 7;
};

int run_bench(const BenchOptions& opts);
