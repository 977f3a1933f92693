// Copyright 2026-present the tactile360 authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "t360/common.hpp"
#include "t360/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace t360::simd {

#if (defined(__x86_64__) || defined(_M_X64)) && !defined(T360_HAVE_AVX2)
namespace avx2 {
const KernelTable* table() { return nullptr; }
}  // namespace avx2
#endif

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Level initial_level() {
    if (const char* env = std::getenv("T360_SIMD")) {
        if (std::strcmp(env, "generic") == 0) return Level::Generic;
        if (std::strcmp(env, "avx2") == 0 && level_available(Level::Avx2)) return Level::Avx2;
    }
    return detect_level();
}

std::atomic<Level>& current() {
    static std::atomic<Level> level{initial_level()};
    return level;
}

}  // namespace

bool level_available(Level level) {
    switch (level) {
    case Level::Generic:
        return true;
    case Level::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
        return avx2::table() != nullptr && cpu_has_avx2();
#else
        return false;
#endif
    }
    return false;
}

Level detect_level() { return level_available(Level::Avx2) ? Level::Avx2 : Level::Generic; }

Level active_level() { return current().load(); }

void set_level(Level level) {
    if (!level_available(level)) fail(ErrorCode::InvalidArgument, "SIMD level not available: " + level_name(level));
    current().store(level);
}

std::string level_name(Level level) { return level == Level::Avx2 ? "avx2" : "generic"; }

const KernelTable& kernels(Level level) {
#if defined(__x86_64__) || defined(_M_X64)
    if (level == Level::Avx2 && level_available(Level::Avx2)) return *avx2::table();
#endif
    (void)level;
    return generic::table;
}

const KernelTable& kernels() { return kernels(active_level()); }

}  // namespace t360::simd
