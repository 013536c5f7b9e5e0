#include "mosqopt/kernels.hpp"

#include <atomic>
#include <cstdlib>

#include "mosqopt/common.hpp"

namespace mosqopt::kernels {

#if defined(MOSQOPT_AVX2_BUILD)
const Ops* avx2_ops_impl();  // defined in kernels_avx2.cpp
#endif

const Ops* avx2_ops() {
#if defined(MOSQOPT_AVX2_BUILD)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return avx2_ops_impl();
#endif
    return nullptr;
}

namespace {

std::atomic<const Ops*> active{nullptr};

const Ops* resolve(const std::string& name) {
    if (name == "scalar") return &scalar_ops();
    if (name == "avx2") {
        const Ops* v = avx2_ops();
        if (!v) throw ConfigError("kernel backend 'avx2' not available on this build/CPU");
        return v;
    }
    if (name == "auto" || name.empty()) {
        if (const Ops* v = avx2_ops()) return v;
        return &scalar_ops();
    }
    throw ConfigError("unknown kernel backend '" + name + "' (expected scalar|avx2|auto)");
}

const Ops* initial_backend() {
    const char* env = std::getenv("MOSQOPT_KERNEL");
    return resolve(env ? std::string(env) : std::string("auto"));
}

}  // namespace

const Ops& ops() {
    const Ops* p = active.load(std::memory_order_acquire);
    if (!p) {
        p = initial_backend();
        active.store(p, std::memory_order_release);
    }
    return *p;
}

std::string select_backend(const std::string& name) {
    const Ops* p = resolve(name);
    active.store(p, std::memory_order_release);
    return p->name;
}

}  // namespace mosqopt::kernels
