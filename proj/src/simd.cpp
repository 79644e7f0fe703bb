#include "lsv/simd.hpp"

#include <cstdlib>
#include <string_view>

#include "lsv/error.hpp"

namespace lsv::simd {

std::string to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

#ifndef LSV_HAVE_AVX2
const Kernels* avx2_kernels() { return nullptr; }
#endif

bool cpu_has_avx2() {
#if defined(LSV_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa active_isa() {
    static const Isa isa = [] {
        if (const char* env = std::getenv("LSV_SIMD")) {
            const std::string_view v(env);
            if (v == "scalar") return Isa::scalar;
            if (v != "avx2" && v != "auto" && !v.empty())
                throw InvalidArgument("LSV_SIMD must be scalar, avx2 or auto");
        }
        return avx2_kernels() && cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
    }();
    return isa;
}

const Kernels& kernels(Isa isa) {
    if (isa == Isa::avx2) {
        if (!avx2_kernels() || !cpu_has_avx2()) throw InvalidArgument("AVX2 kernels are not available on this CPU");
        return *avx2_kernels();
    }
    return scalar_kernels();
}

}  // namespace lsv::simd
