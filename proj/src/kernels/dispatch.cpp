#include "rgtn/kernels.hpp"

#include <atomic>

namespace rgtn::kernels {

#if !defined(RGTN_HAVE_AVX2)
const KernelTable* avx2_table() { return nullptr; }
#endif

bool cpu_has_avx2() {
#if defined(RGTN_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

struct Selection {
    std::atomic<const KernelTable*> table;
    std::atomic<Backend> backend;

    Selection() {
        if (cpu_has_avx2() && avx2_table() != nullptr) {
            table.store(avx2_table());
            backend.store(Backend::Avx2);
        } else {
            table.store(&scalar_table());
            backend.store(Backend::Scalar);
        }
    }
};

Selection& selection() {
    static Selection s;
    return s;
}

}  // namespace

const KernelTable& active() { return *selection().table.load(std::memory_order_relaxed); }

Backend active_backend() { return selection().backend.load(std::memory_order_relaxed); }

bool set_backend(Backend b) {
    Selection& s = selection();
    if (b == Backend::Scalar) {
        s.table.store(&scalar_table());
        s.backend.store(Backend::Scalar);
        return true;
    }
    if (!cpu_has_avx2() || avx2_table() == nullptr) return false;
    s.table.store(avx2_table());
    s.backend.store(Backend::Avx2);
    return true;
}

std::string_view backend_name(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

}  // namespace rgtn::kernels
