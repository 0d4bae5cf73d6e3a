#include "spinal/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace spinal::simd {

#if defined(SPINAL_HAVE_AVX2)
const KernelTable& avx2_kernel_table();
#endif

const KernelTable* avx2_kernels() {
#if defined(SPINAL_HAVE_AVX2)
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") != 0;
  }();
  return supported ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* resolve(std::string_view name) {
  if (name == "scalar") return &scalar_kernels();
  if (name == "avx2") return avx2_kernels();
  if (name == "auto" || name.empty()) {
    const KernelTable* wide = avx2_kernels();
    return wide ? wide : &scalar_kernels();
  }
  return nullptr;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table = [] {
    const char* env = std::getenv("SPINAL_KERNELS");
    const KernelTable* chosen = resolve(env ? std::string_view(env) : std::string_view("auto"));
    return chosen ? chosen : resolve("auto");
  }();
  return table;
}

}  // namespace

const KernelTable& active_kernels() { return *current().load(std::memory_order_acquire); }

bool select_kernels(std::string_view name) {
  const KernelTable* table = resolve(name);
  if (!table) return false;
  current().store(table, std::memory_order_release);
  return true;
}

}  // namespace spinal::simd
