#include <atomic>
#include <cstdlib>
#include <string_view>

#include "pdepth/kernels.hpp"

namespace pdepth::kernels {
namespace {

const KernelTable* choose_default() {
  const char* env = std::getenv("PDEPTH_KERNELS");
  const std::string_view want = env ? env : "auto";
  if (want == "scalar") return &scalar_table();
  const KernelTable* simd = avx2_table();
  return simd ? simd : &scalar_table();
}

std::atomic<const KernelTable*> g_override{nullptr};

}  // namespace

const KernelTable& active() {
  if (const KernelTable* forced = g_override.load(std::memory_order_acquire)) return *forced;
  static const KernelTable* chosen = choose_default();
  return *chosen;
}

void set_active(const KernelTable* table) { g_override.store(table, std::memory_order_release); }

}  // namespace pdepth::kernels
