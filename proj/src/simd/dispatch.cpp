#include <atomic>
#include <cstdlib>
#include <string_view>

#include "trackforge/simd/kernels.hpp"

namespace trackforge::simd {
namespace {

const KernelTable* select_from_environment() {
  const char* env = std::getenv("TRACKFORGE_SIMD");
  const std::string_view choice = env ? env : "auto";
  if (choice == "scalar") return &scalar_kernels();
  if (const KernelTable* v = avx2_kernels()) return v;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& active_table() {
  static std::atomic<const KernelTable*> table{select_from_environment()};
  return table;
}

}  // namespace

const KernelTable& kernels() {
  return *active_table().load(std::memory_order_acquire);
}

Isa active_isa() { return kernels().isa; }

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  return isa == Isa::kScalar || avx2_kernels() != nullptr;
}

bool force_isa(Isa isa) {
  const KernelTable* table =
      isa == Isa::kScalar ? &scalar_kernels() : avx2_kernels();
  if (!table) return false;
  active_table().store(table, std::memory_order_release);
  return true;
}

}  // namespace trackforge::simd
