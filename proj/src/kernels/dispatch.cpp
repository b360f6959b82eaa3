#include "deautoconv/kernels.hpp"

#include <atomic>
#include <cstdlib>

namespace deautoconv::kernels {
namespace {

bool cpu_has_avx2_fma() {
#if defined(DEAUTOCONV_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* find(std::string_view name) {
  for (const KernelTable* t : available()) {
    if (t->name == name) return t;
  }
  return nullptr;
}

const KernelTable* initial_choice() {
  if (const char* env = std::getenv("DEAUTOCONV_KERNEL")) {
    if (const KernelTable* t = find(env)) return t;
  }
  return available().back();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_choice()};
  return table;
}

}  // namespace

std::vector<const KernelTable*> available() {
  std::vector<const KernelTable*> out{&scalar()};
#if defined(DEAUTOCONV_HAVE_AVX2)
  if (cpu_has_avx2_fma()) out.push_back(&detail::avx2());
#endif
#if defined(DEAUTOCONV_HAVE_NEON)
  out.push_back(&detail::neon());
#endif
  return out;
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool select(std::string_view name) {
  const KernelTable* t = find(name);
  if (t == nullptr) return false;
  current().store(t, std::memory_order_release);
  return true;
}

}  // namespace deautoconv::kernels
