#include "dtsurv/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace dtsurv::kernels {

const Ops* avx2_ops_table();  // defined in kernels_avx2.cpp

const Ops* avx2_ops() {
#if defined(__x86_64__) || defined(__i386__)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return avx2_ops_table();
#endif
  return nullptr;
}

namespace {

const Ops& select() {
  const char* env = std::getenv("DTSURV_KERNELS");
  if (env != nullptr) {
    if (std::strcmp(env, "scalar") == 0) return scalar_ops();
    if (std::strcmp(env, "avx2") == 0 && avx2_ops() != nullptr) return *avx2_ops();
    // unknown or unavailable request: fall through to automatic choice
  }
  if (const Ops* simd = avx2_ops()) return *simd;
  return scalar_ops();
}

}  // namespace

const Ops& active() {
  static const Ops& ops = select();
  return ops;
}

}  // namespace dtsurv::kernels
