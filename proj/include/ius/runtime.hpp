#pragma once
// Process-level tuning for executables.

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace ius {

// Training allocates and frees megabyte-sized buffers per sample. glibc
// serves those through mmap by default, which costs a syscall and fresh
// page faults every time; keeping them on the heap is ~30% faster.
inline void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

}  // namespace ius
