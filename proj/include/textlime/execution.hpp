#pragma once

namespace textlime {

// Kernel selection. `serial` runs the plain single-threaded reference loops;
// `parallel` runs the OpenMP kernels, which reduce over fixed-size blocks in
// block order so results do not depend on the thread count.
enum class Execution { serial, parallel };

// Caps the OpenMP worker count; 0 leaves the runtime default.
void set_thread_limit(int threads);
int max_threads();

}  // namespace textlime
