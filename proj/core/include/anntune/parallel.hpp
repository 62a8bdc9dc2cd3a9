#pragma once

namespace anntune {

/// Caps the worker count used by every parallel loop in the library.
/// n <= 0 restores the runtime default.
void set_thread_count(int n);
int thread_count();

}  // namespace anntune
